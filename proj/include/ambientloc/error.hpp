#pragma once

#include <stdexcept>
#include <string>

namespace ambientloc {

/// Thrown by all toolkit operations on precondition or data errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
    if (!condition)
        throw Error(message);
}

[[noreturn]] inline void fail(const std::string& message) {
    throw Error(message);
}

}

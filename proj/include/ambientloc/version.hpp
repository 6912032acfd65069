#pragma once

namespace ambientloc {

inline constexpr const char* kVersion = "0.1.0";

}

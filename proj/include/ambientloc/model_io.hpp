#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "ambientloc/gp.hpp"
#include "ambientloc/io.hpp"
#include "ambientloc/svm.hpp"

namespace ambientloc {

// Trained-model artifacts. The JSON writer emits shortest round-trip
// representations for doubles, so a reloaded model reproduces predictions
// bit for bit. The GP artifact stores the training matrix and alphas but
// not the Cholesky factor; the factor is recomputed on load from the same
// gram matrix, which is deterministic.

inline nlohmann::json svm_model_to_json(const SvmModel& model) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["kind"] = "svm";
    j["environment"] = model.environment_id;
    j["params"] = {{"c", model.classifier.params.c},
                   {"kernel", to_string(model.classifier.params.kernel)},
                   {"gamma", model.classifier.params.gamma}};
    j["train_x"] = model.classifier.train_x;
    j["train_labels"] = model.classifier.train_labels;
    j["classes"] = model.classifier.classes;
    j["pairs"] = nlohmann::json::array();
    for (const auto& p : model.classifier.pairs)
        j["pairs"].push_back({{"pos", p.pos_label},
                              {"neg", p.neg_label},
                              {"support_indices", p.svm.support_indices},
                              {"coef", p.svm.coef},
                              {"bias", p.svm.bias}});
    j["class_locations"] = nlohmann::json::array();
    for (const auto& [label, loc] : model.class_locations)
        j["class_locations"].push_back(
            {{"grid_index", label}, {"x", loc.x}, {"y", loc.y}});
    return j;
}

inline SvmModel svm_model_from_json(const nlohmann::json& j, const std::string& context) {
    try {
        require(j.at("schema_version").get<int>() == 1,
                "unsupported svm model schema in " + context);
        require(j.at("kind").get<std::string>() == "svm",
                "expected an svm model artifact in " + context);
        SvmModel model;
        model.environment_id = j.at("environment").get<std::string>();
        model.classifier.params.c = j.at("params").at("c").get<double>();
        model.classifier.params.kernel =
            parse_svm_kernel(j.at("params").at("kernel").get<std::string>());
        model.classifier.params.gamma = j.at("params").at("gamma").get<double>();
        model.classifier.train_x =
            j.at("train_x").get<std::vector<std::vector<double>>>();
        model.classifier.train_labels = j.at("train_labels").get<std::vector<int>>();
        model.classifier.classes = j.at("classes").get<std::vector<int>>();
        for (const auto& jp : j.at("pairs")) {
            MulticlassSvm::Pair p;
            p.pos_label = jp.at("pos").get<int>();
            p.neg_label = jp.at("neg").get<int>();
            p.svm.support_indices =
                jp.at("support_indices").get<std::vector<std::size_t>>();
            p.svm.coef = jp.at("coef").get<std::vector<double>>();
            p.svm.bias = jp.at("bias").get<double>();
            model.classifier.pairs.push_back(std::move(p));
        }
        for (const auto& jl : j.at("class_locations")) {
            Location loc;
            loc.grid_index = jl.at("grid_index").get<int>();
            loc.x = jl.at("x").get<double>();
            loc.y = jl.at("y").get<double>();
            loc.environment_id = model.environment_id;
            model.class_locations[loc.grid_index] = loc;
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        fail("malformed svm model " + context + ": " + e.what());
    }
}

inline nlohmann::json gp_model_to_json(const GpModel& model) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["kind"] = "gp";
    j["environment"] = model.environment_id;
    j["params"] = {{"lengthscale", model.params.lengthscale},
                   {"signal", model.params.signal_variance},
                   {"noise", model.params.noise_variance}};
    j["prior"] = {{"x", model.prior_x}, {"y", model.prior_y}};
    j["train_x"] = nlohmann::json::array();
    for (Eigen::Index i = 0; i < model.train_x.rows(); ++i) {
        std::vector<double> row(static_cast<std::size_t>(model.train_x.cols()));
        for (Eigen::Index c = 0; c < model.train_x.cols(); ++c)
            row[static_cast<std::size_t>(c)] = model.train_x(i, c);
        j["train_x"].push_back(row);
    }
    std::vector<double> ax(model.alpha_x.data(), model.alpha_x.data() + model.alpha_x.size());
    std::vector<double> ay(model.alpha_y.data(), model.alpha_y.data() + model.alpha_y.size());
    j["alpha_x"] = ax;
    j["alpha_y"] = ay;
    return j;
}

inline GpModel gp_model_from_json(const nlohmann::json& j, const std::string& context) {
    try {
        require(j.at("schema_version").get<int>() == 1,
                "unsupported gp model schema in " + context);
        require(j.at("kind").get<std::string>() == "gp",
                "expected a gp model artifact in " + context);
        GpModel model;
        model.environment_id = j.at("environment").get<std::string>();
        model.params.lengthscale = j.at("params").at("lengthscale").get<double>();
        model.params.signal_variance = j.at("params").at("signal").get<double>();
        model.params.noise_variance = j.at("params").at("noise").get<double>();
        model.prior_x = j.at("prior").at("x").get<double>();
        model.prior_y = j.at("prior").at("y").get<double>();
        auto rows = j.at("train_x").get<std::vector<std::vector<double>>>();
        require(!rows.empty(), "gp model has no training rows in " + context);
        model.train_x.resize(static_cast<Eigen::Index>(rows.size()),
                             static_cast<Eigen::Index>(rows.front().size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            require(rows[i].size() == rows.front().size(),
                    "ragged gp training matrix in " + context);
            for (std::size_t c = 0; c < rows[i].size(); ++c)
                model.train_x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                    rows[i][c];
        }
        auto ax = j.at("alpha_x").get<std::vector<double>>();
        auto ay = j.at("alpha_y").get<std::vector<double>>();
        require(ax.size() == rows.size() && ay.size() == rows.size(),
                "gp alpha length mismatch in " + context);
        model.alpha_x = Eigen::Map<const Eigen::VectorXd>(ax.data(),
                                                          static_cast<Eigen::Index>(ax.size()));
        model.alpha_y = Eigen::Map<const Eigen::VectorXd>(ay.data(),
                                                          static_cast<Eigen::Index>(ay.size()));
        model.chol.compute(detail::se_gram(model.train_x, model.params));
        require(model.chol.info() == Eigen::Success,
                "gp model kernel matrix not positive definite in " + context);
        return model;
    } catch (const nlohmann::json::exception& e) {
        fail("malformed gp model " + context + ": " + e.what());
    }
}

inline void write_model_json(const std::string& path, const nlohmann::json& artifact) {
    write_text_file(path, artifact.dump(2) + "\n");
}

inline nlohmann::json read_model_json(const std::string& path) {
    return detail::parse_json(read_text_file(path), path);
}

}

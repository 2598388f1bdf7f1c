#include "uicast/model_io.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "uicast/errors.hpp"

namespace uicast {

using nlohmann::json;

namespace {

json forest_config_to_json(const ForestConfig& cfg) {
    return json{{"trees", cfg.trees},
                {"min_node_size", cfg.min_node_size},
                {"mtry", cfg.mtry},
                {"bootstrap", cfg.bootstrap},
                {"seed", cfg.seed}};
}

ForestConfig forest_config_from_json(const json& j) {
    ForestConfig cfg;
    cfg.trees = j.at("trees").get<int>();
    cfg.min_node_size = j.at("min_node_size").get<int>();
    cfg.mtry = j.at("mtry").get<int>();
    cfg.bootstrap = j.at("bootstrap").get<bool>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    return cfg;
}

json forest_to_json(const RandomForestModel& model) {
    json trees = json::array();
    for (const auto& tree : model.trees) {
        json nodes = json::array();
        for (const auto& n : tree.nodes)
            nodes.push_back(json::array({n.split_var, n.split_point, n.left, n.right, n.value}));
        trees.push_back(std::move(nodes));
    }
    return json{{"feature_count", model.feature_count},
                {"config", forest_config_to_json(model.config)},
                {"trees", std::move(trees)}};
}

RandomForestModel forest_from_json(const json& j) {
    RandomForestModel model;
    model.feature_count = j.at("feature_count").get<int>();
    model.config = forest_config_from_json(j.at("config"));
    for (const auto& tj : j.at("trees")) {
        RegressionTree tree;
        tree.feature_count = model.feature_count;
        for (const auto& nj : tj) {
            TreeNode n;
            n.split_var = nj.at(0).get<int>();
            n.split_point = nj.at(1).get<double>();
            n.left = nj.at(2).get<int>();
            n.right = nj.at(3).get<int>();
            n.value = nj.at(4).get<double>();
            tree.nodes.push_back(n);
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

json column_to_json(const PmmColumnModel& cm) {
    return json{{"column", cm.column},
                {"donors", cm.donors},
                {"forest", forest_to_json(cm.forest)},
                {"train_candidates", cm.train_candidates},
                {"donor_rows", cm.donor_rows},
                {"donor_values", cm.donor_values},
                {"donor_candidates", cm.donor_candidates}};
}

PmmColumnModel column_from_json(const json& j) {
    PmmColumnModel cm;
    cm.column = j.at("column").get<int>();
    cm.donors = j.at("donors").get<int>();
    cm.forest = forest_from_json(j.at("forest"));
    cm.train_candidates = j.at("train_candidates").get<std::vector<double>>();
    cm.donor_rows = j.at("donor_rows").get<std::vector<int>>();
    cm.donor_values = j.at("donor_values").get<std::vector<double>>();
    cm.donor_candidates = j.at("donor_candidates").get<std::vector<double>>();
    if (cm.donor_candidates.size() > 10000) {
        cm.sorted_order.resize(cm.donor_candidates.size());
        for (std::size_t i = 0; i < cm.sorted_order.size(); ++i) cm.sorted_order[i] = static_cast<int>(i);
        std::sort(cm.sorted_order.begin(), cm.sorted_order.end(), [&](int a, int b) {
            const double ca = cm.donor_candidates[static_cast<std::size_t>(a)];
            const double cb = cm.donor_candidates[static_cast<std::size_t>(b)];
            return ca != cb ? ca < cb : a < b;
        });
    }
    return cm;
}

}  // namespace

void save_fcs_model(const FcsModel& model, const std::string& path) {
    json j;
    j["format"] = "uicast-fcs-model";
    j["version"] = 1;
    j["uicast_version"] = kVersion;
    j["embedding"] = json{{"sites", model.embedding.sites},
                          {"lags", model.embedding.lags},
                          {"lead", model.embedding.lead},
                          {"target_site", model.embedding.target_site}};
    if (model.transform)
        j["transform"] = json{{"nu", model.transform->nu}, {"eps", model.transform->eps}};
    else
        j["transform"] = nullptr;
    j["config"] = json{{"iterations", model.config.iterations},
                       {"operational_iterations", model.config.operational_iterations},
                       {"impute_count", model.config.impute_count},
                       {"donors", model.config.donors},
                       {"column_order", model.config.column_order},
                       {"forest", forest_config_to_json(model.config.forest)},
                       {"column_mean_init", model.config.column_mean_init},
                       {"seed", model.config.seed}};
    j["column_means"] = model.column_means;
    json cols = json::array();
    for (const auto& cm : model.columns) cols.push_back(column_to_json(cm));
    j["columns"] = std::move(cols);

    std::ofstream out(path);
    if (!out) throw DataError("cannot open model file for writing: " + path);
    out << j.dump();
    if (!out) throw DataError("model write failed: " + path);
}

FcsModel load_fcs_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("model file " + path + " is not valid JSON: " + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "uicast-fcs-model")
            throw DataError("model file " + path + ": unrecognized format");
        if (j.at("version").get<int>() != 1)
            throw DataError("model file " + path + ": unsupported version");

        FcsModel model;
        const auto& ej = j.at("embedding");
        model.embedding.sites = ej.at("sites").get<int>();
        model.embedding.lags = ej.at("lags").get<int>();
        model.embedding.lead = ej.at("lead").get<int>();
        model.embedding.target_site = ej.at("target_site").get<int>();
        if (!j.at("transform").is_null()) {
            TransformSpec t;
            t.nu = j.at("transform").at("nu").get<double>();
            t.eps = j.at("transform").at("eps").get<double>();
            model.transform = t;
        }
        const auto& cj = j.at("config");
        model.config.iterations = cj.at("iterations").get<int>();
        model.config.operational_iterations = cj.at("operational_iterations").get<int>();
        model.config.impute_count = cj.at("impute_count").get<int>();
        model.config.donors = cj.at("donors").get<int>();
        model.config.column_order = cj.at("column_order").get<std::vector<int>>();
        model.config.forest = forest_config_from_json(cj.at("forest"));
        model.config.column_mean_init = cj.at("column_mean_init").get<bool>();
        model.config.seed = cj.at("seed").get<std::uint64_t>();
        model.column_means = j.at("column_means").get<std::vector<double>>();
        for (const auto& colj : j.at("columns")) model.columns.push_back(column_from_json(colj));
        return model;
    } catch (const json::exception& e) {
        throw DataError("model file " + path + " is malformed: " + e.what());
    }
}

}  // namespace uicast

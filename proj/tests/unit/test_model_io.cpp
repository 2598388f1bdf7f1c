#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "uicast/errors.hpp"
#include "uicast/fcs.hpp"
#include "uicast/model_io.hpp"

using namespace uicast;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

FcsModel fitted_model() {
    Eigen::MatrixXd z(10, 3);
    Rng rng(5);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 3; ++j) z(i, j) = rng.normal();
    ObservationMatrix data;
    data.z = z;
    data.m = MaskMatrix::Zero(10, 3);
    data.m(4, 1) = 1;
    data.z(4, 1) = std::numeric_limits<double>::quiet_NaN();
    for (int r = 0; r < 10; ++r) {
        data.issue_times.push_back(r);
        data.target_times.push_back(r + 1);
    }
    for (int c = 0; c < 3; ++c) data.column_roles.push_back({0, 0, c == 2});

    FcsConfig cfg;
    cfg.iterations = 2;
    cfg.operational_iterations = 3;
    cfg.impute_count = 7;
    cfg.donors = 2;
    cfg.forest.trees = 3;
    cfg.forest.min_node_size = 2;
    cfg.seed = 99;

    FcsModel model = fit_fcs(data, cfg);
    model.embedding = EmbeddingSpec{1, 2, 1, 0};
    model.transform = TransformSpec{1.5, 1e-3};
    return model;
}

}  // namespace

TEST_CASE("model save/load round trip preserves behavior bit-exactly") {
    const FcsModel model = fitted_model();
    const std::string path = temp_path("uicast_model.json");
    save_fcs_model(model, path);
    const FcsModel back = load_fcs_model(path);

    CHECK(back.embedding.sites == model.embedding.sites);
    CHECK(back.embedding.lags == model.embedding.lags);
    CHECK(back.embedding.lead == model.embedding.lead);
    REQUIRE(back.transform.has_value());
    CHECK(back.transform->nu == model.transform->nu);
    CHECK(back.config.impute_count == model.config.impute_count);
    CHECK(back.config.seed == model.config.seed);
    CHECK(back.column_means == model.column_means);
    REQUIRE(back.columns.size() == model.columns.size());

    for (std::size_t j = 0; j < model.columns.size(); ++j) {
        CHECK(back.columns[j].train_candidates == model.columns[j].train_candidates);
        CHECK(back.columns[j].donor_values == model.columns[j].donor_values);
        CHECK(back.columns[j].donor_rows == model.columns[j].donor_rows);
    }

    // Identical imputation chains after reload.
    Eigen::VectorXd row(3);
    row << 0.3, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN();
    const MaskVector mask{0, 1, 1};
    const auto a = impute_row(model, row, mask, 3, 5, 42);
    const auto b = impute_row(back, row, mask, 3, 5, 42);
    for (std::size_t l = 0; l < a.size(); ++l) CHECK((a[l] - b[l]).cwiseAbs().maxCoeff() == 0.0);

    std::remove(path.c_str());
}

TEST_CASE("loader rejects missing, invalid, and mismatched files") {
    CHECK_THROWS_AS(load_fcs_model("/nonexistent/model.json"), DataError);

    const std::string path = temp_path("uicast_model_bad.json");
    {
        std::ofstream out(path);
        out << "{ not json";
    }
    CHECK_THROWS_AS(load_fcs_model(path), DataError);
    {
        std::ofstream out(path);
        out << R"({"format":"other","version":1})";
    }
    CHECK_THROWS_AS(load_fcs_model(path), DataError);
    {
        std::ofstream out(path);
        out << R"({"format":"uicast-fcs-model","version":99})";
    }
    CHECK_THROWS_AS(load_fcs_model(path), DataError);
    std::remove(path.c_str());
}

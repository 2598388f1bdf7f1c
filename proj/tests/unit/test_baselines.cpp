#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "uicast/baselines.hpp"
#include "uicast/errors.hpp"
#include "uicast/metrics.hpp"
#include "uicast/simulate.hpp"

using namespace uicast;

namespace {

ObservationMatrix make_matrix(const Eigen::MatrixXd& z, const std::vector<std::pair<int, int>>& missing_cells) {
    ObservationMatrix m;
    m.z = z;
    m.m = MaskMatrix::Zero(z.rows(), z.cols());
    for (auto [r, c] : missing_cells) {
        m.m(r, c) = 1;
        m.z(r, c) = std::numeric_limits<double>::quiet_NaN();
    }
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
        m.issue_times.push_back(r);
        m.target_times.push_back(r + 1);
    }
    for (int c = 0; c < z.cols(); ++c) m.column_roles.push_back({0, 0, c == z.cols() - 1});
    return m;
}

Eigen::MatrixXd random_values(Rng& rng, int n, int cols) {
    Eigen::MatrixXd z(n, cols);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < cols; ++j) z(i, j) = rng.normal();
    return z;
}

FcsConfig small_fcs(std::uint64_t seed) {
    FcsConfig cfg;
    cfg.iterations = 3;
    cfg.operational_iterations = 3;
    cfg.donors = 2;
    cfg.forest.trees = 4;
    cfg.forest.min_node_size = 2;
    cfg.seed = seed;
    cfg.forest.seed = seed + 1;
    return cfg;
}

}  // namespace

TEST_CASE("persistence returns the newest observed value") {
    bool fb = false;
    CHECK(persistence_forecast({{0.1, 0.4, 0.7}, {0, 0, 0}}, 0.5, &fb) == 0.7);
    CHECK_FALSE(fb);
    CHECK(persistence_forecast({{0.3, 0.0}, {0, 1}}, 0.5, &fb) == 0.3);
    CHECK_FALSE(fb);
    CHECK(persistence_forecast({{0.0, 0.0}, {1, 1}}, 0.5, &fb) == 0.5);
    CHECK(fb);
}

TEST_CASE("climatology: empirical history distribution") {
    const auto d = climatology_distribution({0.2, 0.4});
    CHECK(d.quantile(0.5) == doctest::Approx(0.3));
    const auto single = climatology_distribution({0.7});
    CHECK(single.quantile(0.5) == 0.7);
    CHECK(single.mean() == 0.7);
    CHECK_THROWS_AS(climatology_distribution({}), DataError);
}

TEST_CASE("climatology barely moves when a fifth of the history is missing") {
    Rng rng(3);
    std::vector<double> full;
    for (int i = 0; i < 6000; ++i) full.push_back(glogit_inverse(rng.normal(0.0, 1.0), TransformSpec{}));
    std::vector<double> reduced;
    for (double v : full)
        if (rng.uniform() >= 0.2) reduced.push_back(v);

    std::vector<double> obs;
    for (int i = 0; i < 800; ++i) obs.push_back(glogit_inverse(rng.normal(0.0, 1.0), TransformSpec{}));

    const auto full_dist = climatology_distribution(full, 0);
    const auto red_dist = climatology_distribution(reduced, 0);
    double full_crps = 0.0, red_crps = 0.0;
    for (double y : obs) {
        full_crps += crps_empirical(full_dist.samples, y);
        red_crps += crps_empirical(red_dist.samples, y);
    }
    full_crps /= static_cast<double>(obs.size());
    red_crps /= static_cast<double>(obs.size());
    // Percentage points of normalized capacity.
    CHECK(std::abs(full_crps - red_crps) * 100.0 < 0.5);
}

TEST_CASE("mean imputation fills column observed means and is idempotent") {
    Eigen::MatrixXd z(3, 2);
    z << 1.0, 5.0,
         0.0, 6.0,
         3.0, 7.0;
    auto data = make_matrix(z, {{1, 0}});
    const auto filled = mean_impute(data);
    CHECK(filled(1, 0) == doctest::Approx(2.0));
    CHECK(filled(0, 0) == 1.0);

    // No missing: identity.
    const auto clean = make_matrix(z, {});
    CHECK((mean_impute(clean) - z).cwiseAbs().maxCoeff() == 0.0);

    // All but one missing: every gap takes the lone observed value.
    auto sparse = make_matrix(z, {{0, 1}, {2, 1}});
    const auto sf = mean_impute(sparse);
    CHECK(sf(0, 1) == 6.0);
    CHECK(sf(2, 1) == 6.0);

    // Idempotence: imputing a completed matrix changes nothing.
    ObservationMatrix completed = data;
    completed.z = filled;
    completed.m.setZero();
    CHECK((mean_impute(completed) - filled).cwiseAbs().maxCoeff() == 0.0);

    auto dead = make_matrix(z, {{0, 1}, {1, 1}, {2, 1}});
    CHECK_THROWS_AS(mean_impute(dead), DataError);
}

TEST_CASE("regression imputation: identity on complete data, deterministic otherwise") {
    Rng rng(7);
    const Eigen::MatrixXd z = random_values(rng, 20, 3);
    const auto complete = make_matrix(z, {});
    const auto same = regression_impute(complete, small_fcs(11));
    CHECK((same - z).cwiseAbs().maxCoeff() == 0.0);

    const auto holed = make_matrix(z, {{3, 1}, {8, 0}, {15, 2}});
    const auto a = regression_impute(holed, small_fcs(11));
    const auto b = regression_impute(holed, small_fcs(11));
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    for (Eigen::Index r = 0; r < holed.rows(); ++r)
        for (Eigen::Index c = 0; c < holed.cols(); ++c)
            if (holed.m(r, c) == 0) CHECK(a(r, c) == z(r, c));
}

TEST_CASE("regression imputation of a toy matrix equals the single-tree conditional mean") {
    Eigen::MatrixXd z(8, 2);
    z << 1.0, 10.0,
         2.0, 12.0,
         3.0, 14.0,
         4.0, 16.0,
         5.0, 24.0,
         6.0, 26.0,
         7.0, 28.0,
         8.0, 30.0;
    const auto holed = make_matrix(z, {{4, 1}});
    FcsConfig cfg = small_fcs(3);
    cfg.iterations = 1;
    cfg.donors = 1;
    cfg.forest.trees = 1;
    cfg.forest.bootstrap = false;
    cfg.forest.mtry = 1;
    cfg.forest.min_node_size = 2;
    const auto completed = regression_impute(holed, cfg);

    // Oracle: tree of column 1 on column 0 over observed rows, predict row 4.
    Eigen::MatrixXd X(7, 1);
    Eigen::VectorXd y(7);
    int w = 0;
    for (int r = 0; r < 8; ++r) {
        if (r == 4) continue;
        X(w, 0) = z(r, 0);
        y(w) = z(r, 1);
        ++w;
    }
    const auto tree = oracle::fit_tree(X, y, 2);
    Eigen::VectorXd q(1);
    q << z(4, 0);
    CHECK(completed(4, 1) == doctest::Approx(oracle::predict(*tree, q)).epsilon(1e-12));
}

TEST_CASE("with no missing data all ITP variants coincide under one seed") {
    Rng rng(23);
    const Eigen::MatrixXd z = random_values(rng, 40, 4);
    const auto data = make_matrix(z, {});
    const auto cfg = small_fcs(77);

    const auto m = ItpForecaster::fit(data, ItpKind::MeanImpute, cfg);
    const auto r = ItpForecaster::fit(data, ItpKind::RegressionImpute, cfg);
    const auto c = ItpForecaster::fit(data, ItpKind::CompleteData, cfg);

    MaskVector none(3, 0);
    for (int trial = 0; trial < 30; ++trial) {
        Eigen::VectorXd x(3);
        x << rng.normal(), rng.normal(), rng.normal();
        const double pm = m.predict(x, none);
        CHECK(pm == r.predict(x, none));
        CHECK(pm == c.predict(x, none));
    }
}

TEST_CASE("ITP operational imputation kicks in for missing features") {
    Rng rng(29);
    const Eigen::MatrixXd z = random_values(rng, 50, 3);
    const auto data = make_matrix(z, {{2, 0}, {7, 1}});
    const auto cfg = small_fcs(31);

    const auto m = ItpForecaster::fit(data, ItpKind::MeanImpute, cfg);
    const auto r = ItpForecaster::fit(data, ItpKind::RegressionImpute, cfg);

    Eigen::VectorXd x(2);
    x << 0.5, std::numeric_limits<double>::quiet_NaN();
    const MaskVector mask{0, 1};
    CHECK(std::isfinite(m.predict(x, mask)));
    CHECK(std::isfinite(r.predict(x, mask)));

    const auto c = ItpForecaster::fit(make_matrix(z, {}), ItpKind::CompleteData, cfg);
    CHECK_THROWS_AS(c.predict(x, mask), DataError);
    CHECK_THROWS_AS(ItpForecaster::fit(data, ItpKind::CompleteData, cfg), DataError);
}

TEST_CASE("retraining on the all-observed pattern matches the complete-data forest") {
    Rng rng(41);
    const Eigen::MatrixXd z = random_values(rng, 60, 4);
    const auto data = make_matrix(z, {});
    const auto cfg = small_fcs(59);

    PatternKey all;
    all.observed = {1, 1, 1};
    const auto pat = PatternForecasters::fit(data, {all}, cfg.forest, 1);
    const auto rc = ItpForecaster::fit(data, ItpKind::CompleteData, cfg);

    MaskVector none(3, 0);
    for (int trial = 0; trial < 25; ++trial) {
        Eigen::VectorXd x(3);
        x << rng.normal(), rng.normal(), rng.normal();
        CHECK(pat.predict(x, none) == rc.predict(x, none));
    }
}

TEST_CASE("unseen missingness pattern is an explicit error naming the pattern") {
    Rng rng(43);
    const Eigen::MatrixXd z = random_values(rng, 30, 3);
    const auto data = make_matrix(z, {});
    PatternKey partial;
    partial.observed = {1, 0};
    const auto pat = PatternForecasters::fit(data, {partial}, small_fcs(61).forest, 1);

    Eigen::VectorXd x(2);
    x << 0.1, 0.2;
    CHECK_THROWS_WITH_AS(static_cast<void>(pat.predict(x, MaskVector{0, 0})),
                         doctest::Contains("11"), ConfigError);
    CHECK(std::isfinite(pat.predict(x, MaskVector{0, 1})));
}

TEST_CASE("pattern models are isolated from each other") {
    Rng rng(47);
    const Eigen::MatrixXd z = random_values(rng, 50, 3);
    const auto data = make_matrix(z, {});
    const auto cfg = small_fcs(67);

    PatternKey a, b;
    a.observed = {1, 0};
    b.observed = {0, 1};
    const auto both = PatternForecasters::fit(data, {a, b}, cfg.forest, 1);
    const auto only_a = PatternForecasters::fit(data, {a}, cfg.forest, 1);

    Eigen::VectorXd x(2);
    for (int trial = 0; trial < 20; ++trial) {
        x << rng.normal(), rng.normal();
        CHECK(both.predict(x, MaskVector{0, 1}) == only_a.predict(x, MaskVector{0, 1}));
    }
}

TEST_CASE("pattern with no observed features or too few rows is rejected") {
    Rng rng(53);
    const Eigen::MatrixXd z = random_values(rng, 10, 3);
    const auto data = make_matrix(z, {});
    PatternKey blind;
    blind.observed = {0, 0};
    CHECK_THROWS_AS(PatternForecasters::fit(data, {blind}, small_fcs(71).forest, 1), ConfigError);
    PatternKey all;
    all.observed = {1, 1};
    CHECK_THROWS_AS(PatternForecasters::fit(data, {all}, small_fcs(71).forest, 50), ConfigError);
}

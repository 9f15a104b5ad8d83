#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include <causaldii/rng.hpp>
#include <causaldii/var.hpp>

using namespace causaldii;

namespace {

TimeSeriesPanel make_panel(std::vector<std::string> names, Eigen::MatrixXd values) {
    TimeSeriesPanel p;
    p.names = std::move(names);
    p.values = std::move(values);
    return p;
}

// Bivariate VAR(1) sample with unit normal innovations.
TimeSeriesPanel var1_panel(const Eigen::Matrix2d& a, Eigen::Index t_len,
                           std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd v(t_len, 2);
    Eigen::Vector2d x = Eigen::Vector2d::Zero();
    for (Eigen::Index t = 0; t < t_len + 200; ++t) {
        Eigen::Vector2d e(rng.normal(), rng.normal());
        x = a * x + e;
        if (t >= 200) v.row(t - 200) = x.transpose();
    }
    return make_panel({"x1", "x2"}, std::move(v));
}

// F statistic recomputed from scratch with dense normal equations.
double granger_oracle(const TimeSeriesPanel& panel, Eigen::Index target_col,
                      Eigen::Index cand_col, int p) {
    const Eigen::Index t_len = panel.rows(), m = panel.cols();
    const Eigen::Index n = t_len - p;
    Eigen::VectorXd y = panel.values.col(target_col).tail(n);
    auto rss_of = [&](bool drop_candidate) {
        const Eigen::Index kept = drop_candidate ? m - 1 : m;
        Eigen::MatrixXd x(n, 1 + kept * p);
        for (Eigen::Index t = p; t < t_len; ++t) {
            x(t - p, 0) = 1.0;
            Eigen::Index c = 1;
            for (int lag = 1; lag <= p; ++lag)
                for (Eigen::Index v = 0; v < m; ++v) {
                    if (drop_candidate && v == cand_col) continue;
                    x(t - p, c++) = panel.values(t - lag, v);
                }
        }
        Eigen::VectorXd beta =
            (x.transpose() * x).ldlt().solve(x.transpose() * y);
        return (y - x * beta).squaredNorm();
    };
    const double rss_u = rss_of(false);
    const double rss_r = rss_of(true);
    const double q = p;
    const double dof = static_cast<double>(n - (1 + m * p));
    return ((rss_r - rss_u) / q) / (rss_u / dof);
}

} // namespace

TEST_CASE("noiseless VAR(1) coefficients are recovered exactly") {
    Eigen::Matrix2d a;
    a << 0.6, 0.5, -0.5, 0.6; // complex pair, modulus ~0.78: a decaying spiral
    Eigen::Vector2d c(0.1, -0.2);
    Eigen::MatrixXd v(15, 2);
    Eigen::Vector2d x(1.0, 0.5);
    v.row(0) = x.transpose();
    for (Eigen::Index t = 1; t < 15; ++t) {
        x = c + a * x;
        v.row(t) = x.transpose();
    }
    VarModel model = fit_var(make_panel({"x1", "x2"}, v), 1);
    REQUIRE((model.coefficients[0] - a).cwiseAbs().maxCoeff() < 1e-8);
    REQUIRE((model.intercept - c).cwiseAbs().maxCoeff() < 1e-8);
    REQUIRE(model.residuals.cwiseAbs().maxCoeff() < 1e-8);

    // The same deterministic data leaves the restricted regression nothing to
    // lose and the unrestricted residual exactly zero.
    REQUIRE_THROWS_AS(granger_f(make_panel({"x1", "x2"}, v), "x1", "x2", 1),
                      DegenerateRssError);
}

TEST_CASE("AR(1) coefficient estimate concentrates around the truth") {
    double mean = 0;
    const int seeds = 50;
    for (std::uint64_t s = 0; s < seeds; ++s) {
        Rng rng(100 + s);
        Eigen::MatrixXd v(300, 1);
        double x = 0;
        for (Eigen::Index t = 0; t < 500; ++t) {
            x = 0.5 * x + rng.normal();
            if (t >= 200) v(t - 200, 0) = x;
        }
        VarModel m = fit_var(make_panel({"x"}, v), 1);
        mean += m.coefficients[0](0, 0);
    }
    mean /= seeds;
    REQUIRE(mean > 0.45);
    REQUIRE(mean < 0.55);
}

TEST_CASE("residual covariance of a known-noise VAR is close to identity") {
    Eigen::Matrix2d a;
    a << 0.5, 0.2, 0.0, 0.4;
    TimeSeriesPanel p = var1_panel(a, 4000, 7);
    VarModel m = fit_var(p, 1);
    REQUIRE((m.residual_covariance - Eigen::Matrix2d::Identity())
                .cwiseAbs()
                .maxCoeff() < 0.1);
}

TEST_CASE("causal weights take the per-lag maximum and zero the target") {
    VarModel m;
    m.order = 2;
    m.names = {"a", "b", "c"};
    Eigen::Matrix3d a1, a2;
    a1 << 0.5, 0.1, -0.3, 0.0, 0.4, 0.2, 0.1, 0.0, 0.6;
    a2 << 0.0, -0.4, 0.1, 0.2, 0.0, 0.0, 0.0, 0.1, 0.0;
    m.coefficients = {a1, a2};
    Eigen::VectorXd w = causal_weights(m, 0);
    REQUIRE(w(0) == 0.0);
    REQUIRE(w(1) == 0.4); // |a2(0,1)| beats |a1(0,1)|
    REQUIRE(w(2) == 0.3); // |a1(0,2)| beats |a2(0,2)|
    REQUIRE_THROWS_AS(causal_weights(m, 5), UnknownVariableError);
}

TEST_CASE("granger F agrees with a normal-equations oracle") {
    Eigen::Matrix2d a;
    a << 0.5, 0.3, 0.0, 0.4;
    for (std::uint64_t s = 0; s < 20; ++s) {
        TimeSeriesPanel p = var1_panel(a, 150, 300 + s);
        const int order = (s % 2 == 0) ? 1 : 2;
        GrangerResult g = granger_f(p, "x1", "x2", order);
        const double oracle = granger_oracle(p, 0, 1, order);
        REQUIRE(g.f_statistic ==
                Catch::Approx(oracle).epsilon(1e-8).margin(1e-10));
        REQUIRE(g.rss_restricted >= g.rss_unrestricted); // nested models
    }
}

TEST_CASE("granger F is invariant under rescaling the panel") {
    Eigen::Matrix2d a;
    a << 0.5, 0.3, 0.0, 0.4;
    TimeSeriesPanel p = var1_panel(a, 200, 11);
    GrangerResult g1 = granger_f(p, "x1", "x2", 1);
    TimeSeriesPanel scaled = p;
    scaled.values *= 1000.0;
    GrangerResult g2 = granger_f(scaled, "x1", "x2", 1);
    REQUIRE(g1.f_statistic == Catch::Approx(g2.f_statistic).epsilon(1e-9));
    REQUIRE(g1.p_value == Catch::Approx(g2.p_value).epsilon(1e-9));
}

TEST_CASE("granger detects a strong linear driver and not the reverse") {
    Eigen::Matrix2d a;
    a << 0.5, 0.6, 0.0, 0.4; // x2 drives x1, x1 never feeds back
    int forward_hits = 0, reverse_hits = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        TimeSeriesPanel p = var1_panel(a, 300, 500 + s);
        if (granger_f(p, "x1", "x2", 1).p_value < 0.01) ++forward_hits;
        if (granger_f(p, "x2", "x1", 1).p_value < 0.05) ++reverse_hits;
    }
    REQUIRE(forward_hits == 20);
    REQUIRE(reverse_hits <= 3);
}

TEST_CASE("granger p-values are roughly uniform under independence") {
    int rejections = 0;
    for (std::uint64_t s = 0; s < 200; ++s) {
        Rng rng(900 + s);
        Eigen::MatrixXd v(120, 2);
        for (Eigen::Index t = 0; t < 120; ++t) {
            v(t, 0) = rng.normal();
            v(t, 1) = rng.normal();
        }
        if (granger_f(make_panel({"x1", "x2"}, v), "x1", "x2", 1).p_value < 0.05)
            ++rejections;
    }
    // Binomial(200, 0.05): mean 10, sd ~3.1. Allow a generous 3-sigma band.
    REQUIRE(rejections >= 1);
    REQUIRE(rejections <= 20);
}

TEST_CASE("F survival function matches closed forms") {
    // d1 = 2: the survival function is (1 + 2 f / d2)^(-d2/2).
    for (double d2 : {4.0, 10.0, 50.0, 200.0})
        for (double f : {0.1, 1.0, 2.5, 7.0}) {
            const double closed = std::pow(1.0 + 2.0 * f / d2, -d2 / 2.0);
            REQUIRE(f_survival(f, 2.0, d2) ==
                    Catch::Approx(closed).epsilon(1e-12));
        }
    // Equal degrees of freedom at f = 1 split the distribution in half.
    for (double d : {1.0, 3.0, 8.0, 40.0})
        REQUIRE(f_survival(1.0, d, d) == Catch::Approx(0.5).epsilon(1e-12));
    REQUIRE(f_survival(0.0, 3.0, 10.0) == 1.0);
    REQUIRE(f_survival(1e6, 3.0, 10.0) < 1e-10);

    // Monotone decreasing in the statistic.
    double prev = 1.0;
    for (double f = 0.25; f < 20.0; f += 0.25) {
        const double s = f_survival(f, 4.0, 30.0);
        REQUIRE(s < prev);
        prev = s;
    }
}

TEST_CASE("lag selection identifies low and high true orders") {
    Eigen::Matrix2d a;
    a << 0.5, 0.3, 0.1, 0.4;
    int lag1_hits = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        TimeSeriesPanel p = var1_panel(a, 400, 700 + s);
        LagSelection sel = select_lag(p, 6);
        REQUIRE(sel.per_lag.size() == 6);
        if (sel.chosen == 1) ++lag1_hits;
    }
    REQUIRE(lag1_hits >= 7); // AIC occasionally overselects

    int lag3_hits = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        Rng rng(800 + s);
        Eigen::MatrixXd v(400, 1);
        double x1 = 0, x2 = 0, x3 = 0;
        for (Eigen::Index t = 0; t < 700; ++t) {
            const double x = 0.1 * x1 + 0.6 * x3 + rng.normal();
            x3 = x2;
            x2 = x1;
            x1 = x;
            if (t >= 300) v(t - 300, 0) = x;
        }
        LagSelection sel = select_lag(make_panel({"x"}, std::move(v)), 6);
        REQUIRE(sel.chosen >= 3); // the lag-3 term is strong
        if (sel.chosen == 3) ++lag3_hits;
    }
    REQUIRE(lag3_hits >= 6);
}

TEST_CASE("lag selection criteria are mutually consistent") {
    Eigen::Matrix2d a;
    a << 0.5, 0.3, 0.0, 0.4;
    TimeSeriesPanel p = var1_panel(a, 300, 13);
    LagSelection sel = select_lag(p, 4);
    for (const auto& c : sel.per_lag) {
        REQUIRE(std::isfinite(c.aic));
        REQUIRE(c.bic >= c.aic); // log(n) > 2 for n >= 8 penalises harder
        REQUIRE(c.fpe > 0.0);
    }
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (const auto& c : sel.per_lag)
        if (c.aic < best) {
            best = c.aic;
            arg = c.lag;
        }
    REQUIRE(sel.chosen == arg);
}

TEST_CASE("VAR interfaces validate their inputs") {
    Eigen::Matrix2d a;
    a << 0.5, 0.0, 0.0, 0.4;
    TimeSeriesPanel p = var1_panel(a, 12, 17);
    REQUIRE_THROWS_AS(fit_var(p, 1), InsufficientDataError);
    TimeSeriesPanel ok = var1_panel(a, 100, 17);
    REQUIRE_THROWS_AS(fit_var(ok, 0), ValidationError);
    REQUIRE_THROWS_AS(select_lag(ok, 0), ValidationError);
    REQUIRE_THROWS_AS(granger_f(ok, "x1", "x1", 1), ValidationError);
    REQUIRE_THROWS_AS(granger_f(ok, "x1", "nope", 1), UnknownVariableError);
}

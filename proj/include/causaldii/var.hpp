#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "causaldii/errors.hpp"
#include "causaldii/ols.hpp"
#include "causaldii/panel.hpp"

namespace causaldii {

struct VarModel {
    int order = 0;
    std::vector<std::string> names;
    std::vector<Eigen::MatrixXd> coefficients; // A_1..A_p, each M x M
    Eigen::VectorXd intercept;
    Eigen::MatrixXd residuals;           // (T-p) x M
    Eigen::MatrixXd residual_covariance; // denominator T-p
};

struct GrangerResult {
    std::string candidate;
    double f_statistic = 0;
    double p_value = 1;
    int restrictions = 0;        // q = p
    Eigen::Index observations = 0;
    int unrestricted_params = 0; // per-equation count, intercept included
    double rss_restricted = 0;
    double rss_unrestricted = 0;
};

struct LagSelection {
    struct Criteria {
        int lag = 0;
        double aic = 0, bic = 0, fpe = 0, hqic = 0;
    };
    std::vector<Criteria> per_lag;
    int chosen = 0; // argmin of AIC
};

namespace detail {

// Stacked lagged design: row t (t = start..T-1) holds an intercept followed
// by the panel values at lags 1..p, optionally dropping one variable's lags.
inline Eigen::MatrixXd lagged_design(const Eigen::MatrixXd& values,
                                     int p, Eigen::Index start,
                                     Eigen::Index excluded_col = -1) {
    const Eigen::Index t_len = values.rows(), m = values.cols();
    const Eigen::Index kept = excluded_col >= 0 ? m - 1 : m;
    Eigen::MatrixXd x(t_len - start, 1 + kept * p);
    for (Eigen::Index t = start; t < t_len; ++t) {
        const Eigen::Index r = t - start;
        x(r, 0) = 1.0;
        Eigen::Index c = 1;
        for (int lag = 1; lag <= p; ++lag)
            for (Eigen::Index v = 0; v < m; ++v) {
                if (v == excluded_col) continue;
                x(r, c++) = values(t - lag, v);
            }
    }
    return x;
}

// Regularised incomplete beta I_x(a,b) by the standard continued-fraction
// expansion (modified Lentz), accurate to well below 1e-10 over the F-test
// parameter range.
inline double beta_cont_fraction(double a, double b, double x) {
    constexpr int max_iter = 500;
    constexpr double eps = 1e-15, fpmin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int it = 1; it <= max_iter; ++it) {
        const int m2 = 2 * it;
        double aa = it * (b - it) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + it) * (qab + it) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

inline double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_bt = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x);
    const double bt = std::exp(log_bt);
    if (x < (a + 1.0) / (a + b + 2.0))
        return bt * beta_cont_fraction(a, b, x) / a;
    return 1.0 - bt * beta_cont_fraction(b, a, 1.0 - x) / b;
}

} // namespace detail

// Upper tail of the F(d1, d2) distribution.
inline double f_survival(double f, double d1, double d2) {
    if (f <= 0.0) return 1.0;
    const double x = d2 / (d2 + d1 * f);
    return detail::regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, x);
}

// Equation-by-equation least-squares VAR(p) with intercepts.
inline VarModel fit_var(const TimeSeriesPanel& panel, int p) {
    panel.validate();
    const Eigen::Index t_len = panel.rows(), m = panel.cols();
    if (p < 1) throw ValidationError("fit_var: order must be >= 1");
    if (t_len <= m * p + 10)
        throw InsufficientDataError(
            "fit_var: need more than " + std::to_string(m * p + 10) +
            " rows for order " + std::to_string(p) + ", have " +
            std::to_string(t_len));

    Eigen::MatrixXd x = detail::lagged_design(panel.values, p, p);
    Eigen::MatrixXd y = panel.values.bottomRows(t_len - p);
    OlsFit fit = ols(x, y);

    VarModel model;
    model.order = p;
    model.names = panel.names;
    model.intercept = fit.beta.row(0).transpose();
    for (int lag = 1; lag <= p; ++lag) {
        // beta rows 1 + (lag-1)*m .. hold the lag's coefficients; equation
        // index is the beta column, so A_lag = block^T.
        model.coefficients.push_back(
            fit.beta.block(1 + (lag - 1) * m, 0, m, m).transpose());
    }
    model.residuals = fit.residuals;
    model.residual_covariance =
        (fit.residuals.transpose() * fit.residuals) /
        static_cast<double>(t_len - p);
    return model;
}

// Linear causal weight of each predictor on the target equation: for p = 1
// the |A_1[target, col]| entries, for higher orders the per-lag maximum. The
// target's own entry is set to 0 (self-influence is not a causal weight).
inline Eigen::VectorXd causal_weights(const VarModel& model,
                                      Eigen::Index target_index) {
    const Eigen::Index m = static_cast<Eigen::Index>(model.names.size());
    if (target_index < 0 || target_index >= m)
        throw UnknownVariableError("column " + std::to_string(target_index));
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
    for (const auto& a : model.coefficients)
        for (Eigen::Index col = 0; col < m; ++col)
            if (col != target_index)
                w(col) = std::max(w(col), std::abs(a(target_index, col)));
    return w;
}

// Information criteria over a common estimation sample (rows maxLag..T-1 for
// every candidate order, so values are comparable) with the smallest AIC
// picking the order.
inline LagSelection select_lag(const TimeSeriesPanel& panel, int max_lag) {
    panel.validate();
    const Eigen::Index t_len = panel.rows(), m = panel.cols();
    if (max_lag < 1) throw ValidationError("select_lag: maxLag must be >= 1");
    if (t_len <= m * max_lag + 10)
        throw InsufficientDataError("select_lag: series too short for maxLag " +
                                    std::to_string(max_lag));

    const Eigen::Index t_eff = t_len - max_lag;
    Eigen::MatrixXd y = panel.values.bottomRows(t_eff);
    LagSelection out;
    double best = std::numeric_limits<double>::infinity();
    for (int p = 1; p <= max_lag; ++p) {
        Eigen::MatrixXd x =
            detail::lagged_design(panel.values, p, max_lag);
        OlsFit fit = ols(x, y);
        Eigen::MatrixXd sigma = (fit.residuals.transpose() * fit.residuals) /
                                static_cast<double>(t_eff);
        Eigen::LLT<Eigen::MatrixXd> llt(sigma);
        if (llt.info() != Eigen::Success)
            throw DegenerateRssError(
                "select_lag: residual covariance not positive definite at lag " +
                std::to_string(p));
        const double log_det =
            2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        const double n_eff = static_cast<double>(t_eff);
        const double s = static_cast<double>(m * p + 1); // params per equation
        const double m_total = static_cast<double>(m) * s;

        LagSelection::Criteria c;
        c.lag = p;
        c.aic = log_det + 2.0 * m_total / n_eff;
        c.bic = log_det + m_total * std::log(n_eff) / n_eff;
        c.hqic = log_det + 2.0 * m_total * std::log(std::log(n_eff)) / n_eff;
        c.fpe = std::exp(log_det) *
                std::pow((n_eff + s) / (n_eff - s), static_cast<double>(m));
        out.per_lag.push_back(c);
        if (c.aic < best) {
            best = c.aic;
            out.chosen = p;
        }
    }
    return out;
}

// Granger F test of "candidate helps predict target": the target equation of
// the VAR(p) against the same equation with the candidate's p lags removed.
inline GrangerResult granger_f(const TimeSeriesPanel& panel,
                               const std::string& target,
                               const std::string& candidate, int p) {
    panel.validate();
    if (target == candidate)
        throw ValidationError("granger_f: candidate equals target");
    const Eigen::Index target_col = panel.column_index(target);
    const Eigen::Index cand_col = panel.column_index(candidate);
    const Eigen::Index t_len = panel.rows(), m = panel.cols();
    if (p < 1) throw ValidationError("granger_f: order must be >= 1");
    if (t_len <= m * p + 10)
        throw InsufficientDataError("granger_f: series too short for order " +
                                    std::to_string(p));

    Eigen::VectorXd y = panel.values.col(target_col).tail(t_len - p);
    Eigen::MatrixXd x_full = detail::lagged_design(panel.values, p, p);
    Eigen::MatrixXd x_restr =
        detail::lagged_design(panel.values, p, p, cand_col);
    OlsFit unrestricted = ols(x_full, y);
    OlsFit restricted = ols(x_restr, y);

    GrangerResult res;
    res.candidate = candidate;
    res.restrictions = p;
    res.observations = t_len - p;
    res.unrestricted_params = static_cast<int>(x_full.cols());
    res.rss_unrestricted = unrestricted.rss(0);
    res.rss_restricted = restricted.rss(0);
    if (res.rss_unrestricted < 1e-12)
        throw DegenerateRssError(
            "granger_f: unrestricted residual sum of squares is zero");

    const double q = static_cast<double>(res.restrictions);
    const double dof =
        static_cast<double>(res.observations - res.unrestricted_params);
    if (dof <= 0)
        throw InsufficientDataError("granger_f: no residual degrees of freedom");
    const double num =
        std::max(0.0, res.rss_restricted - res.rss_unrestricted) / q;
    res.f_statistic = num / (res.rss_unrestricted / dof);
    res.p_value = f_survival(res.f_statistic, q, dof);
    return res;
}

} // namespace causaldii

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "causaldii/errors.hpp"
#include "causaldii/ols.hpp"
#include "causaldii/panel.hpp"

namespace causaldii {

// Simple returns R_t = (P_{t+1} - P_t) / P_t, applied column-wise. Output has
// T-1 rows; row t keeps the timestamp of P_t.
inline TimeSeriesPanel compute_returns(const TimeSeriesPanel& prices) {
    prices.validate();
    const Eigen::Index t_len = prices.rows(), d = prices.cols();
    if (t_len < 2)
        throw SeriesTooShortError("compute_returns",
                                  static_cast<std::size_t>(t_len), 2);
    TimeSeriesPanel out;
    out.names = prices.names;
    out.values.resize(t_len - 1, d);
    for (Eigen::Index k = 0; k < d; ++k) {
        for (Eigen::Index t = 0; t + 1 < t_len; ++t) {
            const double p = prices.values(t, k);
            if (p == 0.0)
                throw ZeroPriceError(static_cast<std::size_t>(t),
                                     prices.names[static_cast<std::size_t>(k)]);
            out.values(t, k) = (prices.values(t + 1, k) - p) / p;
        }
    }
    if (!prices.timestamps.empty())
        out.timestamps.assign(prices.timestamps.begin(),
                              prices.timestamps.end() - 1);
    return out;
}

inline double column_mean(const Eigen::Ref<const Eigen::VectorXd>& x) {
    return x.mean();
}

// Sample standard deviation (denominator T-1).
inline double column_std(const Eigen::Ref<const Eigen::VectorXd>& x) {
    const Eigen::Index n = x.size();
    if (n < 2)
        throw SeriesTooShortError("column_std", static_cast<std::size_t>(n), 2);
    const double m = x.mean();
    return std::sqrt((x.array() - m).square().sum() /
                     static_cast<double>(n - 1));
}

// Centers each column to mean 0 and scales to sample standard deviation 1.
inline Eigen::MatrixXd standardize(const Eigen::MatrixXd& values) {
    if (values.rows() < 2)
        throw SeriesTooShortError("standardize",
                                  static_cast<std::size_t>(values.rows()), 2);
    Eigen::MatrixXd out = values;
    for (Eigen::Index k = 0; k < values.cols(); ++k) {
        auto col = values.col(k);
        if (col.maxCoeff() == col.minCoeff())
            throw ConstantColumnError("column " + std::to_string(k));
        const double m = col.mean();
        const double s = column_std(col);
        out.col(k) = (col.array() - m) / s;
    }
    return out;
}

inline TimeSeriesPanel standardize(const TimeSeriesPanel& panel) {
    panel.validate();
    TimeSeriesPanel out = panel;
    try {
        out.values = standardize(panel.values);
    } catch (const ConstantColumnError&) {
        for (Eigen::Index k = 0; k < panel.cols(); ++k)
            if (panel.values.col(k).maxCoeff() == panel.values.col(k).minCoeff())
                throw ConstantColumnError(panel.names[static_cast<std::size_t>(k)]);
        throw;
    }
    return out;
}

// Percentile by linear interpolation between order statistics (inclusive
// convention: quantile q sits at fractional position q*(n-1)).
inline double percentile(std::vector<double> sorted_or_not, double q) {
    if (sorted_or_not.empty())
        throw ValidationError("percentile of an empty sample");
    std::sort(sorted_or_not.begin(), sorted_or_not.end());
    const double pos = q * static_cast<double>(sorted_or_not.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return sorted_or_not[lo] * (1.0 - frac) + sorted_or_not[hi] * frac;
}

struct VariableStats {
    std::string name;
    double mean = 0, std_dev = 0, min = 0, max = 0;
    double p25 = 0, p50 = 0, p75 = 0;
    double skewness = 0; // m3 / m2^1.5 (central moments, population form)
    double kurtosis = 0; // m4 / m2^2, non-excess: normal samples sit near 3
};

struct DescriptiveStats {
    std::vector<VariableStats> variables;
};

inline DescriptiveStats descriptive_stats(const TimeSeriesPanel& panel) {
    panel.validate();
    const Eigen::Index n = panel.rows();
    if (n < 2)
        throw SeriesTooShortError("descriptive_stats",
                                  static_cast<std::size_t>(n), 2);
    DescriptiveStats out;
    for (Eigen::Index k = 0; k < panel.cols(); ++k) {
        auto col = panel.values.col(k);
        VariableStats s;
        s.name = panel.names[static_cast<std::size_t>(k)];
        s.mean = col.mean();
        s.std_dev = column_std(col);
        s.min = col.minCoeff();
        s.max = col.maxCoeff();
        std::vector<double> v(col.data(), col.data() + n);
        s.p25 = percentile(v, 0.25);
        s.p50 = percentile(v, 0.50);
        s.p75 = percentile(v, 0.75);
        Eigen::ArrayXd c = col.array() - s.mean;
        const double m2 = c.square().mean();
        const double m3 = c.cube().mean();
        const double m4 = c.square().square().mean();
        s.skewness = m2 > 0 ? m3 / std::pow(m2, 1.5) : 0.0;
        s.kurtosis = m2 > 0 ? m4 / (m2 * m2) : 0.0;
        out.variables.push_back(std::move(s));
    }
    return out;
}

// Sample autocorrelation with the biased (1/T) covariance estimator, which
// keeps every value inside [-1, 1].
inline std::vector<double> acf(const Eigen::Ref<const Eigen::VectorXd>& x,
                               int max_lag) {
    const Eigen::Index n = x.size();
    if (max_lag < 0) throw ValidationError("acf: maxLag must be >= 0");
    if (static_cast<Eigen::Index>(max_lag) >= n)
        throw SeriesTooShortError("acf", static_cast<std::size_t>(n),
                                  static_cast<std::size_t>(max_lag) + 1);
    const double m = x.mean();
    Eigen::ArrayXd c = x.array() - m;
    const double c0 = c.square().sum() / static_cast<double>(n);
    if (c0 == 0.0)
        throw ValidationError("acf: series is constant");
    std::vector<double> out(static_cast<std::size_t>(max_lag) + 1);
    out[0] = 1.0;
    for (int h = 1; h <= max_lag; ++h) {
        const Eigen::Index len = n - h;
        const double ch =
            (c.head(len) * c.tail(len)).sum() / static_cast<double>(n);
        out[static_cast<std::size_t>(h)] = ch / c0;
    }
    return out;
}

// Partial autocorrelation by the Durbin-Levinson recursion on sample
// autocorrelations.
inline std::vector<double> pacf(const Eigen::Ref<const Eigen::VectorXd>& x,
                                int max_lag) {
    if (max_lag < 0) throw ValidationError("pacf: maxLag must be >= 0");
    if (static_cast<Eigen::Index>(max_lag) * 2 >= x.size())
        throw SeriesTooShortError("pacf", static_cast<std::size_t>(x.size()),
                                  static_cast<std::size_t>(max_lag) * 2 + 1);
    std::vector<double> rho = acf(x, max_lag);
    std::vector<double> out(static_cast<std::size_t>(max_lag) + 1, 1.0);
    if (max_lag == 0) return out;
    std::vector<double> phi_prev(static_cast<std::size_t>(max_lag) + 1, 0.0);
    std::vector<double> phi(static_cast<std::size_t>(max_lag) + 1, 0.0);
    phi_prev[1] = rho[1];
    out[1] = rho[1];
    for (int k = 2; k <= max_lag; ++k) {
        double num = rho[static_cast<std::size_t>(k)];
        double den = 1.0;
        for (int j = 1; j < k; ++j) {
            num -= phi_prev[static_cast<std::size_t>(j)] *
                   rho[static_cast<std::size_t>(k - j)];
            den -= phi_prev[static_cast<std::size_t>(j)] *
                   rho[static_cast<std::size_t>(j)];
        }
        if (std::abs(den) < 1e-14)
            throw NumericError("pacf: Durbin-Levinson recursion degenerate at lag " +
                               std::to_string(k));
        const double pk = num / den;
        for (int j = 1; j < k; ++j)
            phi[static_cast<std::size_t>(j)] =
                phi_prev[static_cast<std::size_t>(j)] -
                pk * phi_prev[static_cast<std::size_t>(k - j)];
        phi[static_cast<std::size_t>(k)] = pk;
        out[static_cast<std::size_t>(k)] = pk;
        phi_prev = phi;
    }
    return out;
}

struct AdfResult {
    double statistic = 0;
    double p_value = 1;
    int lag = 0;        // augmentation lags chosen by AIC
    Eigen::Index n_obs = 0;
    double cv1 = -3.432621, cv5 = -2.862543, cv10 = -2.567304;
    bool stationary = false; // statistic < 5% critical value
};

namespace detail {

// Fits dy_t = alpha + phi*y_{t-1} + sum_i gamma_i dy_{t-i} over rows
// start..T-1 of the differenced series; returns the fit and the t statistic
// of phi.
struct AdfFit {
    double t_phi = 0;
    double rss = 0;
    Eigen::Index n = 0;
};

inline AdfFit adf_regression(const Eigen::VectorXd& y, int lag,
                             Eigen::Index start) {
    const Eigen::Index t_len = y.size();
    const Eigen::Index n = t_len - start; // usable dy rows: indices start..T-2
    const Eigen::Index k = 2 + lag;
    Eigen::MatrixXd x(n - 1, k);
    Eigen::VectorXd dy(n - 1);
    Eigen::Index r = 0;
    for (Eigen::Index t = start; t + 1 < t_len; ++t, ++r) {
        dy(r) = y(t + 1) - y(t);
        x(r, 0) = 1.0;
        x(r, 1) = y(t);
        for (int i = 1; i <= lag; ++i)
            x(r, 1 + i) = y(t - i + 1) - y(t - i);
    }
    OlsFit fit = ols(x, dy);
    AdfFit out;
    out.n = n - 1;
    out.rss = fit.rss(0);
    const double dof = static_cast<double>(out.n - k);
    if (dof <= 0 || out.rss <= 0)
        throw DegenerateRssError("adf_test: degenerate residual variance");
    const double sigma2 = out.rss / dof;
    out.t_phi = fit.beta(1, 0) / std::sqrt(sigma2 * fit.xtx_inv(1, 1));
    return out;
}

inline double adf_p_value(double stat) {
    // Piecewise-linear in the statistic through the three tabulated
    // (critical value, level) points, extended linearly and clamped.
    const double xs[3] = {-3.432621, -2.862543, -2.567304};
    const double ps[3] = {0.01, 0.05, 0.10};
    double p;
    if (stat <= xs[1])
        p = ps[0] + (stat - xs[0]) * (ps[1] - ps[0]) / (xs[1] - xs[0]);
    else
        p = ps[1] + (stat - xs[1]) * (ps[2] - ps[1]) / (xs[2] - xs[1]);
    return std::clamp(p, 0.001, 0.999);
}

} // namespace detail

// Augmented Dickey-Fuller unit-root test with constant and no trend. The
// augmentation lag is chosen by AIC over a common sample (all candidates see
// the same rows), then the chosen lag is refitted on the longest sample it
// allows, mirroring the usual econometric practice.
inline AdfResult adf_test(const Eigen::Ref<const Eigen::VectorXd>& series,
                          int max_lag) {
    const Eigen::Index t_len = series.size();
    if (max_lag < 0) throw ValidationError("adf_test: maxLag must be >= 0");
    if (t_len < 25 || t_len < 2 * max_lag + 12)
        throw SeriesTooShortError(
            "adf_test", static_cast<std::size_t>(t_len),
            static_cast<std::size_t>(std::max<Eigen::Index>(25, 2 * max_lag + 12)));
    Eigen::VectorXd y = series;

    int best_lag = 0;
    double best_aic = std::numeric_limits<double>::infinity();
    const Eigen::Index common_start = max_lag; // same sample for every lag
    for (int lag = 0; lag <= max_lag; ++lag) {
        detail::AdfFit f = detail::adf_regression(y, lag, common_start);
        const double n = static_cast<double>(f.n);
        const double aic = n * std::log(f.rss / n) + 2.0 * (2 + lag);
        if (aic < best_aic) {
            best_aic = aic;
            best_lag = lag;
        }
    }

    detail::AdfFit f = detail::adf_regression(y, best_lag, best_lag);
    AdfResult out;
    out.statistic = f.t_phi;
    out.p_value = detail::adf_p_value(f.t_phi);
    out.lag = best_lag;
    out.n_obs = f.n;
    out.stationary = f.t_phi < out.cv5;
    return out;
}

} // namespace causaldii

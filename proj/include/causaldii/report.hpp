#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"

#include "causaldii/errors.hpp"
#include "causaldii/imbalance_gain.hpp"
#include "causaldii/panel.hpp"
#include "causaldii/stats.hpp"
#include "causaldii/synthetic.hpp"
#include "causaldii/var.hpp"

namespace causaldii {

inline constexpr const char* kToolName = "causaldii";
inline constexpr const char* kToolVersion = "0.1.0";

struct AnalyzeOptions {
    std::string target;
    int tau = 1;
    int var_order = 1;
    int adf_max_lag = 0;      // 0: Schwert rule floor(12 (T/100)^0.25)
    bool input_is_returns = false;
    int permutations = 0;
    int workers = 1;
    DiiConfig dii;
};

struct AdfRecord {
    std::string name;
    AdfResult result;
};

struct VariableRecord {
    std::string name;
    double f_statistic = 0;
    double p_value = 1;
    double var_weight = 0;
    double ig = 0;
    double dii_weight = 0;
    bool has_null = false;
    double ig_null_q95 = 0;
};

struct CausalReport {
    std::string target;
    std::vector<VariableRecord> variables;  // all non-target variables
    std::vector<std::string> ranking_by_f;  // descending F statistic
    std::vector<std::string> ranking_by_ig; // descending Imbalance Gain
    double dii_full = 0;
    std::vector<std::string> full_space_names;
    Eigen::VectorXd full_weights;
    std::vector<AdfRecord> adf;
    std::vector<std::string> warnings;
    std::vector<double> dii_loss_trace;
    std::vector<Eigen::VectorXd> dii_weight_trace;
    nlohmann::json config_echo;
};

namespace detail {

template <typename Fn>
auto pipeline_stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const ValidationError& e) {
        throw ValidationError(std::string(name) + ": " + e.what());
    } catch (const NumericError& e) {
        throw NumericError(std::string(name) + ": " + e.what());
    }
}

inline std::vector<std::string> ranked_names(
    const std::vector<VariableRecord>& records,
    double VariableRecord::*key) {
    std::vector<std::string> names;
    std::vector<const VariableRecord*> ptrs;
    for (const auto& r : records) ptrs.push_back(&r);
    std::stable_sort(ptrs.begin(), ptrs.end(),
                     [key](const VariableRecord* a, const VariableRecord* b) {
                         return a->*key > b->*key;
                     });
    for (const auto* p : ptrs) names.push_back(p->name);
    return names;
}

inline int schwert_max_lag(Eigen::Index t_len) {
    return static_cast<int>(std::floor(
        12.0 * std::pow(static_cast<double>(t_len) / 100.0, 0.25)));
}

} // namespace detail

// Full comparison pipeline: (optional) returns, standardisation, per-column
// ADF stationarity gate (warnings only), VAR(p) with per-candidate Granger F
// statistics, and the DII/IG optimisation, joined into one report.
inline CausalReport analyze(const TimeSeriesPanel& raw,
                            const AnalyzeOptions& options) {
    CausalReport report;
    report.target = options.target;

    TimeSeriesPanel returns =
        options.input_is_returns
            ? raw
            : detail::pipeline_stage("returns", [&] { return compute_returns(raw); });
    TimeSeriesPanel panel =
        detail::pipeline_stage("standardise", [&] { return standardize(returns); });
    if (!panel.has_column(options.target))
        throw UnknownVariableError(options.target);

    const int adf_lag = options.adf_max_lag > 0
                            ? options.adf_max_lag
                            : detail::schwert_max_lag(panel.rows());
    detail::pipeline_stage("stationarity", [&] {
        for (Eigen::Index k = 0; k < panel.cols(); ++k) {
            AdfRecord rec;
            rec.name = panel.names[static_cast<std::size_t>(k)];
            rec.result = adf_test(panel.values.col(k), adf_lag);
            if (!rec.result.stationary)
                report.warnings.push_back(
                    "column '" + rec.name +
                    "' looks non-stationary (ADF statistic " +
                    format_double(rec.result.statistic) + ")");
            report.adf.push_back(std::move(rec));
        }
        return 0;
    });

    VarModel var = detail::pipeline_stage(
        "var", [&] { return fit_var(panel, options.var_order); });
    Eigen::VectorXd linear_weights =
        causal_weights(var, panel.column_index(options.target));

    IgConfig ig_config;
    ig_config.tau = options.tau;
    ig_config.target = options.target;
    ig_config.dii = options.dii;
    ig_config.null_permutations = options.permutations;
    IgResult ig = detail::pipeline_stage("imbalance-gain", [&] {
        return imbalance_gain(panel, ig_config, options.workers);
    });

    for (const auto& cand : ig.per_variable) {
        VariableRecord rec;
        rec.name = cand.name;
        GrangerResult gr = detail::pipeline_stage("granger", [&] {
            return granger_f(panel, options.target, cand.name,
                             options.var_order);
        });
        rec.f_statistic = gr.f_statistic;
        rec.p_value = gr.p_value;
        rec.var_weight = linear_weights(panel.column_index(cand.name));
        rec.ig = cand.ig;
        rec.dii_weight = cand.weight_full;
        if (!cand.null_igs.empty()) {
            rec.has_null = true;
            rec.ig_null_q95 = percentile(cand.null_igs, 0.95);
        }
        report.variables.push_back(std::move(rec));
    }

    report.ranking_by_f =
        detail::ranked_names(report.variables, &VariableRecord::f_statistic);
    report.ranking_by_ig =
        detail::ranked_names(report.variables, &VariableRecord::ig);
    report.dii_full = ig.dii_full;
    report.full_space_names = ig.predictor_names;
    report.full_weights = ig.full_weights;
    report.dii_loss_trace = std::move(ig.full_loss_trace);
    report.dii_weight_trace = std::move(ig.full_weight_trace);
    return report;
}

inline nlohmann::json to_json(const CausalReport& report) {
    nlohmann::json j;
    j["target"] = report.target;
    j["config"] = report.config_echo.is_null() ? nlohmann::json::object()
                                               : report.config_echo;
    nlohmann::json vars = nlohmann::json::array();
    for (const auto& r : report.variables) {
        nlohmann::json v;
        v["name"] = r.name;
        v["f_statistic"] = r.f_statistic;
        v["p_value"] = r.p_value;
        v["var_weight"] = r.var_weight;
        v["ig"] = r.ig;
        v["dii_weight"] = r.dii_weight;
        if (r.has_null) v["ig_null_q95"] = r.ig_null_q95;
        vars.push_back(std::move(v));
    }
    j["variables"] = std::move(vars);
    j["ranking_by_f"] = report.ranking_by_f;
    j["ranking_by_ig"] = report.ranking_by_ig;
    j["dii_full"] = report.dii_full;
    nlohmann::json w = nlohmann::json::object();
    for (std::size_t k = 0; k < report.full_space_names.size(); ++k)
        w[report.full_space_names[k]] =
            report.full_weights(static_cast<Eigen::Index>(k));
    j["full_weights"] = std::move(w);
    nlohmann::json adf = nlohmann::json::array();
    for (const auto& rec : report.adf) {
        nlohmann::json a;
        a["variable"] = rec.name;
        a["statistic"] = rec.result.statistic;
        a["p_value"] = rec.result.p_value;
        a["lag"] = rec.result.lag;
        a["stationary"] = rec.result.stationary;
        adf.push_back(std::move(a));
    }
    j["adf"] = std::move(adf);
    j["warnings"] = report.warnings;
    j["metadata"] = {{"tool", kToolName}, {"version", kToolVersion}};
    return j;
}

// Minimal inverse of to_json, used to verify that reports survive a
// parse/serialise round trip byte for byte.
inline CausalReport report_from_json(const nlohmann::json& j) {
    CausalReport report;
    report.target = j.at("target").get<std::string>();
    report.config_echo = j.at("config");
    for (const auto& v : j.at("variables")) {
        VariableRecord r;
        r.name = v.at("name").get<std::string>();
        r.f_statistic = v.at("f_statistic").get<double>();
        r.p_value = v.at("p_value").get<double>();
        r.var_weight = v.at("var_weight").get<double>();
        r.ig = v.at("ig").get<double>();
        r.dii_weight = v.at("dii_weight").get<double>();
        if (v.contains("ig_null_q95")) {
            r.has_null = true;
            r.ig_null_q95 = v.at("ig_null_q95").get<double>();
        }
        report.variables.push_back(std::move(r));
    }
    report.ranking_by_f = j.at("ranking_by_f").get<std::vector<std::string>>();
    report.ranking_by_ig = j.at("ranking_by_ig").get<std::vector<std::string>>();
    report.dii_full = j.at("dii_full").get<double>();
    const auto& w = j.at("full_weights");
    report.full_weights.resize(static_cast<Eigen::Index>(w.size()));
    Eigen::Index k = 0;
    for (auto it = w.begin(); it != w.end(); ++it, ++k) {
        report.full_space_names.push_back(it.key());
        report.full_weights(k) = it.value().get<double>();
    }
    for (const auto& a : j.at("adf")) {
        AdfRecord rec;
        rec.name = a.at("variable").get<std::string>();
        rec.result.statistic = a.at("statistic").get<double>();
        rec.result.p_value = a.at("p_value").get<double>();
        rec.result.lag = a.at("lag").get<int>();
        rec.result.stationary = a.at("stationary").get<bool>();
        report.adf.push_back(std::move(rec));
    }
    report.warnings = j.at("warnings").get<std::vector<std::string>>();
    return report;
}

struct BenchOptions {
    ProcessKind process = ProcessKind::FalseNegative;
    int length = 2800;
    int burn_in = 5000;
    std::uint64_t seed = 0;
    int tau = 1;
    int var_order = 1;
    int permutations = 0;
    int workers = 1;
    DiiConfig dii;
};

// One benchmark run: generate the chosen process, score both methods against
// the known ground truth, and report per-variable detections.
inline nlohmann::json synthetic_bench(const BenchOptions& options,
                                      TimeSeriesPanel* generated = nullptr) {
    SyntheticSpec spec;
    spec.process = options.process;
    spec.length = options.length;
    spec.burn_in = options.burn_in;
    spec.seed = options.seed;
    TimeSeriesPanel panel = generate(spec);
    if (generated) *generated = panel;

    AnalyzeOptions opts;
    opts.target = "z";
    opts.tau = options.tau;
    opts.var_order = options.var_order;
    opts.permutations = options.permutations;
    opts.workers = options.workers;
    opts.dii = options.dii;
    opts.input_is_returns = true; // synthetic panels are levels, not prices
    CausalReport report = analyze(panel, opts);

    std::vector<CausalEdge> truth = regression_ground_truth(spec);
    auto is_true_edge = [&](const std::string& from) {
        for (const auto& e : truth)
            if (e.from == from && e.to == "z") return true;
        return false;
    };

    nlohmann::json j;
    j["config"] = {{"process", process_name(options.process)},
                   {"length", options.length},
                   {"burn_in", options.burn_in},
                   {"seed", options.seed},
                   {"tau", options.tau},
                   {"var_order", options.var_order},
                   {"permutations", options.permutations},
                   {"epochs", options.dii.epochs},
                   {"batch_size", options.dii.batch_size},
                   {"batches_per_epoch", options.dii.batches_per_epoch},
                   {"learning_rate", options.dii.initial_learning_rate},
                   {"exclusion_half_width", options.dii.exclusion_half_width},
                   {"lambda_prefactor", options.dii.lambda_prefactor},
                   {"neighbor_fraction", options.dii.neighbor_fraction}};
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : truth) edges.push_back({{"from", e.from}, {"to", e.to}});
    j["ground_truth"] = std::move(edges);
    j["target"] = "z";

    nlohmann::json vars = nlohmann::json::array();
    for (const auto& r : report.variables) {
        const bool f_detected = r.p_value < 0.05;
        const bool ig_detected = r.has_null ? r.ig > r.ig_null_q95 : r.ig > 0.0;
        std::string label = "none";
        if (f_detected && ig_detected) label = "both";
        else if (ig_detected) label = "ig_only";
        else if (f_detected) label = "f_only";
        nlohmann::json v;
        v["name"] = r.name;
        v["f_statistic"] = r.f_statistic;
        v["p_value"] = r.p_value;
        v["var_weight"] = r.var_weight;
        v["ig"] = r.ig;
        v["dii_weight"] = r.dii_weight;
        if (r.has_null) v["ig_null_q95"] = r.ig_null_q95;
        v["f_detected"] = f_detected;
        v["ig_detected"] = ig_detected;
        v["truth_edge"] = is_true_edge(r.name);
        v["label"] = label;
        vars.push_back(std::move(v));
    }
    j["variables"] = std::move(vars);
    j["dii_full"] = report.dii_full;
    nlohmann::json w = nlohmann::json::object();
    for (std::size_t k = 0; k < report.full_space_names.size(); ++k)
        w[report.full_space_names[k]] =
            report.full_weights(static_cast<Eigen::Index>(k));
    j["full_weights"] = std::move(w);
    j["metadata"] = {{"tool", kToolName}, {"version", kToolVersion}};
    return j;
}

} // namespace causaldii

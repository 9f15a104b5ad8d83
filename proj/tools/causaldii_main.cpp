// Command-line front end: analyze, synthetic-bench, describe, lag-select.
// Exit codes: 0 success, 2 invalid input or arguments, 3 numerical failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include <causaldii/causaldii.hpp>

namespace {

using namespace causaldii;

struct CommonArgs {
    std::string input;
    std::string out_dir = ".";
    std::string target = "z";
    int tau = 1;
    int var_order = 1;
    int max_lag = 0;
    int epochs = 2000;
    int batch_size = 100;
    int batches_per_epoch = 28;
    double lr = 1e-3;
    std::uint64_t seed = 0;
    int permutations = 0;
    int workers = 1;
    int exclusion = 1;
    bool returns_input = false;
    // synthetic-bench
    std::string process = "false-negative";
    int length = 2800;
    int burn_in = 5000;
};

std::filesystem::path ensure_out_dir(const std::string& dir) {
    std::filesystem::path p(dir);
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (ec)
        throw ValidationError("cannot create output directory '" + dir +
                              "': " + ec.message());
    return p;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ValidationError("cannot open '" + path.string() + "' for writing");
    out << text;
}

DiiConfig dii_from_args(const CommonArgs& a) {
    DiiConfig c;
    c.epochs = a.epochs;
    c.batch_size = a.batch_size;
    c.batches_per_epoch = a.batches_per_epoch;
    c.initial_learning_rate = a.lr;
    c.exclusion_half_width = a.exclusion;
    c.seed = a.seed;
    return c;
}

TimeSeriesPanel load_input(const CommonArgs& a) {
    CsvReadResult read = read_csv_file(a.input);
    if (read.dropped_rows > 0)
        std::cerr << "note: dropped " << read.dropped_rows
                  << " rows with missing entries\n";
    return read.panel;
}

std::string trace_csv(const std::vector<double>& loss,
                      const std::vector<Eigen::VectorXd>& weights,
                      const std::vector<std::string>& names) {
    std::string out = "epoch,dii";
    for (const auto& n : names) out += ",w_" + n;
    out += '\n';
    for (std::size_t e = 0; e < loss.size(); ++e) {
        out += std::to_string(e + 1) + ',' + format_double(loss[e]);
        for (Eigen::Index k = 0; k < weights[e].size(); ++k)
            out += ',' + format_double(weights[e](k));
        out += '\n';
    }
    return out;
}

int cmd_analyze(const CommonArgs& args) {
    const auto t0 = std::chrono::steady_clock::now();
    TimeSeriesPanel raw = load_input(args);

    AnalyzeOptions opts;
    opts.target = args.target;
    opts.tau = args.tau;
    opts.var_order = args.var_order;
    opts.adf_max_lag = args.max_lag;
    opts.input_is_returns = args.returns_input;
    opts.permutations = args.permutations;
    opts.workers = args.workers;
    opts.dii = dii_from_args(args);
    CausalReport report = analyze(raw, opts);
    report.config_echo = {{"input", args.input},
                          {"target", args.target},
                          {"tau", args.tau},
                          {"var_order", args.var_order},
                          {"epochs", args.epochs},
                          {"batch_size", args.batch_size},
                          {"batches_per_epoch", args.batches_per_epoch},
                          {"learning_rate", args.lr},
                          {"exclusion_half_width", args.exclusion},
                          {"permutations", args.permutations},
                          {"seed", args.seed},
                          {"returns_input", args.returns_input}};

    const auto out = ensure_out_dir(args.out_dir);
    write_text(out / "report.json", to_json(report).dump(2) + "\n");

    std::string f_vs_ig = "variable,f_statistic,p_value,ig,ig_null_q95\n";
    for (const auto& v : report.variables) {
        f_vs_ig += v.name + ',' + format_double(v.f_statistic) + ',' +
                   format_double(v.p_value) + ',' + format_double(v.ig) + ',' +
                   (v.has_null ? format_double(v.ig_null_q95) : std::string()) +
                   '\n';
    }
    write_text(out / "f_vs_ig.csv", f_vs_ig);

    std::string weights = "variable,var_weight,dii_weight\n";
    for (const auto& v : report.variables)
        weights += v.name + ',' + format_double(v.var_weight) + ',' +
                   format_double(v.dii_weight) + '\n';
    write_text(out / "weights.csv", weights);

    write_text(out / "dii_trace.csv",
               trace_csv(report.dii_loss_trace, report.dii_weight_trace,
                         report.full_space_names));

    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    const auto dt = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - t0);
    std::cerr << "analyze finished in " << dt.count() << " ms; report in "
              << (out / "report.json").string() << '\n';
    return 0;
}

int cmd_synthetic_bench(const CommonArgs& args) {
    const auto t0 = std::chrono::steady_clock::now();
    BenchOptions opts;
    if (args.process == "false-negative")
        opts.process = ProcessKind::FalseNegative;
    else if (args.process == "false-positive")
        opts.process = ProcessKind::FalsePositive;
    else
        throw ValidationError("unknown process '" + args.process +
                              "' (expected false-negative or false-positive)");
    opts.length = args.length;
    opts.burn_in = args.burn_in;
    opts.seed = args.seed;
    opts.tau = args.tau;
    opts.var_order = args.var_order;
    opts.permutations = args.permutations;
    opts.workers = args.workers;
    opts.dii = dii_from_args(args);

    TimeSeriesPanel panel;
    nlohmann::json bench = synthetic_bench(opts, &panel);
    const auto out = ensure_out_dir(args.out_dir);
    write_text(out / "bench.json", bench.dump(2) + "\n");
    std::ostringstream panel_csv;
    write_csv(panel_csv, panel);
    write_text(out / "panel.csv", panel_csv.str());
    const auto dt = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - t0);
    std::cerr << "synthetic-bench finished in " << dt.count()
              << " ms; report in " << (out / "bench.json").string() << '\n';
    return 0;
}

int cmd_describe(const CommonArgs& args) {
    TimeSeriesPanel raw = load_input(args);
    TimeSeriesPanel returns = args.returns_input ? raw : compute_returns(raw);
    TimeSeriesPanel panel = standardize(returns);
    const int max_lag =
        args.max_lag > 0 ? args.max_lag
                         : detail::schwert_max_lag(panel.rows());

    const auto out = ensure_out_dir(args.out_dir);
    DescriptiveStats stats = descriptive_stats(panel);
    std::string stats_csv =
        "variable,mean,std,min,max,p25,p50,p75,skewness,kurtosis\n";
    for (const auto& s : stats.variables) {
        stats_csv += s.name;
        for (double v : {s.mean, s.std_dev, s.min, s.max, s.p25, s.p50, s.p75,
                         s.skewness, s.kurtosis})
            stats_csv += ',' + format_double(v);
        stats_csv += '\n';
    }
    write_text(out / "stats.csv", stats_csv);

    std::string adf_csv = "variable,statistic,p_value,lag,stationary,cv1,cv5,cv10\n";
    std::string acf_csv = "variable,lag,acf\n";
    std::string pacf_csv = "variable,lag,pacf\n";
    const int corr_lag = std::min<int>(max_lag, static_cast<int>(panel.rows() / 2) - 1);
    for (Eigen::Index k = 0; k < panel.cols(); ++k) {
        const std::string& name = panel.names[static_cast<std::size_t>(k)];
        AdfResult adf = adf_test(panel.values.col(k), max_lag);
        adf_csv += name + ',' + format_double(adf.statistic) + ',' +
                   format_double(adf.p_value) + ',' + std::to_string(adf.lag) +
                   ',' + (adf.stationary ? "true" : "false") + ',' +
                   format_double(adf.cv1) + ',' + format_double(adf.cv5) + ',' +
                   format_double(adf.cv10) + '\n';
        std::vector<double> a = acf(panel.values.col(k), corr_lag);
        std::vector<double> p = pacf(panel.values.col(k), corr_lag);
        for (std::size_t h = 0; h < a.size(); ++h) {
            acf_csv += name + ',' + std::to_string(h) + ',' +
                       format_double(a[h]) + '\n';
            pacf_csv += name + ',' + std::to_string(h) + ',' +
                        format_double(p[h]) + '\n';
        }
    }
    write_text(out / "adf.csv", adf_csv);
    write_text(out / "acf.csv", acf_csv);
    write_text(out / "pacf.csv", pacf_csv);
    std::cerr << "describe wrote stats/adf/acf/pacf CSVs to " << out.string()
              << '\n';
    return 0;
}

int cmd_lag_select(const CommonArgs& args) {
    TimeSeriesPanel raw = load_input(args);
    TimeSeriesPanel returns = args.returns_input ? raw : compute_returns(raw);
    TimeSeriesPanel panel = standardize(returns);
    const int max_lag = args.max_lag > 0 ? args.max_lag : 6;
    LagSelection sel = select_lag(panel, max_lag);

    const auto out = ensure_out_dir(args.out_dir);
    std::string grid = "lag,aic,bic,fpe,hqic\n";
    for (const auto& c : sel.per_lag)
        grid += std::to_string(c.lag) + ',' + format_double(c.aic) + ',' +
                format_double(c.bic) + ',' + format_double(c.fpe) + ',' +
                format_double(c.hqic) + '\n';
    write_text(out / "lag_selection.csv", grid);

    nlohmann::json j;
    j["chosen"] = sel.chosen;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& c : sel.per_lag)
        rows.push_back({{"lag", c.lag},
                        {"aic", c.aic},
                        {"bic", c.bic},
                        {"fpe", c.fpe},
                        {"hqic", c.hqic}});
    j["per_lag"] = std::move(rows);
    j["metadata"] = {{"tool", kToolName}, {"version", kToolVersion}};
    write_text(out / "lag_selection.json", j.dump(2) + "\n");
    std::cout << "chosen order: " << sel.chosen << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Directional causal discovery for multivariate time series: "
                 "Differentiable Information Imbalance vs VAR/Granger"};
    app.require_subcommand(1);
    CommonArgs args;

    auto add_common = [&](CLI::App* cmd, bool needs_input) {
        if (needs_input)
            cmd->add_option("--input", args.input, "input CSV panel")
                ->required()
                ->check(CLI::ExistingFile);
        cmd->add_option("--out-dir", args.out_dir, "output directory")
            ->envname("CAUSALDII_OUT_DIR");
        cmd->add_option("--seed", args.seed, "master seed");
        cmd->add_option("--workers", args.workers, "parallel worker threads")
            ->check(CLI::PositiveNumber);
    };
    auto add_analysis = [&](CLI::App* cmd) {
        cmd->add_option("--target", args.target, "target variable name");
        cmd->add_option("--tau", args.tau, "prediction lag for the imbalance gain")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--var-order", args.var_order, "VAR order p")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--epochs", args.epochs, "optimisation epochs")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--batch-size", args.batch_size, "mini-batch size");
        cmd->add_option("--batches-per-epoch", args.batches_per_epoch,
                        "mini-batches per epoch");
        cmd->add_option("--lr", args.lr, "initial learning rate");
        cmd->add_option("--permutations", args.permutations,
                        "permutation-null samples per candidate (0 = off)");
        cmd->add_option("--exclusion", args.exclusion,
                        "temporal exclusion half-width for full-sample ranks");
        cmd->add_option("--max-lag", args.max_lag,
                        "max lag for the ADF stationarity gate (0 = automatic)");
    };

    CLI::App* analyze_cmd = app.add_subcommand(
        "analyze", "run both causal analyses on a CSV panel");
    add_common(analyze_cmd, true);
    add_analysis(analyze_cmd);
    analyze_cmd->add_flag("--returns-input", args.returns_input,
                          "input is already a returns panel (skip the "
                          "price-to-return conversion)");

    CLI::App* bench_cmd = app.add_subcommand(
        "synthetic-bench", "benchmark both methods on a generated process");
    add_common(bench_cmd, false);
    add_analysis(bench_cmd);
    bench_cmd->add_option("--process", args.process,
                          "false-negative or false-positive");
    bench_cmd->add_option("--length", args.length, "panel length after burn-in");
    bench_cmd->add_option("--burn-in", args.burn_in, "discarded initial steps");

    CLI::App* describe_cmd = app.add_subcommand(
        "describe", "descriptive statistics and stationarity diagnostics");
    add_common(describe_cmd, true);
    describe_cmd->add_option("--max-lag", args.max_lag,
                             "max ADF/ACF lag (0 = automatic)");
    describe_cmd->add_flag("--returns-input", args.returns_input,
                           "input is already a returns panel");

    CLI::App* lag_cmd = app.add_subcommand(
        "lag-select", "VAR order selection by information criteria");
    add_common(lag_cmd, true);
    lag_cmd->add_option("--max-lag", args.max_lag, "largest order scanned");
    lag_cmd->add_flag("--returns-input", args.returns_input,
                      "input is already a returns panel");

    // The benchmark processes are generated series, not prices: a wider
    // exclusion window is the matching default unless the user set one.
    bool exclusion_given = false;
    for (int i = 1; i < argc; ++i)
        if (std::string(argv[i]).rfind("--exclusion", 0) == 0)
            exclusion_given = true;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (bench_cmd->parsed() && !exclusion_given) args.exclusion = 5;
        if (analyze_cmd->parsed()) return cmd_analyze(args);
        if (bench_cmd->parsed()) return cmd_synthetic_bench(args);
        if (describe_cmd->parsed()) return cmd_describe(args);
        if (lag_cmd->parsed()) return cmd_lag_select(args);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}

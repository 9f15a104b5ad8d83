#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <causaldii/panel.hpp>
#include <causaldii/synthetic.hpp>

namespace fs = std::filesystem;
using namespace causaldii;

namespace {

struct Outcome {
    int exit_code = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CliRunner {
  public:
    CliRunner() {
        const char* bin = std::getenv("CAUSALDII_BIN");
        REQUIRE(bin != nullptr);
        bin_ = bin;
        scratch_ = fs::temp_directory_path() /
                   ("causaldii_cli_" + std::to_string(::getpid()));
        fs::create_directories(scratch_);
    }
    ~CliRunner() {
        std::error_code ec;
        fs::remove_all(scratch_, ec);
    }

    const fs::path& scratch() const { return scratch_; }

    fs::path fresh_dir(const std::string& name) {
        fs::path p = scratch_ / name;
        fs::create_directories(p);
        return p;
    }

    Outcome run(const std::string& args, const std::string& env_prefix = "") {
        static int counter = 0;
        const fs::path out = scratch_ / ("out" + std::to_string(counter) + ".txt");
        const fs::path err = scratch_ / ("err" + std::to_string(counter) + ".txt");
        ++counter;
        const std::string cmd = env_prefix + "\"" + bin_ + "\" " + args + " >" +
                                out.string() + " 2>" + err.string();
        const int rc = std::system(cmd.c_str());
        Outcome o;
        o.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
        o.out = slurp(out);
        o.err = slurp(err);
        return o;
    }

  private:
    std::string bin_;
    fs::path scratch_;
};

fs::path write_benchmark_csv(CliRunner& cli, const std::string& name,
                             std::uint64_t seed, int length) {
    SyntheticSpec s;
    s.seed = seed;
    s.length = length;
    s.burn_in = 200;
    TimeSeriesPanel p = generate(s);
    const fs::path path = cli.scratch() / name;
    write_csv_file(path.string(), p);
    return path;
}

} // namespace

TEST_CASE("help and argument errors use the documented exit codes") {
    CliRunner cli;
    REQUIRE(cli.run("--help").exit_code == 0);
    REQUIRE(cli.run("analyze --help").exit_code == 0);
    REQUIRE(cli.run("analyze --no-such-flag").exit_code == 2);
    REQUIRE(cli.run("").exit_code == 2);        // a subcommand is required
    REQUIRE(cli.run("analyze").exit_code == 2); // --input is required
    Outcome bad_process =
        cli.run("synthetic-bench --process nope --length 300 --burn-in 50");
    REQUIRE(bad_process.exit_code == 2);
    REQUIRE(bad_process.err.find("unknown process") != std::string::npos);
}

TEST_CASE("malformed CSV input reports the offending line and exits 2") {
    CliRunner cli;
    const fs::path csv = cli.scratch() / "ragged.csv";
    std::ofstream(csv) << "a,b\n1,2\n3\n4,5\n";
    Outcome o = cli.run("analyze --input " + csv.string() + " --target a");
    REQUIRE(o.exit_code == 2);
    REQUIRE(o.err.find("line 3") != std::string::npos);
}

TEST_CASE("numerical failures exit 3") {
    CliRunner cli;
    // Two byte-identical columns make the VAR design exactly collinear.
    const fs::path csv = cli.scratch() / "dup.csv";
    {
        std::ofstream f(csv);
        f << "a,b,c\n";
        for (int t = 0; t < 60; ++t) {
            const double v = std::sin(0.37 * t) + 0.01 * t;
            f << v << ',' << v << ',' << std::cos(0.53 * t) << '\n';
        }
    }
    Outcome o = cli.run("analyze --input " + csv.string() +
                        " --target a --returns-input");
    REQUIRE(o.exit_code == 3);
    REQUIRE(o.err.find("numerical error") != std::string::npos);
}

TEST_CASE("describe writes the four diagnostic CSVs") {
    CliRunner cli;
    const fs::path csv = cli.scratch() / "prices.csv";
    {
        std::ofstream f(csv);
        f << "date,p1,p2\n";
        double a = 100.0, b = 50.0;
        for (int t = 0; t < 80; ++t) {
            a *= 1.0 + 0.01 * std::sin(0.9 * t);
            b *= 1.0 + 0.01 * std::cos(1.7 * t);
            f << "2024-" << (t + 10) << ',' << a << ',' << b << '\n';
        }
    }
    const fs::path out = cli.fresh_dir("describe_out");
    Outcome o = cli.run("describe --input " + csv.string() + " --max-lag 4" +
                        " --out-dir " + out.string());
    REQUIRE(o.exit_code == 0);
    for (const char* name : {"stats.csv", "adf.csv", "acf.csv", "pacf.csv"})
        REQUIRE(fs::exists(out / name));
    const std::string stats = slurp(out / "stats.csv");
    REQUIRE(stats.rfind("variable,mean,std,", 0) == 0);
    REQUIRE(stats.find("p1") != std::string::npos);
    REQUIRE(stats.find("p2") != std::string::npos);
}

TEST_CASE("lag-select reports the chosen order on stdout") {
    CliRunner cli;
    const fs::path csv = write_benchmark_csv(cli, "panel_lag.csv", 5, 500);
    const fs::path out = cli.fresh_dir("lag_out");
    Outcome o = cli.run("lag-select --input " + csv.string() +
                        " --returns-input --max-lag 4 --out-dir " + out.string());
    REQUIRE(o.exit_code == 0);
    REQUIRE(o.out.find("chosen order: ") != std::string::npos);
    REQUIRE(fs::exists(out / "lag_selection.csv"));
    REQUIRE(fs::exists(out / "lag_selection.json"));
    const std::string grid = slurp(out / "lag_selection.csv");
    REQUIRE(grid.rfind("lag,aic,bic,fpe,hqic", 0) == 0);
}

TEST_CASE("analyze produces identical bytes for identical invocations") {
    CliRunner cli;
    const fs::path csv = write_benchmark_csv(cli, "panel_det.csv", 9, 400);
    const std::string flags =
        " --returns-input --target z --epochs 8 --batch-size 80"
        " --batches-per-epoch 3 --lr 0.02 --exclusion 3 --permutations 2"
        " --seed 7";
    const fs::path out1 = cli.fresh_dir("an1");
    const fs::path out2 = cli.fresh_dir("an2");
    REQUIRE(cli.run("analyze --input " + csv.string() + flags + " --out-dir " +
                    out1.string())
                .exit_code == 0);
    REQUIRE(cli.run("analyze --input " + csv.string() + flags + " --out-dir " +
                    out2.string())
                .exit_code == 0);
    for (const char* name :
         {"report.json", "f_vs_ig.csv", "weights.csv", "dii_trace.csv"}) {
        INFO(name);
        REQUIRE(slurp(out1 / name) == slurp(out2 / name));
        REQUIRE_FALSE(slurp(out1 / name).empty());
    }
    const std::string trace = slurp(out1 / "dii_trace.csv");
    REQUIRE(trace.rfind("epoch,dii,w_z,w_x1,w_x2", 0) == 0);
}

TEST_CASE("bench output does not depend on the worker count") {
    CliRunner cli;
    const std::string flags =
        "synthetic-bench --process false-negative --length 300 --burn-in 100"
        " --epochs 6 --batch-size 60 --batches-per-epoch 3 --permutations 1"
        " --seed 3";
    const fs::path out1 = cli.fresh_dir("b1");
    const fs::path out2 = cli.fresh_dir("b2");
    REQUIRE(cli.run(flags + " --workers 1 --out-dir " + out1.string()).exit_code == 0);
    REQUIRE(cli.run(flags + " --workers 4 --out-dir " + out2.string()).exit_code == 0);
    REQUIRE(slurp(out1 / "bench.json") == slurp(out2 / "bench.json"));
    REQUIRE(slurp(out1 / "panel.csv") == slurp(out2 / "panel.csv"));
    REQUIRE_FALSE(slurp(out1 / "bench.json").empty());
}

TEST_CASE("the output directory can come from the environment") {
    CliRunner cli;
    const fs::path csv = write_benchmark_csv(cli, "panel_env.csv", 13, 400);
    const fs::path out = cli.fresh_dir("env_out");
    Outcome o = cli.run("lag-select --input " + csv.string() +
                            " --returns-input --max-lag 3",
                        "CAUSALDII_OUT_DIR=" + out.string() + " ");
    REQUIRE(o.exit_code == 0);
    REQUIRE(fs::exists(out / "lag_selection.json"));
}

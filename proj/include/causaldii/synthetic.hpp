#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "causaldii/errors.hpp"
#include "causaldii/panel.hpp"
#include "causaldii/rng.hpp"

namespace causaldii {

// The two benchmark processes plus a generic stable linear VAR generator for
// baseline tests.
//
// FalseNegative (a non-linear link the linear baseline misses):
//   x1_t = u1_t
//   x2_t = u2_t
//   z_t  = 0.5 z_{t-1} + x1_{t-1} + (x2_{t-1})^2 + uz_t,  all noises N(0,1)
//
// FalsePositive (a common driver that fools the linear baseline):
//   x1_t = 0.1 x1_{t-1} + (x2_{t-1})^2 + u1_t,  sd(u1) = 0.2
//   x2_t = 0.7 x2_{t-1} + u2_t,                 sd(u2) = 0.5
//   z_t  = 0.5 z_{t-1} + (x2_{t-1})^2 + uz_t,   sd(uz) = 1.0
enum class ProcessKind { FalseNegative, FalsePositive, LinearVar };

struct SyntheticSpec {
    ProcessKind process = ProcessKind::FalseNegative;
    int burn_in = 5000;
    int length = 2800;
    std::uint64_t seed = 0;
    // LinearVar only: v_t = sum_i A_i v_{t-i} + diag(noiseScales) u_t.
    std::vector<Eigen::MatrixXd> var_coefficients;
    Eigen::VectorXd noise_scales;
};

struct CausalEdge {
    std::string from, to;
};

inline std::string process_name(ProcessKind k) {
    switch (k) {
        case ProcessKind::FalseNegative: return "false-negative";
        case ProcessKind::FalsePositive: return "false-positive";
        case ProcessKind::LinearVar: return "linear-var";
    }
    return "unknown";
}

// Deterministic panel generation. Noise stream layout (documented in the
// README): each variable draws from its own generator seeded by
// derive_seed(seed, {variableIndex}) with variables ordered (z, x1, x2) for
// the benchmark processes (v1..vM for LinearVar); initial states come from a
// dedicated stream derive_seed(seed, {1000}) in the same variable order.
inline TimeSeriesPanel generate(const SyntheticSpec& spec) {
    if (spec.burn_in < 0) throw ValidationError("generate: burnIn must be >= 0");
    if (spec.length < 100)
        throw ValidationError("generate: length must be >= 100");

    TimeSeriesPanel panel;
    const int total = spec.burn_in + spec.length;

    if (spec.process == ProcessKind::LinearVar) {
        const Eigen::Index m = spec.noise_scales.size();
        const int p = static_cast<int>(spec.var_coefficients.size());
        if (m < 1 || p < 1)
            throw ValidationError("generate: LinearVar needs coefficients and noise scales");
        for (const auto& a : spec.var_coefficients)
            if (a.rows() != m || a.cols() != m)
                throw DimensionMismatchError("generate: coefficient matrix shape");
        std::vector<Rng> noise;
        for (Eigen::Index v = 0; v < m; ++v)
            noise.emplace_back(derive_seed(spec.seed, {static_cast<std::uint64_t>(v)}));
        Rng init(derive_seed(spec.seed, {1000}));

        Eigen::MatrixXd hist(total + p, m);
        for (int t = 0; t < p; ++t)
            for (Eigen::Index v = 0; v < m; ++v) hist(t, v) = init.normal();
        for (int t = p; t < total + p; ++t) {
            for (Eigen::Index v = 0; v < m; ++v) {
                double acc = spec.noise_scales(v) * noise[static_cast<std::size_t>(v)].normal();
                for (int lag = 1; lag <= p; ++lag)
                    acc += spec.var_coefficients[static_cast<std::size_t>(lag - 1)]
                               .row(v)
                               .dot(hist.row(t - lag));
                hist(t, v) = acc;
            }
        }
        panel.values = hist.bottomRows(spec.length);
        for (Eigen::Index v = 0; v < m; ++v)
            panel.names.push_back("v" + std::to_string(v + 1));
        panel.validate();
        return panel;
    }

    Rng uz(derive_seed(spec.seed, {0}));
    Rng u1(derive_seed(spec.seed, {1}));
    Rng u2(derive_seed(spec.seed, {2}));
    Rng init(derive_seed(spec.seed, {1000}));
    double z = init.normal(), x1 = init.normal(), x2 = init.normal();

    panel.values.resize(spec.length, 3);
    panel.names = {"z", "x1", "x2"};
    const bool fp = spec.process == ProcessKind::FalsePositive;
    for (int t = 1; t <= total; ++t) {
        double z_next, x1_next, x2_next;
        if (fp) {
            x1_next = 0.1 * x1 + x2 * x2 + 0.2 * u1.normal();
            x2_next = 0.7 * x2 + 0.5 * u2.normal();
            z_next = 0.5 * z + x2 * x2 + 1.0 * uz.normal();
        } else {
            x1_next = u1.normal();
            x2_next = u2.normal();
            z_next = 0.5 * z + x1 + x2 * x2 + uz.normal();
        }
        z = z_next;
        x1 = x1_next;
        x2 = x2_next;
        const int row = t - 1 - spec.burn_in;
        if (row >= 0) {
            panel.values(row, 0) = z;
            panel.values(row, 1) = x1;
            panel.values(row, 2) = x2;
        }
    }
    panel.validate();
    return panel;
}

// Directed ground-truth edges (self-loops excluded).
inline std::vector<CausalEdge> regression_ground_truth(const SyntheticSpec& spec) {
    switch (spec.process) {
        case ProcessKind::FalseNegative:
            return {{"x1", "z"}, {"x2", "z"}};
        case ProcessKind::FalsePositive:
            return {{"x2", "z"}, {"x2", "x1"}};
        case ProcessKind::LinearVar: {
            std::vector<CausalEdge> edges;
            const Eigen::Index m = spec.noise_scales.size();
            for (Eigen::Index to = 0; to < m; ++to)
                for (Eigen::Index from = 0; from < m; ++from) {
                    if (from == to) continue;
                    bool present = false;
                    for (const auto& a : spec.var_coefficients)
                        if (std::abs(a(to, from)) > 0.0) present = true;
                    if (present)
                        edges.push_back({"v" + std::to_string(from + 1),
                                         "v" + std::to_string(to + 1)});
                }
            return edges;
        }
    }
    return {};
}

} // namespace causaldii

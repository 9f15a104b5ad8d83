#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "causaldii/dii.hpp"
#include "causaldii/errors.hpp"
#include "causaldii/panel.hpp"
#include "causaldii/parallel.hpp"
#include "causaldii/rng.hpp"

namespace causaldii {

struct IgConfig {
    int tau = 1;
    std::string target;
    DiiConfig dii;
    int null_permutations = 0; // 0 disables the permutation-null utility
};

struct IgCandidate {
    std::string name;
    double ig = 0;           // 1 - diiFull/diiReduced; > 0 flags a causal link
    double dii_full = 0;
    double dii_reduced = 0;
    double weight_full = 0;  // candidate's optimal weight in the full space
    std::vector<double> null_igs;
};

struct IgResult {
    std::string target;
    std::vector<std::string> predictor_names; // target first, then candidates
    Eigen::VectorXd full_weights;
    double dii_full = 0;
    std::vector<IgCandidate> per_variable;
    std::vector<double> full_loss_trace;             // full-space optimisation
    std::vector<Eigen::VectorXd> full_weight_trace;  // per epoch, |weights|
};

struct LaggedPair {
    Eigen::MatrixXd predictors;    // N x (D+1): (z_t, x_t^1, ..., x_t^D)
    Eigen::VectorXd target_future; // N: z_{t+tau}
    std::vector<std::string> names;
};

// Aligns the present of every variable with the target's future: row t of the
// predictors holds time t, the response holds the target at time t + tau.
inline LaggedPair build_lagged_pair(const TimeSeriesPanel& panel,
                                    const std::string& target, int tau) {
    panel.validate();
    if (tau < 1) throw ValidationError("build_lagged_pair: tau must be >= 1");
    const Eigen::Index target_col = panel.column_index(target);
    const Eigen::Index t_len = panel.rows();
    if (t_len <= tau + 1)
        throw SeriesTooShortError("build_lagged_pair",
                                  static_cast<std::size_t>(t_len),
                                  static_cast<std::size_t>(tau) + 2);
    const Eigen::Index n = t_len - tau;

    LaggedPair lp;
    lp.names.push_back(target);
    for (Eigen::Index k = 0; k < panel.cols(); ++k)
        if (k != target_col)
            lp.names.push_back(panel.names[static_cast<std::size_t>(k)]);
    lp.predictors.resize(n, panel.cols());
    lp.predictors.col(0) = panel.values.col(target_col).head(n);
    Eigen::Index out_col = 1;
    for (Eigen::Index k = 0; k < panel.cols(); ++k)
        if (k != target_col)
            lp.predictors.col(out_col++) = panel.values.col(k).head(n);
    lp.target_future = panel.values.col(target_col).tail(n);
    return lp;
}

namespace detail {

// Shared state for the full-space, leave-one-out, and perm.-null
// optimisations. Seeds are derived per task from the config seed so results
// do not depend on execution order.
struct IgEngine {
    LaggedPair lp;
    RankMatrix full_ranks;
    DiiConfig dii;

    IgEngine(const TimeSeriesPanel& panel, const IgConfig& config)
        : lp(build_lagged_pair(panel, config.target, config.tau)), dii(config.dii) {
        dii.validate();
        full_ranks = rank_matrix_from_column(lp.target_future,
                                             dii.exclusion_half_width);
    }

    DiiConfig config_with_seed(std::uint64_t seed) const {
        DiiConfig c = dii;
        c.seed = seed;
        return c;
    }

    DiiState run_full() const {
        return optimize_weights(lp.predictors, lp.target_future,
                                config_with_seed(derive_seed(dii.seed, {1})),
                                &full_ranks);
    }

    // Leave-one-out optimisation without predictor column `col`.
    DiiState run_reduced(Eigen::Index col) const {
        const Eigen::Index d = lp.predictors.cols();
        Eigen::MatrixXd reduced(lp.predictors.rows(), d - 1);
        Eigen::Index c_out = 0;
        for (Eigen::Index c = 0; c < d; ++c)
            if (c != col) reduced.col(c_out++) = lp.predictors.col(c);
        return optimize_weights(
            reduced, lp.target_future,
            config_with_seed(derive_seed(dii.seed, {2, static_cast<std::uint64_t>(col)})),
            &full_ranks);
    }

    // Full-space optimisation with the candidate column shuffled in time.
    // The optimiser seed matches the observed full-space run; only the data
    // changes.
    DiiState run_permuted(Eigen::Index col, int permutation) const {
        Eigen::MatrixXd shuffled = lp.predictors;
        std::vector<double> column(
            shuffled.col(col).data(),
            shuffled.col(col).data() + shuffled.rows());
        Rng rng(derive_seed(dii.seed, {3, static_cast<std::uint64_t>(col),
                                       static_cast<std::uint64_t>(permutation)}));
        rng.shuffle(column);
        for (Eigen::Index r = 0; r < shuffled.rows(); ++r)
            shuffled(r, col) = column[static_cast<std::size_t>(r)];
        return optimize_weights(shuffled, lp.target_future,
                                config_with_seed(derive_seed(dii.seed, {1})),
                                &full_ranks);
    }
};

} // namespace detail

// Causal scores for every candidate predictor of the target: the full
// (D+1)-dimensional lagged space is optimised once, each candidate's
// leave-one-out space once, and the Imbalance Gain compares their final
// full-sample DII values. With nullPermutations > 0 a permutation null of
// the gain is attached per candidate. Candidate and permutation runs are
// independent and fan out over `workers` threads.
inline IgResult imbalance_gain(const TimeSeriesPanel& panel,
                               const IgConfig& config, int workers = 1) {
    detail::IgEngine engine(panel, config);
    const Eigen::Index d_plus_1 = engine.lp.predictors.cols();
    const Eigen::Index n_candidates = d_plus_1 - 1;

    DiiState full_state;
    std::vector<DiiState> reduced(static_cast<std::size_t>(n_candidates));
    const int n_perm = std::max(0, config.null_permutations);
    std::vector<std::vector<double>> null_dii(
        static_cast<std::size_t>(n_candidates),
        std::vector<double>(static_cast<std::size_t>(n_perm), 0.0));

    std::vector<std::function<void()>> tasks;
    tasks.push_back([&]() { full_state = engine.run_full(); });
    for (Eigen::Index c = 0; c < n_candidates; ++c)
        tasks.push_back([&engine, &reduced, c]() {
            reduced[static_cast<std::size_t>(c)] = engine.run_reduced(c + 1);
        });
    for (Eigen::Index c = 0; c < n_candidates; ++c)
        for (int r = 0; r < n_perm; ++r)
            tasks.push_back([&engine, &null_dii, c, r]() {
                null_dii[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)] =
                    engine.run_permuted(c + 1, r).final_dii;
            });
    run_tasks(tasks, workers);

    IgResult out;
    out.target = config.target;
    out.predictor_names = engine.lp.names;
    out.full_weights = full_state.weights;
    out.dii_full = full_state.final_dii;
    out.full_loss_trace = std::move(full_state.loss_trace);
    out.full_weight_trace = std::move(full_state.weight_trace);
    for (Eigen::Index c = 0; c < n_candidates; ++c) {
        IgCandidate cand;
        cand.name = engine.lp.names[static_cast<std::size_t>(c + 1)];
        cand.dii_full = full_state.final_dii;
        cand.dii_reduced = reduced[static_cast<std::size_t>(c)].final_dii;
        cand.ig = 1.0 - cand.dii_full / cand.dii_reduced;
        cand.weight_full = full_state.weights(c + 1);
        cand.null_igs.reserve(static_cast<std::size_t>(n_perm));
        for (double dii_perm : null_dii[static_cast<std::size_t>(c)])
            cand.null_igs.push_back(1.0 - dii_perm / cand.dii_reduced);
        out.per_variable.push_back(std::move(cand));
    }
    return out;
}

// Standalone permutation null for one candidate; identical inputs give the
// identical sample embedded by imbalance_gain.
inline std::vector<double> permutation_null(const TimeSeriesPanel& panel,
                                            const IgConfig& config,
                                            const std::string& candidate,
                                            int workers = 1) {
    if (config.null_permutations < 1)
        throw ValidationError("permutation_null: nullPermutations must be >= 1");
    detail::IgEngine engine(panel, config);
    Eigen::Index col = -1;
    for (std::size_t k = 1; k < engine.lp.names.size(); ++k)
        if (engine.lp.names[k] == candidate) col = static_cast<Eigen::Index>(k);
    if (col < 0) throw UnknownVariableError(candidate);

    DiiState reduced_state;
    std::vector<double> dii_perm(static_cast<std::size_t>(config.null_permutations));
    std::vector<std::function<void()>> tasks;
    tasks.push_back([&]() { reduced_state = engine.run_reduced(col); });
    for (int r = 0; r < config.null_permutations; ++r)
        tasks.push_back([&engine, &dii_perm, col, r]() {
            dii_perm[static_cast<std::size_t>(r)] = engine.run_permuted(col, r).final_dii;
        });
    run_tasks(tasks, workers);

    std::vector<double> out;
    out.reserve(dii_perm.size());
    for (double v : dii_perm)
        out.push_back(1.0 - v / reduced_state.final_dii);
    return out;
}

} // namespace causaldii

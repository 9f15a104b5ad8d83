#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "causaldii/errors.hpp"
#include "causaldii/neighbors.hpp"
#include "causaldii/rng.hpp"

namespace causaldii {

enum class WeightInit { Ones, InverseStd };

struct DiiConfig {
    double lambda_prefactor = 0.1;   // scale of the adaptive softmax temperature
    double neighbor_fraction = 0.05; // k-th neighbour used for the temperature
    int epochs = 2000;
    double initial_learning_rate = 1e-3;
    int batch_size = 100;
    int batches_per_epoch = 28;
    int exclusion_half_width = 0;    // applied on full-sample evaluations
    std::uint64_t seed = 0;
    WeightInit weight_init = WeightInit::Ones;

    int k_for(Eigen::Index n_points) const {
        return std::max(1, static_cast<int>(std::llround(
                               neighbor_fraction * static_cast<double>(n_points))));
    }

    void validate() const {
        if (!(lambda_prefactor > 0))
            throw ValidationError("DiiConfig: lambdaPrefactor must be > 0");
        if (!(neighbor_fraction > 0 && neighbor_fraction < 1))
            throw ValidationError("DiiConfig: neighborFraction must be in (0,1)");
        if (batch_size < 10)
            throw ValidationError("DiiConfig: batchSize must be >= 10");
        if (epochs < 1) throw ValidationError("DiiConfig: epochs must be >= 1");
        if (batches_per_epoch < 1)
            throw ValidationError("DiiConfig: batchesPerEpoch must be >= 1");
        if (!(initial_learning_rate > 0))
            throw ValidationError("DiiConfig: initialLearningRate must be > 0");
        if (exclusion_half_width < 0)
            throw ValidationError("DiiConfig: exclusionHalfWidth must be >= 0");
    }
};

struct SoftmaxCoefficients {
    Eigen::MatrixXd c;       // row-stochastic over admissible entries
    Eigen::VectorXd lambdas; // per-point temperatures
};

struct DiiState {
    Eigen::VectorXd weights; // reported as absolute values (only w^2 enters)
    Eigen::VectorXd first_moment;
    Eigen::VectorXd second_moment;
    int epoch = 0;
    std::vector<double> loss_trace;              // per-epoch mean batch DII
    std::vector<Eigen::VectorXd> weight_trace;   // per-epoch |weights|
    double final_dii = 0.0; // full-sample DII with the exclusion window
};

namespace detail {

// Adaptive temperature for one row: lambdaPrefactor times the k-th smallest
// admissible squared distance. A zero k-th distance falls back to the
// smallest strictly positive distance in the row; an all-zero row has no
// usable scale.
inline double adaptive_lambda(std::vector<double>& admissible_sq, int k,
                              double prefactor, Eigen::Index row) {
    const std::size_t m = admissible_sq.size();
    if (m < static_cast<std::size_t>(k))
        throw TooFewAdmissiblePairsError(static_cast<std::size_t>(row), m);
    std::nth_element(admissible_sq.begin(),
                     admissible_sq.begin() + (k - 1), admissible_sq.end());
    double base = admissible_sq[static_cast<std::size_t>(k - 1)];
    if (base == 0.0) {
        double smallest_positive = std::numeric_limits<double>::infinity();
        for (double v : admissible_sq)
            if (v > 0.0 && v < smallest_positive) smallest_positive = v;
        if (!std::isfinite(smallest_positive))
            throw DegenerateScaleError(static_cast<std::size_t>(row));
        base = smallest_positive;
    }
    return prefactor * base;
}

// Scratch buffers for the row-streaming DII evaluation, reused across calls
// so the optimiser's inner loop performs no allocations.
struct DiiScratch {
    Eigen::MatrixXd sq_diffs; // n x d, (x_ja - x_ia)^2 for the current row
    Eigen::VectorXd sq;       // n, weighted squared distances
    Eigen::VectorXd expo;     // n, softmax numerators (masked -> 0)
    Eigen::VectorXd weighted_rank; // n, expo * target rank
    std::vector<double> lam_tmp;

    void resize(Eigen::Index n, Eigen::Index d) {
        sq_diffs.resize(n, d);
        sq.resize(n);
        expo.resize(n);
        weighted_rank.resize(n);
        lam_tmp.reserve(static_cast<std::size_t>(n));
    }
};

// Core DII evaluation under a banded temporal-exclusion mask, streaming one
// row at a time: value = sum_i p_i sum_j c_ij r_ij with p_i = 2/(n (m_i+1))
// and c_ij the adaptive softmax over weighted squared source distances.
// When grad is non-null it receives the analytic gradient with the
// temperatures treated as constants. target_ranks(i,j) must be 0 exactly on
// the masked band |i-j| <= band and the diagonal.
inline double dii_band_eval(const Eigen::MatrixXd& points,
                            const Eigen::VectorXd& weights,
                            const Eigen::MatrixXi& target_ranks, int band,
                            double lambda_prefactor, int k,
                            Eigen::VectorXd* grad, DiiScratch& scratch,
                            const Eigen::VectorXd* fixed_lambdas = nullptr,
                            Eigen::VectorXd* out_lambdas = nullptr) {
    const Eigen::Index n = points.rows(), d = points.cols();
    scratch.resize(n, d);
    if (grad) grad->setZero(d);
    if (out_lambdas) out_lambdas->resize(n);
    Eigen::VectorXd w2 = weights.array().square();

    double value = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index lo = std::max<Eigen::Index>(0, i - band);
        const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i + band);
        const Eigen::Index m = n - (hi - lo + 1);

        // Weighted squared distances from point i, keeping per-column squared
        // differences for the gradient pass.
        scratch.sq.setZero();
        for (Eigen::Index a = 0; a < d; ++a) {
            auto diff2 = scratch.sq_diffs.col(a).array();
            diff2 = (points.col(a).array() - points(i, a)).square();
            scratch.sq.array() += w2(a) * diff2;
        }

        double lambda;
        if (fixed_lambdas) {
            lambda = (*fixed_lambdas)(i);
        } else {
            scratch.lam_tmp.clear();
            for (Eigen::Index j = 0; j < n; ++j)
                if (j < lo || j > hi) scratch.lam_tmp.push_back(scratch.sq(j));
            lambda = adaptive_lambda(scratch.lam_tmp, k, lambda_prefactor, i);
        }
        if (out_lambdas) (*out_lambdas)(i) = lambda;

        // Max-subtraction softmax: shift by the smallest admissible distance
        // so the largest numerator is exp(0) = 1.
        double dmin = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < n; ++j)
            if ((j < lo || j > hi) && scratch.sq(j) < dmin) dmin = scratch.sq(j);
        scratch.expo.array() = (-(scratch.sq.array() - dmin) / lambda).exp();
        scratch.expo.segment(lo, hi - lo + 1).setZero();

        const double denom = scratch.expo.sum();
        scratch.weighted_rank.array() =
            scratch.expo.array() * target_ranks.row(i).cast<double>().transpose().array();
        const double rank_dot = scratch.weighted_rank.sum();

        const double p_i = 2.0 / (static_cast<double>(n) * static_cast<double>(m + 1));
        const double s_i = rank_dot / denom; // sum_j c_ij r_ij
        value += p_i * s_i;

        if (grad) {
            // d(DII_i)/dw_a = p_i/lambda * (s_i * sum_j c_ij g_aj
            //                               - sum_j c_ij r_ij g_aj),
            // with g_aj = 2 w_a (x_ia - x_ja)^2.
            for (Eigen::Index a = 0; a < d; ++a) {
                auto diff2 = scratch.sq_diffs.col(a).array();
                const double cg = (scratch.expo.array() * diff2).sum() / denom;
                const double crg =
                    (scratch.weighted_rank.array() * diff2).sum() / denom;
                (*grad)(a) += p_i / lambda * 2.0 * weights(a) * (s_i * cg - crg);
            }
        }
    }
    return value;
}

} // namespace detail

// Softmax neighbour coefficients c_ij with per-point adaptive temperatures
// over an arbitrary admissibility mask.
inline SoftmaxCoefficients softmax_coefficients(
    const Eigen::MatrixXd& sq_distances,
    const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>& mask,
    const DiiConfig& config) {
    config.validate();
    const Eigen::Index n = sq_distances.rows();
    if (sq_distances.cols() != n)
        throw DimensionMismatchError("softmax_coefficients: input must be square");
    if (mask.rows() != n || mask.cols() != n)
        throw MaskMismatchError("softmax_coefficients: mask shape mismatch");

    SoftmaxCoefficients out;
    out.c.setZero(n, n);
    out.lambdas.resize(n);
    const int k = config.k_for(n);
    std::vector<double> admissible;
    for (Eigen::Index i = 0; i < n; ++i) {
        admissible.clear();
        for (Eigen::Index j = 0; j < n; ++j)
            if (mask(i, j) && j != i) admissible.push_back(sq_distances(i, j));
        const double lambda = detail::adaptive_lambda(
            admissible, k, config.lambda_prefactor, i);
        out.lambdas(i) = lambda;

        double dmin = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < n; ++j)
            if (mask(i, j) && j != i && sq_distances(i, j) < dmin)
                dmin = sq_distances(i, j);
        double denom = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!mask(i, j) || j == i) continue;
            const double e = std::exp(-(sq_distances(i, j) - dmin) / lambda);
            out.c(i, j) = e;
            denom += e;
        }
        out.c.row(i) /= denom;
    }
    return out;
}

// Differentiable Information Imbalance of the weighted source space against
// fixed target ranks.
inline double dii_value(const Eigen::MatrixXd& points,
                        const RankMatrix& target_ranks,
                        const Eigen::VectorXd& weights,
                        const DiiConfig& config) {
    config.validate();
    if (points.rows() != target_ranks.n())
        throw DimensionMismatchError("dii_value: points/ranks size mismatch");
    if (weights.size() != points.cols())
        throw DimensionMismatchError("dii_value: weight dimension mismatch");
    if (target_ranks.exclusion_half_width != config.exclusion_half_width)
        throw MaskMismatchError(
            "dii_value: config exclusion window does not match the rank matrix");
    detail::DiiScratch scratch;
    return detail::dii_band_eval(points, weights, target_ranks.ranks,
                                 config.exclusion_half_width,
                                 config.lambda_prefactor,
                                 config.k_for(points.rows()), nullptr, scratch);
}

// Analytic gradient of dii_value with respect to the weights, treating each
// per-point temperature as a constant.
inline Eigen::VectorXd dii_gradient(const Eigen::MatrixXd& points,
                                    const RankMatrix& target_ranks,
                                    const Eigen::VectorXd& weights,
                                    const DiiConfig& config) {
    config.validate();
    if (points.rows() != target_ranks.n())
        throw DimensionMismatchError("dii_gradient: points/ranks size mismatch");
    if (weights.size() != points.cols())
        throw DimensionMismatchError("dii_gradient: weight dimension mismatch");
    if (target_ranks.exclusion_half_width != config.exclusion_half_width)
        throw MaskMismatchError(
            "dii_gradient: config exclusion window does not match the rank matrix");
    detail::DiiScratch scratch;
    Eigen::VectorXd grad(points.cols());
    detail::dii_band_eval(points, weights, target_ranks.ranks,
                          config.exclusion_half_width, config.lambda_prefactor,
                          config.k_for(points.rows()), &grad, scratch);
    return grad;
}

// Per-point adaptive temperatures implied by the given weights. The analytic
// gradient treats these as constants, so a numerical check of the gradient
// must perturb the weights while evaluating against the temperatures frozen
// at the expansion point; dii_value_fixed_scale provides that evaluation.
inline Eigen::VectorXd dii_lambdas(const Eigen::MatrixXd& points,
                                   const RankMatrix& target_ranks,
                                   const Eigen::VectorXd& weights,
                                   const DiiConfig& config) {
    config.validate();
    if (points.rows() != target_ranks.n())
        throw DimensionMismatchError("dii_lambdas: points/ranks size mismatch");
    detail::DiiScratch scratch;
    Eigen::VectorXd lambdas;
    detail::dii_band_eval(points, weights, target_ranks.ranks,
                          config.exclusion_half_width, config.lambda_prefactor,
                          config.k_for(points.rows()), nullptr, scratch,
                          nullptr, &lambdas);
    return lambdas;
}

inline double dii_value_fixed_scale(const Eigen::MatrixXd& points,
                                    const RankMatrix& target_ranks,
                                    const Eigen::VectorXd& weights,
                                    const DiiConfig& config,
                                    const Eigen::VectorXd& lambdas) {
    config.validate();
    if (points.rows() != target_ranks.n())
        throw DimensionMismatchError(
            "dii_value_fixed_scale: points/ranks size mismatch");
    if (lambdas.size() != points.rows())
        throw DimensionMismatchError(
            "dii_value_fixed_scale: one temperature per point required");
    detail::DiiScratch scratch;
    return detail::dii_band_eval(points, weights, target_ranks.ranks,
                                 config.exclusion_half_width,
                                 config.lambda_prefactor,
                                 config.k_for(points.rows()), nullptr, scratch,
                                 &lambdas);
}

namespace detail {

inline Eigen::VectorXd initial_weights(const Eigen::MatrixXd& points,
                                       WeightInit init) {
    const Eigen::Index d = points.cols();
    Eigen::VectorXd w = Eigen::VectorXd::Ones(d);
    if (init == WeightInit::InverseStd) {
        const Eigen::Index n = points.rows();
        for (Eigen::Index a = 0; a < d; ++a) {
            const double mean = points.col(a).mean();
            const double var =
                (points.col(a).array() - mean).square().sum() /
                static_cast<double>(n - 1);
            if (var <= 0.0)
                throw ConstantColumnError("column " + std::to_string(a));
            w(a) = 1.0 / std::sqrt(var);
        }
    }
    return w;
}

// Builds the target rank matrix for a full-sample evaluation: the fast
// two-frontier path for single-column targets, the generic sort otherwise.
inline RankMatrix full_target_ranks(const Eigen::MatrixXd& target, int band) {
    if (target.cols() == 1) return rank_matrix_from_column(target.col(0), band);
    DistanceSpec unit{Eigen::VectorXd::Ones(target.cols()), band};
    return rank_matrix(pairwise_sq_distances(target, unit), band);
}

// Batch-local ranks of a gathered 1-D target with no exclusion window,
// written into a preallocated matrix. Bitwise identical to
// rank_matrix_from_column on the gathered values.
inline void batch_ranks_1d(const Eigen::VectorXd& values, Eigen::MatrixXi& ranks,
                           std::vector<Eigen::Index>& order,
                           std::vector<Eigen::Index>& pos,
                           std::vector<Eigen::Index>& tie) {
    const Eigen::Index n = values.size();
    ranks.setZero(n, n);
    order.resize(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return values(a) < values(b) || (values(a) == values(b) && a < b);
    });
    pos.resize(static_cast<std::size_t>(n));
    for (std::size_t p = 0; p < order.size(); ++p)
        pos[static_cast<std::size_t>(order[p])] = static_cast<Eigen::Index>(p);
    const double inf = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double vi = values(i);
        Eigen::Index l = pos[static_cast<std::size_t>(i)] - 1;
        Eigen::Index r = pos[static_cast<std::size_t>(i)] + 1;
        int next_rank = 1;
        auto sq = [&](Eigen::Index j) {
            const double diff = vi - values(j);
            return diff * diff;
        };
        while (l >= 0 || r < n) {
            const double dl = l >= 0 ? sq(order[static_cast<std::size_t>(l)]) : inf;
            const double dr = r < n ? sq(order[static_cast<std::size_t>(r)]) : inf;
            const double dmin = std::min(dl, dr);
            tie.clear();
            while (l >= 0 && sq(order[static_cast<std::size_t>(l)]) == dmin)
                tie.push_back(order[static_cast<std::size_t>(l--)]);
            while (r < n && sq(order[static_cast<std::size_t>(r)]) == dmin)
                tie.push_back(order[static_cast<std::size_t>(r++)]);
            std::sort(tie.begin(), tie.end());
            for (Eigen::Index j : tie)
                if (j != i) ranks(i, j) = next_rank++;
        }
    }
}

} // namespace detail

// Mini-batch Adam optimisation of the distance weights against the target's
// neighbourhood structure. Each epoch partitions the points by a seeded
// shuffle into disjoint batches; temperatures are recomputed inside every
// batch with k = round(neighborFraction x batchSize); the learning rate
// follows a cosine decay. The returned state carries the per-epoch loss
// trace and the full-sample DII of the final weights evaluated with the
// configured exclusion window.
inline DiiState optimize_weights(const Eigen::MatrixXd& points,
                                 const Eigen::MatrixXd& target,
                                 const DiiConfig& config,
                                 const RankMatrix* shared_full_ranks = nullptr) {
    config.validate();
    const Eigen::Index n = points.rows(), d = points.cols();
    if (target.rows() != n)
        throw DimensionMismatchError("optimize_weights: points/target rows differ");
    if (n < 2 * static_cast<Eigen::Index>(config.batch_size))
        throw InsufficientDataError(
            "optimize_weights: need at least 2 x batchSize = " +
            std::to_string(2 * config.batch_size) + " points, have " +
            std::to_string(n));

    const int bs = config.batch_size;
    const int n_batches = std::min<int>(config.batches_per_epoch,
                                        static_cast<int>(n / bs));
    const int k_batch = std::max(
        1, static_cast<int>(std::llround(config.neighbor_fraction * bs)));

    DiiState state;
    Eigen::VectorXd w = detail::initial_weights(points, config.weight_init);
    state.first_moment = Eigen::VectorXd::Zero(d);
    state.second_moment = Eigen::VectorXd::Zero(d);
    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

    Rng rng(config.seed);
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<Eigen::Index> batch(static_cast<std::size_t>(bs));
    Eigen::MatrixXd bpts(bs, d);
    Eigen::MatrixXd btarget(bs, target.cols());
    Eigen::MatrixXi branks(bs, bs);
    Eigen::VectorXd grad(d);
    detail::DiiScratch scratch;
    std::vector<Eigen::Index> ord, pos, tie;

    long long step = 0;
    double pow_beta1 = 1.0, pow_beta2 = 1.0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const double lr =
            config.initial_learning_rate * 0.5 *
            (1.0 + std::cos(std::numbers::pi * static_cast<double>(epoch) /
                            static_cast<double>(config.epochs)));
        rng.shuffle(perm);
        double epoch_loss = 0.0;
        for (int b = 0; b < n_batches; ++b) {
            std::copy(perm.begin() + static_cast<std::ptrdiff_t>(b) * bs,
                      perm.begin() + static_cast<std::ptrdiff_t>(b + 1) * bs,
                      batch.begin());
            // Batch rows in ascending time order: tie-breaking and summation
            // order inside a batch must not depend on the shuffle.
            std::sort(batch.begin(), batch.end());
            for (int rrow = 0; rrow < bs; ++rrow) {
                bpts.row(rrow) = points.row(batch[static_cast<std::size_t>(rrow)]);
                btarget.row(rrow) = target.row(batch[static_cast<std::size_t>(rrow)]);
            }
            if (target.cols() == 1) {
                detail::batch_ranks_1d(btarget.col(0), branks, ord, pos, tie);
            } else {
                DistanceSpec unit{Eigen::VectorXd::Ones(target.cols()), 0};
                branks = rank_matrix(pairwise_sq_distances(btarget, unit), 0).ranks;
            }
            const double loss = detail::dii_band_eval(
                bpts, w, branks, 0, config.lambda_prefactor, k_batch, &grad,
                scratch);
            if (!std::isfinite(loss) || !grad.allFinite())
                throw NonFiniteLossError(static_cast<std::size_t>(epoch));
            epoch_loss += loss;

            ++step;
            pow_beta1 *= beta1;
            pow_beta2 *= beta2;
            state.first_moment = beta1 * state.first_moment + (1.0 - beta1) * grad;
            state.second_moment =
                beta2 * state.second_moment +
                (1.0 - beta2) * grad.array().square().matrix();
            const Eigen::ArrayXd m_hat = state.first_moment.array() / (1.0 - pow_beta1);
            const Eigen::ArrayXd v_hat = state.second_moment.array() / (1.0 - pow_beta2);
            w.array() -= lr * m_hat / (v_hat.sqrt() + adam_eps);
        }
        state.loss_trace.push_back(epoch_loss / n_batches);
        state.weight_trace.push_back(w.cwiseAbs());
        state.epoch = epoch + 1;
    }

    state.weights = w.cwiseAbs();
    RankMatrix local;
    const RankMatrix* full = shared_full_ranks;
    if (full) {
        if (full->n() != n ||
            full->exclusion_half_width != config.exclusion_half_width)
            throw MaskMismatchError(
                "optimize_weights: shared rank matrix does not match the data");
    } else {
        local = detail::full_target_ranks(target, config.exclusion_half_width);
        full = &local;
    }
    state.final_dii = detail::dii_band_eval(
        points, w, full->ranks, config.exclusion_half_width,
        config.lambda_prefactor, config.k_for(n), nullptr, scratch);
    return state;
}

} // namespace causaldii

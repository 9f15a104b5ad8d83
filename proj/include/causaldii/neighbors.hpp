#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "causaldii/errors.hpp"

namespace causaldii {

// Diagonal metric for weighted distances plus the temporal-exclusion window
// applied when ranking neighbours.
struct DistanceSpec {
    Eigen::VectorXd weights;
    int exclusion_half_width = 0;
};

// entry (i,j) = sum_k w_k^2 (x_ik - x_jk)^2. Symmetric with zero diagonal by
// construction (each pair is computed once and mirrored).
inline Eigen::MatrixXd pairwise_sq_distances(const Eigen::MatrixXd& points,
                                             const DistanceSpec& spec) {
    const Eigen::Index n = points.rows(), d = points.cols();
    if (spec.weights.size() != d)
        throw DimensionMismatchError(
            "pairwise_sq_distances: " + std::to_string(spec.weights.size()) +
            " weights for " + std::to_string(d) + " columns");
    if (n < 3)
        throw ValidationError("pairwise_sq_distances: need at least 3 points");
    Eigen::VectorXd w2 = spec.weights.array().square();
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (Eigen::Index k = 0; k < d; ++k) {
                const double diff = points(i, k) - points(j, k);
                s += w2(k) * diff * diff;
            }
            out(i, j) = s;
            out(j, i) = s;
        }
    }
    return out;
}

// Per-row neighbour ranks over admissible pairs. Pairs with |i-j| <=
// exclusionHalfWidth (including the diagonal) are masked and carry rank 0;
// the admissible ranks in each row form a permutation of 1..m_i. Ties are
// broken by ascending column index.
struct RankMatrix {
    Eigen::MatrixXi ranks;
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> mask;
    Eigen::VectorXi admissible; // m_i per row
    int exclusion_half_width = 0;

    Eigen::Index n() const { return ranks.rows(); }
};

namespace detail {

inline void check_exclusion_width(Eigen::Index n, int half_width) {
    if (half_width < 0)
        throw ValidationError("exclusionHalfWidth must be >= 0");
    if (2 * static_cast<Eigen::Index>(half_width) > n - 2)
        throw ValidationError("exclusionHalfWidth " + std::to_string(half_width) +
                              " too wide for " + std::to_string(n) + " points");
}

inline void fill_band_mask(RankMatrix& rm, Eigen::Index n, int w) {
    rm.mask.setOnes(n, n);
    rm.admissible.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index lo = std::max<Eigen::Index>(0, i - w);
        const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i + w);
        for (Eigen::Index j = lo; j <= hi; ++j) rm.mask(i, j) = 0;
        rm.admissible(i) = static_cast<int>(n - (hi - lo + 1));
    }
}

} // namespace detail

inline RankMatrix rank_matrix(const Eigen::MatrixXd& sq_distances,
                              int exclusion_half_width) {
    const Eigen::Index n = sq_distances.rows();
    if (sq_distances.cols() != n)
        throw DimensionMismatchError("rank_matrix: input must be square");
    detail::check_exclusion_width(n, exclusion_half_width);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (sq_distances(i, i) != 0.0)
            throw ValidationError("rank_matrix: nonzero diagonal at row " +
                                  std::to_string(i));
        for (Eigen::Index j = i + 1; j < n; ++j)
            if (sq_distances(i, j) != sq_distances(j, i))
                throw ValidationError("rank_matrix: input not symmetric at (" +
                                      std::to_string(i) + "," +
                                      std::to_string(j) + ")");
    }

    RankMatrix rm;
    rm.exclusion_half_width = exclusion_half_width;
    rm.ranks.setZero(n, n);
    detail::fill_band_mask(rm, n, exclusion_half_width);

    std::vector<std::pair<double, Eigen::Index>> row;
    row.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        row.clear();
        for (Eigen::Index j = 0; j < n; ++j)
            if (rm.mask(i, j)) row.emplace_back(sq_distances(i, j), j);
        if (row.size() < 2)
            throw TooFewAdmissiblePairsError(static_cast<std::size_t>(i),
                                             row.size());
        std::sort(row.begin(), row.end());
        for (std::size_t r = 0; r < row.size(); ++r)
            rm.ranks(i, row[r].second) = static_cast<int>(r + 1);
    }
    return rm;
}

// Rank matrix of a one-dimensional series without materialising the distance
// matrix: points are sorted once, then each row's neighbours are emitted by
// walking outwards from the query with two frontiers. Tie groups (equal
// squared distance) are flushed in ascending index order so the result is
// bitwise identical to rank_matrix(pairwise_sq_distances(column), w).
inline RankMatrix rank_matrix_from_column(
    const Eigen::Ref<const Eigen::VectorXd>& column, int exclusion_half_width) {
    const Eigen::Index n = column.size();
    if (n < 3)
        throw ValidationError("rank_matrix_from_column: need at least 3 points");
    detail::check_exclusion_width(n, exclusion_half_width);

    RankMatrix rm;
    rm.exclusion_half_width = exclusion_half_width;
    rm.ranks.setZero(n, n);
    detail::fill_band_mask(rm, n, exclusion_half_width);
    for (Eigen::Index i = 0; i < n; ++i)
        if (rm.admissible(i) < 2)
            throw TooFewAdmissiblePairsError(static_cast<std::size_t>(i),
                                             static_cast<std::size_t>(rm.admissible(i)));

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return column(a) < column(b) || (column(a) == column(b) && a < b);
    });
    std::vector<Eigen::Index> pos(static_cast<std::size_t>(n));
    for (std::size_t p = 0; p < order.size(); ++p)
        pos[static_cast<std::size_t>(order[p])] = static_cast<Eigen::Index>(p);

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<Eigen::Index> tie;
    const int w = exclusion_half_width;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double vi = column(i);
        Eigen::Index l = pos[static_cast<std::size_t>(i)] - 1;
        Eigen::Index r = pos[static_cast<std::size_t>(i)] + 1;
        int next_rank = 1;
        auto sq = [&](Eigen::Index j) {
            const double diff = vi - column(j);
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
            for (Eigen::Index j : tie) {
                if (std::abs(static_cast<long long>(i) - static_cast<long long>(j)) <=
                    static_cast<long long>(w))
                    continue; // masked: no rank consumed
                rm.ranks(i, j) = next_rank++;
            }
        }
    }
    return rm;
}

// Rank-based Information Imbalance: how well nearest neighbours in the source
// space predict neighbourhoods in the target space. For each row the target
// rank of the source's rank-1 neighbour is accumulated with the per-row
// prefactor 2/(n * (m_i + 1)), which reduces to the textbook 2/n^2 when no
// pairs are masked. 2/n means perfect prediction; values near 1 mean none.
inline double information_imbalance(const RankMatrix& source,
                                    const RankMatrix& target) {
    const Eigen::Index n = source.n();
    if (target.n() != n)
        throw MaskMismatchError("information_imbalance: size mismatch");
    if (source.exclusion_half_width != target.exclusion_half_width ||
        source.mask != target.mask)
        throw MaskMismatchError(
            "information_imbalance: source and target masks differ");

    // Uniform admissible counts (the unmasked case) are summed in integers
    // first so that identical spaces give exactly 2/n.
    const bool uniform =
        (source.admissible.array() == source.admissible(0)).all();
    if (uniform) {
        long long rank_sum = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            bool found = false;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (source.ranks(i, j) == 1) {
                    rank_sum += target.ranks(i, j);
                    found = true;
                    break;
                }
            }
            if (!found)
                throw MaskMismatchError(
                    "information_imbalance: row without a rank-1 neighbour");
        }
        return 2.0 * static_cast<double>(rank_sum) /
               (static_cast<double>(n) *
                static_cast<double>(source.admissible(0) + 1));
    }

    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (source.ranks(i, j) == 1) {
                total += 2.0 * static_cast<double>(target.ranks(i, j)) /
                         (static_cast<double>(n) *
                          static_cast<double>(source.admissible(i) + 1));
                break;
            }
        }
    }
    return total;
}

} // namespace causaldii

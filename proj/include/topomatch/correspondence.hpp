#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "topomatch/geodesy.hpp"

namespace topomatch {

/// One-to-one map between the N samples of each side: source sample i is
/// paired with target sample `target_of[i]`.
struct CorrespondenceMap {
  std::vector<int> target_of;
  std::vector<double> per_pair_d_iso;  ///< indexed by source sample
  double d_iso_mean = 0.0;             ///< D_iso, the mean of per_pair_d_iso

  std::size_t size() const { return target_of.size(); }
  std::vector<std::pair<int, int>> pairs() const;
};

/// Distortion of pairing source i with target j against the other pairs
/// (l, target_of[l]) of the map: the mean over l != i of
/// |g_S(i, l) - g_T(j, target_of[l])|.
double pair_distortion(const GeodesicTable& source, const GeodesicTable& target,
                       const std::vector<int>& target_of, int i, int j);

/// d_iso of the map's own pair for source sample i.
double d_iso(const GeodesicTable& source, const GeodesicTable& target, const std::vector<int>& target_of, int i);
/// D_iso: mean of d_iso over all pairs.
double total_distortion(const GeodesicTable& source, const GeodesicTable& target, const std::vector<int>& target_of);

/// Validates the permutation and fills the distortion statistics.
CorrespondenceMap make_map(const GeodesicTable& source, const GeodesicTable& target, std::vector<int> target_of);

struct SpectralEmbedding {
  Eigen::MatrixXd coords;       ///< N x k
  Eigen::VectorXd eigenvalues;  ///< k leading eigenvalues, negatives clamped to 0
};

/// Classical MDS of the table: eigen-decomposition of -1/2 J D^2 J. Each
/// axis is signed so its largest-magnitude entry (first on ties) is positive.
SpectralEmbedding mds_embed(const GeodesicTable& table, int k);

/// The 2^k axis sign flips of `target`; returns the mask (bit d = flip axis d)
/// minimizing the sum of squared nearest-neighbour distances from source points.
unsigned best_sign_flip(const SpectralEmbedding& source, const SpectralEmbedding& target);

/// Initial probabilities e^{-|x_i - y_j| / max |x - y|} after sign alignment.
Eigen::MatrixXd initialize(const SpectralEmbedding& source, const SpectralEmbedding& target);

/// Probabilities e^{-d} with d the hypothetical-pair distortion under `map`.
Eigen::MatrixXd e_step(const CorrespondenceMap& map, const GeodesicTable& source, const GeodesicTable& target);

struct MStepResult {
  std::vector<int> matching;  ///< maximum-likelihood assignment before refinement
  CorrespondenceMap map;      ///< after greedy refinement
  std::vector<double> trace;  ///< D_iso after matching, then after each accepted swap
  int swaps = 0;
};

/// Assignment maximizing the sum of log-probabilities, then greedy
/// refinement: pairs are visited in decreasing d_iso order (lowest index on
/// ties); the first pair that has an improving swap with another pair takes
/// the swap that lowers D_iso most, and the scan restarts. Stops when no
/// swap improves or after 10 N swaps.
MStepResult m_step(const Eigen::MatrixXd& prob, const GeodesicTable& source, const GeodesicTable& target);

struct EmOptions {
  int max_iters = 20;
  double tol = 1e-4;
};

struct EmResult {
  CorrespondenceMap map;            ///< lowest D_iso seen (earliest on ties)
  std::vector<double> history;      ///< D_iso after each M-step
  std::vector<std::vector<double>> greedy_traces;
  int iterations = 0;
};

/// initialize -> (M-step, E-step)* until |ΔD_iso| < tol or max_iters M-steps.
EmResult run_em(const GeodesicTable& source, const GeodesicTable& target, const SpectralEmbedding& source_embedding,
                const SpectralEmbedding& target_embedding, const EmOptions& options = {});

}  // namespace topomatch

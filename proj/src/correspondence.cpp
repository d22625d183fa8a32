#include "topomatch/correspondence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "topomatch/assignment.hpp"
#include "topomatch/errors.hpp"

namespace topomatch {

namespace {

constexpr double kImprovement = 1e-12;

void check_tables(const GeodesicTable& source, const GeodesicTable& target) {
  if (source.distances.rows() != target.distances.rows())
    throw PreconditionError("source and target tables differ in size");
  if (source.distances.rows() < 2) throw PreconditionError("at least two samples per side are required");
}

void check_permutation(const std::vector<int>& target_of, std::size_t n) {
  if (target_of.size() != n) throw PreconditionError("map size does not match the tables");
  std::vector<char> seen(n, 0);
  for (int j : target_of) {
    if (j < 0 || static_cast<std::size_t>(j) >= n || seen[j]) throw PreconditionError("map is not a bijection");
    seen[j] = 1;
  }
}

}  // namespace

std::vector<std::pair<int, int>> CorrespondenceMap::pairs() const {
  std::vector<std::pair<int, int>> out;
  for (std::size_t i = 0; i < target_of.size(); ++i) out.emplace_back(static_cast<int>(i), target_of[i]);
  return out;
}

double pair_distortion(const GeodesicTable& source, const GeodesicTable& target, const std::vector<int>& target_of,
                       int i, int j) {
  const auto& gs = source.distances;
  const auto& gt = target.distances;
  const int n = static_cast<int>(target_of.size());
  double sum = 0.0;
  for (int l = 0; l < n; ++l)
    if (l != i) sum += std::abs(gs(i, l) - gt(j, target_of[l]));
  return sum / (n - 1);
}

double d_iso(const GeodesicTable& source, const GeodesicTable& target, const std::vector<int>& target_of, int i) {
  check_tables(source, target);
  check_permutation(target_of, source.distances.rows());
  return pair_distortion(source, target, target_of, i, target_of[i]);
}

double total_distortion(const GeodesicTable& source, const GeodesicTable& target, const std::vector<int>& target_of) {
  return make_map(source, target, target_of).d_iso_mean;
}

CorrespondenceMap make_map(const GeodesicTable& source, const GeodesicTable& target, std::vector<int> target_of) {
  check_tables(source, target);
  check_permutation(target_of, source.distances.rows());
  CorrespondenceMap map;
  map.target_of = std::move(target_of);
  const int n = static_cast<int>(map.size());
  map.per_pair_d_iso.resize(n);
  for (int i = 0; i < n; ++i)
    map.per_pair_d_iso[i] = pair_distortion(source, target, map.target_of, i, map.target_of[i]);
  map.d_iso_mean = std::accumulate(map.per_pair_d_iso.begin(), map.per_pair_d_iso.end(), 0.0) / n;
  return map;
}

SpectralEmbedding mds_embed(const GeodesicTable& table, int k) {
  const auto n = table.distances.rows();
  if (n < 2) throw PreconditionError("MDS needs at least two samples");
  if (k < 1) throw PreconditionError("embedding dimension must be positive");

  const Eigen::MatrixXd sq = table.distances.array().square().matrix();
  const Eigen::MatrixXd centering =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  Eigen::MatrixXd gram = -0.5 * centering * sq * centering;
  gram = 0.5 * (gram + gram.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw Error("MDS eigen-decomposition failed");

  SpectralEmbedding out;
  out.coords = Eigen::MatrixXd::Zero(n, k);
  out.eigenvalues = Eigen::VectorXd::Zero(k);
  for (int d = 0; d < k && d < n; ++d) {
    const Eigen::Index src = n - 1 - d;  // eigenvalues come in ascending order
    const double lambda = std::max(0.0, eig.eigenvalues()[src]);
    Eigen::VectorXd axis = eig.eigenvectors().col(src);
    const double peak = axis.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::abs(axis[i]) >= peak * (1.0 - 1e-9)) {
        if (axis[i] < 0) axis = -axis;
        break;
      }
    out.eigenvalues[d] = lambda;
    out.coords.col(d) = axis * std::sqrt(lambda);
  }
  return out;
}

unsigned best_sign_flip(const SpectralEmbedding& source, const SpectralEmbedding& target) {
  const Eigen::MatrixXd& x = source.coords;
  const Eigen::MatrixXd& y = target.coords;
  if (x.cols() != y.cols()) throw PreconditionError("embedding dimensions differ");
  const int k = static_cast<int>(x.cols());
  if (k > 16) throw PreconditionError("sign-flip search supports at most 16 dimensions");

  unsigned best_mask = 0;
  double best_cost = 0.0;
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    Eigen::RowVectorXd sign(k);
    for (int d = 0; d < k; ++d) sign[d] = (mask >> d) & 1u ? -1.0 : 1.0;
    const Eigen::MatrixXd yf = y.array().rowwise() * sign.array();
    double cost = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      cost += (yf.rowwise() - x.row(i)).rowwise().squaredNorm().minCoeff();
    if (mask == 0 || cost < best_cost) {
      best_cost = cost;
      best_mask = mask;
    }
  }
  return best_mask;
}

Eigen::MatrixXd initialize(const SpectralEmbedding& source, const SpectralEmbedding& target) {
  const unsigned mask = best_sign_flip(source, target);
  const Eigen::MatrixXd& x = source.coords;
  Eigen::MatrixXd y = target.coords;
  for (int d = 0; d < y.cols(); ++d)
    if ((mask >> d) & 1u) y.col(d) = -y.col(d);

  Eigen::MatrixXd dist(x.rows(), y.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) dist.row(i) = (y.rowwise() - x.row(i)).rowwise().norm().transpose();
  const double scale = dist.maxCoeff();
  if (scale <= 0.0) return Eigen::MatrixXd::Ones(x.rows(), y.rows());
  return (-dist.array() / scale).exp().matrix();
}

Eigen::MatrixXd e_step(const CorrespondenceMap& map, const GeodesicTable& source, const GeodesicTable& target) {
  check_tables(source, target);
  check_permutation(map.target_of, source.distances.rows());
  const int n = static_cast<int>(map.size());
  Eigen::MatrixXd prob(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) prob(i, j) = std::exp(-pair_distortion(source, target, map.target_of, i, j));
  return prob;
}

MStepResult m_step(const Eigen::MatrixXd& prob, const GeodesicTable& source, const GeodesicTable& target) {
  check_tables(source, target);
  const int n = static_cast<int>(source.distances.rows());
  if (prob.rows() != n || prob.cols() != n) throw PreconditionError("probability matrix does not match the tables");
  if ((prob.array() <= 0.0).any()) throw PreconditionError("probabilities must be positive");

  MStepResult out;
  out.matching = max_weight_assignment(prob.array().log().matrix());
  CorrespondenceMap map = make_map(source, target, out.matching);
  out.trace.push_back(map.d_iso_mean);

  const auto& gs = source.distances;
  const auto& gt = target.distances;
  std::vector<int>& pi = map.target_of;
  // Change of D_iso when source samples i and l exchange targets. Only
  // terms touching i or l move, and the (i, l) term itself is unchanged.
  auto swap_delta = [&](int i, int l) {
    double delta = 0.0;
    for (int b = 0; b < n; ++b) {
      if (b == i || b == l) continue;
      const int tb = pi[b];
      delta += std::abs(gs(i, b) - gt(pi[l], tb)) - std::abs(gs(i, b) - gt(pi[i], tb));
      delta += std::abs(gs(l, b) - gt(pi[i], tb)) - std::abs(gs(l, b) - gt(pi[l], tb));
    }
    return 2.0 * delta / (static_cast<double>(n) * (n - 1));
  };

  const int max_swaps = 10 * n;
  std::vector<int> order(n);
  while (out.swaps < max_swaps) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return map.per_pair_d_iso[a] > map.per_pair_d_iso[b]; });
    bool swapped = false;
    for (int i : order) {
      int best_l = -1;
      double best_delta = -kImprovement;
      for (int l = 0; l < n; ++l) {
        if (l == i) continue;
        const double delta = swap_delta(i, l);
        if (delta < best_delta) {
          best_delta = delta;
          best_l = l;
        }
      }
      if (best_l < 0) continue;
      std::swap(pi[i], pi[best_l]);
      map = make_map(source, target, std::move(pi));
      out.trace.push_back(map.d_iso_mean);
      ++out.swaps;
      swapped = true;
      break;
    }
    if (!swapped) break;
  }
  out.map = std::move(map);
  return out;
}

EmResult run_em(const GeodesicTable& source, const GeodesicTable& target, const SpectralEmbedding& source_embedding,
                const SpectralEmbedding& target_embedding, const EmOptions& options) {
  check_tables(source, target);
  if (options.max_iters < 1) throw PreconditionError("EM needs at least one iteration");
  EmResult result;
  Eigen::MatrixXd prob = initialize(source_embedding, target_embedding);
  for (int it = 0; it < options.max_iters; ++it) {
    MStepResult step = m_step(prob, source, target);
    const double d = step.map.d_iso_mean;
    result.history.push_back(d);
    result.greedy_traces.push_back(std::move(step.trace));
    result.iterations = it + 1;
    if (it == 0 || d < result.map.d_iso_mean) result.map = step.map;
    if (it > 0 && std::abs(d - result.history[it - 1]) < options.tol) break;
    prob = e_step(step.map, source, target);
  }
  return result;
}

}  // namespace topomatch

#include "congestion/design.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace congestion {

namespace {

Eigen::MatrixXd to_matrix(const FeatureSet& features) {
  const Eigen::Index rows = features.empty() ? 0 : static_cast<Eigen::Index>(features[0].size());
  Eigen::MatrixXd X(rows, static_cast<Eigen::Index>(features.size()));
  for (std::size_t a = 0; a < features.size(); ++a) {
    if (features[a].size() != static_cast<std::size_t>(rows))
      throw std::invalid_argument("feature vectors must share a dimension");
    for (Eigen::Index j = 0; j < rows; ++j)
      X(j, static_cast<Eigen::Index>(a)) = features[a][static_cast<std::size_t>(j)];
  }
  return X;
}

}  // namespace

DesignAllocation g_optimal(const FeatureSet& features, double tol) {
  if (features.empty()) throw std::invalid_argument("feature set must be non-empty");
  const std::size_t num_actions = features.size();
  const Eigen::MatrixXd X = to_matrix(features);

  std::vector<std::size_t> support;  // actions with a nonzero feature vector
  for (std::size_t a = 0; a < num_actions; ++a)
    if (X.col(static_cast<Eigen::Index>(a)).squaredNorm() > 0.0) support.push_back(a);

  DesignAllocation out;
  out.weights.assign(num_actions, 0.0);
  if (support.empty()) {
    // Only the empty action: point mass, zero leverage.
    out.weights[0] = 1.0;
    return out;
  }

  // Orthonormal basis of the feature span; everything below runs in span
  // coordinates so Sigma(lambda) stays invertible.
  Eigen::MatrixXd S(X.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t c = 0; c < support.size(); ++c)
    S.col(static_cast<Eigen::Index>(c)) = X.col(static_cast<Eigen::Index>(support[c]));
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(S);
  qr.setThreshold(1e-10);
  const Eigen::Index rank = qr.rank();
  out.span_rank = static_cast<int>(rank);
  const Eigen::MatrixXd basis =
      Eigen::MatrixXd(qr.householderQ()).leftCols(rank);  // X.rows() x rank
  const Eigen::MatrixXd psi = basis.transpose() * S;      // rank x |support|

  Eigen::VectorXd lambda =
      Eigen::VectorXd::Constant(static_cast<Eigen::Index>(support.size()),
                                1.0 / static_cast<double>(support.size()));
  const double target = static_cast<double>(rank) * (1.0 + tol);
  const int max_iters = 100000;
  const auto sigma_of = [&](const Eigen::VectorXd& w) {
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(rank, rank);
    for (Eigen::Index a = 0; a < psi.cols(); ++a)
      sigma += w(a) * psi.col(a) * psi.col(a).transpose();
    return sigma;
  };

  out.tol_met = false;
  for (int iter = 0; iter < max_iters; ++iter) {
    const Eigen::MatrixXd inv = sigma_of(lambda).ldlt().solve(
        Eigen::MatrixXd::Identity(rank, rank));
    Eigen::Index worst = 0;
    double g = -1.0;
    for (Eigen::Index a = 0; a < psi.cols(); ++a) {
      const double lev = psi.col(a).dot(inv * psi.col(a));
      if (lev > g) {
        g = lev;
        worst = a;
      }
    }
    out.achieved_g = g;
    if (g <= target) {
      out.tol_met = true;
      break;
    }
    // Closed-form D-optimal step toward the max-leverage vertex.
    const double d = static_cast<double>(rank);
    const double alpha = (g / d - 1.0) / (g - 1.0);
    lambda *= (1.0 - alpha);
    lambda(worst) += alpha;
  }

  for (std::size_t c = 0; c < support.size(); ++c)
    out.weights[support[c]] = lambda(static_cast<Eigen::Index>(c));
  return out;
}

std::vector<double> semi_bandit_exploration(const std::vector<std::vector<int>>& action_set,
                                            int num_facilities) {
  if (action_set.empty()) throw std::invalid_argument("action set must be non-empty");
  const std::size_t num_actions = action_set.size();

  std::vector<bool> covered(static_cast<std::size_t>(num_facilities), false);
  std::vector<bool> in_cover(num_actions, false);
  std::size_t cover_size = 0;
  for (std::size_t a = 0; a < num_actions; ++a) {
    bool adds = false;
    for (int f : action_set[a])
      if (!covered[static_cast<std::size_t>(f)]) adds = true;
    if (adds) {
      in_cover[a] = true;
      ++cover_size;
      for (int f : action_set[a]) covered[static_cast<std::size_t>(f)] = true;
    }
  }

  std::vector<double> rho(num_actions, 0.0);
  const double cover_mass = 1.0 / (2.0 * static_cast<double>(num_facilities));
  double remaining = 1.0 - cover_mass * static_cast<double>(cover_size);
  const std::size_t rest = num_actions - cover_size;
  for (std::size_t a = 0; a < num_actions; ++a) {
    if (in_cover[a])
      rho[a] = cover_mass;
    else if (rest > 0)
      rho[a] = remaining / static_cast<double>(rest);
  }
  if (rest == 0)  // top the cover up uniformly
    for (std::size_t a = 0; a < num_actions; ++a)
      rho[a] += remaining / static_cast<double>(cover_size);
  return rho;
}

}  // namespace congestion

#pragma once

// D-optimal subset selection by Fedorov exchange.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "espin/core.hpp"

namespace espin {

struct DesignSelection {
  std::vector<std::size_t> chosen;  ///< sorted candidate row indices
  double log_det = -std::numeric_limits<double>::infinity();
  /// Phi_D = det(X'X)^(1/p) over the chosen rows.
  double criterion = 0.0;
  /// Phi_D after each accepted exchange of the winning run (first entry is the start).
  std::vector<double> trace;
  std::size_t restarts_used = 0;

  double det() const { return std::exp(log_det); }
};

struct FedorovOptions {
  std::size_t max_iter = 100;  ///< full passes over the design
  std::size_t starts = 5;      ///< independent random starting designs
  std::size_t max_restarts = 5;
  double min_gain = 1e-9;  ///< relative determinant increase required to swap
};

namespace detail {

inline double log_det_of(const Eigen::MatrixXd& X, const std::vector<std::size_t>& rows) {
  const auto p = X.cols();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(p, p);
  for (auto r : rows) M.selfadjointView<Eigen::Lower>().rankUpdate(X.row(static_cast<Eigen::Index>(r)).transpose());
  M = M.selfadjointView<Eigen::Lower>();
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const auto& L = llt.matrixL();
  double ld = 0;
  for (Eigen::Index i = 0; i < p; ++i) {
    const double d = L(i, i);
    if (!(d > 0)) return -std::numeric_limits<double>::infinity();
    ld += 2.0 * std::log(d);
  }
  // Reject numerically singular designs relative to the matrix scale.
  const double scale = M.diagonal().maxCoeff();
  if (!(scale > 0) || ld < static_cast<double>(p) * std::log(scale) - 30.0 * static_cast<double>(p))
    return -std::numeric_limits<double>::infinity();
  return ld;
}

/// Random order, keep rows that raise the rank, then top up at random.
inline std::vector<std::size_t> nonsingular_start(const Eigen::MatrixXd& X, std::size_t n, Stream& rng) {
  const auto N = static_cast<std::size_t>(X.rows());
  const auto p = static_cast<std::size_t>(X.cols());
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);

  std::vector<std::size_t> chosen;
  std::vector<char> used(N, 0);
  Eigen::MatrixXd basis(static_cast<Eigen::Index>(p), 0);
  for (auto r : order) {
    if (chosen.size() >= p) break;
    Eigen::VectorXd v = X.row(static_cast<Eigen::Index>(r)).transpose();
    const double norm0 = v.norm();
    if (norm0 == 0) continue;
    for (Eigen::Index j = 0; j < basis.cols(); ++j) v -= basis.col(j).dot(v) * basis.col(j);
    if (v.norm() > 1e-8 * norm0) {
      basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
      basis.col(basis.cols() - 1) = v.normalized();
      chosen.push_back(r);
      used[r] = 1;
    }
  }
  for (auto r : order) {
    if (chosen.size() >= n) break;
    if (!used[r]) {
      chosen.push_back(r);
      used[r] = 1;
    }
  }
  return chosen;
}

}  // namespace detail

/// Select `n` rows of `candidates` (n_candidates x p model matrix) maximizing
/// det(X'X). Each pass visits every design row and swaps it with the
/// out-of-design candidate giving the largest determinant increase, if any.
inline DesignSelection federov_select(const Eigen::MatrixXd& candidates, std::size_t n, std::uint64_t seed,
                                      const FedorovOptions& opt = {}) {
  const auto N = static_cast<std::size_t>(candidates.rows());
  const auto p = static_cast<std::size_t>(candidates.cols());
  if (n < p)
    throw Error("design_too_small", "design size " + std::to_string(n) + " is below the parameter count " +
                                        std::to_string(p));
  if (n > N)
    throw Error("design_too_large", "design size " + std::to_string(n) + " exceeds the " + std::to_string(N) +
                                        " candidates");

  DesignSelection best;
  if (n == N) {
    best.chosen.resize(N);
    std::iota(best.chosen.begin(), best.chosen.end(), std::size_t{0});
    best.log_det = detail::log_det_of(candidates, best.chosen);
    best.trace = {std::exp(best.log_det / static_cast<double>(p))};
  }

  const Eigen::MatrixXd& X = candidates;
  for (std::size_t start = 0; start < opt.starts && n < N; ++start) {
    std::vector<std::size_t> design;
    double log_det = -std::numeric_limits<double>::infinity();
    std::size_t restarts = 0;
    for (; restarts <= opt.max_restarts; ++restarts) {
      Stream rng(seed, start * 1000 + restarts);
      design = detail::nonsingular_start(X, n, rng);
      log_det = detail::log_det_of(X, design);
      if (std::isfinite(log_det)) break;
    }
    if (!std::isfinite(log_det)) {
      if (start == 0)
        throw Error("singular_design", "no non-singular starting design after " +
                                           std::to_string(opt.max_restarts) + " restarts");
      continue;
    }

    std::vector<char> in(N, 0);
    for (auto r : design) in[r] = 1;
    const double inv_p = 1.0 / static_cast<double>(p);
    std::vector<double> trace{std::exp(log_det * inv_p)};

    for (std::size_t iter = 0; iter < opt.max_iter; ++iter) {
      // Fresh inverse each pass; rank-one updates within the pass.
      Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
      for (auto r : design) M.noalias() += X.row(static_cast<Eigen::Index>(r)).transpose() * X.row(static_cast<Eigen::Index>(r));
      Eigen::MatrixXd Minv = M.ldlt().solve(Eigen::MatrixXd::Identity(M.rows(), M.cols()));
      Eigen::MatrixXd V = X * Minv;  // row j: x_j' M^-1
      Eigen::VectorXd d = (V.array() * X.array()).rowwise().sum();

      bool improved = false;
      for (std::size_t slot = 0; slot < design.size(); ++slot) {
        const auto i = static_cast<Eigen::Index>(design[slot]);
        const Eigen::VectorXd dij = V * X.row(i).transpose();  // d(x_j, x_i)
        const double di = d(i);
        double best_delta = opt.min_gain;
        Eigen::Index best_j = -1;
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(N); ++j) {
          if (in[static_cast<std::size_t>(j)]) continue;
          const double delta = d(j) - di - (di * d(j) - dij(j) * dij(j));
          if (delta > best_delta) {
            best_delta = delta;
            best_j = j;
          }
        }
        if (best_j < 0) continue;

        // Exchange: add x_j, remove x_i; Sherman-Morrison on M^-1 and V.
        auto add_row = [&](Eigen::Index r, double sign) {
          const Eigen::VectorXd u = Minv * X.row(r).transpose();
          const double denom = 1.0 + sign * X.row(r).dot(u);
          const Eigen::VectorXd Vu = X * u;
          Minv.noalias() -= (sign / denom) * u * u.transpose();
          V.noalias() -= (sign / denom) * Vu * u.transpose();
          d.array() -= (sign / denom) * Vu.array().square();
        };
        add_row(best_j, 1.0);
        add_row(i, -1.0);
        in[static_cast<std::size_t>(i)] = 0;
        in[static_cast<std::size_t>(best_j)] = 1;
        design[slot] = static_cast<std::size_t>(best_j);
        log_det += std::log1p(best_delta);
        trace.push_back(std::exp(log_det * inv_p));
        improved = true;
      }
      if (!improved) break;
    }

    std::sort(design.begin(), design.end());
    const double exact = detail::log_det_of(X, design);
    if (exact > best.log_det) {
      best.chosen = design;
      best.log_det = exact;
      best.trace = std::move(trace);
      best.restarts_used = restarts;
    }
  }

  best.criterion = std::isfinite(best.log_det) ? std::exp(best.log_det / static_cast<double>(p)) : 0.0;
  return best;
}

}  // namespace espin

#pragma once

// Random dictionaries and the exhaustive minimal-residual oracle, shared by the
// unit tests and the acceptance binary.

#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "secg/dictionary.hpp"
#include "secg/pursuit.hpp"

namespace secg::testing {

/// n_b x m dictionary of unit-norm Gaussian atoms with the constant atom first.
inline Dictionary random_dictionary(std::size_t n_b, std::size_t m, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n_b), static_cast<Eigen::Index>(m));
  a.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(n_b)));
  for (Eigen::Index c = 1; c < a.cols(); ++c) {
    for (Eigen::Index r = 0; r < a.rows(); ++r) a(r, c) = g(rng);
    a.col(c).normalize();
  }
  DictionaryConfig cfg;
  cfg.n_b = n_b;
  cfg.m_dct = 1;
  return Dictionary(cfg, std::move(a), std::vector<AtomProvenance>(m));
}

inline Eigen::VectorXd random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = g(rng);
  return v;
}

/// Least-squares residual of f on the columns `idx`.
inline Eigen::VectorXd projection_residual(const Dictionary& d, const std::vector<std::size_t>& idx,
                                           const Eigen::VectorXd& f) {
  Eigen::MatrixXd a(f.size(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) a.col(static_cast<Eigen::Index>(i)) = d.atom(idx[i]);
  const Eigen::VectorXd c = a.completeOrthogonalDecomposition().solve(f);
  return f - a * c;
}

struct OracleChoice {
  double best_norm = std::numeric_limits<double>::infinity();
  std::vector<double> norms;  // per atom; +inf for selected atoms
};

/// Tries every unselected atom and records the new residual norm.
inline OracleChoice exhaustive_step(const Dictionary& d, const std::vector<std::size_t>& selected,
                                    const Eigen::VectorXd& f) {
  OracleChoice o;
  o.norms.assign(d.size(), std::numeric_limits<double>::infinity());
  std::vector<bool> used(d.size(), false);
  for (auto s : selected) used[s] = true;
  for (std::size_t n = 0; n < d.size(); ++n) {
    if (used[n]) continue;
    auto idx = selected;
    idx.push_back(n);
    o.norms[n] = projection_residual(d, idx, f).norm();
    o.best_norm = std::min(o.best_norm, o.norms[n]);
  }
  return o;
}

}  // namespace secg::testing

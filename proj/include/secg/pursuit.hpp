#pragma once

// Optimized Orthogonal Matching Pursuit with the constant atom always selected
// first. Each iteration picks the atom that minimizes the new residual norm,
// orthogonalizes it against the selected set (Gram-Schmidt plus one
// re-orthogonalization pass), updates the biorthogonal duals of the selected
// atoms and the residual. Coefficients are the inner products of the duals
// with the segment.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "secg/dictionary.hpp"
#include "secg/error.hpp"

namespace secg {

using Segment = Eigen::VectorXd;

struct PursuitOptions {
  double eps_span = 1e-10;  // denominators or ||w|| at or below this mean "already in the span"
};

class PursuitState;
PursuitState oomp_init(const Segment& segment, const Dictionary& dict, PursuitOptions opts = {});
std::optional<std::size_t> oomp_select(const PursuitState& state, const Dictionary& dict);
void oomp_extend(PursuitState& state, const Dictionary& dict, std::size_t new_index);

/// OOMP workspace for one segment. Single owner; the dictionary is only read.
class PursuitState {
 public:
  std::span<const std::size_t> selected() const noexcept { return selected_; }
  std::size_t size() const noexcept { return selected_.size(); }
  bool is_selected(std::size_t n) const { return flags_[n] & kSelected; }

  /// Orthogonal vectors w_i (unnormalized, as produced by Gram-Schmidt).
  Eigen::VectorXd orthogonal(std::size_t i) const {
    return q_.col(static_cast<Eigen::Index>(i)) * w_norms_[i];
  }
  /// Biorthogonal duals b_i: <b_i, d_{l_j}> = delta_ij.
  auto biorthogonal(std::size_t i) const { return b_.col(static_cast<Eigen::Index>(i)); }
  auto biorthogonal() const { return b_.leftCols(static_cast<Eigen::Index>(size())); }

  const Eigen::VectorXd& residual() const noexcept { return residual_; }
  double residual_norm() const { return residual_.norm(); }
  const Segment& segment() const noexcept { return segment_; }

  /// Cached <d_n, r> for every atom.
  const Eigen::VectorXd& correlations() const noexcept { return corr_; }
  /// Cached sum_i <d_n, w~_i>^2 for every atom (the denominator is 1 minus this).
  const Eigen::VectorXd& projected_energy() const noexcept { return energy_; }

  /// Coefficients c(n) = <b_n, f> for the current selection.
  Eigen::VectorXd coefficients() const { return biorthogonal().transpose() * segment_; }

  /// Excludes an atom from future selection without adding it.
  void block(std::size_t n) { flags_.at(n) |= kBlocked; }

  const PursuitOptions& options() const noexcept { return opts_; }

 private:
  friend PursuitState oomp_init(const Segment&, const Dictionary&, PursuitOptions);
  friend std::optional<std::size_t> oomp_select(const PursuitState&, const Dictionary&);
  friend void oomp_extend(PursuitState&, const Dictionary&, std::size_t);

  static constexpr unsigned char kSelected = 1;
  static constexpr unsigned char kBlocked = 2;

  void ensure_capacity(std::size_t k) {
    if (static_cast<Eigen::Index>(k) <= q_.cols()) return;
    const auto cap = static_cast<Eigen::Index>(std::max<std::size_t>(k, 2 * static_cast<std::size_t>(q_.cols())));
    q_.conservativeResize(Eigen::NoChange, cap);
    b_.conservativeResize(Eigen::NoChange, cap);
  }

  PursuitOptions opts_;
  Segment segment_;
  std::vector<std::size_t> selected_;
  std::vector<unsigned char> flags_;
  Eigen::MatrixXd q_;  // normalized w~_i, one per column
  std::vector<double> w_norms_;
  Eigen::MatrixXd b_;
  Eigen::VectorXd residual_;
  Eigen::VectorXd corr_;
  Eigen::VectorXd energy_;
};

/// Starts with the constant atom d_1 (position 0): w_1 = b_1 = d_1.
inline PursuitState oomp_init(const Segment& segment, const Dictionary& dict, PursuitOptions opts) {
  if (static_cast<std::size_t>(segment.size()) != dict.n_b())
    throw DimensionError("segment length " + std::to_string(segment.size()) + " != n_b " +
                         std::to_string(dict.n_b()));
  if (dict.size() == 0) throw DimensionError("empty dictionary");
  PursuitState s;
  s.opts_ = opts;
  s.segment_ = segment;
  s.flags_.assign(dict.size(), 0);
  const auto n_b = static_cast<Eigen::Index>(dict.n_b());
  s.q_.resize(n_b, 16);
  s.b_.resize(n_b, 16);

  const auto d1 = dict.atom(0);
  const double d1_norm = d1.norm();
  s.q_.col(0) = d1 / d1_norm;
  s.w_norms_.push_back(d1_norm);
  s.b_.col(0) = d1 / (d1_norm * d1_norm);
  s.selected_.push_back(0);
  s.flags_[0] |= PursuitState::kSelected;

  const double alpha = s.q_.col(0).dot(segment);
  s.residual_ = segment - alpha * s.q_.col(0);
  const Eigen::VectorXd proj = dict.atoms().transpose() * s.q_.col(0);
  s.energy_ = proj.array().square();
  s.corr_ = dict.atoms().transpose() * s.residual_;
  return s;
}

/// argmax over unselected n of <d_n, r>^2 / (1 - sum_i <d_n, w~_i>^2), skipping
/// atoms whose denominator is <= eps_span. Lowest index wins ties. Returns
/// nullopt when every candidate is excluded (span exhausted).
inline std::optional<std::size_t> oomp_select(const PursuitState& state, const Dictionary& dict) {
  std::optional<std::size_t> best;
  double best_score = -1.0;
  const double eps = state.opts_.eps_span;
  for (std::size_t n = 0; n < dict.size(); ++n) {
    if (state.flags_[n]) continue;
    const auto i = static_cast<Eigen::Index>(n);
    const double den = 1.0 - state.energy_(i);
    if (den <= eps) continue;
    const double score = state.corr_(i) * state.corr_(i) / den;
    if (score > best_score) {
      best_score = score;
      best = n;
    }
  }
  return best;
}

/// Adds atom `new_index`. Throws DegenerateAtomError (state unchanged) when the
/// atom is numerically inside the span of the selection.
inline void oomp_extend(PursuitState& state, const Dictionary& dict, std::size_t new_index) {
  if (new_index >= dict.size()) throw ConfigError("atom index out of range");
  if (state.is_selected(new_index)) throw ConfigError("atom already selected");
  const auto k = static_cast<Eigen::Index>(state.size());
  const auto d = dict.atom(new_index);
  const auto q = state.q_.leftCols(k);

  // Gram-Schmidt followed by one re-orthogonalization pass.
  Eigen::VectorXd w = d - q * (q.transpose() * d);
  w -= q * (q.transpose() * w);
  const double w_norm = w.norm();
  if (!(w_norm > state.opts_.eps_span))
    throw DegenerateAtomError("atom " + std::to_string(new_index) + " lies in the selected span");

  state.ensure_capacity(static_cast<std::size_t>(k) + 1);
  // Biorthogonal update: b_n <- b_n - b_new <d_new, b_n>, b_new = w / ||w||^2.
  const Eigen::VectorXd b_new = w / (w_norm * w_norm);
  auto b_old = state.b_.leftCols(k);
  const Eigen::RowVectorXd overlap = d.transpose() * b_old;
  b_old.noalias() -= b_new * overlap;
  state.b_.col(k) = b_new;

  const Eigen::VectorXd w_unit = w / w_norm;
  state.q_.col(k) = w_unit;
  state.w_norms_.push_back(w_norm);
  state.selected_.push_back(new_index);
  state.flags_[new_index] |= PursuitState::kSelected;

  // r <- r - <w, f> w / ||w||^2, and the cached per-atom quantities.
  const double alpha = w_unit.dot(state.segment_);
  state.residual_ -= alpha * w_unit;
  const Eigen::VectorXd proj = dict.atoms().transpose() * w_unit;
  state.energy_.array() += proj.array().square();
  state.corr_ -= alpha * proj;
}

// ----------------------------------------------------------------------
// Segment and record drivers
// ----------------------------------------------------------------------

struct SegmentApproximation {
  std::vector<std::size_t> indices;  // dictionary positions, selection order; indices[0] == 0
  std::vector<double> coefficients;
  double residual_norm = 0.0;

  std::size_t size() const noexcept { return indices.size(); }
  friend bool operator==(const SegmentApproximation&, const SegmentApproximation&) = default;
};

/// sum_n c(n) d_{l_n}
inline Segment reconstruct(const SegmentApproximation& a, const Dictionary& dict) {
  Segment out = Segment::Zero(static_cast<Eigen::Index>(dict.n_b()));
  for (std::size_t n = 0; n < a.size(); ++n) out += a.coefficients[n] * dict.atom(a.indices[n]);
  return out;
}

/// <b_n, f> followed by one refinement step against the projection f - r.
/// The recursive dual update loses accuracy when the selected atoms are badly
/// conditioned (near the full span); the step restores it at O(n_b k) cost and
/// leaves well-conditioned coefficients unchanged to rounding.
inline Eigen::VectorXd refined_coefficients(const PursuitState& state, const Dictionary& dict) {
  Eigen::VectorXd c = state.coefficients();
  Eigen::VectorXd e = state.segment() - state.residual();
  for (std::size_t i = 0; i < state.size(); ++i) e -= c(static_cast<Eigen::Index>(i)) * dict.atom(state.selected()[i]);
  c.noalias() += state.biorthogonal().transpose() * e;
  return c;
}

/// Runs OOMP until ||r|| <= rho, k_max atoms are selected, or the span is exhausted.
inline SegmentApproximation approximate_segment(const Segment& segment, const Dictionary& dict, double rho,
                                                std::size_t k_max, PursuitOptions opts = {}) {
  if (!(rho >= 0.0)) throw ConfigError("rho must be >= 0");
  if (k_max < 1 || k_max > dict.n_b()) throw ConfigError("k_max must be in [1, n_b]");
  PursuitState state = oomp_init(segment, dict, opts);
  double r_norm = state.residual_norm();
  while (r_norm > rho && state.size() < k_max) {
    const auto next = oomp_select(state, dict);
    if (!next) break;
    try {
      oomp_extend(state, dict, *next);
    } catch (const DegenerateAtomError&) {
      state.block(*next);
      continue;
    }
    r_norm = state.residual_norm();
  }
  SegmentApproximation out;
  out.indices.assign(state.selected().begin(), state.selected().end());
  const Eigen::VectorXd c = refined_coefficients(state, dict);
  out.coefficients.assign(c.data(), c.data() + c.size());
  out.residual_norm = r_norm;
  return out;
}

struct RecordPursuitOptions {
  std::size_t k_max = 0;  // 0: n_b / 2
  unsigned jobs = 1;
  PursuitOptions pursuit{};
};

/// Approximates every segment with rho_q = prd0 ||f_q|| / 100. Segments are
/// independent; with jobs > 1 they are distributed over threads and the result
/// does not depend on scheduling.
inline std::vector<SegmentApproximation> approximate_record(std::span<const Segment> segments,
                                                            const Dictionary& dict, double prd0,
                                                            RecordPursuitOptions opts = {}) {
  if (!(prd0 >= 0.0)) throw ConfigError("prd0 must be >= 0");
  for (const auto& s : segments)
    if (static_cast<std::size_t>(s.size()) != dict.n_b()) throw DimensionError("segment length != n_b");
  const std::size_t k_max = opts.k_max ? opts.k_max : std::max<std::size_t>(1, dict.n_b() / 2);
  std::vector<SegmentApproximation> out(segments.size());

  auto work = [&](std::size_t q) {
    const double norm = segments[q].norm();
    if (norm == 0.0) {
      out[q] = SegmentApproximation{{0}, {0.0}, 0.0};
      return;
    }
    out[q] = approximate_segment(segments[q], dict, prd0 * norm / 100.0, k_max, opts.pursuit);
  };

  const unsigned jobs = std::max(1U, std::min<unsigned>(opts.jobs, static_cast<unsigned>(segments.size())));
  if (jobs <= 1) {
    for (std::size_t q = 0; q < segments.size(); ++q) work(q);
    return out;
  }
  std::vector<std::exception_ptr> errors(jobs);
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < jobs; ++t)
      pool.emplace_back([&, t] {
        try {
          for (std::size_t q = t; q < segments.size(); q += jobs) work(q);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace secg

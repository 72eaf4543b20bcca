#pragma once

// Truncated Fock-space engine over the joint modes c_k. States are sparse
// maps from occupation multi-indices to complex amplitudes; the pre-quench
// eigenstates are built from exp(-F_lk c_l^dag c_k^dag / 2)|0> and the
// Bogoliubov-expanded a^dagger operators. Time evolution is diagonal in this
// basis, so everything here is exact up to truncation.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bogoliubov.hpp"
#include "core_model.hpp"
#include "errors.hpp"

namespace quenchlab {

using Occupation = std::vector<std::uint8_t>;
using Amplitude = std::complex<double>;
using SparseState = std::map<Occupation, Amplitude>;

inline int total_occupation(const Occupation &occ) {
  int total = 0;
  for (auto n : occ)
    total += n;
  return total;
}

/// Per-mode cutoff plus an optional cap on the total excitation number.
struct TruncationLimits {
  int cutoff = 4;
  std::optional<int> max_total;

  bool contains(const Occupation &occ) const {
    for (auto n : occ)
      if (n > cutoff)
        return false;
    return !max_total || total_occupation(occ) <= *max_total;
  }
};

/// Lexicographically enumerated truncated basis.
class TruncatedBasis {
public:
  TruncatedBasis(int modes, TruncationLimits limits) : modes_(modes), limits_(limits) {
    if (modes < 1 || limits.cutoff < 0 || limits.cutoff > 255)
      throw InvalidArgument("invalid truncated basis parameters");
    Occupation occ(static_cast<std::size_t>(modes), 0);
    enumerate(occ, 0, 0);
    for (std::size_t i = 0; i < states_.size(); ++i)
      index_.emplace(states_[i], i);
  }

  int modes() const { return modes_; }
  const TruncationLimits &limits() const { return limits_; }
  std::size_t size() const { return states_.size(); }
  const std::vector<Occupation> &states() const { return states_; }
  bool contains(const Occupation &occ) const { return index_.count(occ) != 0; }
  std::optional<std::size_t> index_of(const Occupation &occ) const {
    const auto it = index_.find(occ);
    if (it == index_.end())
      return std::nullopt;
    return it->second;
  }

private:
  void enumerate(Occupation &occ, std::size_t mode, int total) {
    if (mode == occ.size()) {
      states_.push_back(occ);
      return;
    }
    for (int n = 0; n <= limits_.cutoff; ++n) {
      if (limits_.max_total && total + n > *limits_.max_total)
        break;
      occ[mode] = static_cast<std::uint8_t>(n);
      enumerate(occ, mode + 1, total + n);
    }
    occ[mode] = 0;
  }

  int modes_;
  TruncationLimits limits_;
  std::vector<Occupation> states_;
  std::map<Occupation, std::size_t> index_;
};

// Ladder operators on sparse states.

inline SparseState apply_annihilate(const SparseState &state, int k) {
  SparseState out;
  for (const auto &[occ, amp] : state) {
    const auto n = occ[static_cast<std::size_t>(k)];
    if (n == 0)
      continue;
    Occupation next = occ;
    --next[static_cast<std::size_t>(k)];
    out[next] += amp * std::sqrt(static_cast<double>(n));
  }
  return out;
}

inline SparseState apply_create(const SparseState &state, int k) {
  SparseState out;
  for (const auto &[occ, amp] : state) {
    const auto n = occ[static_cast<std::size_t>(k)];
    if (n == 255)
      throw CutoffExceeded("occupation overflow in mode " + std::to_string(k + 1));
    Occupation next = occ;
    ++next[static_cast<std::size_t>(k)];
    out[next] += amp * std::sqrt(static_cast<double>(n) + 1.0);
  }
  return out;
}

/// sum_k lower(i,k) c_k + raise(i,k) c_k^dagger acting on state.
inline SparseState apply_linear(const SparseState &state, const Eigen::VectorXd &lower,
                                const Eigen::VectorXd &raise) {
  SparseState out;
  const auto modes = static_cast<std::size_t>(lower.size());
  for (const auto &[occ, amp] : state) {
    Occupation next = occ;
    for (std::size_t k = 0; k < modes; ++k) {
      const auto n = occ[k];
      const double lo = lower(static_cast<Eigen::Index>(k));
      const double hi = raise(static_cast<Eigen::Index>(k));
      if (lo != 0.0 && n > 0) {
        next[k] = static_cast<std::uint8_t>(n - 1);
        out[next] += amp * (lo * std::sqrt(static_cast<double>(n)));
      }
      if (hi != 0.0) {
        if (n == 255)
          throw CutoffExceeded("occupation overflow in mode " + std::to_string(k + 1));
        next[k] = static_cast<std::uint8_t>(n + 1);
        out[next] += amp * (hi * std::sqrt(static_cast<double>(n) + 1.0));
      }
      next[k] = n;
    }
  }
  return out;
}

/// a_i = sum_k alpha(i,k) c_k + beta(i,k) c_k^dagger
inline SparseState apply_pre_annihilate(const SparseState &state, const BogoliubovMap &map, int i) {
  return apply_linear(state, map.alpha.row(i).transpose(), map.beta.row(i).transpose());
}

/// a_i^dagger = sum_k alpha(i,k) c_k^dagger + beta(i,k) c_k
inline SparseState apply_pre_create(const SparseState &state, const BogoliubovMap &map, int i) {
  return apply_linear(state, map.beta.row(i).transpose(), map.alpha.row(i).transpose());
}

/// -1/2 sum_{l,k} F_lk c_l^dagger c_k^dagger
inline SparseState apply_pair_creation(const SparseState &state, const Eigen::MatrixXd &f) {
  SparseState out;
  const auto modes = static_cast<std::size_t>(f.rows());
  for (const auto &[occ, amp] : state) {
    Occupation next = occ;
    for (std::size_t l = 0; l < modes; ++l) {
      for (std::size_t k = l; k < modes; ++k) {
        const double coeff = f(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k));
        if (coeff == 0.0)
          continue;
        double factor = 0.0;
        if (k == l) {
          const double n = occ[l];
          factor = -0.5 * coeff * std::sqrt((n + 1.0) * (n + 2.0));
          next[l] = static_cast<std::uint8_t>(occ[l] + 2);
        } else {
          factor = -coeff * std::sqrt((occ[l] + 1.0) * (occ[k] + 1.0));
          next[l] = static_cast<std::uint8_t>(occ[l] + 1);
          next[k] = static_cast<std::uint8_t>(occ[k] + 1);
        }
        out[next] += amp * factor;
        next[l] = occ[l];
        next[k] = occ[k];
      }
    }
  }
  return out;
}

inline double norm_squared(const SparseState &state) {
  double acc = 0.0;
  for (const auto &[occ, amp] : state)
    acc += std::norm(amp);
  return acc;
}

/// <a|b>
inline Amplitude inner_product(const SparseState &a, const SparseState &b) {
  Amplitude acc{0.0, 0.0};
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      acc += std::conj(ia->second) * ib->second;
      ++ia;
      ++ib;
    }
  }
  return acc;
}

struct ExpansionOptions {
  /// Highest power of the pair-creation operator kept in the exponential.
  int order = 1;
  TruncationLimits limits;
  /// Drop amplitudes outside the limits (recorded as leakage) instead of failing.
  bool project = false;
};

/// Smallest per-mode cutoff that holds an order-`order` expansion of `state` exactly.
inline int minimal_cutoff(int order, const FockExcitation &state) { return 2 * order + state.total(); }

struct ExpandedState {
  SparseState amplitudes;
  FockExcitation source;
  int truncation_order = 0;
  TruncationLimits limits;
  /// 1 - captured norm, relative to the exact normalization of the source state.
  double leakage = 0.0;

  double norm() const { return std::sqrt(norm_squared(amplitudes)); }
  int modes() const { return source.size(); }
};

namespace detail {

inline constexpr double kDroppedAmplitudeTolerance = 1e-14;

inline void restrict_to(SparseState &state, const TruncationLimits &limits, bool project, const char *stage) {
  for (auto it = state.begin(); it != state.end();) {
    if (limits.contains(it->first)) {
      ++it;
      continue;
    }
    if (!project && std::abs(it->second) > kDroppedAmplitudeTolerance)
      throw CutoffExceeded(std::string(stage) + " needs occupations beyond cutoff " +
                           std::to_string(limits.cutoff) +
                           (limits.max_total ? " / total " + std::to_string(*limits.max_total) : std::string()));
    it = state.erase(it);
  }
}

} // namespace detail

/// Pre-quench Fock eigenstate prod_i (a_i^dagger)^{n_i} / sqrt(n_i!) |0_a> written
/// in the joint-mode Fock basis, with |0_a> proportional to exp(-F c^dag c^dag / 2)|0>
/// expanded to the requested order. Amplitudes are returned normalized.
inline ExpandedState expand_initial_state(const QuenchSpec &spec, const BogoliubovMap &map, const FMatrix &f,
                                          const ExpansionOptions &options) {
  spec.validate();
  if (options.order < 1)
    throw InvalidArgument("expansion order must be >= 1");
  if (options.limits.cutoff < 1 || options.limits.cutoff > 200)
    throw InvalidArgument("cutoff must lie in [1, 200]");
  const int modes = spec.joint_size();
  const FockExcitation &source = spec.initial_state;
  const int excitations = source.total();

  // The pair expansion only raises, and each a^dagger moves one step, so a margin
  // of `excitations` keeps every in-limit amplitude of the final state exact.
  TruncationLimits working = options.limits;
  if (options.project) {
    working.cutoff += excitations;
    if (working.max_total)
      *working.max_total += excitations;
  }

  SparseState psi;
  psi[Occupation(static_cast<std::size_t>(modes), 0)] = 1.0;
  SparseState term = psi;
  for (int r = 1; r <= options.order && !term.empty(); ++r) {
    term = apply_pair_creation(term, f.f);
    for (auto &[occ, amp] : term)
      amp /= static_cast<double>(r);
    detail::restrict_to(term, working, options.project, "pair expansion");
    for (const auto &[occ, amp] : term)
      psi[occ] += amp;
  }

  double factorials = 1.0;
  for (int i = 0; i < modes; ++i) {
    const int n = source.occupations[static_cast<std::size_t>(i)];
    for (int rep = 0; rep < n; ++rep) {
      psi = apply_pre_create(psi, map, i);
      factorials *= rep + 1;
      detail::restrict_to(psi, working, options.project, "excitation");
    }
  }
  detail::restrict_to(psi, options.limits, options.project, "projection");

  // <0| exp(-F c c / 2) exp(-F c^dag c^dag / 2) |0> = det(I - F^2)^{-1/2}
  const Eigen::MatrixXd fs = 0.5 * (f.f + f.f.transpose());
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(modes, modes);
  const double det = (id - fs * fs).determinant();
  if (!(det > 0.0))
    throw InvalidArgument("F matrix does not define a normalizable Gaussian state");
  const double scale = std::pow(det, 0.25) / std::sqrt(factorials);

  ExpandedState out;
  out.source = source;
  out.truncation_order = options.order;
  out.limits = options.limits;
  const double captured = norm_squared(psi) * scale * scale;
  out.leakage = 1.0 - captured;
  const double renorm = 1.0 / std::sqrt(norm_squared(psi));
  for (auto &[occ, amp] : psi) {
    amp *= renorm;
    // exact zeros from cancellations stay out of the support
    if (amp != Amplitude{0.0, 0.0})
      out.amplitudes.emplace(occ, amp);
  }
  return out;
}

/// Number of basis amplitudes with |amplitude| >= floor.
inline std::size_t delocalization_count(const ExpandedState &state, double floor) {
  if (!(floor > 0.0))
    throw InvalidArgument("delocalization floor must be positive");
  std::size_t count = 0;
  for (const auto &[occ, amp] : state.amplitudes)
    if (std::abs(amp) >= floor)
      ++count;
  return count;
}

/// Multiplies each amplitude by exp(-i sum_k w'_k (n_k + 1/2) t / hbar).
inline ExpandedState exact_evolve(const ExpandedState &state, const QuenchSpec &spec, double time) {
  const Eigen::VectorXd w = post_quench_frequencies(spec);
  ExpandedState out = state;
  for (auto &[occ, amp] : out.amplitudes) {
    double energy = 0.0;
    for (std::size_t k = 0; k < occ.size(); ++k)
      energy += w(static_cast<Eigen::Index>(k)) * (occ[k] + 0.5);
    amp *= std::polar(1.0, -energy * time / spec.hbar());
  }
  return out;
}

/// <n_m> = || a_m psi ||^2 for every pre-quench mode m.
inline Eigen::VectorXd oracle_occupations(const ExpandedState &state, const BogoliubovMap &map) {
  Eigen::VectorXd n(map.modes());
  for (int m = 0; m < map.modes(); ++m)
    n(m) = norm_squared(apply_pre_annihilate(state.amplitudes, map, m));
  return n;
}

/// Joint-mode correlators from direct ladder-operator matrix elements. Ladder
/// action is unrestricted, so the values are exact for the stored amplitudes.
inline CorrelationSet oracle_correlators(const ExpandedState &state) {
  const int modes = state.modes();
  std::vector<SparseState> lowered(static_cast<std::size_t>(modes));
  std::vector<SparseState> raised(static_cast<std::size_t>(modes));
  for (int k = 0; k < modes; ++k) {
    lowered[static_cast<std::size_t>(k)] = apply_annihilate(state.amplitudes, k);
    raised[static_cast<std::size_t>(k)] = apply_create(state.amplitudes, k);
  }
  CorrelationSet c;
  c.cdag_c.resize(modes, modes);
  c.c_cdag.resize(modes, modes);
  c.c_c.resize(modes, modes);
  c.cdag_cdag.resize(modes, modes);
  for (int l = 0; l < modes; ++l)
    for (int k = 0; k < modes; ++k) {
      const auto ul = static_cast<std::size_t>(l);
      const auto uk = static_cast<std::size_t>(k);
      c.cdag_c(l, k) = inner_product(lowered[ul], lowered[uk]).real();
      c.c_cdag(l, k) = inner_product(raised[ul], raised[uk]).real();
      c.c_c(l, k) = inner_product(raised[ul], lowered[uk]).real();
      c.cdag_cdag(l, k) = inner_product(lowered[ul], raised[uk]).real();
    }
  return c;
}

/// || P a_i psi || where P keeps basis states strictly inside the truncation
/// limits; every contribution to those states is present in the stored amplitudes.
inline double constraint_residual(const ExpandedState &state, const BogoliubovMap &map, int i) {
  const SparseState image = apply_pre_annihilate(state.amplitudes, map, i);
  TruncationLimits interior = state.limits;
  interior.cutoff -= 1;
  if (interior.max_total)
    *interior.max_total -= 1;
  double acc = 0.0;
  for (const auto &[occ, amp] : image)
    if (interior.contains(occ))
      acc += std::norm(amp);
  return std::sqrt(acc);
}

} // namespace quenchlab

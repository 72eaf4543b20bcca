#pragma once

// Bogoliubov map between the disjoint-chain ladder operators a_l and the
// joint-chain ladder operators c_k:
//
//   a_l = sum_k alpha(l,k) c_k + beta(l,k) c_k^dagger
//
// Rows index pre-quench modes (left chain, then right chain), columns index
// joint modes. Everything is real.

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <utility>

#include "core_model.hpp"
#include "errors.hpp"

namespace quenchlab {

struct BogoliubovMap {
  int n = 0;
  int m = 0;
  Eigen::MatrixXd alpha;
  Eigen::MatrixXd beta;
  /// exp(gamma(l,k)) = sqrt(w_l / w'_k)
  Eigen::MatrixXd gamma;
  /// Mode overlaps blockdiag(S_N, S_M) * S_{N+M}.
  Eigen::MatrixXd overlap;
  Eigen::VectorXd pre_frequencies;
  Eigen::VectorXd post_frequencies;

  int modes() const { return n + m; }
};

inline Eigen::MatrixXd mode_overlap(int n, int m) {
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(n + m, n + m);
  block.topLeftCorner(n, n) = sine_transform(n);
  block.bottomRightCorner(m, m) = sine_transform(m);
  return block * sine_transform(n + m);
}

inline BogoliubovMap build_bogoliubov(const QuenchSpec &spec) {
  spec.validate();
  BogoliubovMap map;
  map.n = spec.n();
  map.m = spec.m();
  map.pre_frequencies = pre_quench_frequencies(spec);
  map.post_frequencies = post_quench_frequencies(spec);
  map.overlap = mode_overlap(spec.n(), spec.m());

  const int total = spec.joint_size();
  map.gamma.resize(total, total);
  for (int l = 0; l < total; ++l)
    for (int k = 0; k < total; ++k)
      map.gamma(l, k) = 0.5 * std::log(map.pre_frequencies(l) / map.post_frequencies(k));

  map.alpha = map.overlap.cwiseProduct(map.gamma.array().cosh().matrix());
  map.beta = map.overlap.cwiseProduct(map.gamma.array().sinh().matrix());
  return map;
}

struct SymplecticDefect {
  /// max |alpha alpha^T - beta beta^T - I|
  double commutator = 0.0;
  /// max |alpha beta^T - beta alpha^T|
  double antisymmetric = 0.0;
};

inline SymplecticDefect symplectic_defect(const BogoliubovMap &map) {
  const auto &a = map.alpha;
  const auto &b = map.beta;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(a.rows(), a.rows());
  SymplecticDefect d;
  d.commutator = (a * a.transpose() - b * b.transpose() - id).cwiseAbs().maxCoeff();
  d.antisymmetric = (a * b.transpose() - b * a.transpose()).cwiseAbs().maxCoeff();
  return d;
}

/// Symmetric F with alpha F = beta, so that every a_i annihilates
/// exp(-F_lk c_l^dagger c_k^dagger / 2)|0>.
struct FMatrix {
  Eigen::MatrixXd f;

  double symmetry_defect() const { return (f - f.transpose()).cwiseAbs().maxCoeff(); }
  double spectral_radius() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (f + f.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
};

inline constexpr double kSingularAlphaCondition = 1e12;

inline FMatrix f_matrix(const BogoliubovMap &map) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(map.alpha);
  const auto &sv = svd.singularValues();
  const double smallest = sv(sv.size() - 1);
  if (!(smallest > 0.0) || sv(0) / smallest > kSingularAlphaCondition)
    throw SingularAlpha("alpha is numerically singular (condition number " +
                        std::to_string(smallest > 0.0 ? sv(0) / smallest : INFINITY) + ")");
  return FMatrix{map.alpha.fullPivLu().solve(map.beta)};
}

/// The four quadratic correlators of a set of bosonic modes. Real throughout.
struct CorrelationSet {
  Eigen::MatrixXd cdag_c;    ///< <x_l^dagger x_k>
  Eigen::MatrixXd c_cdag;    ///< <x_l x_k^dagger>
  Eigen::MatrixXd c_c;       ///< <x_l x_k>
  Eigen::MatrixXd cdag_cdag; ///< <x_l^dagger x_k^dagger>

  int modes() const { return static_cast<int>(cdag_c.rows()); }

  /// max |c_cdag - cdag_c^T - I|
  double commutator_defect() const {
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(modes(), modes());
    return (c_cdag - cdag_c.transpose() - id).cwiseAbs().maxCoeff();
  }
};

/// Correlators of a Fock state of the modes themselves.
inline CorrelationSet fock_correlations(const FockExcitation &state) {
  const Eigen::VectorXd n = state.as_vector();
  const int size = state.size();
  CorrelationSet c;
  c.cdag_c = n.asDiagonal();
  c.c_cdag = (n.array() + 1.0).matrix().asDiagonal();
  c.c_c = Eigen::MatrixXd::Zero(size, size);
  c.cdag_cdag = Eigen::MatrixXd::Zero(size, size);
  return c;
}

/// Correlators of x = P y + Q y^dagger given the correlators of y.
inline CorrelationSet transform_correlations(const Eigen::MatrixXd &p, const Eigen::MatrixXd &q,
                                             const CorrelationSet &y) {
  const auto &d = y.cdag_c;
  const auto &g = y.c_cdag;
  const auto &cc = y.c_c;
  const auto &e = y.cdag_cdag;
  const Eigen::MatrixXd pt = p.transpose();
  const Eigen::MatrixXd qt = q.transpose();
  CorrelationSet x;
  x.cdag_c = p * d * pt + p * e * qt + q * cc * pt + q * g * qt;
  x.c_c = p * cc * pt + p * g * qt + q * d * pt + q * e * qt;
  x.cdag_cdag = p * e * pt + p * d * qt + q * g * pt + q * cc * qt;
  x.c_cdag = p * g * pt + p * cc * qt + q * e * pt + q * d * qt;
  return x;
}

/// Joint-mode correlators from disjoint-mode correlators through the symplectic
/// inverse c = alpha^T a - beta^T a^dagger.
inline CorrelationSet to_joint_correlations(const BogoliubovMap &map, const CorrelationSet &disjoint) {
  return transform_correlations(map.alpha.transpose(), -map.beta.transpose(), disjoint);
}

/// Disjoint-mode correlators from joint-mode correlators through a = alpha c + beta c^dagger.
inline CorrelationSet to_disjoint_correlations(const BogoliubovMap &map, const CorrelationSet &joint) {
  return transform_correlations(map.alpha, map.beta, joint);
}

inline CorrelationSet initial_correlations(const BogoliubovMap &map, const FockExcitation &state) {
  state.validate(map.modes());
  return to_joint_correlations(map, fock_correlations(state));
}

} // namespace quenchlab

#pragma once

// Independent reference computations used only by the tests. None of these
// call into the library's sine transforms or correlator algebra.

#include <Eigen/Dense>

#include <cmath>
#include <complex>

#include "quenchlab/bogoliubov.hpp"
#include "quenchlab/core_model.hpp"

namespace oracle {

struct Modes {
  Eigen::VectorXd omega;
  Eigen::MatrixXd vectors; ///< columns are unit eigenvectors, ascending frequency
};

/// Numerical diagonalization of a stiffness matrix; eigenvector signs fixed so
/// the first nonzero component is positive.
inline Modes diagonalize(const Eigen::MatrixXd &stiffness, double mass) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(stiffness / mass);
  Modes out;
  out.omega = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  out.vectors = es.eigenvectors();
  for (Eigen::Index c = 0; c < out.vectors.cols(); ++c) {
    Eigen::Index r = 0;
    while (r < out.vectors.rows() && std::abs(out.vectors(r, c)) < 1e-12)
      ++r;
    if (r < out.vectors.rows() && out.vectors(r, c) < 0.0)
      out.vectors.col(c) *= -1.0;
  }
  return out;
}

/// alpha, beta from numerically diagonalized chains and the ladder-operator
/// definitions a = sqrt(m w / 2 hbar) (x + i p / (m w)).
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> bogoliubov(const quenchlab::QuenchSpec &spec) {
  const int n = spec.n();
  const int total = spec.joint_size();
  const double mass = spec.mass();
  const Modes left = diagonalize(quenchlab::chain_stiffness(n, mass, spec.omega0()), mass);
  const Modes right = diagonalize(quenchlab::chain_stiffness(spec.m(), mass, spec.omega0()), mass);
  const Modes joint = diagonalize(quenchlab::chain_stiffness(total, mass, spec.omega0()), mass);
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(total, total);
  block.topLeftCorner(n, n) = left.vectors;
  block.bottomRightCorner(spec.m(), spec.m()) = right.vectors;
  Eigen::VectorXd pre(total);
  pre << left.omega, right.omega;
  // disjoint coordinate l = sum_k (block^T joint)(l,k) joint coordinate k
  const Eigen::MatrixXd overlap = block.transpose() * joint.vectors;
  Eigen::MatrixXd alpha(total, total), beta(total, total);
  for (int l = 0; l < total; ++l)
    for (int k = 0; k < total; ++k) {
      const double r = std::sqrt(pre(l) / joint.omega(k));
      alpha(l, k) = 0.5 * overlap(l, k) * (r + 1.0 / r);
      beta(l, k) = 0.5 * overlap(l, k) * (r - 1.0 / r);
    }
  return {alpha, beta};
}

/// <n_m(t)> as the explicit double sum over joint modes for every correlator.
inline double occupation_direct_sum(const quenchlab::BogoliubovMap &map, const quenchlab::CorrelationSet &c, int m,
                                    double t, double hbar) {
  const int total = map.modes();
  std::complex<double> acc = 0.0;
  for (int l = 0; l < total; ++l)
    for (int k = 0; k < total; ++k) {
      const double tl = map.post_frequencies(l) * t / hbar;
      const double tk = map.post_frequencies(k) * t / hbar;
      const double al = map.alpha(m, l), ak = map.alpha(m, k), bl = map.beta(m, l), bk = map.beta(m, k);
      acc += al * ak * std::polar(1.0, tl - tk) * c.cdag_c(l, k);
      acc += al * bk * std::polar(1.0, tl + tk) * c.cdag_cdag(l, k);
      acc += bl * ak * std::polar(1.0, -tl - tk) * c.c_c(l, k);
      acc += bl * bk * std::polar(1.0, -tl + tk) * c.c_cdag(l, k);
    }
  return acc.real();
}

/// Ground-state <q_i q_j> of one fixed-end chain from its numerical modes.
inline Eigen::MatrixXd ground_position_correlation(int size, double mass, double omega0, double hbar) {
  const Modes modes = diagonalize(quenchlab::chain_stiffness(size, mass, omega0), mass);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(size, size);
  for (int k = 0; k < size; ++k)
    out += modes.vectors.col(k) * modes.vectors.col(k).transpose() * (hbar / (2.0 * mass * modes.omega(k)));
  return out;
}

/// Power of a real signal at angular frequency w by direct Fourier sum.
inline double power_at(const std::vector<double> &times, const std::vector<double> &signal, double w) {
  std::complex<double> acc = 0.0;
  double mean = 0.0;
  for (double s : signal)
    mean += s;
  mean /= static_cast<double>(signal.size());
  for (std::size_t i = 0; i < times.size(); ++i)
    acc += (signal[i] - mean) * std::polar(1.0, -w * times[i]);
  return std::norm(acc) / static_cast<double>(signal.size());
}

} // namespace oracle

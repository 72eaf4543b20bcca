#pragma once

// Harmonic chains with fixed ends, their normal modes, and the quench
// configuration joining a left chain of N sites to a right chain of M sites.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"

namespace quenchlab {

struct ChainSpec {
  int size = 1;
  double mass = 1.0;
  double omega0 = 1.0;
  double hbar = 1.0;

  void validate() const {
    if (size < 1)
      throw InvalidArgument("chain size must be >= 1, got " + std::to_string(size));
    if (!(mass > 0.0) || !(omega0 > 0.0) || !(hbar > 0.0))
      throw InvalidArgument("mass, omega0 and hbar must be positive");
  }

  bool same_constants(const ChainSpec &other) const {
    return mass == other.mass && omega0 == other.omega0 && hbar == other.hbar;
  }
};

/// Occupations n_i of the pre-quench modes, left chain first (1..N), then the
/// right chain (N+1..N+M).
struct FockExcitation {
  std::vector<int> occupations;

  static FockExcitation vacuum(int modes) {
    return FockExcitation{std::vector<int>(static_cast<std::size_t>(modes), 0)};
  }

  /// Excitations given as 1-based mode indices; repeated indices stack.
  static FockExcitation excited(int modes, const std::vector<int> &one_based_modes) {
    auto state = vacuum(modes);
    for (int mode : one_based_modes) {
      if (mode < 1 || mode > modes)
        throw InvalidArgument("excited mode index out of range: " + std::to_string(mode));
      ++state.occupations[static_cast<std::size_t>(mode - 1)];
    }
    return state;
  }

  int size() const { return static_cast<int>(occupations.size()); }
  int total() const { return std::accumulate(occupations.begin(), occupations.end(), 0); }
  bool is_vacuum() const { return total() == 0; }

  Eigen::VectorXd as_vector() const {
    Eigen::VectorXd v(size());
    for (int i = 0; i < size(); ++i)
      v(i) = occupations[static_cast<std::size_t>(i)];
    return v;
  }

  void validate(int expected_modes) const {
    if (size() != expected_modes)
      throw InvalidArgument("occupation vector has length " + std::to_string(size()) +
                            ", expected " + std::to_string(expected_modes));
    for (int n : occupations)
      if (n < 0)
        throw InvalidArgument("occupations must be non-negative");
  }
};

inline std::vector<double> uniform_time_grid(double t_max, int samples) {
  if (samples < 1)
    throw InvalidArgument("time grid needs at least one sample");
  if (samples == 1)
    return {0.0};
  if (!(t_max > 0.0))
    throw InvalidArgument("t_max must be positive");
  std::vector<double> grid(static_cast<std::size_t>(samples));
  const double dt = t_max / (samples - 1);
  for (int i = 0; i < samples; ++i)
    grid[static_cast<std::size_t>(i)] = dt * i;
  return grid;
}

struct QuenchSpec {
  ChainSpec left;
  ChainSpec right;
  FockExcitation initial_state;
  std::vector<double> time_grid{0.0};

  int n() const { return left.size; }
  int m() const { return right.size; }
  int joint_size() const { return left.size + right.size; }
  double mass() const { return left.mass; }
  double omega0() const { return left.omega0; }
  double hbar() const { return left.hbar; }

  ChainSpec joint_chain() const {
    ChainSpec joint = left;
    joint.size = joint_size();
    return joint;
  }

  void validate() const {
    left.validate();
    right.validate();
    if (!left.same_constants(right))
      throw InvalidArgument("left and right chains must share mass, omega0 and hbar");
    initial_state.validate(joint_size());
    if (time_grid.empty() || time_grid.front() != 0.0)
      throw InvalidArgument("time grid must start at 0");
    for (std::size_t i = 1; i < time_grid.size(); ++i)
      if (!(time_grid[i] > time_grid[i - 1]))
        throw InvalidArgument("time grid must be strictly increasing");
  }
};

/// Builds and validates a spec with shared constants.
inline QuenchSpec make_quench(int n, int m, FockExcitation state,
                              std::vector<double> time_grid = {0.0}, double mass = 1.0,
                              double omega0 = 1.0, double hbar = 1.0) {
  QuenchSpec spec;
  spec.left = ChainSpec{n, mass, omega0, hbar};
  spec.right = ChainSpec{m, mass, omega0, hbar};
  spec.initial_state = std::move(state);
  spec.time_grid = std::move(time_grid);
  spec.validate();
  return spec;
}

inline QuenchSpec make_quench(int n, int m) {
  return make_quench(n, m, FockExcitation::vacuum(n + m));
}

struct NormalModeBasis {
  int size = 0;
  double omega0 = 1.0;
  Eigen::VectorXd frequencies;
  Eigen::MatrixXd transform;
};

/// S_K with entries sqrt(2/(K+1)) sin(pi k l / (K+1)); symmetric and its own inverse.
inline Eigen::MatrixXd sine_transform(int size) {
  if (size < 1)
    throw InvalidArgument("sine transform size must be >= 1");
  Eigen::MatrixXd s(size, size);
  const double norm = std::sqrt(2.0 / (size + 1));
  const double step = std::numbers::pi / (size + 1);
  for (int k = 1; k <= size; ++k)
    for (int l = k; l <= size; ++l) {
      // reduce k*l modulo 2(K+1) before scaling so large products keep full precision
      const long long reduced = (static_cast<long long>(k) * l) % (2LL * (size + 1));
      const double v = norm * std::sin(step * static_cast<double>(reduced));
      s(k - 1, l - 1) = v;
      s(l - 1, k - 1) = v;
    }
  return s;
}

inline double mode_frequency(int k, int size, double omega0) {
  return 2.0 * omega0 * std::abs(std::sin(std::numbers::pi * k / (2.0 * (size + 1))));
}

inline NormalModeBasis normal_modes(const ChainSpec &chain) {
  chain.validate();
  NormalModeBasis basis;
  basis.size = chain.size;
  basis.omega0 = chain.omega0;
  basis.frequencies.resize(chain.size);
  for (int k = 1; k <= chain.size; ++k)
    basis.frequencies(k - 1) = mode_frequency(k, chain.size, chain.omega0);
  basis.transform = sine_transform(chain.size);
  return basis;
}

/// |w_k - w_j| through the product identity 4 w0 |sin(pi(k-j)/4(K+1)) cos(pi(k+j)/4(K+1))|.
inline Eigen::MatrixXd beat_frequencies(const NormalModeBasis &basis) {
  const int size = basis.size;
  Eigen::MatrixXd beats = Eigen::MatrixXd::Zero(size, size);
  const double scale = std::numbers::pi / (4.0 * (size + 1));
  for (int k = 1; k <= size; ++k)
    for (int j = 1; j < k; ++j) {
      const double v = 4.0 * basis.omega0 * std::abs(std::sin(scale * (k - j)) * std::cos(scale * (k + j)));
      beats(k - 1, j - 1) = v;
      beats(j - 1, k - 1) = v;
    }
  return beats;
}

inline Eigen::VectorXd post_quench_frequencies(const QuenchSpec &spec) {
  return normal_modes(spec.joint_chain()).frequencies;
}

/// Pre-quench frequencies in the combined index order (left chain modes, then right).
inline Eigen::VectorXd pre_quench_frequencies(const QuenchSpec &spec) {
  Eigen::VectorXd w(spec.joint_size());
  w.head(spec.n()) = normal_modes(spec.left).frequencies;
  w.tail(spec.m()) = normal_modes(spec.right).frequencies;
  return w;
}

/// Potential-energy matrix K of a fixed-end chain, V = q^T K q / 2.
inline Eigen::MatrixXd chain_stiffness(int size, double mass, double omega0) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(size, size);
  const double c = mass * omega0 * omega0;
  for (int i = 0; i < size; ++i) {
    k(i, i) = 2.0 * c;
    if (i + 1 < size) {
      k(i, i + 1) = -c;
      k(i + 1, i) = -c;
    }
  }
  return k;
}

/// Stiffness of H0 + H_int: the two disjoint chains plus the bond -m w0^2 q_N q_{N+1}.
inline Eigen::MatrixXd quenched_stiffness(const QuenchSpec &spec) {
  const int n = spec.n();
  const int total = spec.joint_size();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(total, total);
  k.topLeftCorner(n, n) = chain_stiffness(n, spec.mass(), spec.omega0());
  k.bottomRightCorner(spec.m(), spec.m()) = chain_stiffness(spec.m(), spec.mass(), spec.omega0());
  // q^T K q / 2 picks up K(N,N+1) + K(N+1,N) = -m w0^2
  const double c = spec.mass() * spec.omega0() * spec.omega0();
  k(n - 1, n) += -c;
  k(n, n - 1) += -c;
  return k;
}

/// Max entrywise difference between H0 + H_int and the joint chain as quadratic forms.
inline double joint_hamiltonian_check(const QuenchSpec &spec) {
  spec.validate();
  const Eigen::MatrixXd joint = chain_stiffness(spec.joint_size(), spec.mass(), spec.omega0());
  return (quenched_stiffness(spec) - joint).cwiseAbs().maxCoeff();
}

} // namespace quenchlab

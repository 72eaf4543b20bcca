#pragma once

// Phase-space covariance matrices for the quench. Coordinates are ordered
// (x_1 .. x_T, p_1 .. p_T) with T = N + M, entries are symmetrized second
// moments. Three bases are used: disjoint normal modes, lattice
// configuration, and joint normal modes (where the evolution is diagonal).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "core_model.hpp"
#include "errors.hpp"
#include "parallel.hpp"

namespace quenchlab {

enum class BasisTag { DisjointNormalModes, Configuration, JointNormalModes };

inline const char *to_string(BasisTag tag) {
  switch (tag) {
  case BasisTag::DisjointNormalModes:
    return "disjoint-normal-modes";
  case BasisTag::Configuration:
    return "configuration";
  case BasisTag::JointNormalModes:
    return "joint-normal-modes";
  }
  return "unknown";
}

struct CovarianceMatrix {
  Eigen::MatrixXd sigma;
  BasisTag basis = BasisTag::DisjointNormalModes;

  int modes() const { return static_cast<int>(sigma.rows() / 2); }
  auto xx() const { return sigma.topLeftCorner(modes(), modes()); }
  auto pp() const { return sigma.bottomRightCorner(modes(), modes()); }
  auto xp() const { return sigma.topRightCorner(modes(), modes()); }
  double symmetry_defect() const { return (sigma - sigma.transpose()).cwiseAbs().maxCoeff(); }
};

namespace detail {

inline void require_basis(const CovarianceMatrix &cov, BasisTag expected, const char *op) {
  if (cov.basis != expected)
    throw BasisError(std::string(op) + " expects a covariance in the " + to_string(expected) +
                     " basis, got " + to_string(cov.basis));
}

inline Eigen::MatrixXd phase_space_block(const Eigen::MatrixXd &s) {
  const auto t = s.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * t, 2 * t);
  out.topLeftCorner(t, t) = s;
  out.bottomRightCorner(t, t) = s;
  return out;
}

inline Eigen::MatrixXd disjoint_transform(const QuenchSpec &spec) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(spec.joint_size(), spec.joint_size());
  s.topLeftCorner(spec.n(), spec.n()) = sine_transform(spec.n());
  s.bottomRightCorner(spec.m(), spec.m()) = sine_transform(spec.m());
  return phase_space_block(s);
}

inline Eigen::MatrixXd joint_transform(const QuenchSpec &spec) {
  return phase_space_block(sine_transform(spec.joint_size()));
}

} // namespace detail

/// Fock state in disjoint normal modes: sigma_xx = hbar (n + 1/2) / (m w),
/// sigma_pp = hbar m w (n + 1/2), everything else zero.
inline CovarianceMatrix initial_covariance(const QuenchSpec &spec) {
  spec.validate();
  const int t = spec.joint_size();
  const Eigen::ArrayXd w = pre_quench_frequencies(spec).array();
  const Eigen::ArrayXd level = spec.initial_state.as_vector().array() + 0.5;
  CovarianceMatrix cov;
  cov.basis = BasisTag::DisjointNormalModes;
  cov.sigma = Eigen::MatrixXd::Zero(2 * t, 2 * t);
  cov.sigma.diagonal().head(t) = (spec.hbar() * level / (spec.mass() * w)).matrix();
  cov.sigma.diagonal().tail(t) = (spec.hbar() * spec.mass() * level * w).matrix();
  return cov;
}

/// Conjugation by blockdiag(S_N, S_M, S_N, S_M); an orthogonal involution.
inline CovarianceMatrix to_configuration(const CovarianceMatrix &cov, const QuenchSpec &spec) {
  detail::require_basis(cov, BasisTag::DisjointNormalModes, "to_configuration");
  const Eigen::MatrixXd s = detail::disjoint_transform(spec);
  return {s.transpose() * cov.sigma * s, BasisTag::Configuration};
}

inline CovarianceMatrix to_disjoint_modes(const CovarianceMatrix &cov, const QuenchSpec &spec) {
  detail::require_basis(cov, BasisTag::Configuration, "to_disjoint_modes");
  const Eigen::MatrixXd s = detail::disjoint_transform(spec);
  return {s * cov.sigma * s.transpose(), BasisTag::DisjointNormalModes};
}

/// Conjugation by blockdiag(S_{N+M}, S_{N+M}).
inline CovarianceMatrix to_joint_modes(const CovarianceMatrix &cov, const QuenchSpec &spec) {
  detail::require_basis(cov, BasisTag::Configuration, "to_joint_modes");
  const Eigen::MatrixXd s = detail::joint_transform(spec);
  return {s * cov.sigma * s.transpose(), BasisTag::JointNormalModes};
}

inline CovarianceMatrix from_joint_modes(const CovarianceMatrix &cov, const QuenchSpec &spec) {
  detail::require_basis(cov, BasisTag::JointNormalModes, "from_joint_modes");
  const Eigen::MatrixXd s = detail::joint_transform(spec);
  return {s.transpose() * cov.sigma * s, BasisTag::Configuration};
}

/// Symplectic propagator of the joint normal modes over time t: per mode
/// [[cos, sin/(m w')], [-m w' sin, cos]] at angle w' t / hbar.
inline Eigen::MatrixXd joint_propagator(const QuenchSpec &spec, double time) {
  const Eigen::VectorXd w = post_quench_frequencies(spec);
  const int t = spec.joint_size();
  const double m = spec.mass();
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(2 * t, 2 * t);
  for (int k = 0; k < t; ++k) {
    const double angle = w(k) * time / spec.hbar();
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    u(k, k) = c;
    u(k, t + k) = s / (m * w(k));
    u(t + k, k) = -m * w(k) * s;
    u(t + k, t + k) = c;
  }
  return u;
}

inline CovarianceMatrix evolve_covariance(const CovarianceMatrix &cov, const QuenchSpec &spec, double time) {
  detail::require_basis(cov, BasisTag::JointNormalModes, "evolve_covariance");
  const Eigen::MatrixXd u = joint_propagator(spec, time);
  return {u * cov.sigma * u.transpose(), BasisTag::JointNormalModes};
}

/// The whole chain disjoint modes -> configuration -> joint modes.
inline CovarianceMatrix initial_joint_covariance(const QuenchSpec &spec) {
  return to_joint_modes(to_configuration(initial_covariance(spec), spec), spec);
}

inline Eigen::MatrixXd symplectic_form(int modes) {
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * modes, 2 * modes);
  omega.topRightCorner(modes, modes) = Eigen::MatrixXd::Identity(modes, modes);
  omega.bottomLeftCorner(modes, modes) = -Eigen::MatrixXd::Identity(modes, modes);
  return omega;
}

/// Williamson spectrum, ascending. With R = sigma^{1/2}, R Omega R is
/// antisymmetric with eigenvalues +-i nu, so -(R Omega R)^2 carries each nu^2 twice.
inline Eigen::VectorXd symplectic_eigenvalues(const Eigen::MatrixXd &sigma) {
  const int modes = static_cast<int>(sigma.rows() / 2);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (sigma + sigma.transpose()));
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw InvalidArgument("covariance matrix is not positive definite");
  const Eigen::MatrixXd root = es.operatorSqrt();
  const Eigen::MatrixXd a = root * symplectic_form(modes) * root;
  const Eigen::MatrixXd sq = -(a * a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(0.5 * (sq + sq.transpose()), Eigen::EigenvaluesOnly);
  const Eigen::VectorXd nu2 = es2.eigenvalues();
  Eigen::VectorXd nu(modes);
  for (int i = 0; i < modes; ++i)
    nu(i) = std::sqrt(std::max(0.0, 0.5 * (nu2(2 * i) + nu2(2 * i + 1))));
  return nu;
}

inline Eigen::VectorXd symplectic_eigenvalues(const CovarianceMatrix &cov) {
  return symplectic_eigenvalues(cov.sigma);
}

inline constexpr double kUncertaintySlack = 1e-8;

/// sigma + i hbar Omega / 2 >= 0, checked as min nu >= hbar/2 - slack.
inline bool satisfies_uncertainty(const CovarianceMatrix &cov, double hbar = 1.0) {
  return symplectic_eigenvalues(cov).minCoeff() >= 0.5 * hbar - kUncertaintySlack;
}

/// Joint-mode occupancies (m w' sxx + spp / (m w')) / (2 hbar) - 1/2.
inline Eigen::VectorXd mode_occupancies(const CovarianceMatrix &cov, const QuenchSpec &spec) {
  detail::require_basis(cov, BasisTag::JointNormalModes, "mode_occupancies");
  const Eigen::ArrayXd w = post_quench_frequencies(spec).array();
  const int t = spec.joint_size();
  const double m = spec.mass();
  const Eigen::ArrayXd sxx = cov.sigma.diagonal().head(t).array();
  const Eigen::ArrayXd spp = cov.sigma.diagonal().tail(t).array();
  return ((m * w * sxx + spp / (m * w)) / (2.0 * spec.hbar()) - 0.5).matrix();
}

struct CovarianceSeries {
  std::vector<double> times;
  std::vector<CovarianceMatrix> samples;
};

inline CovarianceSeries evolve_covariance_series(const CovarianceMatrix &cov, const QuenchSpec &spec,
                                                 const std::vector<double> &times, int threads = 1) {
  detail::require_basis(cov, BasisTag::JointNormalModes, "evolve_covariance_series");
  CovarianceSeries out;
  out.times = times;
  out.samples.resize(times.size());
  parallel_for(times.size(), threads, [&](std::size_t i) { out.samples[i] = evolve_covariance(cov, spec, times[i]); });
  return out;
}

/// Largest absolute entry off the main diagonal.
inline double max_off_diagonal(const Eigen::MatrixXd &sigma) {
  Eigen::MatrixXd off = sigma;
  off.diagonal().setZero();
  return off.cwiseAbs().maxCoeff();
}

struct ThermalFormOptions {
  /// PASS requires every time-averaged off-diagonal entry below c / T.
  double tolerance_constant = 10.0;
  /// Number of dyadic windows T_full/2, T_full/4, ... used for the decay fit.
  int decay_windows = 5;
  /// Each window W is scored over averaging lengths W (1 + q / sub_windows), q < sub_windows.
  int sub_windows = 16;
};

struct ThermalFormReport {
  double window = 0.0;
  Eigen::MatrixXd time_average;
  double max_off_diagonal = 0.0;
  double tolerance = 0.0;
  std::vector<double> decay_windows;
  std::vector<double> decay_residuals;
  double decay_slope = 0.0;
  Eigen::VectorXd occupancies;
  std::vector<std::pair<int, int>> violating_pairs; ///< 0-based phase-space indices, i < j
  bool pass = false;
};

inline double loglog_slope(const std::vector<double> &x, const std::vector<double> &y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InvalidArgument("slope fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Time-averaged structure of a covariance trajectory sampled every dt.
/// `sample(i)` returns sigma at t = i dt and is called once per index, in
/// increasing order. The averaging window is T = count dt; the decay residual
/// for window W is the RMS off-diagonal entry of the running average, pooled
/// over averaging lengths in [W, 2W). Occupancies are filled in when `basis`
/// is the joint normal-mode basis.
template <class SampleFn>
ThermalFormReport thermal_form_check(std::size_t count, double dt, SampleFn &&sample, BasisTag basis,
                                     const QuenchSpec &spec, const ThermalFormOptions &options = {}) {
  if (count < 2 || !(dt > 0.0))
    throw InvalidArgument("thermal form check needs at least two samples and dt > 0");
  if (options.decay_windows < 0 || options.sub_windows < 1 || !(options.tolerance_constant > 0.0))
    throw InvalidArgument("invalid thermal form options");
  Eigen::MatrixXd first = sample(std::size_t{0});
  const Eigen::Index dim = first.rows();

  // running averages are only materialized at the sample counts that are scored
  std::vector<std::size_t> needed;
  const auto samples_for = [&](double window) {
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(window / dt)), 1, count);
  };

  ThermalFormReport report;
  report.window = dt * static_cast<double>(count);
  for (int w = options.decay_windows; w >= 1; --w)
    report.decay_windows.push_back(report.window / std::pow(2.0, w));
  for (double window : report.decay_windows)
    for (int q = 0; q < options.sub_windows; ++q)
      needed.push_back(samples_for(window * (1.0 + static_cast<double>(q) / options.sub_windows)));
  needed.push_back(count);
  std::sort(needed.begin(), needed.end());
  needed.erase(std::unique(needed.begin(), needed.end()), needed.end());

  std::vector<Eigen::MatrixXd> averages(needed.size());
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(dim, dim);
  std::size_t next = 0;
  for (std::size_t i = 0; i < count && next < needed.size(); ++i) {
    acc += i == 0 ? first : Eigen::MatrixXd(sample(i));
    while (next < needed.size() && needed[next] == i + 1) {
      averages[next] = acc / static_cast<double>(i + 1);
      ++next;
    }
  }
  const auto average_of = [&](std::size_t n) -> const Eigen::MatrixXd & {
    const auto it = std::lower_bound(needed.begin(), needed.end(), n);
    return averages[static_cast<std::size_t>(it - needed.begin())];
  };
  const auto mean_square_off = [](const Eigen::MatrixXd &m) {
    Eigen::MatrixXd off = m;
    off.diagonal().setZero();
    return off.squaredNorm() / static_cast<double>(m.size() - m.rows());
  };

  for (double window : report.decay_windows) {
    double ms = 0.0;
    for (int q = 0; q < options.sub_windows; ++q)
      ms += mean_square_off(average_of(samples_for(window * (1.0 + static_cast<double>(q) / options.sub_windows))));
    report.decay_residuals.push_back(std::sqrt(ms / options.sub_windows));
  }
  if (report.decay_windows.size() >= 2)
    report.decay_slope = loglog_slope(report.decay_windows, report.decay_residuals);

  report.time_average = average_of(count);
  report.max_off_diagonal = max_off_diagonal(report.time_average);
  report.tolerance = options.tolerance_constant / report.window;
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = i + 1; j < dim; ++j)
      if (std::abs(report.time_average(i, j)) > report.tolerance)
        report.violating_pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
  report.pass = report.violating_pairs.empty();
  if (basis == BasisTag::JointNormalModes)
    report.occupancies = mode_occupancies({report.time_average, BasisTag::JointNormalModes}, spec);
  return report;
}

/// Same check over a stored series; the grid must be uniform.
inline ThermalFormReport thermal_form_check(const CovarianceSeries &series, const QuenchSpec &spec,
                                            const ThermalFormOptions &options = {}) {
  const std::size_t count = series.samples.size();
  if (count < 2 || series.times.size() != count)
    throw InvalidArgument("thermal form check needs at least two samples");
  const double dt = series.times[1] - series.times[0];
  for (std::size_t i = 1; i < count; ++i)
    if (std::abs(series.times[i] - series.times[i - 1] - dt) > 1e-9 * std::max(1.0, dt))
      throw InvalidArgument("thermal form check needs a uniform time grid");
  return thermal_form_check(
      count, dt, [&](std::size_t i) -> const Eigen::MatrixXd & { return series.samples[i].sigma; },
      series.samples.front().basis, spec, options);
}

} // namespace quenchlab

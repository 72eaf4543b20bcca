#pragma once

// Time evolution of the disjoint-mode occupations <n_m(t)> = <a_m^dagger a_m>(t)
// after the quench, their long-time averages, subsystem energies and the
// fluctuation / recurrence diagnostics built on them.
//
// In the Heisenberg picture a_m(t) = sum_k alpha(m,k) e^{-i th_k} c_k
// + beta(m,k) e^{+i th_k} c_k^dagger with th_k = w'_k t / hbar. Writing
// v_m(t) = [alpha(m,:) e^{-i th}, beta(m,:) e^{+i th}] gives
//
//   <n_m(t)> = v_m(t)^dagger K v_m(t),   K = [[<c^dag c>, <c^dag c^dag>],
//                                             [<c c>,     <c c^dag>   ]]
//
// so each sample costs O((N+M)^2) per mode instead of the quadruple sum.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "bogoliubov.hpp"
#include "core_model.hpp"
#include "errors.hpp"
#include "parallel.hpp"

namespace quenchlab {

inline constexpr double kNegativeOccupationTolerance = 1e-8;

struct ObservableSeries {
  std::vector<double> times;
  Eigen::MatrixXd n_expect; ///< rows: time samples, columns: modes 1..N+M
  std::vector<double> e_left;
  std::vector<double> e_right;
  double e_total_joint = 0.0;
  Eigen::VectorXd long_time_avg;
  double max_imag_residue = 0.0;

  std::size_t samples() const { return times.size(); }
  std::vector<double> e_sum() const {
    std::vector<double> out(e_left.size());
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = e_left[i] + e_right[i];
    return out;
  }
};

struct EvolutionOptions {
  int threads = 1;
  double imag_tolerance = 1e-8;
  double commutator_tolerance = 1e-8;
};

inline void check_correlations(const CorrelationSet &corr, int modes, double tolerance) {
  if (corr.modes() != modes)
    throw ConsistencyError("correlation set has " + std::to_string(corr.modes()) +
                           " modes, map has " + std::to_string(modes));
  const double defect = corr.commutator_defect();
  if (!(defect <= tolerance))
    throw ConsistencyError("correlation set violates the canonical commutator (defect " +
                           std::to_string(defect) + ")");
}

/// Precomputed bilinear-form kernel for <n_m(t)>.
class OccupationKernel {
public:
  OccupationKernel(const BogoliubovMap &map, const CorrelationSet &corr, double hbar)
      : alpha_(map.alpha), beta_(map.beta), post_(map.post_frequencies), hbar_(hbar) {
    const int t = map.modes();
    kernel_.resize(2 * t, 2 * t);
    kernel_ << corr.cdag_c, corr.cdag_cdag, corr.c_c, corr.c_cdag;
    kernel_t_ = kernel_.transpose().cast<std::complex<double>>();
  }

  int modes() const { return static_cast<int>(alpha_.rows()); }

  /// Complex values; the imaginary parts are rounding residue.
  Eigen::VectorXcd evaluate(double time) const {
    const int t = modes();
    const Eigen::ArrayXd theta = post_.array() * (time / hbar_);
    const Eigen::ArrayXcd phase = (std::complex<double>(0.0, -1.0) * theta.cast<std::complex<double>>()).exp();
    Eigen::MatrixXcd v(t, 2 * t);
    v.leftCols(t) = (alpha_.cast<std::complex<double>>().array().rowwise() * phase.transpose()).matrix();
    v.rightCols(t) = (beta_.cast<std::complex<double>>().array().rowwise() * phase.conjugate().transpose()).matrix();
    const Eigen::MatrixXcd kv = v * kernel_t_;
    return (v.conjugate().array() * kv.array()).rowwise().sum().matrix();
  }

private:
  Eigen::MatrixXd alpha_;
  Eigen::MatrixXd beta_;
  Eigen::VectorXd post_;
  double hbar_;
  Eigen::MatrixXd kernel_;
  Eigen::MatrixXcd kernel_t_;
};

/// Long-time average: only the stationary diagonal terms survive.
inline Eigen::VectorXd long_time_average(const BogoliubovMap &map, const CorrelationSet &corr) {
  const Eigen::MatrixXd a2 = map.alpha.cwiseAbs2();
  const Eigen::MatrixXd b2 = map.beta.cwiseAbs2();
  return a2 * corr.cdag_c.diagonal() + b2 * corr.c_cdag.diagonal();
}

/// E_N and E_M for one occupation vector.
inline std::pair<double, double> subsystem_energies(const Eigen::VectorXd &occupations,
                                                    const Eigen::VectorXd &pre_frequencies, int n,
                                                    double hbar) {
  const int total = static_cast<int>(occupations.size());
  const Eigen::ArrayXd e = hbar * (occupations.array() + 0.5) * pre_frequencies.array();
  return {e.head(n).sum(), e.tail(total - n).sum()};
}

/// Sum_k hbar w'_k (<n'_k> + 1/2), the conserved post-quench energy.
inline double joint_energy(const BogoliubovMap &map, const CorrelationSet &corr, double hbar) {
  return hbar * (map.post_frequencies.array() * (corr.cdag_c.diagonal().array() + 0.5)).sum();
}

inline ObservableSeries evolve_occupations(const QuenchSpec &spec, const BogoliubovMap &map,
                                           const CorrelationSet &corr,
                                           const EvolutionOptions &options = {}) {
  spec.validate();
  if (map.n != spec.n() || map.m != spec.m())
    throw ConsistencyError("Bogoliubov map does not match the quench sizes");
  check_correlations(corr, map.modes(), options.commutator_tolerance);

  const OccupationKernel kernel(map, corr, spec.hbar());
  ObservableSeries series;
  series.times = spec.time_grid;
  const std::size_t samples = series.times.size();
  series.n_expect.resize(static_cast<Eigen::Index>(samples), map.modes());
  series.e_left.resize(samples);
  series.e_right.resize(samples);
  std::vector<double> residue(samples, 0.0);

  parallel_for(samples, options.threads, [&](std::size_t i) {
    const Eigen::VectorXcd n = kernel.evaluate(series.times[i]);
    const Eigen::VectorXd re = n.real();
    residue[i] = n.imag().cwiseAbs().maxCoeff();
    series.n_expect.row(static_cast<Eigen::Index>(i)) = re.transpose();
    const auto [left, right] = subsystem_energies(re, map.pre_frequencies, map.n, spec.hbar());
    series.e_left[i] = left;
    series.e_right[i] = right;
  });

  for (double r : residue)
    series.max_imag_residue = std::max(series.max_imag_residue, r);
  if (!(series.max_imag_residue <= options.imag_tolerance))
    throw ConsistencyError("imaginary residue " + std::to_string(series.max_imag_residue) +
                           " in <n_m(t)> exceeds tolerance");
  if (series.n_expect.size() > 0 && series.n_expect.minCoeff() < -kNegativeOccupationTolerance)
    throw ConsistencyError("negative occupation in evolved series");

  series.e_total_joint = joint_energy(map, corr, spec.hbar());
  series.long_time_avg = long_time_average(map, corr);
  return series;
}

/// Mean of each column over the samples with time < t_end (uniform Riemann average).
inline Eigen::VectorXd time_mean(const ObservableSeries &series, double t_end) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(series.n_expect.cols());
  std::size_t count = 0;
  for (std::size_t i = 0; i < series.samples() && series.times[i] < t_end; ++i, ++count)
    acc += series.n_expect.row(static_cast<Eigen::Index>(i)).transpose();
  if (count == 0)
    throw InvalidArgument("time_mean window contains no samples");
  return acc / static_cast<double>(count);
}

/// <c_l^dagger c_k>(t) = e^{i (w'_l - w'_k) t / hbar} <c_l^dagger c_k>(0).
inline Eigen::MatrixXcd evolve_joint_number_correlator(const BogoliubovMap &map, const CorrelationSet &corr,
                                                       double time, double hbar) {
  const int t = map.modes();
  Eigen::MatrixXcd out(t, t);
  for (int l = 0; l < t; ++l)
    for (int k = 0; k < t; ++k) {
      const double angle = (map.post_frequencies(l) - map.post_frequencies(k)) * time / hbar;
      out(l, k) = std::polar(1.0, angle) * corr.cdag_c(l, k);
    }
  return out;
}

struct RecurrenceOptions {
  double threshold = 0.5;
  double relaxation_skip = 50.0;
};

struct FluctuationSeries {
  std::vector<double> times;
  std::vector<double> ratio;
  std::optional<double> first_recurrence_time;
  double recurrence_threshold = 0.5;
  double relaxation_skip = 50.0;
  double e_right_average = 0.0;
};

inline constexpr double kDegenerateFluctuation = 1e-12;

/// |E_M(t) - <E_M>| / |E_M(0) - <E_M>| with <E_M> the long-time average.
inline FluctuationSeries fluctuation_series(const ObservableSeries &series, const QuenchSpec &spec,
                                            const RecurrenceOptions &options = {}) {
  if (series.samples() == 0 || series.times.front() != 0.0)
    throw InvalidArgument("fluctuation series needs a sample at t = 0");
  if (!(options.threshold > 0.0 && options.threshold <= 1.0))
    throw InvalidArgument("recurrence threshold must lie in (0, 1]");
  const auto w = pre_quench_frequencies(spec);
  const auto [left_avg, right_avg] = subsystem_energies(series.long_time_avg, w, spec.n(), spec.hbar());
  (void)left_avg;
  const double initial = std::abs(series.e_right.front() - right_avg);
  if (initial < kDegenerateFluctuation)
    throw DegenerateInitial("E_M(0) equals its long-time average; fluctuation ratio undefined");

  FluctuationSeries out;
  out.times = series.times;
  out.recurrence_threshold = options.threshold;
  out.relaxation_skip = options.relaxation_skip;
  out.e_right_average = right_avg;
  out.ratio.resize(series.samples());
  out.ratio[0] = 1.0;
  for (std::size_t i = 1; i < series.samples(); ++i)
    out.ratio[i] = std::abs(series.e_right[i] - right_avg) / initial;
  for (std::size_t i = 0; i < series.samples(); ++i)
    if (out.times[i] > options.relaxation_skip && out.ratio[i] >= options.threshold) {
      out.first_recurrence_time = out.times[i];
      break;
    }
  return out;
}

struct PerModeEnergy {
  std::vector<double> left;  ///< E_N(t) / N
  std::vector<double> right; ///< E_M(t) / M
  double left_average = 0.0;
  double right_average = 0.0;

  double average_gap() const { return std::abs(left_average - right_average); }
};

inline PerModeEnergy per_mode_energy(const ObservableSeries &series, const QuenchSpec &spec) {
  PerModeEnergy out;
  out.left.reserve(series.samples());
  out.right.reserve(series.samples());
  for (std::size_t i = 0; i < series.samples(); ++i) {
    out.left.push_back(series.e_left[i] / spec.n());
    out.right.push_back(series.e_right[i] / spec.m());
  }
  const auto [l, r] = subsystem_energies(series.long_time_avg, pre_quench_frequencies(spec), spec.n(), spec.hbar());
  out.left_average = l / spec.n();
  out.right_average = r / spec.m();
  return out;
}

} // namespace quenchlab

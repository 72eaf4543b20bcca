#pragma once

// Generalized Gibbs Ensemble built from the conserved joint-mode occupations,
// and the stimulated-emission deviation from the vacuum-like description.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>

#include "bogoliubov.hpp"
#include "core_model.hpp"
#include "errors.hpp"

namespace quenchlab {

/// <n'_k> = sum_l beta(l,k)^2 + sum_j (alpha(j,k)^2 + beta(j,k)^2) n_j
inline Eigen::VectorXd conserved_charges(const BogoliubovMap &map, const FockExcitation &state) {
  state.validate(map.modes());
  const Eigen::MatrixXd a2 = map.alpha.cwiseAbs2();
  const Eigen::MatrixXd b2 = map.beta.cwiseAbs2();
  const Eigen::VectorXd n = state.as_vector();
  return b2.colwise().sum().transpose() + (a2 + b2).transpose() * n;
}

/// The ensemble exp(-sum_k lambda_k n'_k) / Z, stored by its charges and multipliers.
/// A zero charge maps to lambda = +inf.
struct GgeEnsemble {
  Eigen::VectorXd charges;
  Eigen::VectorXd lambdas;

  /// 1 / (e^lambda - 1); zero for an infinite multiplier.
  Eigen::VectorXd reconstructed_charges() const {
    Eigen::VectorXd out(lambdas.size());
    for (Eigen::Index k = 0; k < lambdas.size(); ++k)
      out(k) = std::isinf(lambdas(k)) ? 0.0 : 1.0 / std::expm1(lambdas(k));
    return out;
  }
};

inline double lagrange_multiplier(double charge) {
  if (charge < 0.0 || std::isnan(charge))
    throw InvalidArgument("conserved charge must be non-negative");
  if (charge == 0.0)
    return std::numeric_limits<double>::infinity();
  return std::log1p(1.0 / charge);
}

inline GgeEnsemble build_gge(const Eigen::VectorXd &charges) {
  GgeEnsemble ens;
  ens.charges = charges;
  ens.lambdas.resize(charges.size());
  for (Eigen::Index k = 0; k < charges.size(); ++k)
    ens.lambdas(k) = lagrange_multiplier(charges(k));
  return ens;
}

/// <n_m>_GGE from the ensemble's own occupations <c^dag_k c_k> = 1 / (e^lambda_k - 1),
/// <c_k c^dag_k> = that + 1, with no off-diagonal or anomalous correlators.
inline Eigen::VectorXd gge_expectations(const BogoliubovMap &map, const GgeEnsemble &ens) {
  if (ens.lambdas.size() != map.modes())
    throw InvalidArgument("ensemble and map disagree on the number of modes");
  const Eigen::VectorXd occ = ens.reconstructed_charges();
  const Eigen::MatrixXd a2 = map.alpha.cwiseAbs2();
  const Eigen::MatrixXd b2 = map.beta.cwiseAbs2();
  return a2 * occ + b2 * (occ.array() + 1.0).matrix();
}

struct DeviationReport {
  /// Per joint mode: stimulated density / vacuum-polarization density.
  Eigen::VectorXd delta_g;
  /// sum_j (alpha(j,k)^2 + beta(j,k)^2) n_j / (N+M), per joint mode.
  Eigen::VectorXd stimulated_density;
  /// sum_l beta(l,k)^2 / (N+M), per joint mode.
  Eigen::VectorXd vacuum_density;
  /// Totals over all joint modes, per lattice site of the joint chain.
  double vacuum_term_per_site = 0.0;
  double stimulated_term_per_site = 0.0;
  /// Same totals divided by the left-chain size instead.
  double vacuum_term_per_left_site = 0.0;
  double stimulated_term_per_left_site = 0.0;
  int lattice_size = 0;
  std::string normalization = "joint lattice size N+M";
};

inline DeviationReport deviation_delta_g(const BogoliubovMap &map, const FockExcitation &state) {
  state.validate(map.modes());
  const int total = map.modes();
  const Eigen::MatrixXd a2 = map.alpha.cwiseAbs2();
  const Eigen::MatrixXd b2 = map.beta.cwiseAbs2();
  const Eigen::VectorXd n = state.as_vector();

  DeviationReport report;
  report.lattice_size = total;
  report.vacuum_density = b2.colwise().sum().transpose() / total;
  report.stimulated_density = (a2 + b2).transpose() * n / total;
  report.delta_g.resize(total);
  for (int k = 0; k < total; ++k) {
    if (report.vacuum_density(k) == 0.0)
      throw DivisionByZero("vacuum polarization vanishes for joint mode " + std::to_string(k + 1));
    report.delta_g(k) = report.stimulated_density(k) / report.vacuum_density(k);
  }
  report.vacuum_term_per_site = report.vacuum_density.sum();
  report.stimulated_term_per_site = report.stimulated_density.sum();
  const double rescale = static_cast<double>(total) / map.n;
  report.vacuum_term_per_left_site = report.vacuum_term_per_site * rescale;
  report.stimulated_term_per_left_site = report.stimulated_term_per_site * rescale;
  return report;
}

/// Mean of delta_g over joint modes with 0-based index in [floor(lo T), floor(hi T)).
/// Individual modes fluctuate with the overlap pattern; a fixed fractional band
/// of the spectrum is comparable across sizes.
inline double band_mean_delta_g(const DeviationReport &report, double lo = 0.6, double hi = 0.9) {
  const auto total = static_cast<double>(report.delta_g.size());
  if (!(lo >= 0.0 && lo < hi && hi <= 1.0))
    throw InvalidArgument("band must satisfy 0 <= lo < hi <= 1");
  const auto first = static_cast<Eigen::Index>(std::floor(lo * total));
  const auto last = static_cast<Eigen::Index>(std::floor(hi * total));
  if (last <= first)
    throw InvalidArgument("band contains no joint modes");
  return report.delta_g.segment(first, last - first).mean();
}

} // namespace quenchlab

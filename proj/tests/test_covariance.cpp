#include <gtest/gtest.h>

#include <cmath>

#include "quenchlab/bogoliubov.hpp"
#include "quenchlab/covariance.hpp"
#include "quenchlab/gge.hpp"
#include "test_oracles.hpp"

using namespace quenchlab;

namespace {

double max_abs(const Eigen::MatrixXd &m) { return m.cwiseAbs().maxCoeff(); }

CovarianceSeries sampled(const CovarianceMatrix &joint, const QuenchSpec &spec, double dt, std::size_t count) {
  std::vector<double> times(count);
  for (std::size_t i = 0; i < count; ++i)
    times[i] = dt * static_cast<double>(i);
  return evolve_covariance_series(joint, spec, times, 2);
}

} // namespace

TEST(InitialCovariance, FockStateDiagonal) {
  const auto spec = make_quench(2, 3, FockExcitation::excited(5, {2, 2}), {0.0}, 2.0, 1.0, 0.5);
  const CovarianceMatrix cov = initial_covariance(spec);
  const Eigen::VectorXd w = pre_quench_frequencies(spec);
  EXPECT_EQ(cov.basis, BasisTag::DisjointNormalModes);
  EXPECT_NEAR(cov.sigma(1, 1), 0.5 * 2.5 / (2.0 * w(1)), 1e-15);
  EXPECT_NEAR(cov.sigma(6, 6), 0.5 * 2.0 * 2.5 * w(1), 1e-15);
  EXPECT_EQ(max_abs(cov.xp()), 0.0);
  const Eigen::VectorXd nu = symplectic_eigenvalues(cov);
  Eigen::VectorXd expected(5);
  expected << 0.25, 0.25, 0.25, 0.25, 1.25;
  EXPECT_LT((nu - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(satisfies_uncertainty(cov, 0.5));
}

TEST(Configuration, VacuumMatchesChainGroundStates) {
  const auto spec = make_quench(4, 6, FockExcitation::vacuum(10), {0.0}, 1.5, 0.8, 1.2);
  const CovarianceMatrix config = to_configuration(initial_covariance(spec), spec);
  const Eigen::MatrixXd left = oracle::ground_position_correlation(4, 1.5, 0.8, 1.2);
  const Eigen::MatrixXd right = oracle::ground_position_correlation(6, 1.5, 0.8, 1.2);
  EXPECT_LT(max_abs(config.xx().topLeftCorner(4, 4) - left), 1e-13);
  EXPECT_LT(max_abs(config.xx().bottomRightCorner(6, 6) - right), 1e-13);
  EXPECT_EQ(max_abs(config.xx().topRightCorner(4, 6)), 0.0);
}

TEST(Configuration, RoundTrips) {
  const auto spec = make_quench(3, 5, FockExcitation::excited(8, {1, 6}));
  const CovarianceMatrix cov = initial_covariance(spec);
  const CovarianceMatrix config = to_configuration(cov, spec);
  EXPECT_LT(max_abs(to_disjoint_modes(config, spec).sigma - cov.sigma), 1e-13);
  const CovarianceMatrix joint = to_joint_modes(config, spec);
  EXPECT_LT(max_abs(from_joint_modes(joint, spec).sigma - config.sigma), 1e-13);
  EXPECT_LT(joint.symmetry_defect(), 1e-15);
}

TEST(Configuration, WrongBasisIsRejected) {
  const auto spec = make_quench(2, 2);
  const CovarianceMatrix cov = initial_covariance(spec);
  EXPECT_THROW(to_joint_modes(cov, spec), BasisError);
  EXPECT_THROW(to_disjoint_modes(cov, spec), BasisError);
  EXPECT_THROW(evolve_covariance(cov, spec, 1.0), BasisError);
  EXPECT_THROW(mode_occupancies(cov, spec), BasisError);
  EXPECT_THROW(to_configuration(to_configuration(cov, spec), spec), BasisError);
}

TEST(JointModes, OccupanciesAreConservedCharges) {
  const auto spec = make_quench(4, 5, FockExcitation::excited(9, {3, 3, 8}));
  const BogoliubovMap map = build_bogoliubov(spec);
  const Eigen::VectorXd charges = conserved_charges(map, spec.initial_state);
  const CovarianceMatrix joint = initial_joint_covariance(spec);
  EXPECT_LT((mode_occupancies(joint, spec) - charges).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(max_abs(joint.xp()), 1e-15);
}

TEST(Evolution, MatchesClosedForm) {
  const auto spec = make_quench(3, 4, FockExcitation::excited(7, {2}), {0.0}, 1.7, 0.9, 1.0);
  const CovarianceMatrix joint = initial_joint_covariance(spec);
  const Eigen::VectorXd w = post_quench_frequencies(spec);
  const double m = spec.mass();
  const int t = 7;
  const Eigen::MatrixXd a = joint.xx();
  const Eigen::MatrixXd at = joint.pp();
  for (double time : {0.3, 2.0, 41.0}) {
    const CovarianceMatrix cov = evolve_covariance(joint, spec, time);
    for (int i = 0; i < t; ++i)
      for (int j = 0; j < t; ++j) {
        const double ci = std::cos(w(i) * time), si = std::sin(w(i) * time);
        const double cj = std::cos(w(j) * time), sj = std::sin(w(j) * time);
        const double xx = a(i, j) * ci * cj + at(i, j) * si * sj / (m * m * w(i) * w(j));
        const double pp = a(i, j) * m * m * w(i) * w(j) * si * sj + at(i, j) * ci * cj;
        const double xp = -a(i, j) * ci * sj * m * w(j) + at(i, j) * si * cj / (m * w(i));
        EXPECT_NEAR(cov.sigma(i, j), xx, 1e-13);
        EXPECT_NEAR(cov.sigma(t + i, t + j), pp, 1e-13);
        EXPECT_NEAR(cov.sigma(i, t + j), xp, 1e-13);
      }
  }
}

TEST(Evolution, PropagatorIsSymplectic) {
  const auto spec = make_quench(2, 5);
  const Eigen::MatrixXd u = joint_propagator(spec, 3.7);
  const Eigen::MatrixXd omega = symplectic_form(7);
  EXPECT_LT(max_abs(u * omega * u.transpose() - omega), 1e-13);
}

TEST(Evolution, SymplecticSpectrumIsInvariant) {
  for (const auto &excite : {std::vector<int>{}, std::vector<int>{3, 4}}) {
    const auto spec = make_quench(5, 10, FockExcitation::excited(15, excite));
    const CovarianceMatrix cov = initial_covariance(spec);
    const Eigen::VectorXd ref = symplectic_eigenvalues(cov);
    const CovarianceMatrix config = to_configuration(cov, spec);
    const CovarianceMatrix joint = to_joint_modes(config, spec);
    EXPECT_LT((symplectic_eigenvalues(config) - ref).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((symplectic_eigenvalues(joint) - ref).cwiseAbs().maxCoeff(), 1e-10);
    for (double time : {1.0, 50.0, 999.0}) {
      const CovarianceMatrix evolved = evolve_covariance(joint, spec, time);
      EXPECT_LT((symplectic_eigenvalues(evolved) - ref).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_TRUE(satisfies_uncertainty(evolved));
    }
  }
}

TEST(Symplectic, RejectsIndefiniteMatrix) {
  EXPECT_THROW(symplectic_eigenvalues(Eigen::MatrixXd::Zero(4, 4)), InvalidArgument);
}

TEST(ThermalForm, VacuumAverageIsDiagonalWithVacuumOccupancies) {
  const auto spec = make_quench(2, 3);
  const BogoliubovMap map = build_bogoliubov(spec);
  const CovarianceSeries series = sampled(initial_joint_covariance(spec), spec, 0.2, 20000);
  const ThermalFormReport report = thermal_form_check(series, spec);
  EXPECT_NEAR(report.window, 4000.0, 1e-9);
  EXPECT_TRUE(report.pass) << "max off-diagonal " << report.max_off_diagonal;
  EXPECT_LT(report.max_off_diagonal, report.tolerance);
  EXPECT_LT(std::abs(report.decay_slope + 1.0), 0.3);
  const Eigen::VectorXd vacuum = map.beta.cwiseAbs2().colwise().sum().transpose();
  EXPECT_LT((report.occupancies - vacuum).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ThermalForm, CrossMomentumStillAveragesOut) {
  // sigma_xp != 0 in the joint basis; distinct frequencies still dephase it.
  const auto spec = make_quench(2, 2);
  CovarianceMatrix joint = initial_joint_covariance(spec);
  joint.sigma *= 1.5; // mixed state, so the perturbation stays physical
  joint.sigma(0, 4 + 1) += 0.05;
  joint.sigma(4 + 1, 0) += 0.05;
  joint.sigma(2, 4 + 2) += 0.03;
  joint.sigma(4 + 2, 2) += 0.03;
  ASSERT_TRUE(satisfies_uncertainty(joint));
  const ThermalFormReport report = thermal_form_check(sampled(joint, spec, 0.2, 20000), spec);
  EXPECT_TRUE(report.pass) << "max off-diagonal " << report.max_off_diagonal;
}

TEST(ThermalForm, PersistentCorrelationIsFlagged) {
  // Synthetic trajectory: one off-diagonal entry never dephases, as for degenerate frequencies.
  const auto spec = make_quench(1, 1);
  const std::size_t count = 5000;
  const double dt = 0.1;
  const auto sample = [&](std::size_t i) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(4, 4);
    const double t = dt * static_cast<double>(i);
    s(0, 1) = s(1, 0) = 0.2;
    s(0, 2) = s(2, 0) = 0.3 * std::cos(1.3 * t);
    return s;
  };
  const ThermalFormReport report = thermal_form_check(count, dt, sample, BasisTag::Configuration, spec);
  EXPECT_FALSE(report.pass);
  ASSERT_EQ(report.violating_pairs.size(), 1u);
  EXPECT_EQ(report.violating_pairs.front(), (std::pair<int, int>{0, 1}));
  EXPECT_EQ(report.occupancies.size(), 0);
}

TEST(ThermalForm, OscillatingEntryDecaysAsInverseWindow) {
  const auto spec = make_quench(1, 1);
  const auto sample = [](std::size_t i) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(2, 2);
    s(0, 1) = s(1, 0) = std::cos(0.7 * 0.1 * static_cast<double>(i));
    return s;
  };
  const ThermalFormReport report = thermal_form_check(32000, 0.1, sample, BasisTag::Configuration, spec);
  EXPECT_NEAR(report.decay_slope, -1.0, 0.1);
  EXPECT_TRUE(report.pass);
}

TEST(ThermalForm, InputValidation) {
  const auto spec = make_quench(1, 1);
  const CovarianceMatrix joint = initial_joint_covariance(spec);
  CovarianceSeries series = sampled(joint, spec, 1.0, 4);
  series.times[2] = 2.5;
  EXPECT_THROW(thermal_form_check(series, spec), InvalidArgument);
  EXPECT_THROW(thermal_form_check(sampled(joint, spec, 1.0, 1), spec), InvalidArgument);
}

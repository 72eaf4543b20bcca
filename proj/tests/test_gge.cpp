#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "quenchlab/dynamics.hpp"
#include "quenchlab/gge.hpp"

using namespace quenchlab;

TEST(ConservedCharges, VacuumIsVacuumPolarization) {
  const BogoliubovMap map = build_bogoliubov(make_quench(4, 7));
  const Eigen::VectorXd q = conserved_charges(map, FockExcitation::vacuum(11));
  for (int k = 0; k < 11; ++k) {
    double expected = 0.0;
    for (int l = 0; l < 11; ++l)
      expected += map.beta(l, k) * map.beta(l, k);
    EXPECT_NEAR(q(k), expected, 1e-15);
  }
}

TEST(ConservedCharges, ExcitationAddsStimulatedEmission) {
  const BogoliubovMap map = build_bogoliubov(make_quench(3, 3));
  const FockExcitation state{{0, 2, 0, 0, 1, 0}};
  const Eigen::VectorXd vacuum = conserved_charges(map, FockExcitation::vacuum(6));
  const Eigen::VectorXd q = conserved_charges(map, state);
  for (int k = 0; k < 6; ++k) {
    const double stimulated = 2.0 * (std::pow(map.alpha(1, k), 2) + std::pow(map.beta(1, k), 2)) +
                              std::pow(map.alpha(4, k), 2) + std::pow(map.beta(4, k), 2);
    EXPECT_NEAR(q(k), vacuum(k) + stimulated, 1e-14);
  }
}

TEST(ConservedCharges, MatchJointCorrelatorDiagonal) {
  const auto spec = make_quench(5, 6, FockExcitation::excited(11, {2, 2, 9}));
  const BogoliubovMap map = build_bogoliubov(spec);
  const CorrelationSet corr = initial_correlations(map, spec.initial_state);
  EXPECT_LT((conserved_charges(map, spec.initial_state) - corr.cdag_c.diagonal()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(LagrangeMultiplier, RoundTripAndSentinel) {
  for (double q : {1e-8, 0.01, 0.5, 3.0, 250.0}) {
    const GgeEnsemble ens = build_gge(Eigen::VectorXd::Constant(1, q));
    EXPECT_NEAR(ens.reconstructed_charges()(0) / q, 1.0, 1e-13);
    EXPECT_GT(ens.lambdas(0), 0.0);
  }
  EXPECT_TRUE(std::isinf(lagrange_multiplier(0.0)));
  const GgeEnsemble zero = build_gge(Eigen::VectorXd::Zero(2));
  EXPECT_EQ(zero.reconstructed_charges()(1), 0.0);
  EXPECT_THROW(lagrange_multiplier(-0.1), InvalidArgument);
  EXPECT_THROW(lagrange_multiplier(std::numeric_limits<double>::quiet_NaN()), InvalidArgument);
}

TEST(GgeExpectations, EqualLongTimeAverage) {
  for (const auto &excite : {std::vector<int>{}, std::vector<int>{1}, std::vector<int>{3, 4}}) {
    const auto spec = make_quench(5, 10, FockExcitation::excited(15, excite));
    const BogoliubovMap map = build_bogoliubov(spec);
    const Eigen::VectorXd gge = gge_expectations(map, build_gge(conserved_charges(map, spec.initial_state)));
    const Eigen::VectorXd avg = long_time_average(map, initial_correlations(map, spec.initial_state));
    EXPECT_LT((gge - avg).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(GgeExpectations, RejectsSizeMismatch) {
  const BogoliubovMap map = build_bogoliubov(make_quench(2, 2));
  EXPECT_THROW(gge_expectations(map, build_gge(Eigen::VectorXd::Ones(3))), InvalidArgument);
}

TEST(Deviation, VacuumHasNoStimulatedTerm) {
  const BogoliubovMap map = build_bogoliubov(make_quench(6, 6));
  const DeviationReport report = deviation_delta_g(map, FockExcitation::vacuum(12));
  EXPECT_EQ(report.delta_g.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(report.lattice_size, 12);
  EXPECT_GT(report.vacuum_term_per_site, 0.0);
}

TEST(Deviation, DensitiesAndLeftSiteRescaling) {
  const BogoliubovMap map = build_bogoliubov(make_quench(4, 8));
  const FockExcitation state = FockExcitation::excited(12, {2});
  const DeviationReport report = deviation_delta_g(map, state);
  const Eigen::VectorXd charges = conserved_charges(map, state);
  EXPECT_LT(((report.vacuum_density + report.stimulated_density) * 12.0 - charges).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(report.vacuum_term_per_left_site, report.vacuum_term_per_site * 3.0, 1e-15);
  for (int k = 0; k < 12; ++k)
    EXPECT_NEAR(report.delta_g(k), report.stimulated_density(k) / report.vacuum_density(k), 1e-12);
}

TEST(Deviation, ZeroVacuumPolarizationIsDivisionByZero) {
  BogoliubovMap map = build_bogoliubov(make_quench(2, 2));
  map.beta.col(2).setZero();
  EXPECT_THROW(deviation_delta_g(map, FockExcitation::excited(4, {1})), DivisionByZero);
}

TEST(Deviation, BandMeanSelectsFractionalBand) {
  DeviationReport report;
  report.delta_g = Eigen::VectorXd::LinSpaced(10, 0.0, 9.0);
  EXPECT_DOUBLE_EQ(band_mean_delta_g(report), 7.0); // indices 6, 7, 8
  EXPECT_DOUBLE_EQ(band_mean_delta_g(report, 0.0, 1.0), 4.5);
  EXPECT_THROW(band_mean_delta_g(report, 0.5, 0.5), InvalidArgument);
  EXPECT_THROW(band_mean_delta_g(report, 0.51, 0.55), InvalidArgument);
}

TEST(Deviation, BandMeanFallsWithSize) {
  double previous = std::numeric_limits<double>::infinity();
  for (int half : {5, 10, 20}) {
    const BogoliubovMap map = build_bogoliubov(make_quench(half, half));
    const double band = band_mean_delta_g(deviation_delta_g(map, FockExcitation::excited(2 * half, {(half + 1) / 2})));
    EXPECT_LT(band, previous);
    previous = band;
  }
}

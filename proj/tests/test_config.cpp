#include <gtest/gtest.h>

#include <sstream>

#include "quenchlab/config.hpp"

using namespace quenchlab;

namespace {

ExperimentConfig parse(const std::string &text) {
  std::istringstream in(text);
  return parse_config(in);
}

} // namespace

TEST(ParseEntries, CommentsBlankLinesAndWhitespace) {
  std::istringstream in("# header\n\n  N = 3   # trailing\nM=4\nname = demo\n");
  const auto entries = parse_entries(in);
  EXPECT_EQ(entries.size(), 3u);
  EXPECT_EQ(entries.at("N"), "3");
  EXPECT_EQ(entries.at("M"), "4");
  EXPECT_EQ(entries.at("name"), "demo");
}

TEST(ParseEntries, RejectsMalformedLines) {
  std::istringstream dup("N = 1\nN = 2\n");
  EXPECT_THROW(parse_entries(dup), ConfigError);
  std::istringstream no_eq("N 1\n");
  EXPECT_THROW(parse_entries(no_eq), ConfigError);
  std::istringstream empty_key(" = 1\n");
  EXPECT_THROW(parse_entries(empty_key), ConfigError);
}

TEST(Config, DefaultsAndPhysicalParameters) {
  const ExperimentConfig cfg = parse("N = 2\nM = 3\nmass = 2\nomega0 = 0.5\nhbar = 1.5\n");
  EXPECT_EQ(cfg.name, "run");
  EXPECT_EQ(cfg.spec.n(), 2);
  EXPECT_EQ(cfg.spec.m(), 3);
  EXPECT_DOUBLE_EQ(cfg.spec.mass(), 2.0);
  EXPECT_DOUBLE_EQ(cfg.spec.hbar(), 1.5);
  EXPECT_EQ(cfg.spec.time_grid.size(), 2001u);
  EXPECT_DOUBLE_EQ(cfg.spec.time_grid.back(), 2000.0);
  EXPECT_TRUE(cfg.analyses.empty());
  EXPECT_EQ(cfg.floors, std::vector<double>{1e-12});
  EXPECT_EQ(cfg.entries.at("omega0"), "0.5");
}

TEST(Config, InitialStateFromOccupationsOrExcite) {
  EXPECT_EQ(parse("N = 2\nM = 2\noccupations = 0,1,0,2\n").spec.initial_state.occupations,
            (std::vector<int>{0, 1, 0, 2}));
  EXPECT_EQ(parse("N = 2\nM = 2\nexcite = 4,4,1\n").spec.initial_state.occupations, (std::vector<int>{1, 0, 0, 2}));
  EXPECT_THROW(parse("N = 2\nM = 2\noccupations = 0,1,0\n"), ConfigError);
  EXPECT_THROW(parse("N = 2\nM = 2\noccupations = 0,0,0,0\nexcite = 1\n"), ConfigError);
  EXPECT_THROW(parse("N = 2\nM = 2\nexcite = 5\n"), ConfigError);
  EXPECT_THROW(parse("N = 2\nM = 2\noccupations = 0,-1,0,0\n"), ConfigError);
}

TEST(Config, RejectsBadKeysAndValues) {
  EXPECT_THROW(parse("N = 2\nM = 2\nfoo = 1\n"), ConfigError);
  EXPECT_THROW(parse("M = 2\n"), ConfigError);
  EXPECT_THROW(parse("N = two\nM = 2\n"), ConfigError);
  EXPECT_THROW(parse("N = 0\nM = 2\n"), ConfigError);
  EXPECT_THROW(parse("N = 2\nM = 2\nmass = -1\n"), ConfigError);
  EXPECT_THROW(parse("N = 2\nM = 2\nname = a b\n"), ConfigError);
  EXPECT_THROW(parse("N = 2\nM = 2\nt_steps = 0\n"), ConfigError);
}

TEST(Config, Analyses) {
  const ExperimentConfig cfg = parse("N = 2\nM = 2\nanalyses = gge, dynamics,gge\n");
  EXPECT_EQ(cfg.analyses, (std::vector<std::string>{"gge", "dynamics"}));
  EXPECT_TRUE(cfg.wants("dynamics"));
  EXPECT_FALSE(cfg.wants("covariance"));
  EXPECT_THROW(parse("N = 2\nM = 2\nanalyses = spectra\n"), ConfigError);
}

TEST(Config, SweepList) {
  const ExperimentConfig cfg = parse("N = 2\nM = 2\nanalyses = sweep\nsweep = 5,5,3; 10,10,0\n");
  ASSERT_EQ(cfg.sweep.size(), 2u);
  EXPECT_EQ(cfg.sweep[0].n, 5);
  EXPECT_EQ(cfg.sweep[0].excited_mode, 3);
  EXPECT_EQ(cfg.sweep[1].state().total(), 0);
  EXPECT_EQ(cfg.sweep[0].state().occupations[2], 1);
  EXPECT_THROW(parse("N = 2\nM = 2\nanalyses = sweep\n"), ConfigError);
  EXPECT_THROW(parse("N = 2\nM = 2\nsweep = 5,5\n"), ConfigError);
  EXPECT_THROW(parse("N = 2\nM = 2\nsweep = 5,5,11\n"), ConfigError);
}

TEST(Config, OracleFloorsAndThreshold) {
  const ExperimentConfig cfg =
      parse("N = 2\nM = 2\norder = 6\ncutoff = 5\nmax_total = 12\nfloors = 1e-8,1e-4\nrecurrence_threshold = 0.3\n");
  EXPECT_EQ(cfg.oracle.order, 6);
  EXPECT_EQ(cfg.oracle.cutoff, 5);
  EXPECT_EQ(cfg.oracle.max_total, std::optional<int>{12});
  EXPECT_EQ(cfg.floors, (std::vector<double>{1e-8, 1e-4}));
  EXPECT_DOUBLE_EQ(cfg.recurrence_threshold, 0.3);
  EXPECT_THROW(parse("N = 2\nM = 2\norder = 0\n"), ConfigError);
  EXPECT_THROW(parse("N = 2\nM = 2\ncutoff = 500\n"), ConfigError);
  EXPECT_THROW(parse("N = 2\nM = 2\nfloors = 0\n"), ConfigError);
  EXPECT_THROW(parse("N = 2\nM = 2\nrecurrence_threshold = 1.5\n"), ConfigError);
}

TEST(Config, MissingFileIsIoError) {
  EXPECT_THROW(load_config("/nonexistent/quenchlab.conf"), IoError);
}

#pragma once

// Batch runner behind the quenchlab CLI: presets, per-analysis pipelines,
// CSV/JSON artifacts and the run manifest.

#include <json.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <locale>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bogoliubov.hpp"
#include "config.hpp"
#include "core_model.hpp"
#include "covariance.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "fock_oracle.hpp"
#include "gge.hpp"

namespace quenchlab {

inline constexpr const char *kVersion = "1.0.0";

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config = 2;
inline constexpr int numeric = 3;
inline constexpr int io = 4;
} // namespace exit_code

// ---------------------------------------------------------------- presets

namespace detail {

inline ExperimentConfig preset_config(std::string name, int n, int m, std::vector<int> excite, double t_max,
                                      int t_steps, std::vector<std::string> analyses) {
  ExperimentConfig cfg;
  cfg.name = std::move(name);
  cfg.t_max = t_max;
  cfg.t_steps = t_steps;
  cfg.spec = make_quench(n, m, FockExcitation::excited(n + m, excite), uniform_time_grid(t_max, t_steps));
  cfg.analyses = std::move(analyses);
  cfg.entries = {{"preset", cfg.name}};
  return cfg;
}

} // namespace detail

inline std::vector<std::string> preset_names() { return {"fig1", "table1", "gscale", "oracle", "covariance"}; }

/// Built-in configurations. Presets with several sizes expand to one config per size.
inline std::vector<ExperimentConfig> preset_configs(const std::string &name) {
  std::vector<ExperimentConfig> out;
  if (name == "fig1") {
    for (int m : {10, 16, 20})
      out.push_back(detail::preset_config("fig1-M" + std::to_string(m), 5, m, {3, 4}, 2000.0, 2001,
                                          {"dynamics", "gge"}));
  } else if (name == "table1") {
    for (int m : {10, 16, 20}) {
      for (const auto &[label, excite] : {std::pair{"single", std::vector<int>{3}}, std::pair{"double", std::vector<int>{3, 4}}}) {
        auto cfg = detail::preset_config("table1-M" + std::to_string(m) + "-" + label, 5, m, excite, 0.0, 1,
                                         {"delocalization"});
        cfg.floors = {1e-12, 1e-8, 1e-6, 1e-4};
        out.push_back(std::move(cfg));
      }
    }
  } else if (name == "gscale") {
    auto cfg = detail::preset_config("gscale", 5, 5, {3}, 0.0, 1, {"sweep"});
    for (int half : {5, 10, 20, 40})
      cfg.sweep.push_back({half, half, (half + 1) / 2});
    out.push_back(std::move(cfg));
  } else if (name == "oracle") {
    auto cfg = detail::preset_config("oracle", 2, 2, {2, 3}, 50.0, 101, {"fock-oracle", "gge"});
    cfg.oracle = {24, 8, 32};
    out.push_back(std::move(cfg));
  } else if (name == "covariance") {
    out.push_back(detail::preset_config("covariance", 5, 10, {}, 1999.8, 10000, {"covariance", "gge"}));
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return out;
}

// ------------------------------------------------------------ file output

/// Locale-independent CSV with 17 significant digits.
class CsvWriter {
public:
  explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
    out_.imbue(std::locale::classic());
    out_ << std::setprecision(17);
    write_row(header);
  }

  template <class Row> void write_row(const Row &row) {
    if (row.size() != columns_)
      throw InvalidArgument("CSV row has the wrong number of columns");
    bool first = true;
    for (const auto &cell : row) {
      if (!first)
        out_ << ',';
      first = false;
      out_ << cell;
    }
    out_ << '\n';
  }

  std::string str() const { return out_.str(); }

private:
  std::size_t columns_;
  std::ostringstream out_;
};

inline void write_text_file(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out)
    throw IoError("failed writing '" + path.string() + "'");
}

inline std::vector<double> to_std(const Eigen::VectorXd &v) { return {v.data(), v.data() + v.size()}; }

inline nlohmann::json finite_or_string(double value) {
  if (std::isinf(value))
    return value > 0 ? "inf" : "-inf";
  if (std::isnan(value))
    return "nan";
  return value;
}

inline std::vector<std::string> mode_columns(const std::string &prefix, int count) {
  std::vector<std::string> out;
  for (int i = 1; i <= count; ++i)
    out.push_back(prefix + std::to_string(i));
  return out;
}

inline std::string matrix_csv(const Eigen::MatrixXd &a, const std::string &row_label, const std::string &col_prefix) {
  std::vector<std::string> header{row_label};
  for (const auto &c : mode_columns(col_prefix, static_cast<int>(a.cols())))
    header.push_back(c);
  CsvWriter csv(header);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    std::vector<double> row{static_cast<double>(i + 1)};
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      row.push_back(a(i, j));
    csv.write_row(row);
  }
  return csv.str();
}

// ---------------------------------------------------------------- scaling

struct ScalingRow {
  SweepPoint point;
  int lattice_size = 0;
  double delta_g_band = 0.0;
  double vacuum_term_per_site = 0.0;
  double stimulated_term_per_site = 0.0;
  double per_mode_gap = 0.0;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  /// log-log slope of the band-mean delta_g against N+M; empty if delta_g vanishes.
  std::optional<double> delta_g_slope;
  /// |v(top) - v(top/2)| / v(top/2) for the vacuum term per site, if the sweep spans an octave.
  std::optional<double> plateau_change;
  std::optional<double> gap_slope;
};

inline constexpr double kScalingSlopeTarget = -1.0;
inline constexpr double kScalingSlopeTolerance = 0.15;
inline constexpr double kPlateauTolerance = 0.05;

inline ScalingReport sweep(const std::vector<SweepPoint> &points) {
  if (points.empty())
    throw ConfigError("sweep list is empty");
  ScalingReport report;
  for (const auto &point : points) {
    const QuenchSpec spec = make_quench(point.n, point.m, point.state());
    const BogoliubovMap map = build_bogoliubov(spec);
    const DeviationReport dev = deviation_delta_g(map, spec.initial_state);
    const Eigen::VectorXd avg = long_time_average(map, initial_correlations(map, spec.initial_state));
    const auto [left, right] = subsystem_energies(avg, map.pre_frequencies, map.n, spec.hbar());
    ScalingRow row;
    row.point = point;
    row.lattice_size = spec.joint_size();
    row.delta_g_band = band_mean_delta_g(dev);
    row.vacuum_term_per_site = dev.vacuum_term_per_site;
    row.stimulated_term_per_site = dev.stimulated_term_per_site;
    row.per_mode_gap = std::abs(left / spec.n() - right / spec.m());
    report.rows.push_back(row);
  }
  if (report.rows.size() >= 2) {
    std::vector<double> sizes, deltas, gaps;
    bool positive = true, gaps_positive = true;
    for (const auto &row : report.rows) {
      sizes.push_back(row.lattice_size);
      deltas.push_back(row.delta_g_band);
      gaps.push_back(row.per_mode_gap);
      positive = positive && row.delta_g_band > 0.0;
      gaps_positive = gaps_positive && row.per_mode_gap > 0.0;
    }
    if (positive)
      report.delta_g_slope = loglog_slope(sizes, deltas);
    if (gaps_positive)
      report.gap_slope = loglog_slope(sizes, gaps);
  }
  const auto top = std::max_element(report.rows.begin(), report.rows.end(),
                                    [](const auto &a, const auto &b) { return a.lattice_size < b.lattice_size; });
  for (const auto &row : report.rows)
    if (2 * row.lattice_size == top->lattice_size && row.vacuum_term_per_site > 0.0)
      report.plateau_change = std::abs(top->vacuum_term_per_site - row.vacuum_term_per_site) / row.vacuum_term_per_site;
  return report;
}

// ---------------------------------------------------------------- running

struct RunOptions {
  std::filesystem::path out_dir;
  int threads = 1;
  bool dump_bogoliubov = false;
  std::optional<double> floor;
  std::optional<long long> seed;
};

/// Runs every requested analysis of one config and returns its JSON summary.
/// Artifact file names are appended to `artifacts`.
class ExperimentRunner {
public:
  explicit ExperimentRunner(RunOptions options) : options_(std::move(options)) {}

  nlohmann::json run(const ExperimentConfig &cfg) {
    nlohmann::json summary;
    summary["name"] = cfg.name;
    summary["analyses"] = cfg.analyses;
    summary["N"] = cfg.spec.n();
    summary["M"] = cfg.spec.m();
    summary["occupations"] = cfg.spec.initial_state.occupations;
    if (cfg.analyses.empty())
      return summary;

    const BogoliubovMap map = build_bogoliubov(cfg.spec);
    if (options_.dump_bogoliubov) {
      emit(cfg.name + "_alpha.csv", matrix_csv(map.alpha, "pre_mode", "joint_"));
      emit(cfg.name + "_beta.csv", matrix_csv(map.beta, "pre_mode", "joint_"));
      emit(cfg.name + "_f.csv", matrix_csv(f_matrix(map).f, "joint_mode", "joint_"));
    }
    for (const auto &analysis : cfg.analyses) {
      if (analysis == "dynamics")
        summary["dynamics"] = run_dynamics(cfg, map);
      else if (analysis == "gge")
        summary["gge"] = run_gge(cfg, map);
      else if (analysis == "covariance")
        summary["covariance"] = run_covariance(cfg);
      else if (analysis == "fock-oracle")
        summary["fock_oracle"] = run_oracle(cfg, map);
      else if (analysis == "delocalization")
        summary["delocalization"] = run_delocalization(cfg, map);
      else if (analysis == "sweep")
        summary["sweep"] = run_sweep(cfg);
      else
        throw ConfigError("unknown analysis '" + analysis + "'");
    }
    return summary;
  }

  const std::vector<std::string> &artifacts() const { return artifacts_; }

  /// Rows accumulated across configs by the delocalization analysis.
  void write_tables() {
    if (table_rows_.empty())
      return;
    CsvWriter csv({"name", "N", "M", "excitations", "order", "floor", "count"});
    for (const auto &row : table_rows_)
      csv.write_row(row);
    emit("delocalization_table.csv", csv.str());
  }

private:
  void emit(const std::string &file, const std::string &text) {
    write_text_file(options_.out_dir / file, text);
    artifacts_.push_back(file);
  }

  void emit_json(const std::string &file, const nlohmann::json &j) { emit(file, j.dump(2) + "\n"); }

  nlohmann::json run_dynamics(const ExperimentConfig &cfg, const BogoliubovMap &map) {
    const QuenchSpec &spec = cfg.spec;
    const int total = spec.joint_size();
    const CorrelationSet corr = initial_correlations(map, spec.initial_state);
    EvolutionOptions evo;
    evo.threads = options_.threads;
    const ObservableSeries series = evolve_occupations(spec, map, corr, evo);

    std::vector<std::string> header{"t"};
    for (const auto &c : mode_columns("n_", total))
      header.push_back(c);
    for (const char *c : {"E_N", "E_M", "E_N_plus_E_M", "E_total_joint"})
      header.emplace_back(c);
    CsvWriter occ(header);
    for (std::size_t i = 0; i < series.samples(); ++i) {
      std::vector<double> row{series.times[i]};
      for (int k = 0; k < total; ++k)
        row.push_back(series.n_expect(static_cast<Eigen::Index>(i), k));
      row.push_back(series.e_left[i]);
      row.push_back(series.e_right[i]);
      row.push_back(series.e_left[i] + series.e_right[i]);
      row.push_back(series.e_total_joint);
      occ.write_row(row);
    }
    emit(cfg.name + "_occupations.csv", occ.str());

    const PerModeEnergy per_mode = per_mode_energy(series, spec);
    nlohmann::json j;
    j["long_time_average"] = to_std(series.long_time_avg);
    j["e_total_joint"] = series.e_total_joint;
    j["max_imag_residue"] = series.max_imag_residue;
    j["per_site_energy"] = {{"left_average", per_mode.left_average},
                            {"right_average", per_mode.right_average},
                            {"average_gap", per_mode.average_gap()}};

    std::optional<FluctuationSeries> fluct;
    try {
      fluct = fluctuation_series(series, spec, {cfg.recurrence_threshold, cfg.relaxation_skip});
    } catch (const DegenerateInitial &e) {
      j["fluctuation"] = {{"error", e.kind()}, {"message", e.what()}};
    }
    CsvWriter energy({"t", "E_N_per_site", "E_M_per_site", "fluctuation_ratio"});
    for (std::size_t i = 0; i < series.samples(); ++i) {
      const double ratio = fluct ? fluct->ratio[i] : std::numeric_limits<double>::quiet_NaN();
      energy.write_row(std::vector<double>{series.times[i], per_mode.left[i], per_mode.right[i], ratio});
    }
    emit(cfg.name + "_energy.csv", energy.str());
    if (fluct) {
      j["fluctuation"] = {{"threshold", fluct->recurrence_threshold},
                          {"relaxation_skip", fluct->relaxation_skip},
                          {"e_right_average", fluct->e_right_average},
                          {"first_recurrence_time", fluct->first_recurrence_time
                                                        ? nlohmann::json(*fluct->first_recurrence_time)
                                                        : nlohmann::json(nullptr)}};
    }
    emit_json(cfg.name + "_dynamics.json", j);
    return j;
  }

  nlohmann::json run_gge(const ExperimentConfig &cfg, const BogoliubovMap &map) {
    const Eigen::VectorXd charges = conserved_charges(map, cfg.spec.initial_state);
    const GgeEnsemble ens = build_gge(charges);
    const DeviationReport dev = deviation_delta_g(map, cfg.spec.initial_state);
    nlohmann::json lambdas = nlohmann::json::array();
    for (Eigen::Index k = 0; k < ens.lambdas.size(); ++k)
      lambdas.push_back(finite_or_string(ens.lambdas(k)));
    nlohmann::json j;
    j["mode_index_base"] = 1;
    j["charges"] = to_std(charges);
    j["lambdas"] = lambdas;
    j["gge_n"] = to_std(gge_expectations(map, ens));
    j["delta_g"] = to_std(dev.delta_g);
    j["vacuum_density"] = to_std(dev.vacuum_density);
    j["stimulated_density"] = to_std(dev.stimulated_density);
    j["vacuum_term_per_site"] = dev.vacuum_term_per_site;
    j["stimulated_term_per_site"] = dev.stimulated_term_per_site;
    j["normalization"] = dev.normalization;
    emit_json(cfg.name + "_gge.json", j);
    return j;
  }

  nlohmann::json run_covariance(const ExperimentConfig &cfg) {
    const QuenchSpec &spec = cfg.spec;
    const int total = spec.joint_size();
    const CovarianceMatrix initial = initial_covariance(spec);
    const CovarianceMatrix joint = initial_joint_covariance(spec);
    const CovarianceSeries series = evolve_covariance_series(joint, spec, spec.time_grid, options_.threads);

    std::vector<std::string> header{"t"};
    for (const auto &c : mode_columns("sigma_xx_", total))
      header.push_back(c);
    for (const auto &c : mode_columns("sigma_pp_", total))
      header.push_back(c);
    header.emplace_back("max_off_diagonal");
    CsvWriter csv(header);
    for (std::size_t i = 0; i < series.samples.size(); ++i) {
      const Eigen::MatrixXd &s = series.samples[i].sigma;
      std::vector<double> row{series.times[i]};
      for (Eigen::Index k = 0; k < 2 * total; ++k)
        row.push_back(s(k, k));
      row.push_back(max_off_diagonal(s));
      csv.write_row(row);
    }
    emit(cfg.name + "_covariance.csv", csv.str());

    nlohmann::json j;
    j["basis"] = to_string(BasisTag::JointNormalModes);
    j["initial_symplectic_eigenvalues"] = to_std(symplectic_eigenvalues(initial));
    j["satisfies_uncertainty"] = satisfies_uncertainty(initial, spec.hbar());
    if (series.samples.size() >= 2) {
      const ThermalFormReport report = thermal_form_check(series, spec);
      j["window"] = report.window;
      j["max_off_diagonal"] = report.max_off_diagonal;
      j["tolerance"] = report.tolerance;
      j["decay_windows"] = report.decay_windows;
      j["decay_residuals"] = report.decay_residuals;
      j["decay_slope"] = report.decay_slope;
      j["occupancies"] = to_std(report.occupancies);
      j["violating_pairs"] = report.violating_pairs.size();
      j["pass"] = report.pass;
    }
    emit_json(cfg.name + "_covariance.json", j);
    return j;
  }

  nlohmann::json run_oracle(const ExperimentConfig &cfg, const BogoliubovMap &map) {
    const QuenchSpec &spec = cfg.spec;
    const int total = spec.joint_size();
    ExpansionOptions expansion;
    expansion.order = cfg.oracle.order;
    expansion.limits = {cfg.oracle.cutoff, cfg.oracle.max_total};
    expansion.project = true;
    const ExpandedState state = expand_initial_state(spec, map, f_matrix(map), expansion);
    const CorrelationSet corr = initial_correlations(map, spec.initial_state);
    const CorrelationSet oracle = oracle_correlators(state);
    const double corr_diff = std::max({(corr.cdag_c - oracle.cdag_c).cwiseAbs().maxCoeff(),
                                       (corr.c_cdag - oracle.c_cdag).cwiseAbs().maxCoeff(),
                                       (corr.c_c - oracle.c_c).cwiseAbs().maxCoeff(),
                                       (corr.cdag_cdag - oracle.cdag_cdag).cwiseAbs().maxCoeff()});

    EvolutionOptions evo;
    evo.threads = options_.threads;
    const ObservableSeries analytic = evolve_occupations(spec, map, corr, evo);
    Eigen::MatrixXd brute(static_cast<Eigen::Index>(analytic.samples()), total);
    parallel_for(analytic.samples(), options_.threads, [&](std::size_t i) {
      brute.row(static_cast<Eigen::Index>(i)) =
          oracle_occupations(exact_evolve(state, spec, analytic.times[i]), map).transpose();
    });
    std::vector<std::string> header{"t"};
    for (const auto &c : mode_columns("n_oracle_", total))
      header.push_back(c);
    header.emplace_back("max_abs_difference");
    CsvWriter csv(header);
    double max_diff = 0.0;
    for (std::size_t i = 0; i < analytic.samples(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const double diff = (brute.row(r) - analytic.n_expect.row(r)).cwiseAbs().maxCoeff();
      max_diff = std::max(max_diff, diff);
      std::vector<double> row{analytic.times[i]};
      for (int k = 0; k < total; ++k)
        row.push_back(brute(r, k));
      row.push_back(diff);
      csv.write_row(row);
    }
    emit(cfg.name + "_oracle.csv", csv.str());

    nlohmann::json residuals = nlohmann::json::object();
    for (int i = 0; i < total; ++i)
      if (spec.initial_state.occupations[static_cast<std::size_t>(i)] == 0)
        residuals[std::to_string(i + 1)] = constraint_residual(state, map, i);
    nlohmann::json j;
    j["order"] = expansion.order;
    j["cutoff"] = expansion.limits.cutoff;
    j["max_total"] = expansion.limits.max_total ? nlohmann::json(*expansion.limits.max_total) : nlohmann::json(nullptr);
    j["support"] = state.amplitudes.size();
    j["leakage"] = state.leakage;
    j["correlator_max_difference"] = corr_diff;
    j["occupation_max_difference"] = max_diff;
    j["constraint_residuals"] = residuals;
    emit_json(cfg.name + "_oracle.json", j);
    return j;
  }

  nlohmann::json run_delocalization(const ExperimentConfig &cfg, const BogoliubovMap &map) {
    ExpansionOptions expansion;
    expansion.order = cfg.oracle.order;
    expansion.limits.cutoff = minimal_cutoff(expansion.order, cfg.spec.initial_state);
    const ExpandedState state = expand_initial_state(cfg.spec, map, f_matrix(map), expansion);
    const std::vector<double> floors = options_.floor ? std::vector<double>{*options_.floor} : cfg.floors;
    CsvWriter csv({"floor", "count"});
    nlohmann::json counts = nlohmann::json::array();
    for (double floor : floors) {
      const std::size_t count = delocalization_count(state, floor);
      csv.write_row(std::vector<double>{floor, static_cast<double>(count)});
      counts.push_back({{"floor", floor}, {"count", count}});
      std::ostringstream f;
      f.imbue(std::locale::classic());
      f << std::setprecision(17) << floor;
      table_rows_.push_back({cfg.name, std::to_string(cfg.spec.n()), std::to_string(cfg.spec.m()),
                             std::to_string(cfg.spec.initial_state.total()), std::to_string(expansion.order), f.str(),
                             std::to_string(count)});
    }
    emit(cfg.name + "_delocalization.csv", csv.str());
    return {{"order", expansion.order}, {"support", state.amplitudes.size()}, {"counts", counts}};
  }

  nlohmann::json run_sweep(const ExperimentConfig &cfg) {
    const ScalingReport report = sweep(cfg.sweep);
    CsvWriter csv({"N", "M", "excited_mode", "lattice_size", "delta_g_band_mean", "vacuum_term_per_site",
                   "stimulated_term_per_site", "per_site_energy_gap"});
    nlohmann::json rows = nlohmann::json::array();
    for (const auto &row : report.rows) {
      csv.write_row(std::vector<double>{static_cast<double>(row.point.n), static_cast<double>(row.point.m),
                                        static_cast<double>(row.point.excited_mode),
                                        static_cast<double>(row.lattice_size), row.delta_g_band,
                                        row.vacuum_term_per_site, row.stimulated_term_per_site, row.per_mode_gap});
      rows.push_back({{"N", row.point.n},
                      {"M", row.point.m},
                      {"excited_mode", row.point.excited_mode},
                      {"delta_g_band_mean", row.delta_g_band},
                      {"vacuum_term_per_site", row.vacuum_term_per_site},
                      {"per_site_energy_gap", row.per_mode_gap}});
    }
    emit(cfg.name + "_sweep.csv", csv.str());
    const auto opt = [](const std::optional<double> &v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    nlohmann::json j;
    j["rows"] = rows;
    j["delta_g_slope"] = opt(report.delta_g_slope);
    j["delta_g_slope_target"] = kScalingSlopeTarget;
    j["delta_g_slope_tolerance"] = kScalingSlopeTolerance;
    j["delta_g_band"] = {0.6, 0.9};
    j["plateau_relative_change"] = opt(report.plateau_change);
    j["plateau_tolerance"] = kPlateauTolerance;
    j["per_site_energy_gap_slope"] = opt(report.gap_slope);
    emit_json(cfg.name + "_sweep.json", j);
    return j;
  }

  RunOptions options_;
  std::vector<std::string> artifacts_;
  std::vector<std::vector<std::string>> table_rows_;
};

// ------------------------------------------------------------ invocation

struct Invocation {
  std::string command = "run"; ///< "run" or "sweep"
  std::optional<std::string> config_path;
  std::optional<std::string> preset;
  std::optional<std::string> out_dir;
  int threads = 1;
  bool dump_bogoliubov = false;
  std::optional<double> floor;
  std::optional<long long> seed;
};

inline int exit_code_for(const std::exception &e) {
  if (dynamic_cast<const ConfigError *>(&e))
    return exit_code::config;
  if (dynamic_cast<const IoError *>(&e) || dynamic_cast<const std::filesystem::filesystem_error *>(&e))
    return exit_code::io;
  return exit_code::numeric;
}

inline const char *error_kind(const std::exception &e) {
  if (const auto *err = dynamic_cast<const Error *>(&e))
    return err->kind();
  if (dynamic_cast<const std::filesystem::filesystem_error *>(&e))
    return "IoError";
  return "InternalError";
}

/// Output directory: --out, then $QUENCHLAB_OUT.
inline std::optional<std::filesystem::path> resolve_out_dir(const Invocation &inv) {
  if (inv.out_dir)
    return std::filesystem::path(*inv.out_dir);
  if (const char *env = std::getenv("QUENCHLAB_OUT"); env && *env)
    return std::filesystem::path(env);
  return std::nullopt;
}

inline std::vector<ExperimentConfig> resolve_configs(const Invocation &inv) {
  if (inv.config_path && inv.preset)
    throw ConfigError("--config and --preset are mutually exclusive");
  if (!inv.config_path && !inv.preset)
    throw ConfigError("one of --config or --preset is required");
  std::vector<ExperimentConfig> configs =
      inv.preset ? preset_configs(*inv.preset) : std::vector<ExperimentConfig>{load_config(*inv.config_path)};
  if (inv.command == "sweep") {
    for (auto &cfg : configs) {
      if (cfg.sweep.empty())
        throw ConfigError("config '" + cfg.name + "' has no sweep list");
      cfg.analyses = {"sweep"};
    }
  }
  std::set<std::string> names;
  for (const auto &cfg : configs)
    if (!names.insert(cfg.name).second)
      throw ConfigError("duplicate experiment name '" + cfg.name + "'");
  return configs;
}

/// Executes one CLI invocation. The manifest is written whenever an output
/// directory is known, including after failures.
inline int execute(const Invocation &inv, std::ostream &log) {
  const auto started = std::chrono::steady_clock::now();
  nlohmann::json manifest;
  manifest["tool"] = "quenchlab";
  manifest["version"] = kVersion;
  manifest["command"] = inv.command;
  manifest["invocation"] = {{"config", inv.config_path ? nlohmann::json(*inv.config_path) : nlohmann::json(nullptr)},
                            {"preset", inv.preset ? nlohmann::json(*inv.preset) : nlohmann::json(nullptr)},
                            {"threads", inv.threads},
                            {"dump_bogoliubov", inv.dump_bogoliubov},
                            {"floor", inv.floor ? nlohmann::json(*inv.floor) : nlohmann::json(nullptr)},
                            {"seed", inv.seed ? nlohmann::json(*inv.seed) : nlohmann::json(nullptr)}};
  manifest["libraries"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                         "." + std::to_string(EIGEN_MINOR_VERSION)},
                           {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                 std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                 std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  manifest["tolerances"] = {{"imag_residue", EvolutionOptions{}.imag_tolerance},
                            {"commutator", EvolutionOptions{}.commutator_tolerance},
                            {"negative_occupation", kNegativeOccupationTolerance},
                            {"singular_alpha_condition", kSingularAlphaCondition},
                            {"uncertainty_slack", kUncertaintySlack},
                            {"thermal_form_constant", ThermalFormOptions{}.tolerance_constant}};

  const auto out_dir = resolve_out_dir(inv);
  if (!out_dir) {
    log << "error: no output directory (use --out or set QUENCHLAB_OUT)\n";
    return exit_code::config;
  }

  int code = exit_code::ok;
  RunOptions options{*out_dir, inv.threads, inv.dump_bogoliubov, inv.floor, inv.seed};
  ExperimentRunner runner(options);
  nlohmann::json experiments = nlohmann::json::array();
  try {
    std::filesystem::create_directories(*out_dir);
    if (inv.threads < 1)
      throw ConfigError("--threads must be >= 1");
    if (inv.floor && !(*inv.floor > 0.0))
      throw ConfigError("--floor must be positive");
    const auto configs = resolve_configs(inv);
    for (const auto &cfg : configs) {
      nlohmann::json entry{{"name", cfg.name}, {"config", cfg.entries}};
      experiments.push_back(entry);
      log << "running " << cfg.name << '\n';
      experiments.back()["summary"] = runner.run(cfg);
    }
    runner.write_tables();
    manifest["status"] = "ok";
  } catch (const std::exception &e) {
    code = exit_code_for(e);
    manifest["status"] = "error";
    manifest["error"] = {{"kind", error_kind(e)}, {"message", e.what()}, {"exit_code", code}};
    log << "error: " << error_kind(e) << ": " << e.what() << '\n';
  }
  manifest["experiments"] = experiments;
  manifest["artifacts"] = runner.artifacts();
  manifest["exit_code"] = code;
  manifest["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  try {
    write_text_file(*out_dir / "manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception &e) {
    log << "error: " << e.what() << '\n';
    if (code == exit_code::ok)
      code = exit_code::io;
  }
  return code;
}

} // namespace quenchlab

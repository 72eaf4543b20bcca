#pragma once

// Plain-text experiment configuration: one `key = value` per line, `#` starts
// a comment. Mode indices are 1-based.
//
//   name        = fig1-M10
//   N           = 5
//   M           = 10
//   occupations = 0,0,1,1,0,0,0,0,0,0,0,0,0,0,0   # or: excite = 3,4
//   t_max       = 2000
//   t_steps     = 2001
//   analyses    = dynamics, gge
//   sweep       = 5,5,3; 10,10,5                  # N,M,excited mode (0 = vacuum)

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "core_model.hpp"
#include "errors.hpp"

namespace quenchlab {

inline const std::set<std::string> &known_analyses() {
  static const std::set<std::string> names{"dynamics", "gge", "covariance", "fock-oracle", "delocalization", "sweep"};
  return names;
}

struct SweepPoint {
  int n = 1;
  int m = 1;
  int excited_mode = 0; ///< 1-based pre-quench mode, 0 for the vacuum

  FockExcitation state() const {
    return excited_mode == 0 ? FockExcitation::vacuum(n + m) : FockExcitation::excited(n + m, {excited_mode});
  }
};

struct OracleSettings {
  int order = 1;
  int cutoff = 8;
  std::optional<int> max_total;
};

struct ExperimentConfig {
  std::string name = "run";
  QuenchSpec spec;
  double t_max = 2000.0;
  int t_steps = 2001;
  std::vector<std::string> analyses;
  std::vector<SweepPoint> sweep;
  OracleSettings oracle;
  std::vector<double> floors{1e-12};
  double recurrence_threshold = 0.5;
  double relaxation_skip = 50.0;
  /// Key/value pairs as read, for the manifest echo.
  std::map<std::string, std::string> entries;

  bool wants(std::string_view analysis) const {
    return std::find(analyses.begin(), analyses.end(), analysis) != analyses.end();
  }
};

namespace detail {

inline std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos)
    return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

inline std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos)
      break;
    start = pos + 1;
  }
  return out;
}

inline int parse_int(const std::string &key, const std::string &text) {
  int value = 0;
  const auto *end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    throw ConfigError("key '" + key + "': expected an integer, got '" + text + "'");
  return value;
}

inline double parse_real(const std::string &key, const std::string &text) {
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  double value = 0.0;
  in >> value;
  if (in.fail() || !(in >> std::ws).eof())
    throw ConfigError("key '" + key + "': expected a number, got '" + text + "'");
  return value;
}

inline std::vector<int> parse_int_list(const std::string &key, const std::string &text) {
  std::vector<int> out;
  if (text.empty())
    return out;
  for (const auto &item : split(text, ','))
    out.push_back(parse_int(key, item));
  return out;
}

} // namespace detail

/// Reads key/value pairs. Duplicate keys and lines without '=' are errors.
inline std::map<std::string, std::string> parse_entries(std::istream &in) {
  std::map<std::string, std::string> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    const std::string body = detail::trim(line);
    if (body.empty())
      continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = detail::trim(std::string_view(body).substr(0, eq));
    const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!entries.emplace(key, value).second)
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
  }
  return entries;
}

inline ExperimentConfig config_from_entries(const std::map<std::string, std::string> &entries) {
  static const std::set<std::string> keys{"name",     "N",        "M",           "mass",   "omega0",
                                          "hbar",     "occupations", "excite",   "t_max",  "t_steps",
                                          "analyses", "sweep",    "order",       "cutoff", "max_total",
                                          "floors",   "recurrence_threshold",    "relaxation_skip"};
  for (const auto &[key, value] : entries)
    if (!keys.count(key))
      throw ConfigError("unknown key '" + key + "'");
  const auto get = [&](const std::string &key) -> std::optional<std::string> {
    const auto it = entries.find(key);
    if (it == entries.end())
      return std::nullopt;
    return it->second;
  };
  const auto require = [&](const std::string &key) {
    auto value = get(key);
    if (!value)
      throw ConfigError("missing required key '" + key + "'");
    return *value;
  };

  ExperimentConfig cfg;
  cfg.entries = entries;
  if (auto v = get("name")) {
    if (v->empty() || v->find_first_of("/\\ ") != std::string::npos)
      throw ConfigError("name must be a non-empty token without spaces or slashes");
    cfg.name = *v;
  }
  const int n = detail::parse_int("N", require("N"));
  const int m = detail::parse_int("M", require("M"));
  const double mass = get("mass") ? detail::parse_real("mass", *get("mass")) : 1.0;
  const double omega0 = get("omega0") ? detail::parse_real("omega0", *get("omega0")) : 1.0;
  const double hbar = get("hbar") ? detail::parse_real("hbar", *get("hbar")) : 1.0;
  if (get("t_max"))
    cfg.t_max = detail::parse_real("t_max", *get("t_max"));
  if (get("t_steps"))
    cfg.t_steps = detail::parse_int("t_steps", *get("t_steps"));

  if (get("occupations") && get("excite"))
    throw ConfigError("give either 'occupations' or 'excite', not both");
  try {
    FockExcitation state = FockExcitation::vacuum(std::max(n + m, 0));
    if (auto v = get("occupations")) {
      state.occupations = detail::parse_int_list("occupations", *v);
      if (state.size() != n + m)
        throw ConfigError("occupations lists " + std::to_string(state.size()) + " modes, expected N+M = " +
                          std::to_string(n + m));
    } else if (auto e = get("excite")) {
      state = FockExcitation::excited(n + m, detail::parse_int_list("excite", *e));
    }
    cfg.spec = make_quench(n, m, std::move(state), uniform_time_grid(cfg.t_max, cfg.t_steps), mass, omega0, hbar);
  } catch (const InvalidArgument &e) {
    throw ConfigError(e.what());
  }

  if (auto v = get("analyses")) {
    for (const auto &name : detail::split(*v, ',')) {
      if (name.empty())
        continue;
      if (!known_analyses().count(name))
        throw ConfigError("unknown analysis '" + name + "'");
      if (!cfg.wants(name))
        cfg.analyses.push_back(name);
    }
  }
  if (auto v = get("sweep")) {
    for (const auto &item : detail::split(*v, ';')) {
      if (item.empty())
        continue;
      const auto fields = detail::parse_int_list("sweep", item);
      if (fields.size() != 3)
        throw ConfigError("sweep entries are 'N,M,mode' triples");
      SweepPoint point{fields[0], fields[1], fields[2]};
      if (point.n < 1 || point.m < 1 || point.excited_mode < 0 || point.excited_mode > point.n + point.m)
        throw ConfigError("invalid sweep entry '" + item + "'");
      cfg.sweep.push_back(point);
    }
  }
  if (cfg.wants("sweep") && cfg.sweep.empty())
    throw ConfigError("analysis 'sweep' needs a non-empty 'sweep' list");

  if (get("order"))
    cfg.oracle.order = detail::parse_int("order", *get("order"));
  if (get("cutoff"))
    cfg.oracle.cutoff = detail::parse_int("cutoff", *get("cutoff"));
  if (get("max_total"))
    cfg.oracle.max_total = detail::parse_int("max_total", *get("max_total"));
  if (cfg.oracle.order < 1 || cfg.oracle.cutoff < 1 || cfg.oracle.cutoff > 200 ||
      (cfg.oracle.max_total && *cfg.oracle.max_total < 0))
    throw ConfigError("invalid oracle truncation settings");
  if (auto v = get("floors")) {
    cfg.floors.clear();
    for (const auto &item : detail::split(*v, ','))
      cfg.floors.push_back(detail::parse_real("floors", item));
  }
  for (double floor : cfg.floors)
    if (!(floor > 0.0))
      throw ConfigError("delocalization floors must be positive");
  if (get("recurrence_threshold"))
    cfg.recurrence_threshold = detail::parse_real("recurrence_threshold", *get("recurrence_threshold"));
  if (get("relaxation_skip"))
    cfg.relaxation_skip = detail::parse_real("relaxation_skip", *get("relaxation_skip"));
  if (!(cfg.recurrence_threshold > 0.0 && cfg.recurrence_threshold <= 1.0))
    throw ConfigError("recurrence_threshold must lie in (0, 1]");
  return cfg;
}

inline ExperimentConfig parse_config(std::istream &in) { return config_from_entries(parse_entries(in)); }

inline ExperimentConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot read config file '" + path + "'");
  return parse_config(in);
}

} // namespace quenchlab

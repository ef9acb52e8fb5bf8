#pragma once

// Command-line front end: parameter schema, config files, record
// serialization (json-lines and CSV) and the subcommand runners.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "amenable/error.hpp"
#include "amenable/group_geometry.hpp"
#include "amenable/l1_examples.hpp"
#include "amenable/ow_limit.hpp"
#include "amenable/parallel.hpp"
#include "amenable/quasi_tiling.hpp"
#include "amenable/random.hpp"
#include "amenable/rational.hpp"
#include "amenable/spectral_vn.hpp"
#include "amenable/widths.hpp"

namespace amenable::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitViolation = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown by parse_config when --help was requested; what() is the help text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Records

using Scalar = std::variant<std::int64_t, double, std::string, bool>;

struct Field {
  std::string name;
  Scalar value;
};

struct ResultRecord {
  int schema_version = kSchemaVersion;
  std::string subcommand;
  std::vector<Field> input;
  std::vector<Field> metrics;

  ResultRecord& metric(std::string name, Scalar v) {
    metrics.push_back({std::move(name), std::move(v)});
    return *this;
  }

  const Scalar* find_metric(const std::string& name) const {
    for (auto& f : metrics)
      if (f.name == name) return &f.value;
    return nullptr;
  }
};

inline std::string format_double(double v) {
  if (std::isnan(v)) return "\"nan\"";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  // Keep doubles recognizable as such after a round trip.
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

inline std::string json_escape(const std::string& s) {
  std::string out = "\"";
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  return out + "\"";
}

inline std::string scalar_json(const Scalar& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::int64_t>)
          return std::to_string(x);
        else if constexpr (std::is_same_v<T, double>)
          return format_double(x);
        else if constexpr (std::is_same_v<T, bool>)
          return x ? "true" : "false";
        else
          return json_escape(x);
      },
      v);
}

inline std::string scalar_text(const Scalar& v) {
  if (auto s = std::get_if<std::string>(&v)) return *s;
  std::string j = scalar_json(v);
  if (j.size() >= 2 && j.front() == '"') j = j.substr(1, j.size() - 2);
  return j;
}

inline std::string to_json_line(const ResultRecord& r) {
  std::string out = "{\"schema_version\":" + std::to_string(r.schema_version) +
                    ",\"subcommand\":" + json_escape(r.subcommand) + ",\"input\":{";
  for (std::size_t i = 0; i < r.input.size(); ++i)
    out += (i ? "," : "") + json_escape(r.input[i].name) + ":" + scalar_json(r.input[i].value);
  out += "},\"metrics\":{";
  for (std::size_t i = 0; i < r.metrics.size(); ++i)
    out += (i ? "," : "") + json_escape(r.metrics[i].name) + ":" + scalar_json(r.metrics[i].value);
  return out + "}}\n";
}

inline std::string to_json_lines(const std::vector<ResultRecord>& records) {
  std::string out;
  for (auto& r : records) out += to_json_line(r);
  return out;
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

// RFC 4180: CRLF line ends, header row. Columns are the union of metric
// names in first-seen order, then inputs prefixed with "input_".
inline std::string to_csv(const std::vector<ResultRecord>& records) {
  std::vector<std::string> metric_cols, input_cols;
  auto add = [](std::vector<std::string>& cols, const std::string& n) {
    if (std::find(cols.begin(), cols.end(), n) == cols.end()) cols.push_back(n);
  };
  for (auto& r : records) {
    for (auto& f : r.metrics) add(metric_cols, f.name);
    for (auto& f : r.input) add(input_cols, f.name);
  }
  std::string out = "schema_version,subcommand";
  for (auto& c : metric_cols) out += "," + csv_quote(c);
  for (auto& c : input_cols) out += "," + csv_quote("input_" + c);
  out += "\r\n";
  auto cell = [](const std::vector<Field>& fs, const std::string& n) -> std::string {
    for (auto& f : fs)
      if (f.name == n) return csv_quote(scalar_text(f.value));
    return "";
  };
  for (auto& r : records) {
    out += std::to_string(r.schema_version) + "," + csv_quote(r.subcommand);
    for (auto& c : metric_cols) out += "," + cell(r.metrics, c);
    for (auto& c : input_cols) out += "," + cell(r.input, c);
    out += "\r\n";
  }
  return out;
}

// Writes to a sibling temporary file and renames it over the target.
inline void write_atomic(const std::filesystem::path& path, const std::string& data) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    os.write(data.data(), static_cast<std::streamsize>(data.size()));
    os.flush();
    if (!os) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Parameter schema

enum class Kind { integer, real, rational, exponent, text, choice, int_list, real_list, boolean };

struct Range {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_open = false;
  bool hi_open = false;

  bool contains(double v) const {
    return (lo_open ? v > lo : v >= lo) && (hi_open ? v < hi : v <= hi);
  }

  std::string describe() const {
    auto num = [](double v) {
      if (std::isinf(v)) return std::string(v > 0 ? "inf" : "-inf");
      std::ostringstream os;
      os << v;
      return os.str();
    };
    return std::string(lo_open ? "(" : "[") + num(lo) + "," + num(hi) + (hi_open ? ")" : "]");
  }
};

struct ParamSpec {
  std::string key;
  Kind kind = Kind::text;
  std::string default_value;
  std::string doc;
  Range range{};
  std::vector<std::string> choices{};
};

struct SubcommandSpec {
  std::string name;
  std::string summary;
  std::vector<ParamSpec> params;
};

namespace detail {

inline Range open01() { return {0, 1, true, true}; }
inline Range at_least(double lo) { return {lo}; }
inline Range between(double lo, double hi) { return {lo, hi}; }

inline ParamSpec p_dim(int max = 3) {
  return {"dim", Kind::integer, "1", "lattice dimension d of Z^d", between(1, max)};
}
inline ParamSpec p_family() {
  return {"family", Kind::choice, "centered", "Folner family", {}, {"centered", "shifted", "eccentric"}};
}
inline ParamSpec p_ratio() {
  return {"ratio", Kind::integer, "2", "side ratio of the eccentric family", between(1, 16)};
}
inline ParamSpec p_measure(const std::string& def) {
  return {"measure", Kind::real, def, "measure of the symmetric multiplier set E", between(0, 1)};
}
inline ParamSpec p_multiplier() {
  return {"multiplier", Kind::text, "",
          "explicit multiplier set 'a:b[,a:b];...' (overrides --measure)"};
}

inline std::vector<ParamSpec> common_params() {
  return {{"seed", Kind::integer, "42", "random seed", at_least(0)},
          {"format", Kind::choice, "jsonl", "output format", {}, {"jsonl", "csv"}},
          {"output", Kind::text, "-", "output path, '-' for standard output"}};
}

}  // namespace detail

inline const std::vector<SubcommandSpec>& subcommands() {
  using namespace detail;
  static const std::vector<SubcommandSpec> specs = [] {
    std::vector<SubcommandSpec> s = {
        {"boundary",
         "Outer, inner and full F-boundaries of a Folner set, the interior and closure identities, and the "
         "relative amenability alpha(Omega;F).",
         {p_dim(), p_family(), p_ratio(),
          {"size", Kind::integer, "101", "cardinality of Omega in the Folner family", at_least(1)},
          {"tile", Kind::integer, "3", "side of the tile box F = [0,t-1]^d", between(1, 64)}}},
        {"tile",
         "Greedy eps-quasi-tiling of a Folner set by translates of a box; checks coverage >= eps(1-alpha).",
         {p_dim(), p_family(), p_ratio(),
          {"size", Kind::integer, "101", "cardinality of Omega in the Folner family", at_least(1)},
          {"tile", Kind::integer, "3", "side of the tile box F = [0,t-1]^d", between(1, 64)},
          {"eps", Kind::rational, "1/4", "disjointness parameter eps in (0,1)", open01()}}},
        {"owcover",
         "Multi-scale cover of [-R,R]^d by quasi-tilings at a chain of Folner scales; residual <= delta|Omega|.",
         {p_dim(2), p_family(), p_ratio(),
          {"delta", Kind::rational, "3/10", "delta in (0,1/2)", {0, 0.5, true, true}},
          {"radius", Kind::integer, "2000", "Omega = [-R,R]^d", at_least(1)},
          {"certify", Kind::boolean, "false", "enforce the sufficient chain conditions"}}},
        {"widths",
         "Certified bounds on wdim_eps of finite dimensional balls and a fiber audit of the compression map.",
         {{"ball", Kind::choice, "lq", "unit ball of a normed space, or the l^q ball in l^p", {}, {"unit", "lq"}},
          {"n", Kind::integer, "16", "dimension n", between(1, 1e6)},
          {"q", Kind::exponent, "1", "exponent q of the ball (lq)"},
          {"p", Kind::exponent, "2", "exponent p of the distance (lq)"},
          {"radius", Kind::real, "1", "ball radius (unit)", {0, std::numeric_limits<double>::infinity(), true}},
          {"eps", Kind::real_list, "0.05,0.1,0.25,0.5,1,1.5,2,3", "ascending eps grid",
           {0, std::numeric_limits<double>::infinity(), true}},
          {"pairs", Kind::integer, "1000", "fiber pairs sampled per eps", between(0, 1e7)}}},
        {"spectrum",
         "Eigenvalues of R_Omega R^* for a multiplier subspace of l^2(Z^d): trace per site and interval counts.",
         {p_dim(2), p_measure("0.5"), p_multiplier(),
          {"size", Kind::integer, "257", "cardinality of the centered box Omega", at_least(1)},
          {"intervals", Kind::text, "0.1:0.9", "closed intervals 'a:b[,a:b...]' to count eigenvalues in"},
          {"residuals", Kind::boolean, "false", "also compute eigenvectors and check residuals"}}},
        {"concentration",
         "Fraction of eigenvalues of R_Omega R^* inside [a,b] along a Folner family; must decrease.",
         {p_dim(2), p_family(), p_ratio(), p_measure("0.5"), p_multiplier(),
          {"sizes", Kind::int_list, "65,257,1025", "ascending cardinalities", at_least(1)},
          {"a", Kind::real, "0.1", "left end a in (0,1)", open01()},
          {"b", Kind::real, "0.9", "right end b in (0,1), b >= a", open01()}}},
        {"sandwich",
         "Eigenvalue counts n[eps,1] <= wdim_eps(R_Omega B^Y_1) <= n[eps/2,1] normalized by |Omega|.",
         {p_dim(2), p_measure("0.5"), p_multiplier(),
          {"size", Kind::integer, "257", "cardinality of the centered box Omega", at_least(1)},
          {"eps", Kind::real, "0.1", "eps in (0,1)", open01()}}},
        {"owlimit",
         "Finite-data estimate of lim_{eps->0} lim_i a(eps,Omega_i)/|Omega_i| along one or two Folner families.",
         {{"fn", Kind::choice, "volume", "set function", {}, {"volume", "boundary", "spectral"}}, p_dim(2),
          p_family(), p_ratio(),
          {"family2", Kind::choice, "none", "second family for the independence check", {},
           {"none", "centered", "shifted", "eccentric"}},
          p_measure("0.5"), p_multiplier(),
          {"tile", Kind::integer, "2", "side of the tile box for fn=boundary", between(1, 64)},
          {"indices", Kind::int_list, "32,64,128,256,384,512", "ascending Folner indices", at_least(1)},
          {"eps", Kind::real_list, "0.2,0.1,0.05", "strictly descending eps grid",
           {0, std::numeric_limits<double>::infinity(), true}},
          {"tolerance", Kind::real, "0.05", "tail oscillation and agreement tolerance", at_least(0)},
          {"table", Kind::boolean, "false", "also emit one record per table cell"}}},
        {"l1",
         "Disjoint translates of a truncated l^1 generator and the sampled norm sandwich (1-2eps) <= ratio <= "
         "(1+eps).",
         {{"y", Kind::choice, "geometric", "generator", {}, {"geometric", "delta", "two-point"}},
          {"terms", Kind::integer, "40", "support length of the geometric generator", between(1, 62)},
          {"eps", Kind::real, "0.125", "eps in (0,1/2)", {0, 0.5, true, true}},
          {"radius", Kind::integer, "50", "Omega = [-R,R]", between(0, 100000)},
          {"samples", Kind::integer, "100", "random coefficient vectors", between(0, 1e6)}}},
        {"counterexample",
         "Residue sums pi_k on Z: annihilation of y_{N_j}, lifts into Y_j, and the finite triviality check.",
         {{"j", Kind::integer, "8", "largest j with N_j = lcm(1..j)", between(1, 40)},
          {"m", Kind::integer, "10", "largest M for the triviality rank check", between(0, 500)},
          {"lift_samples", Kind::integer, "100", "random vectors lifted into Y_j", between(0, 1e6)}}},
        {"reduction",
         "Normalized traces over Z^d and over the sublattice (NZ)^d with N^d-fold value space.",
         {p_dim(2), p_measure("0.3"), p_multiplier(),
          {"index", Kind::integer, "2", "sublattice step N", between(1, 64)},
          {"side", Kind::integer, "64", "Omega = [0,side-1]^d; N must divide side", at_least(1)}}},
        {"symbolrank",
         "Pointwise rank of a finite-type symbol over E and the resulting image dimension.",
         {{"symbol", Kind::choice, "shift-pair", "symbol preset", {}, {"identity", "shift-pair", "row"}},
          p_measure("1"), p_multiplier(),
          {"grid", Kind::integer, "64", "torus grid size per axis", between(16, 1e6)}}},
    };
    for (auto& sc : s)
      for (auto& c : common_params()) sc.params.push_back(c);
    return s;
  }();
  return specs;
}

inline const SubcommandSpec& subcommand_spec(const std::string& name) {
  for (auto& s : subcommands())
    if (s.name == name) return s;
  throw UsageError("unknown subcommand '" + name + "'");
}

// ---------------------------------------------------------------------------
// Run configuration

using ParamValue =
    std::variant<std::int64_t, double, Rational, std::string, bool, std::vector<std::int64_t>, std::vector<double>>;

struct RunConfig {
  std::string subcommand;
  std::map<std::string, ParamValue> params;
  std::uint64_t seed = 42;
  std::string output = "-";
  std::string format = "jsonl";

  template <class T>
  const T& get(const std::string& key) const {
    auto it = params.find(key);
    if (it == params.end()) throw UsageError("missing parameter '" + key + "'");
    if (auto v = std::get_if<T>(&it->second)) return *v;
    throw UsageError("parameter '" + key + "' has an unexpected type");
  }

  std::int64_t integer(const std::string& k) const { return get<std::int64_t>(k); }
  double real(const std::string& k) const { return get<double>(k); }
  const Rational& rational(const std::string& k) const { return get<Rational>(k); }
  const std::string& text(const std::string& k) const { return get<std::string>(k); }
  bool flag(const std::string& k) const { return get<bool>(k); }
  const std::vector<std::int64_t>& ints(const std::string& k) const { return get<std::vector<std::int64_t>>(k); }
  const std::vector<double>& reals(const std::string& k) const { return get<std::vector<double>>(k); }
};

namespace detail {

inline std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

inline double parse_real(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used == text.size() && std::isfinite(v)) return v;
  } catch (...) {
  }
  throw UsageError("parameter '" + key + "': '" + text + "' is not a real number");
}

inline std::int64_t parse_int(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(text, &used);
    if (used == text.size()) return v;
  } catch (...) {
  }
  throw UsageError("parameter '" + key + "': '" + text + "' is not an integer");
}

inline void check_range(const ParamSpec& p, double v, const std::string& text) {
  if (!p.range.contains(v))
    throw UsageError("parameter '" + p.key + "': " + text + " is out of range, must lie in " + p.range.describe());
}

inline ParamValue convert(const ParamSpec& p, const std::string& raw) {
  const std::string text = trim(raw);
  switch (p.kind) {
    case Kind::integer: {
      auto v = parse_int(p.key, text);
      check_range(p, static_cast<double>(v), text);
      return v;
    }
    case Kind::real: {
      auto v = parse_real(p.key, text);
      check_range(p, v, text);
      return v;
    }
    case Kind::rational: {
      Rational r;
      try {
        r = parse_rational(text);
      } catch (const std::exception& e) {
        throw UsageError("parameter '" + p.key + "': '" + text + "' is not an exact rational");
      }
      check_range(p, to_double(r), text);
      return r;
    }
    case Kind::exponent: {
      if (text == "inf") return std::numeric_limits<double>::infinity();
      auto v = parse_real(p.key, text);
      if (v < 1.0) throw UsageError("parameter '" + p.key + "': exponent " + text + " must be >= 1 or 'inf'");
      return v;
    }
    case Kind::text:
      return text;
    case Kind::choice:
      if (std::find(p.choices.begin(), p.choices.end(), text) == p.choices.end()) {
        std::string all;
        for (auto& c : p.choices) all += (all.empty() ? "" : "|") + c;
        throw UsageError("parameter '" + p.key + "': '" + text + "' is not one of " + all);
      }
      return text;
    case Kind::int_list: {
      std::vector<std::int64_t> out;
      for (auto& t : split(text, ',')) {
        auto v = parse_int(p.key, t);
        check_range(p, static_cast<double>(v), t);
        out.push_back(v);
      }
      if (out.empty()) throw UsageError("parameter '" + p.key + "': empty list");
      return out;
    }
    case Kind::real_list: {
      std::vector<double> out;
      for (auto& t : split(text, ',')) {
        auto v = parse_real(p.key, t);
        check_range(p, v, t);
        out.push_back(v);
      }
      if (out.empty()) throw UsageError("parameter '" + p.key + "': empty list");
      return out;
    }
    case Kind::boolean:
      if (text == "true" || text == "1" || text == "yes") return true;
      if (text == "false" || text == "0" || text == "no") return false;
      throw UsageError("parameter '" + p.key + "': '" + text + "' is not a boolean");
  }
  throw UsageError("parameter '" + p.key + "': unsupported kind");
}

// `key = value` per line; '#' starts a comment.
inline std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot read config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

}  // namespace detail

// Builds and validates a RunConfig. Defaults < config file < flags.
inline RunConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"Widths, amenable dimension and l^p von Neumann dimension on Z^d", "amenable_dim"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");
  std::map<std::string, std::map<std::string, std::string>> storage;
  std::map<std::string, std::string> config_path;
  for (auto& sc : subcommands()) {
    auto* sub = app.add_subcommand(sc.name, sc.summary);
    for (auto& p : sc.params) {
      std::string doc = p.doc + " [default: " + (p.default_value.empty() ? "none" : p.default_value) + "]";
      sub->add_option("--" + p.key, storage[sc.name][p.key], doc);
    }
    sub->add_option("--config", config_path[sc.name], "file of 'key = value' lines; flags take precedence");
  }
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    std::string help;
    for (auto* sub : app.get_subcommands()) help = sub->help();
    throw HelpRequested(help.empty() ? app.help() : help);
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested(app.help("", CLI::AppFormatMode::All));
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  const CLI::App* chosen = app.get_subcommands().front();
  const SubcommandSpec& spec = subcommand_spec(chosen->get_name());

  std::map<std::string, std::string> raw;
  for (auto& p : spec.params) raw[p.key] = p.default_value;
  if (!config_path[spec.name].empty()) {
    for (auto& [k, v] : detail::read_config_file(config_path[spec.name])) {
      if (!raw.count(k)) throw UsageError("unknown key '" + k + "' in config file for " + spec.name);
      raw[k] = v;
    }
  }
  for (auto& p : spec.params)
    if (chosen->get_option("--" + p.key)->count() > 0) raw[p.key] = storage[spec.name][p.key];

  RunConfig c;
  c.subcommand = spec.name;
  for (auto& p : spec.params) c.params[p.key] = detail::convert(p, raw[p.key]);
  c.seed = static_cast<std::uint64_t>(c.integer("seed"));
  c.output = c.text("output");
  c.format = c.text("format");
  return c;
}

inline RunConfig parse_config(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return parse_config(args);
}

// ---------------------------------------------------------------------------
// Runners

struct RunOutcome {
  int exit_code = kExitOk;
  std::vector<ResultRecord> records;
  std::string message;  // diagnostic for nonzero exits
};

namespace detail {

inline std::vector<Field> input_echo(const RunConfig& c) {
  std::vector<Field> out;
  for (auto& p : subcommand_spec(c.subcommand).params) {
    if (p.key == "output" || p.key == "format") continue;
    const ParamValue& v = c.params.at(p.key);
    Scalar s = std::visit(
        [](const auto& x) -> Scalar {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, std::int64_t> || std::is_same_v<T, double> ||
                        std::is_same_v<T, std::string> || std::is_same_v<T, bool>)
            return x;
          else if constexpr (std::is_same_v<T, Rational>)
            return to_string(x);
          else {
            std::string t;
            for (auto& e : x) {
              std::string one = scalar_text(Scalar(e));
              t += (t.empty() ? "" : ",") + one;
            }
            return t;
          }
        },
        v);
    out.push_back({p.key, std::move(s)});
  }
  return out;
}

inline FolnerSpec folner_spec(const RunConfig& c, const std::string& family_key = "family") {
  FolnerSpec s;
  const std::string& f = c.text(family_key);
  s.family = f == "centered"   ? FolnerFamily::centered_box
             : f == "shifted" ? FolnerFamily::shifted_box
                              : FolnerFamily::eccentric_rectangle;
  s.dim = static_cast<std::size_t>(c.integer("dim"));
  if (c.params.count("ratio")) s.ratio = c.integer("ratio");
  return s;
}

inline MultiplierSet multiplier(const RunConfig& c) {
  const std::string& m = c.text("multiplier");
  const std::size_t d = c.params.count("dim") ? static_cast<std::size_t>(c.integer("dim")) : 1;
  if (!m.empty()) {
    MultiplierSet e = MultiplierSet::parse(m);
    require(e.dim() == d, Errc::dimension_mismatch,
            "multiplier set has " + std::to_string(e.dim()) + " dimensions, dim is " + std::to_string(d));
    return e;
  }
  return MultiplierSet::symmetric(c.real("measure"), d);
}

inline std::vector<std::pair<double, double>> parse_intervals(const std::string& text) {
  std::vector<std::pair<double, double>> out;
  for (auto& part : split(text, ',')) {
    if (part.empty()) continue;
    auto colon = part.find(':');
    if (colon == std::string::npos) throw UsageError("parameter 'intervals': '" + part + "' must look like a:b");
    double a = parse_real("intervals", trim(part.substr(0, colon)));
    double b = parse_real("intervals", trim(part.substr(colon + 1)));
    if (a > b) throw UsageError("parameter 'intervals': '" + part + "' has a > b");
    out.emplace_back(a, b);
  }
  return out;
}

inline std::string interval_name(double a, double b) {
  std::ostringstream os;
  os << "n[" << a << "," << b << "]";
  return os.str();
}

inline FiniteSubset tile_box(std::size_t d, std::int64_t t) { return Box::cube(d, 0, t - 1).to_subset(); }

struct Ctx {
  const RunConfig& cfg;
  std::vector<ResultRecord> records;
  bool ok = true;

  ResultRecord& record() {
    records.push_back({kSchemaVersion, cfg.subcommand, input_echo(cfg), {}});
    return records.back();
  }
  void check(bool cond) { ok = ok && cond; }
};

inline void run_boundary(Ctx& x) {
  const auto& c = x.cfg;
  const FolnerSpec spec = folner_spec(c);
  const FiniteSubset omega = folner_set(spec, folner_index_for_size(spec, c.integer("size")));
  const FiniteSubset f = tile_box(spec.dim, c.integer("tile"));
  const FiniteSubset outer = boundary_outer(omega, f), inner = boundary_inner(omega, f);
  const FiniteSubset full = boundary_full(omega, f), in = interior(omega, f), clo = closure(omega, f);
  const bool identities = full == set_union(outer, inner) && in == set_difference(omega, inner) &&
                          clo == set_union(omega, outer) && are_disjoint(omega, outer) && in.subset_of(omega);
  const Rational a = alpha(omega, f);
  const bool closed_form = a == alpha_boxes(*as_box(omega), *as_box(f));
  x.check(identities && closed_form);
  x.record()
      .metric("omega_size", static_cast<std::int64_t>(omega.size()))
      .metric("tile_size", static_cast<std::int64_t>(f.size()))
      .metric("outer", static_cast<std::int64_t>(outer.size()))
      .metric("inner", static_cast<std::int64_t>(inner.size()))
      .metric("boundary", static_cast<std::int64_t>(full.size()))
      .metric("interior", static_cast<std::int64_t>(in.size()))
      .metric("closure", static_cast<std::int64_t>(clo.size()))
      .metric("alpha", to_string(a))
      .metric("alpha_value", to_double(a))
      .metric("alpha_inner", to_string(alpha_inner(omega, f)))
      .metric("identities_ok", identities)
      .metric("closed_form_ok", closed_form);
}

inline void run_tile(Ctx& x) {
  const auto& c = x.cfg;
  const FolnerSpec spec = folner_spec(c);
  const FiniteSubset omega = folner_set(spec, folner_index_for_size(spec, c.integer("size")));
  const FiniteSubset f = tile_box(spec.dim, c.integer("tile"));
  const QuasiTiling q = greedy_quasi_tiling(omega, f, c.rational("eps"));
  const AuditResult audit = audit_quasi_tiling(q);
  const CoverageReport cov = coverage_report(q, f);
  const bool maximal = is_maximal(q, f);
  x.check(audit.ok && cov.holds && maximal);
  x.record()
      .metric("omega_size", static_cast<std::int64_t>(omega.size()))
      .metric("tiles", static_cast<std::int64_t>(q.tiles.size()))
      .metric("covered", static_cast<std::int64_t>(q.covered_size()))
      .metric("coverage", to_string(cov.coverage))
      .metric("bound", to_string(cov.bound))
      .metric("alpha", to_string(cov.alpha))
      .metric("alpha_inner", to_string(cov.alpha_inner))
      .metric("coverage_holds", cov.holds)
      .metric("audit_ok", audit.ok)
      .metric("maximal", maximal);
}

inline void run_owcover(Ctx& x) {
  const auto& c = x.cfg;
  const FolnerSpec spec = folner_spec(c);
  const Coord r = c.integer("radius");
  const FiniteSubset omega = Box::cube(spec.dim, -r, r).to_subset();
  const OWCover cov = ow_cover(omega, spec, c.rational("delta"), OWCoverOptions{c.flag("certify")});
  const AuditResult audit = audit_quasi_tiling(cov.placed);
  const bool residual_ok =
      Rational(static_cast<std::int64_t>(cov.residual.size())) <= cov.delta * static_cast<std::int64_t>(omega.size());
  x.check(audit.ok && residual_ok);
  std::string scales, tiles;
  for (std::size_t i = 0; i < cov.scale_indices.size(); ++i) {
    scales += (i ? "," : "") + std::to_string(cov.scale_indices[i]);
    tiles += (i ? "," : "") + std::to_string(cov.tiles_per_scale[i]);
  }
  x.record()
      .metric("omega_size", static_cast<std::int64_t>(omega.size()))
      .metric("scale_count", static_cast<std::int64_t>(cov.scale_count))
      .metric("certified", cov.certified)
      .metric("scales", scales)
      .metric("tiles_per_scale", tiles)
      .metric("residual", static_cast<std::int64_t>(cov.residual.size()))
      .metric("residual_fraction",
              static_cast<double>(cov.residual.size()) / static_cast<double>(omega.size()))
      .metric("residual_ok", residual_ok)
      .metric("audit_ok", audit.ok);
}

inline void run_widths(Ctx& x) {
  const auto& c = x.cfg;
  const bool lq = c.text("ball") == "lq";
  const std::int64_t n = c.integer("n");
  const double q = c.real("q"), p = c.real("p"), radius = c.real("radius");
  const std::vector<double>& eps = c.reals("eps");
  require(std::is_sorted(eps.begin(), eps.end()), Errc::parameter_domain, "eps grid must be ascending");
  const WidthContext ctx = lq ? lq_ball_context(n, q, p) : unit_ball_context(n, radius);
  std::vector<WidthInterval> w(eps.size());
  std::vector<std::optional<FiberAuditReport>> audits(eps.size());
  parallel_for(eps.size(), [&](std::size_t i) {
    w[i] = ctx.bounds(eps[i]);
    if (lq && w[i].upper >= 1 && w[i].upper + 1 <= n && c.integer("pairs") > 0)
      audits[i] = fiber_audit(n, q, p, w[i].upper, c.integer("pairs"), x.cfg.seed + i);
  });
  for (std::size_t i = 0; i < eps.size(); ++i) {
    auto& r = x.record()
                  .metric("eps", eps[i])
                  .metric("lower", w[i].lower)
                  .metric("upper", w[i].upper)
                  .metric("exact", w[i].exact());
    if (audits[i]) {
      x.check(audits[i]->violations == 0);
      r.metric("audit_pairs", audits[i]->pairs)
          .metric("audit_violations", audits[i]->violations)
          .metric("audit_bound", audits[i]->bound)
          .metric("audit_max_distance", audits[i]->max_distance);
    }
  }
  const MonotoneReport m = check_monotone_eps(ctx, eps);
  x.check(m.ok());
  x.record()
      .metric("valid_intervals", m.valid_intervals)
      .metric("lower_monotone", m.lower_monotone)
      .metric("upper_monotone", m.upper_monotone)
      .metric("zero_iff_diameter", m.zero_iff_diameter);
}

inline FiniteSubset centered_by_size(std::size_t d, std::int64_t size) {
  FolnerSpec s;
  s.dim = d;
  return folner_set(s, folner_index_for_size(s, size));
}

inline void run_spectrum(Ctx& x) {
  const auto& c = x.cfg;
  const MultiplierSet e = multiplier(c);
  const FiniteSubset omega = centered_by_size(e.dim(), c.integer("size"));
  const auto intervals = parse_intervals(c.text("intervals"));
  const SpectralReport r = spectral_report(e, omega, intervals);
  const double n = static_cast<double>(omega.size());
  const double lo = r.eigenvalues.front(), hi = r.eigenvalues.back();
  const bool contained = lo >= -kSpectrumTol && hi <= 1.0 + kSpectrumTol;
  const bool trace_ok = std::abs(r.trace / n - e.measure()) <= 1e-9 && std::abs(r.trace - r.eigenvalue_sum) <= 1e-8 * n;
  x.check(contained && trace_ok);
  auto& rec = x.record()
                  .metric("size", static_cast<std::int64_t>(omega.size()))
                  .metric("measure", e.measure())
                  .metric("trace_per_site", r.trace / n)
                  .metric("eigenvalue_sum", r.eigenvalue_sum)
                  .metric("eigen_min", lo)
                  .metric("eigen_max", hi)
                  .metric("contained", contained)
                  .metric("trace_ok", trace_ok);
  for (auto& ic : r.counts) rec.metric(interval_name(ic.a, ic.b), ic.count);
  if (c.flag("residuals")) {
    const Eigen::MatrixXcd m = gram_matrix(e, omega);
    const double res = max_relative_residual(m, solve_hermitian(m, true));
    x.check(res <= 1e-8);
    x.records.back().metric("max_relative_residual", res);
  }
}

inline void run_concentration(Ctx& x) {
  const auto& c = x.cfg;
  const FolnerSpec spec = folner_spec(c);
  const MultiplierSet e = multiplier(c);
  require(e.dim() == spec.dim, Errc::dimension_mismatch, "multiplier set and family dimensions differ");
  const double a = c.real("a"), b = c.real("b");
  if (a > b) throw UsageError("parameter 'b': must be >= a");
  std::vector<std::int64_t> indices;
  for (auto s : c.ints("sizes")) indices.push_back(folner_index_for_size(spec, s));
  const ConcentrationTable t = concentration_scan(e, spec, indices, a, b);
  for (auto& row : t.rows)
    x.record()
        .metric("size", static_cast<std::int64_t>(row.size))
        .metric("count", row.count)
        .metric("ratio", row.ratio);
  x.check(t.decreasing);
  x.record()
      .metric("ratio_first", t.rows.front().ratio)
      .metric("ratio_last", t.rows.back().ratio)
      .metric("decreasing", t.decreasing);
}

inline void run_sandwich(Ctx& x) {
  const auto& c = x.cfg;
  const MultiplierSet e = multiplier(c);
  const FiniteSubset omega = centered_by_size(e.dim(), c.integer("size"));
  const WidthSandwich s = wdim_sandwich(e, omega, c.real("eps"));
  const double n = static_cast<double>(omega.size());
  x.check(s.lower <= s.upper);
  x.record()
      .metric("size", static_cast<std::int64_t>(omega.size()))
      .metric("lower", s.lower)
      .metric("upper", s.upper)
      .metric("lower_ratio", static_cast<double>(s.lower) / n)
      .metric("upper_ratio", static_cast<double>(s.upper) / n)
      .metric("measure", e.measure())
      .metric("ordered", s.lower <= s.upper);
}

inline void run_owlimit(Ctx& x) {
  const auto& c = x.cfg;
  const std::string& fn = c.text("fn");
  const std::size_t d = static_cast<std::size_t>(c.integer("dim"));
  OWFunction f = fn == "volume"     ? volume_function()
                 : fn == "boundary" ? boundary_function(tile_box(d, c.integer("tile")))
                                    : spectral_function(multiplier(c));
  const FolnerSpec spec = folner_spec(c);
  const double tol = c.real("tolerance");
  const LimitEstimate est = estimate_limit(f, spec, c.ints("indices"), c.reals("eps"), tol);
  if (c.flag("table"))
    for (auto& row : est.table)
      x.record()
          .metric("eps", row.eps)
          .metric("index", row.index)
          .metric("size", static_cast<std::int64_t>(row.size))
          .metric("value", row.value);
  auto& rec = x.record()
                  .metric("value", est.extrapolated)
                  .metric("converged", est.converged)
                  .metric("tail_oscillation", est.tail_oscillation);
  x.check(est.converged);
  if (c.text("family2") != "none") {
    const FolnerSpec spec2 = folner_spec(c, "family2");
    const IndependenceReport ind = sequence_independence(f, spec, spec2, c.ints("indices"), c.reals("eps"), tol);
    rec.metric("value2", ind.second.extrapolated).metric("difference", ind.difference).metric("agree", ind.agree);
    x.check(ind.agree);
  }
}

inline void run_l1(Ctx& x) {
  const auto& c = x.cfg;
  const std::string& kind = c.text("y");
  RationalVector y = kind == "geometric" ? geometric_y(static_cast<int>(c.integer("terms")))
                     : kind == "delta"   ? delta_vector(LatticePoint({0}))
                                         : RationalVector::from_entries(1, {{LatticePoint({0}), Rational(3, 4)},
                                                                            {LatticePoint({5}), Rational(1, 4)}});
  const double eps = c.real("eps");
  const FiniteSubset omega = FiniteSubset::interval(-c.integer("radius"), c.integer("radius"));
  const SandwichCertificate cert =
      sandwich_check(to_double(y), eps, omega, static_cast<std::size_t>(c.integer("samples")), c.seed);
  x.record()
      .metric("F", cert.f.to_string())
      .metric("F_size", static_cast<std::int64_t>(cert.f.size()))
      .metric("translates", static_cast<std::int64_t>(cert.translates.size()))
      .metric("samples", static_cast<std::int64_t>(cert.ratios.size()))
      .metric("min_ratio", cert.min_ratio)
      .metric("max_ratio", cert.max_ratio)
      .metric("ratio_floor", 1.0 - 2.0 * eps)
      .metric("ratio_ceiling", 1.0 + eps)
      .metric("lower_bound", cert.lower_bound)
      .metric("limit_bound", 1.0 / (2.0 * static_cast<double>(cert.f.size())));
}

inline void run_counterexample(Ctx& x) {
  const auto& c = x.cfg;
  const std::int64_t jmax = c.integer("j");
  for (std::int64_t j = 1; j <= jmax; ++j) {
    const std::int64_t n = lcm_upto(j);
    const RationalVector y = y_N(n);
    bool annihilated = true;
    for (std::int64_t k = 1; k <= j; ++k)
      for (auto& v : pi_k(y, k)) annihilated = annihilated && v == Rational(0);
    bool witness = false;
    for (auto& v : pi_k(y, n + 1)) witness = witness || v != Rational(0);
    x.check(annihilated && witness);
    x.record()
        .metric("j", j)
        .metric("N_j", n)
        .metric("annihilated", annihilated)
        .metric("pi_N_plus_1_nonzero", witness);
  }
  // Lifts of random rational vectors supported in [-10, 10].
  Rng rng(c.seed);
  const FiniteSubset omega = FiniteSubset::interval(-10, 10);
  std::int64_t restrict_ok = 0, norm_ok = 0, annihilate_ok = 0;
  const std::int64_t samples = c.integer("lift_samples");
  for (std::int64_t s = 0; s < samples; ++s) {
    std::vector<std::pair<LatticePoint, Rational>> e;
    for (Coord g = -10; g <= 10; ++g)
      if (rng.coin(0.3)) e.emplace_back(LatticePoint({g}), Rational(rng.uniform_int(-8, 8), rng.uniform_int(1, 16)));
    RationalVector y = RationalVector::from_entries(1, e);
    const Rational norm = y.l1_norm();
    if (norm > Rational(1, 2))
      for (auto& v : y.values) v /= norm * 2;
    const RationalVector lifted = lift_to_Yj(y, omega, jmax);
    restrict_ok += lifted.restricted(omega) == y;
    norm_ok += lifted.l1_norm() <= Rational(1);
    bool ann = true;
    for (std::int64_t k = 1; k <= jmax; ++k)
      for (auto& v : pi_k(lifted, k)) ann = ann && v == Rational(0);
    annihilate_ok += ann;
  }
  x.check(restrict_ok == samples && norm_ok == samples && annihilate_ok == samples);
  x.record()
      .metric("lift_samples", samples)
      .metric("restriction_ok", restrict_ok)
      .metric("norm_ok", norm_ok)
      .metric("annihilation_ok", annihilate_ok);
  bool trivial = true;
  for (std::int64_t m = 0; m <= c.integer("m"); ++m) trivial = trivial && intersection_triviality_check(m);
  x.check(trivial);
  x.record().metric("triviality_max_M", c.integer("m")).metric("trivial", trivial);
}

inline void run_reduction(Ctx& x) {
  const auto& c = x.cfg;
  const MultiplierSet e = multiplier(c);
  const FiniteSubset omega = Box::cube(e.dim(), 0, c.integer("side") - 1).to_subset();
  const ReductionReport r = reduction_check(e, c.integer("index"), omega);
  x.check(r.holds);
  x.record()
      .metric("dim_parent", r.dim_parent)
      .metric("dim_sub", r.dim_sub)
      .metric("lattice_index", r.lattice_index)
      .metric("holds", r.holds);
}

inline FiniteTypeSymbol symbol_preset(const std::string& name) {
  FiniteTypeSymbol s;
  if (name == "identity") {
    s.coefficients.push_back({LatticePoint({0}), Eigen::MatrixXcd::Identity(1, 1)});
  } else if (name == "shift-pair") {
    s.dim_vprime = 2;
    Eigen::MatrixXcd a0 = Eigen::MatrixXcd::Zero(2, 1), a1 = Eigen::MatrixXcd::Zero(2, 1);
    a0(0, 0) = 1.0;
    a1(1, 0) = 1.0;
    s.coefficients = {{LatticePoint({0}), a0}, {LatticePoint({1}), a1}};
  } else {
    s.dim_v = 2;
    s.coefficients.push_back({LatticePoint({0}), Eigen::MatrixXcd::Ones(1, 2)});
  }
  return s;
}

inline void run_symbolrank(Ctx& x) {
  const auto& c = x.cfg;
  const FiniteTypeSymbol s = symbol_preset(c.text("symbol"));
  const MultiplierSet e = c.text("multiplier").empty() ? MultiplierSet::symmetric(c.real("measure"), 1)
                                                       : MultiplierSet::parse(c.text("multiplier"));
  const SymbolRankReport r = symbol_rank_dimension(s, e, c.integer("grid"));
  x.record()
      .metric("dim_v", static_cast<std::int64_t>(s.dim_v))
      .metric("dim_vprime", static_cast<std::int64_t>(s.dim_vprime))
      .metric("min_rank", r.min_rank)
      .metric("max_rank", r.max_rank)
      .metric("grid_points_in_e", r.grid_points_in_e)
      .metric("image_dimension", r.image_dimension)
      .metric("injectivity_impossible", r.injectivity_impossible);
}

inline bool is_usage(Errc code) {
  switch (code) {
    case Errc::invariant_violation:
    case Errc::invalid_tiling:
    case Errc::eigensolver_failure:
    case Errc::evaluator_failure:
      return false;
    default:
      return true;
  }
}

}  // namespace detail

// Runs the configured subcommand. Exit 2 means a computed certificate or
// trend check failed; the records then carry the failing flags.
inline RunOutcome run(const RunConfig& config) {
  using namespace detail;
  static const std::map<std::string, void (*)(Ctx&)> table = {
      {"boundary", run_boundary},     {"tile", run_tile},         {"owcover", run_owcover},
      {"widths", run_widths},         {"spectrum", run_spectrum}, {"concentration", run_concentration},
      {"sandwich", run_sandwich},     {"owlimit", run_owlimit},   {"l1", run_l1},
      {"counterexample", run_counterexample}, {"reduction", run_reduction}, {"symbolrank", run_symbolrank}};
  RunOutcome out;
  auto it = table.find(config.subcommand);
  if (it == table.end()) {
    out.exit_code = kExitUsage;
    out.message = "unknown subcommand '" + config.subcommand + "'";
    return out;
  }
  Ctx ctx{config, {}, true};
  try {
    it->second(ctx);
  } catch (const UsageError& e) {
    out.exit_code = kExitUsage;
    out.message = e.what();
    return out;
  } catch (const Error& e) {
    out.exit_code = is_usage(e.code()) ? kExitUsage : kExitViolation;
    out.message = e.what();
    return out;
  }
  for (auto& r : ctx.records) r.metric("ok", ctx.ok);
  out.records = std::move(ctx.records);
  if (!ctx.ok) {
    out.exit_code = kExitViolation;
    out.message = config.subcommand + ": a checked invariant failed (see records with ok=false)";
  }
  return out;
}

inline std::string serialize(const RunConfig& c, const std::vector<ResultRecord>& records) {
  return c.format == "csv" ? to_csv(records) : to_json_lines(records);
}

// Full command-line entry point.
inline int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig config;
  try {
    config = parse_config(argc, argv);
  } catch (const HelpRequested& h) {
    out << h.what();
    return kExitOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  RunOutcome r = run(config);
  if (!r.records.empty()) {
    const std::string data = serialize(config, r.records);
    try {
      if (config.output == "-")
        out << data << std::flush;
      else
        write_atomic(config.output, data);
    } catch (const std::exception& e) {
      err << "output error: " << e.what() << "\n";
      return kExitUsage;
    }
  }
  if (r.exit_code != kExitOk) err << (r.exit_code == kExitUsage ? "usage error: " : "violation: ") << r.message << "\n";
  return r.exit_code;
}

}  // namespace amenable::cli

#pragma once
// Experiment runner: reproducible convergence sweeps over index-set families,
// configured by a flat sectioned text file and emitted as CSV or JSON.
//
// Config format: INI-style sections with `key = value` lines; '#' starts a
// comment; keys may repeat where noted (coeff, shift).  All numeric output is
// printed with %.17g so reruns are byte-identical; wall-clock columns are
// zeroed unless timings are explicitly enabled.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include <szegolab/index_set.hpp>
#include <szegolab/operators.hpp>
#include <szegolab/reference.hpp>
#include <szegolab/spectral.hpp>
#include <szegolab/symbol.hpp>

namespace szegolab {

// ---------------------------------------------------------------------------
// Config file: sections of key/value entries with line numbers for errors.

struct ConfigFile {
  struct Entry {
    std::string key, value;
    int line = 0;
  };
  std::map<std::string, std::vector<Entry>> sections;

  bool has(const std::string& section) const {
    return sections.count(section) > 0;
  }
  const Entry* find(const std::string& section, const std::string& key) const {
    auto it = sections.find(section);
    if (it == sections.end()) return nullptr;
    const Entry* hit = nullptr;
    for (const auto& e : it->second)
      if (e.key == key) {
        if (hit)
          throw parse_error("config line " + std::to_string(e.line) +
                            ": duplicate key '" + key + "' in [" + section +
                            "]");
        hit = &e;
      }
    return hit;
  }
  std::vector<const Entry*> find_all(const std::string& section,
                                     const std::string& key) const {
    std::vector<const Entry*> out;
    auto it = sections.find(section);
    if (it == sections.end()) return out;
    for (const auto& e : it->second)
      if (e.key == key) out.push_back(&e);
    return out;
  }
};

inline ConfigFile parse_config(const std::string& text) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    std::string body = line.substr(first, last - first + 1);
    if (body.front() == '[') {
      if (body.back() != ']' || body.size() < 3)
        throw parse_error("config line " + std::to_string(line_no) +
                          ": malformed section header");
      section = body.substr(1, body.size() - 2);
      cfg.sections[section];
      continue;
    }
    auto eq = body.find('=');
    if (eq == std::string::npos)
      throw parse_error("config line " + std::to_string(line_no) +
                        ": expected key = value");
    if (section.empty())
      throw parse_error("config line " + std::to_string(line_no) +
                        ": entry before any [section]");
    auto strip = [](std::string s) {
      auto a = s.find_first_not_of(" \t");
      auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    ConfigFile::Entry e;
    e.key = strip(body.substr(0, eq));
    e.value = strip(body.substr(eq + 1));
    e.line = line_no;
    if (e.key.empty())
      throw parse_error("config line " + std::to_string(line_no) +
                        ": empty key");
    cfg.sections[section].push_back(std::move(e));
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Experiment configuration.

enum class ExperimentKind {
  szego_sweep,
  folner_check,
  sharpness,
  determinant,
  zeta_moments,
  gram,
  b3_check,
  natural_truncation_explore,
  bohr_average,
};

inline const std::vector<std::pair<std::string, ExperimentKind>>&
experiment_kind_names() {
  static const std::vector<std::pair<std::string, ExperimentKind>> names = {
      {"szego-sweep", ExperimentKind::szego_sweep},
      {"folner-check", ExperimentKind::folner_check},
      {"sharpness", ExperimentKind::sharpness},
      {"determinant", ExperimentKind::determinant},
      {"zeta-moments", ExperimentKind::zeta_moments},
      {"gram", ExperimentKind::gram},
      {"b3-check", ExperimentKind::b3_check},
      {"natural-truncation-explore",
       ExperimentKind::natural_truncation_explore},
      {"bohr-average", ExperimentKind::bohr_average},
  };
  return names;
}

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::szego_sweep;
  double tolerance = 1e-2;
  std::uint64_t seed = 20240801;
  bool timings = false;
  std::size_t dense_cap = 4096;
  bool keep_matrix = false;
  std::string expect = "folner";          // folner-check
  int power = 2;                          // b3-check

  std::optional<Symbol> symbol;
  std::vector<double> f_poly{0.0, 0.0, 1.0};
  SetFamily family;
  bool have_family = false;
  std::vector<std::uint64_t> schedule;
  std::vector<Frequency> shifts;

  double gamma = 2.0;                     // zeta-moments
  int moment = 1;
  std::uint64_t cutoff = 10;

  std::vector<Complex> gram_coeffs;

  double bohr_step = 0.05;                // bohr-average
  std::string bohr_observable = "mean";   // mean | abs-power
  int bohr_power = 1;
};

using FileLoader = std::function<std::string(const std::string&)>;

inline std::string default_file_loader(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot open referenced file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace detail {

inline parse_error config_error(const ConfigFile::Entry& e,
                                const std::string& msg) {
  return parse_error("config line " + std::to_string(e.line) + ": " + msg);
}

inline double to_double(const ConfigFile::Entry& e) {
  try {
    std::size_t used = 0;
    double v = std::stod(e.value, &used);
    if (used != e.value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw config_error(e, "expected a number, got '" + e.value + "'");
  }
}

inline std::uint64_t to_u64(const ConfigFile::Entry& e) {
  try {
    std::size_t used = 0;
    auto v = std::stoull(e.value, &used);
    if (used != e.value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw config_error(e, "expected a nonnegative integer, got '" + e.value +
                              "'");
  }
}

inline bool to_bool(const ConfigFile::Entry& e) {
  if (e.value == "true" || e.value == "1") return true;
  if (e.value == "false" || e.value == "0") return false;
  throw config_error(e, "expected true/false, got '" + e.value + "'");
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline void check_known_keys(const ConfigFile& file, const std::string& section,
                             const std::vector<std::string>& known) {
  auto it = file.sections.find(section);
  if (it == file.sections.end()) return;
  for (const auto& e : it->second) {
    bool ok = false;
    for (const auto& k : known)
      if (e.key == k) ok = true;
    if (!ok)
      throw config_error(e, "unknown key '" + e.key + "' in [" + section + "]");
  }
}

inline Symbol symbol_from_config(const ConfigFile& file,
                                 const FileLoader& loader) {
  if (!file.has("symbol"))
    throw parse_error("config: missing required [symbol] section");
  check_known_keys(file, "symbol", {"kind", "dim", "coeff", "file"});
  if (const auto* f = file.find("symbol", "file")) {
    if (file.find("symbol", "kind") || !file.find_all("symbol", "coeff").empty())
      throw config_error(*f, "[symbol] file excludes inline kind/coeff keys");
    return parse_symbol(loader(f->value));
  }
  const auto* kind = file.find("symbol", "kind");
  if (!kind) throw parse_error("config: [symbol] needs kind or file");
  Symbol s = [&] {
    if (kind->value == "multiplicative") return Symbol::multiplicative();
    if (kind->value == "additive") {
      int dim = 1;
      if (const auto* d = file.find("symbol", "dim"))
        dim = static_cast<int>(to_u64(*d));
      return Symbol::additive(dim);
    }
    throw config_error(*kind, "symbol kind must be additive|multiplicative");
  }();
  auto coeffs = file.find_all("symbol", "coeff");
  if (coeffs.empty())
    throw parse_error("config: [symbol] has no coeff entries");
  for (const auto* e : coeffs) {
    auto toks = split_ws(e->value);
    if (toks.size() != 3)
      throw config_error(*e, "coeff needs '<frequency> <re> <im>'");
    try {
      auto f = parse_frequency(toks[0]);
      s.set(f, Complex(std::stod(toks[1]), std::stod(toks[2])));
    } catch (const std::exception& ex) {
      throw config_error(*e, std::string("bad coeff: ") + ex.what());
    }
  }
  return s;
}

inline SetFamily::Kind family_kind_from(const ConfigFile::Entry& e) {
  static const std::map<std::string, SetFamily::Kind> names = {
      {"additive-segment", SetFamily::Kind::additive_segment},
      {"natural-segment", SetFamily::Kind::natural_segment},
      {"even-segment", SetFamily::Kind::even_segment},
      {"sparse-powers", SetFamily::Kind::sparse_powers},
      {"exponent-box", SetFamily::Kind::exponent_box},
      {"embedded-box", SetFamily::Kind::embedded_box},
      {"sublattice-box", SetFamily::Kind::sublattice_box},
      {"alternating", SetFamily::Kind::alternating},
      {"explicit", SetFamily::Kind::explicit_sets},
  };
  auto it = names.find(e.value);
  if (it == names.end())
    throw config_error(e, "unknown family kind '" + e.value + "'");
  return it->second;
}

inline bool family_is_additive(const SetFamily& fam) {
  switch (fam.kind) {
    case SetFamily::Kind::additive_segment:
    case SetFamily::Kind::even_segment:
    case SetFamily::Kind::sublattice_box:
      return true;
    case SetFamily::Kind::sparse_powers:
      return fam.sparse_kind == GroupKind::additive;
    default:
      return false;
  }
}

inline SetFamily family_from_config(const ConfigFile& file,
                                    const FileLoader& loader,
                                    std::vector<std::uint64_t>& schedule) {
  if (!file.has("family"))
    throw parse_error("config: missing required [family] section");
  check_known_keys(file, "family",
                   {"kind", "schedule", "ell", "base", "sparse-kind", "axes",
                    "log-weights", "ells", "augment", "set-file", "first",
                    "second", "first-ell", "second-ell"});
  const auto* kind = file.find("family", "kind");
  if (!kind) throw parse_error("config: [family] needs a kind");
  SetFamily fam;
  fam.kind = family_kind_from(*kind);
  if (const auto* e = file.find("family", "ell")) {
    fam.ell = to_u64(*e);
    if (fam.ell == 0) throw config_error(*e, "ell must be >= 1");
  }
  if (const auto* e = file.find("family", "base")) fam.base = to_u64(*e);
  if (const auto* e = file.find("family", "sparse-kind")) {
    if (e->value == "additive") fam.sparse_kind = GroupKind::additive;
    else if (e->value == "multiplicative")
      fam.sparse_kind = GroupKind::multiplicative;
    else throw config_error(*e, "sparse-kind must be additive|multiplicative");
  }
  if (const auto* e = file.find("family", "axes")) {
    fam.axes = static_cast<int>(to_u64(*e));
    if (fam.axes < 1) throw config_error(*e, "axes must be >= 1");
  }
  if (const auto* e = file.find("family", "log-weights"))
    fam.log_weights = to_bool(*e);
  if (const auto* e = file.find("family", "ells")) {
    for (const auto& tok : split_ws(e->value)) {
      try {
        fam.ells.push_back(std::stoll(tok));
      } catch (const std::exception&) {
        throw config_error(*e, "bad ells entry '" + tok + "'");
      }
    }
    if (fam.ells.empty()) throw config_error(*e, "ells is empty");
  }
  if (fam.kind == SetFamily::Kind::alternating) {
    const auto* first = file.find("family", "first");
    const auto* second = file.find("family", "second");
    if (!first || !second)
      throw parse_error("config: alternating family needs first and second");
    fam.first = std::make_shared<SetFamily>();
    fam.first->kind = family_kind_from(*first);
    fam.second = std::make_shared<SetFamily>();
    fam.second->kind = family_kind_from(*second);
    if (const auto* e = file.find("family", "first-ell"))
      fam.first->ell = to_u64(*e);
    if (const auto* e = file.find("family", "second-ell"))
      fam.second->ell = to_u64(*e);
  }
  if (fam.kind == SetFamily::Kind::explicit_sets) {
    const auto* sf = file.find("family", "set-file");
    if (!sf)
      throw parse_error("config: explicit family needs set-file (or pass "
                        "--set-file)");
    fam.sets = parse_set_file(loader(sf->value));
  }
  if (const auto* e = file.find("family", "augment")) {
    auto toks = split_ws(e->value);
    if (toks.empty()) throw config_error(*e, "augment is empty");
    try {
      if (family_is_additive(fam)) {
        std::vector<LatticePoint> pts;
        for (const auto& t : toks) pts.push_back({BigInt(std::stoll(t))});
        fam.augment = std::make_shared<IndexSet>(IndexSet::from_lattice(pts));
      } else {
        std::vector<FactoredNatural> elems;
        for (const auto& t : toks) elems.push_back(factor(std::stoull(t)));
        fam.augment =
            std::make_shared<IndexSet>(IndexSet::from_naturals(elems));
      }
    } catch (const parse_error&) {
      throw;
    } catch (const std::exception& ex) {
      throw config_error(*e, std::string("bad augment: ") + ex.what());
    }
  }
  if (const auto* e = file.find("family", "schedule")) {
    for (const auto& tok : split_ws(e->value)) {
      try {
        schedule.push_back(std::stoull(tok));
      } catch (const std::exception&) {
        throw config_error(*e, "bad schedule entry '" + tok + "'");
      }
    }
    for (std::size_t i = 1; i < schedule.size(); ++i)
      if (schedule[i] <= schedule[i - 1])
        throw config_error(*e, "schedule must be strictly increasing");
  }
  if (schedule.empty()) {
    if (fam.kind == SetFamily::Kind::explicit_sets)
      for (std::size_t i = 0; i < fam.sets.size(); ++i) schedule.push_back(i);
    else
      throw parse_error("config: [family] needs a nonempty schedule");
  }
  return fam;
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(
    const std::string& text, const FileLoader& loader = default_file_loader) {
  ConfigFile file = parse_config(text);
  ExperimentConfig cfg;
  if (!file.has("experiment"))
    throw parse_error("config: missing required [experiment] section");
  detail::check_known_keys(file, "experiment",
                           {"kind", "tolerance", "seed", "timings", "max-size",
                            "expect", "power"});
  const auto* kind = file.find("experiment", "kind");
  if (!kind) throw parse_error("config: [experiment] needs a kind");
  bool found = false;
  for (const auto& [name, value] : experiment_kind_names())
    if (name == kind->value) {
      cfg.kind = value;
      found = true;
    }
  if (!found)
    throw detail::config_error(*kind,
                               "unknown experiment kind '" + kind->value + "'");
  if (const auto* e = file.find("experiment", "tolerance")) {
    cfg.tolerance = detail::to_double(*e);
    if (!(cfg.tolerance > 0)) throw detail::config_error(*e, "tolerance <= 0");
  }
  if (const auto* e = file.find("experiment", "seed")) cfg.seed = detail::to_u64(*e);
  if (const auto* e = file.find("experiment", "timings"))
    cfg.timings = detail::to_bool(*e);
  if (const auto* e = file.find("experiment", "max-size")) {
    cfg.dense_cap = detail::to_u64(*e);
    if (cfg.dense_cap == 0) throw detail::config_error(*e, "max-size is 0");
  }
  if (const auto* e = file.find("experiment", "expect")) {
    if (e->value != "folner" && e->value != "non-folner")
      throw detail::config_error(*e, "expect must be folner|non-folner");
    cfg.expect = e->value;
  }
  if (const auto* e = file.find("experiment", "power")) {
    cfg.power = static_cast<int>(detail::to_u64(*e));
    if (cfg.power < 2) throw detail::config_error(*e, "power must be >= 2");
  }

  const bool needs_symbol =
      cfg.kind == ExperimentKind::szego_sweep ||
      cfg.kind == ExperimentKind::determinant ||
      cfg.kind == ExperimentKind::b3_check ||
      cfg.kind == ExperimentKind::natural_truncation_explore ||
      cfg.kind == ExperimentKind::bohr_average;
  if (needs_symbol) cfg.symbol = detail::symbol_from_config(file, loader);

  if (file.has("f")) {
    detail::check_known_keys(file, "f", {"poly"});
    const auto* e = file.find("f", "poly");
    if (!e) throw parse_error("config: [f] needs poly");
    cfg.f_poly.clear();
    for (const auto& tok : detail::split_ws(e->value)) {
      try {
        cfg.f_poly.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw detail::config_error(*e, "bad poly coefficient '" + tok + "'");
      }
    }
    if (cfg.f_poly.empty()) throw detail::config_error(*e, "poly is empty");
  }

  const bool needs_family = cfg.kind != ExperimentKind::bohr_average;
  if (needs_family) {
    cfg.family = detail::family_from_config(file, loader, cfg.schedule);
    cfg.have_family = true;
  } else {
    if (!file.has("family") || !file.find("family", "schedule"))
      throw parse_error("config: bohr-average needs [family] schedule as the "
                        "horizon list");
    detail::check_known_keys(file, "family", {"schedule"});
    const auto* e = file.find("family", "schedule");
    for (const auto& tok : detail::split_ws(e->value))
      cfg.schedule.push_back(std::stoull(tok));
    for (std::size_t i = 1; i < cfg.schedule.size(); ++i)
      if (cfg.schedule[i] <= cfg.schedule[i - 1])
        throw detail::config_error(*e, "schedule must be strictly increasing");
    if (cfg.schedule.empty())
      throw detail::config_error(*e, "schedule is empty");
  }

  if (file.has("shifts")) {
    detail::check_known_keys(file, "shifts", {"shift"});
    for (const auto* e : file.find_all("shifts", "shift")) {
      try {
        cfg.shifts.push_back(parse_frequency(e->value));
      } catch (const std::exception& ex) {
        throw detail::config_error(*e, std::string("bad shift: ") + ex.what());
      }
    }
  }
  if (cfg.kind == ExperimentKind::folner_check && cfg.shifts.empty())
    throw parse_error("config: folner-check needs at least one [shifts] shift");
  if (cfg.kind == ExperimentKind::sharpness) {
    if (cfg.shifts.size() != 1)
      throw parse_error("config: sharpness needs exactly one [shifts] shift");
    if (cfg.shifts.front().is_identity())
      throw parse_error("config: sharpness shift must not be the identity");
  }

  if (file.has("zeta")) {
    detail::check_known_keys(file, "zeta", {"gamma", "moment", "cutoff"});
    if (const auto* e = file.find("zeta", "gamma")) cfg.gamma = detail::to_double(*e);
    if (const auto* e = file.find("zeta", "moment"))
      cfg.moment = static_cast<int>(detail::to_u64(*e));
    if (const auto* e = file.find("zeta", "cutoff")) cfg.cutoff = detail::to_u64(*e);
  }
  if (cfg.kind == ExperimentKind::zeta_moments) {
    if (!(cfg.gamma > 1.0))
      throw parse_error("config: zeta-moments needs gamma > 1");
    if (cfg.moment < 1 || cfg.cutoff < 1)
      throw parse_error("config: zeta-moments needs moment >= 1, cutoff >= 1");
    if (cfg.family.kind != SetFamily::Kind::exponent_box &&
        cfg.family.kind != SetFamily::Kind::embedded_box)
      throw parse_error("config: zeta-moments runs over exponent boxes");
  }

  if (file.has("gram")) {
    detail::check_known_keys(file, "gram", {"coeff"});
    for (const auto* e : file.find_all("gram", "coeff")) {
      auto toks = detail::split_ws(e->value);
      if (toks.size() != 2)
        throw detail::config_error(*e, "gram coeff needs '<re> <im>'");
      try {
        cfg.gram_coeffs.emplace_back(std::stod(toks[0]), std::stod(toks[1]));
      } catch (const std::exception&) {
        throw detail::config_error(*e, "bad gram coeff");
      }
    }
  }
  if (cfg.kind == ExperimentKind::gram && cfg.gram_coeffs.empty())
    throw parse_error("config: gram needs [gram] coeff entries");

  if (file.has("bohr")) {
    detail::check_known_keys(file, "bohr", {"step", "observable", "power"});
    if (const auto* e = file.find("bohr", "step")) {
      cfg.bohr_step = detail::to_double(*e);
      if (!(cfg.bohr_step > 0)) throw detail::config_error(*e, "step <= 0");
    }
    if (const auto* e = file.find("bohr", "observable")) {
      if (e->value != "mean" && e->value != "abs-power")
        throw detail::config_error(*e, "observable must be mean|abs-power");
      cfg.bohr_observable = e->value;
    }
    if (const auto* e = file.find("bohr", "power")) {
      cfg.bohr_power = static_cast<int>(detail::to_u64(*e));
      if (cfg.bohr_power < 1) throw detail::config_error(*e, "power must be >= 1");
    }
  }
  if (cfg.kind == ExperimentKind::bohr_average) {
    if (!cfg.symbol || cfg.symbol->kind() != GroupKind::multiplicative)
      throw parse_error("config: bohr-average needs a multiplicative symbol");
  }

  return cfg;
}

// ---------------------------------------------------------------------------
// Records, verdicts, emission.

struct ExperimentRecord {
  std::uint64_t n = 0;
  std::size_t size = 0;
  double value = 0.0;
  double reference = 0.0;
  double abs_error = 0.0;
  double wall_ms = 0.0;
};

enum class Verdict { pass, fail, exploratory };

inline std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::fail: return "FAIL";
    case Verdict::exploratory: return "EXPLORATORY";
  }
  return "?";
}

struct ExperimentResult {
  std::vector<ExperimentRecord> records;
  Verdict verdict = Verdict::exploratory;
  std::string note;
  Eigen::MatrixXcd last_matrix;   // populated only when keep_matrix is set
  bool have_matrix = false;
};

namespace detail {

inline std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// PASS iff the last error is under tolerance and the error sequence is
/// eventually decreasing (second half, with 10% slack for plateau noise).
inline Verdict sweep_verdict(const std::vector<ExperimentRecord>& recs,
                             double tol) {
  if (recs.empty()) return Verdict::fail;
  if (!(recs.back().abs_error <= tol)) return Verdict::fail;
  for (std::size_t i = recs.size() / 2; i + 1 < recs.size(); ++i)
    if (recs[i + 1].abs_error > recs[i].abs_error * 1.10 + 1e-12)
      return Verdict::fail;
  return Verdict::pass;
}

class StopWatch {
 public:
  explicit StopWatch(bool enabled) : enabled_(enabled) { reset(); }
  void reset() { start_ = std::chrono::steady_clock::now(); }
  double lap_ms() {
    if (!enabled_) return 0.0;
    auto now = std::chrono::steady_clock::now();
    double ms = std::chrono::duration<double, std::milli>(now - start_).count();
    start_ = now;
    return ms;
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

inline std::string emit_csv(const std::vector<ExperimentRecord>& records) {
  std::string out = "n,size,value,reference,abs_error,wall_ms\n";
  for (const auto& r : records) {
    out += std::to_string(r.n) + ',' + std::to_string(r.size) + ',' +
           detail::g17(r.value) + ',' + detail::g17(r.reference) + ',' +
           detail::g17(r.abs_error) + ',' + detail::g17(r.wall_ms) + '\n';
  }
  return out;
}

inline std::string emit_json(const ExperimentResult& result) {
  nlohmann::json j;
  j["verdict"] = verdict_name(result.verdict);
  j["note"] = result.note;
  j["records"] = nlohmann::json::array();
  for (const auto& r : result.records) {
    nlohmann::json rec;
    rec["n"] = r.n;
    rec["size"] = r.size;
    rec["value"] = r.value;
    rec["reference"] = r.reference;
    rec["abs_error"] = r.abs_error;
    rec["wall_ms"] = r.wall_ms;
    j["records"].push_back(rec);
  }
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Runners.

namespace detail {

inline ExperimentResult run_szego_sweep(const ExperimentConfig& cfg) {
  ExperimentResult out;
  auto ref = predicted_limit(*cfg.symbol, cfg.family, cfg.f_poly);
  StopWatch watch(cfg.timings);
  for (std::size_t i = 0; i < cfg.schedule.size(); ++i) {
    auto sigma = cfg.family.make(i, cfg.schedule[i]);
    auto op = truncate(*cfg.symbol, sigma, cfg.dense_cap);
    double v = trace_of_f(op, cfg.f_poly);
    ExperimentRecord rec;
    rec.n = cfg.schedule[i];
    rec.size = sigma.size();
    rec.value = v;
    rec.reference = ref.value;
    rec.abs_error = std::abs(v - ref.value);
    rec.wall_ms = watch.lap_ms();
    out.records.push_back(rec);
    if (cfg.keep_matrix && i + 1 == cfg.schedule.size()) {
      out.last_matrix = op.entries;
      out.have_matrix = true;
    }
  }
  out.verdict = sweep_verdict(out.records, cfg.tolerance);
  out.note = "normalized trace vs " + method_name(ref.method) +
             " reference " + g17(ref.value);
  return out;
}

inline ExperimentResult run_folner_check(const ExperimentConfig& cfg) {
  ExperimentResult out;
  StopWatch watch(cfg.timings);
  std::vector<double> last_defects(cfg.shifts.size(), 0.0);
  for (std::size_t i = 0; i < cfg.schedule.size(); ++i) {
    auto sigma = cfg.family.make(i, cfg.schedule[i]);
    double worst = 0.0;
    for (std::size_t k = 0; k < cfg.shifts.size(); ++k) {
      double d = folner_defect(sigma, cfg.shifts[k]);
      last_defects[k] = d;
      worst = std::max(worst, d);
    }
    ExperimentRecord rec;
    rec.n = cfg.schedule[i];
    rec.size = sigma.size();
    rec.value = worst;
    rec.reference = 0.0;
    rec.abs_error = worst;
    rec.wall_ms = watch.lap_ms();
    out.records.push_back(rec);
  }
  const bool folner = out.records.back().abs_error <= cfg.tolerance;
  std::string diagnosis = folner ? "folner" : "non-folner";
  out.verdict =
      diagnosis == cfg.expect ? Verdict::pass : Verdict::exploratory;
  out.note = "diagnosis: " + diagnosis + " (expected " + cfg.expect +
             "); final per-shift defects:";
  for (std::size_t k = 0; k < cfg.shifts.size(); ++k)
    out.note += " " + cfg.shifts[k].str() + "->" + g17(last_defects[k]);
  return out;
}

inline ExperimentResult run_sharpness(const ExperimentConfig& cfg) {
  ExperimentResult out;
  const auto& shift = cfg.shifts.front();
  Symbol s = shift.kind() == GroupKind::multiplicative
                 ? Symbol::multiplicative()
                 : Symbol::additive(static_cast<int>(shift.alpha().size()));
  s.set(shift, 1.0);
  s.set(shift.inverse(), 1.0);
  const std::vector<double> square{0.0, 0.0, 1.0};
  StopWatch watch(cfg.timings);
  double max_err = 0.0;
  for (std::size_t i = 0; i < cfg.schedule.size(); ++i) {
    auto sigma = cfg.family.make(i, cfg.schedule[i]);
    double v = trace_of_f(truncate(s, sigma, cfg.dense_cap), square);
    double ref = 2.0 * folner_ratio(sigma, shift);
    ExperimentRecord rec;
    rec.n = cfg.schedule[i];
    rec.size = sigma.size();
    rec.value = v;
    rec.reference = ref;
    rec.abs_error = std::abs(v - ref);
    rec.wall_ms = watch.lap_ms();
    max_err = std::max(max_err, rec.abs_error);
    out.records.push_back(rec);
  }
  out.verdict = max_err <= cfg.tolerance ? Verdict::pass : Verdict::fail;
  out.note = "exact identity: x^2 trace = 2 * shift survival ratio; max "
             "deviation " + g17(max_err);
  return out;
}

inline double guarded_log(double x) {
  if (!(x > 0.0))
    throw std::domain_error(
        "determinant reference: symbol is not positive on the torus");
  return std::log(x);
}

inline ExperimentResult run_determinant(const ExperimentConfig& cfg) {
  ExperimentResult out;
  QuadratureSettings q;
  q.seed = cfg.seed;
  auto vars = cfg.symbol->active_variables();
  q.grid_points = vars.size() <= 2 ? 4096 : 64;
  auto ref = torus_integral_continuous(*cfg.symbol, guarded_log, q);
  const double target = std::exp(ref.value);
  StopWatch watch(cfg.timings);
  for (std::size_t i = 0; i < cfg.schedule.size(); ++i) {
    auto sigma = cfg.family.make(i, cfg.schedule[i]);
    double v = normalized_det(truncate(*cfg.symbol, sigma, cfg.dense_cap));
    ExperimentRecord rec;
    rec.n = cfg.schedule[i];
    rec.size = sigma.size();
    rec.value = v;
    rec.reference = target;
    rec.abs_error = std::abs(v - target);
    rec.wall_ms = watch.lap_ms();
    out.records.push_back(rec);
  }
  out.verdict = sweep_verdict(out.records, cfg.tolerance);
  out.note = "normalized determinant vs exp of the log-symbol mean " +
             g17(target) + " (quadrature error " + g17(ref.error_bound) + ")";
  return out;
}

inline ExperimentResult run_zeta_moments(const ExperimentConfig& cfg) {
  ExperimentResult out;
  auto zs = zeta_symbol(cfg.gamma, cfg.cutoff);
  auto projected = tail_project(zs, cfg.family.axes);
  auto abs2 = convolve(projected, adjoint(projected));
  auto abs2m = convolve_power(abs2, cfg.moment);
  const double target = abs2m.mean_coeff().real();
  StopWatch watch(cfg.timings);
  for (std::size_t i = 0; i < cfg.schedule.size(); ++i) {
    auto sigma = cfg.family.make(i, cfg.schedule[i]);
    auto op = truncate(zs, sigma, cfg.dense_cap);
    double v = singular_moment(singular_values(op), cfg.moment);
    ExperimentRecord rec;
    rec.n = cfg.schedule[i];
    rec.size = sigma.size();
    rec.value = v;
    rec.reference = target;
    rec.abs_error = std::abs(v - target);
    rec.wall_ms = watch.lap_ms();
    out.records.push_back(rec);
  }
  out.verdict = sweep_verdict(out.records, cfg.tolerance);
  out.note = "singular moment m=" + std::to_string(cfg.moment) +
             " of the truncated Dirichlet symbol vs the box-limit value " +
             g17(target);
  return out;
}

inline ExperimentResult run_gram(const ExperimentConfig& cfg) {
  ExperimentResult out;
  auto phi = dilation_symbol(cfg.gram_coeffs);
  QuadratureSettings q;
  q.seed = cfg.seed;
  auto vars = phi.active_variables();
  q.grid_points = vars.size() <= 2 ? 4096 : 64;
  auto ref = torus_integral_continuous(phi, guarded_log, q);
  const double target = std::exp(ref.value);
  StopWatch watch(cfg.timings);
  for (std::size_t i = 0; i < cfg.schedule.size(); ++i) {
    auto sigma = cfg.family.make(i, cfg.schedule[i]);
    auto g = gram_matrix(cfg.gram_coeffs, sigma, cfg.dense_cap);
    double v = normalized_det(g);
    ExperimentRecord rec;
    rec.n = cfg.schedule[i];
    rec.size = sigma.size();
    rec.value = v;
    rec.reference = target;
    rec.abs_error = std::abs(v - target);
    rec.wall_ms = watch.lap_ms();
    out.records.push_back(rec);
    if (cfg.keep_matrix && i + 1 == cfg.schedule.size()) {
      out.last_matrix = g.entries;
      out.have_matrix = true;
    }
  }
  out.verdict = sweep_verdict(out.records, cfg.tolerance);
  out.note = "normalized gram determinant vs geometric mean " + g17(target);
  return out;
}

inline ExperimentResult run_b3_check(const ExperimentConfig& cfg) {
  ExperimentResult out;
  StopWatch watch(cfg.timings);
  bool all_hold = true;
  double worst_margin = 0.0;
  bool first = true;
  for (std::size_t i = 0; i < cfg.schedule.size(); ++i) {
    auto sigma = cfg.family.make(i, cfg.schedule[i]);
    auto rep = prop_b3_check(*cfg.symbol, sigma, cfg.power, cfg.dense_cap);
    all_hold = all_hold && rep.holds;
    if (first || rep.margin < worst_margin) worst_margin = rep.margin;
    first = false;
    ExperimentRecord rec;
    rec.n = cfg.schedule[i];
    rec.size = sigma.size();
    rec.value = rep.lhs;
    rec.reference = rep.rhs;
    rec.abs_error = std::abs(rep.lhs - rep.rhs);
    rec.wall_ms = watch.lap_ms();
    out.records.push_back(rec);
  }
  out.verdict = all_hold ? Verdict::pass : Verdict::fail;
  out.note = "trace-norm bound on compressed powers (n=" +
             std::to_string(cfg.power) + "); minimum margin " +
             g17(worst_margin);
  return out;
}

inline ExperimentResult run_natural_truncation(const ExperimentConfig& cfg) {
  ExperimentResult out;
  StopWatch watch(cfg.timings);
  double prev = 0.0;
  for (std::size_t i = 0; i < cfg.schedule.size(); ++i) {
    auto sigma = cfg.family.make(i, cfg.schedule[i]);
    double v = trace_of_f(truncate(*cfg.symbol, sigma, cfg.dense_cap),
                          cfg.f_poly);
    ExperimentRecord rec;
    rec.n = cfg.schedule[i];
    rec.size = sigma.size();
    rec.value = v;
    rec.reference = 0.0;
    rec.abs_error = i == 0 ? 0.0 : std::abs(v - prev);
    rec.wall_ms = watch.lap_ms();
    prev = v;
    out.records.push_back(rec);
  }
  out.verdict = Verdict::exploratory;
  out.note = "no predicted limit for this family; abs_error reports "
             "successive differences";
  return out;
}

inline ExperimentResult run_bohr_average(const ExperimentConfig& cfg) {
  ExperimentResult out;
  const Symbol& s = *cfg.symbol;
  double target;
  std::function<Complex(Complex)> f;
  if (cfg.bohr_observable == "mean") {
    f = [](Complex w) { return w; };
    target = s.mean_coeff().real();
  } else {
    const int m = cfg.bohr_power;
    f = [m](Complex w) { return Complex(std::pow(std::norm(w), m), 0.0); };
    auto abs2 = convolve(s, adjoint(s));
    target = convolve_power(abs2, m).mean_coeff().real();
  }
  StopWatch watch(cfg.timings);
  for (std::size_t i = 0; i < cfg.schedule.size(); ++i) {
    double horizon = static_cast<double>(cfg.schedule[i]);
    auto r = bohr_time_average(s, f, horizon, cfg.bohr_step);
    ExperimentRecord rec;
    rec.n = cfg.schedule[i];
    rec.size = s.support_size();
    rec.value = r.value;
    rec.reference = target;
    rec.abs_error = std::abs(r.value - target);
    rec.wall_ms = watch.lap_ms();
    out.records.push_back(rec);
  }
  out.verdict = sweep_verdict(out.records, cfg.tolerance);
  out.note = "time average along the Bohr flow vs mean-value target " +
             g17(target);
  return out;
}

}  // namespace detail

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::szego_sweep: return detail::run_szego_sweep(cfg);
    case ExperimentKind::folner_check: return detail::run_folner_check(cfg);
    case ExperimentKind::sharpness: return detail::run_sharpness(cfg);
    case ExperimentKind::determinant: return detail::run_determinant(cfg);
    case ExperimentKind::zeta_moments: return detail::run_zeta_moments(cfg);
    case ExperimentKind::gram: return detail::run_gram(cfg);
    case ExperimentKind::b3_check: return detail::run_b3_check(cfg);
    case ExperimentKind::natural_truncation_explore:
      return detail::run_natural_truncation(cfg);
    case ExperimentKind::bohr_average: return detail::run_bohr_average(cfg);
  }
  throw std::domain_error("run_experiment: unknown kind");
}

/// One paragraph per experiment kind: which limit statement it exercises.
inline std::string describe_experiments() {
  return
      "szego-sweep: normalized traces of f(T_sigma(phi)) over a growing "
      "family, against the exact torus integral predicted by the first "
      "Szego-type limit theorem (Folner families) or its averaged/projected "
      "variants (progressions, lattice boxes).\n"
      "folner-check: exact shift-survival ratios #{k in sigma : q k in "
      "sigma}/#sigma for configured shifts; diagnoses whether the family is "
      "asymptotically invariant (the hypothesis of the limit theorem).\n"
      "sharpness: the exact identity (1/#sigma) Tr T_sigma(z^q + conj)^2 = "
      "2 #{k : q k in sigma}/#sigma, the two-sided link between trace "
      "asymptotics and shift survival.\n"
      "determinant: normalized determinants det(T)^(1/#sigma) against the "
      "geometric mean exp(integral of log phi) for positive symbols.\n"
      "zeta-moments: singular-value moments of truncated Dirichlet-series "
      "symbols over exponent boxes; the box limit is the mean of |phi|^{2m}, "
      "and as the cutoff grows it approaches the classical moment sum "
      "sum d_m(n)^2 n^{-2 gamma}.\n"
      "gram: normalized determinants of Gram matrices of dilated functions; "
      "the limit is the geometric mean of the associated nonnegative "
      "symbol.\n"
      "b3-check: the trace-norm inequality ||T(phi^n) - T(phi)^n||_S1 <= "
      "(n(n-1)/2) ||phi||^{n-2} ||pi L (1-pi)||_S2^2 on concrete "
      "truncations.\n"
      "natural-truncation-explore: raw sweeps over {1..N}, where no limit is "
      "known (open problem); reports successive differences only.\n"
      "bohr-average: finite-horizon time averages (1/2T) int f(phi(p^{it})) "
      "dt against the mean value predicted by almost-periodic averaging.\n";
}

}  // namespace szegolab

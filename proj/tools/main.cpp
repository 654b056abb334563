// Command-line front end: runs convergence experiments described by config
// files and writes deterministic CSV/JSON reports.
//
// Exit codes: 0 = PASS or EXPLORATORY, 1 = FAIL, 2 = configuration error.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <szegolab/experiment.hpp>

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

struct RunOptions {
  std::string config_path;
  std::string out_path;
  std::string format = "csv";
  std::string dump_matrix_path;
  std::string set_file_path;
  std::uint64_t seed = 0;
  bool have_seed = false;
  std::uint64_t max_size = 0;
  bool have_max_size = false;
};

szegolab::ExperimentConfig load_config(const RunOptions& opt) {
  auto cfg = szegolab::parse_experiment_config(
      szegolab::default_file_loader(opt.config_path));
  if (opt.have_seed) cfg.seed = opt.seed;
  if (opt.have_max_size) cfg.dense_cap = opt.max_size;
  if (!opt.dump_matrix_path.empty()) cfg.keep_matrix = true;
  if (!opt.set_file_path.empty()) {
    if (!cfg.have_family)
      throw szegolab::parse_error("--set-file: experiment takes no set family");
    cfg.family.kind = szegolab::SetFamily::Kind::explicit_sets;
    cfg.family.sets = szegolab::parse_set_file(
        szegolab::default_file_loader(opt.set_file_path));
    cfg.schedule.clear();
    for (std::size_t i = 0; i < cfg.family.sets.size(); ++i)
      cfg.schedule.push_back(i);
    if (cfg.schedule.empty())
      throw szegolab::parse_error("--set-file: file contains no sets");
  }
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << text;
}

int do_run(const RunOptions& opt) {
  szegolab::ExperimentConfig cfg;
  try {
    cfg = load_config(opt);
  } catch (const szegolab::parse_error& ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return kExitConfig;
  }
  szegolab::ExperimentResult result;
  try {
    result = szegolab::run_experiment(cfg);
  } catch (const std::exception& ex) {
    std::cerr << "experiment failed: " << ex.what() << "\n";
    return kExitFail;
  }
  try {
    write_text(opt.out_path, opt.format == "json"
                                 ? szegolab::emit_json(result)
                                 : szegolab::emit_csv(result.records));
    if (!opt.dump_matrix_path.empty()) {
      if (!result.have_matrix)
        throw std::runtime_error(
            "--dump-matrix: this experiment kind keeps no matrix "
            "(supported: szego-sweep, gram)");
      write_text(opt.dump_matrix_path,
                 szegolab::matrix_csv(result.last_matrix));
    }
  } catch (const std::exception& ex) {
    std::cerr << "output error: " << ex.what() << "\n";
    return kExitFail;
  }
  std::cerr << "verdict: " << szegolab::verdict_name(result.verdict) << " ("
            << result.note << ")\n";
  return result.verdict == szegolab::Verdict::fail ? kExitFail : kExitPass;
}

int do_validate(const std::string& config_path) {
  try {
    auto cfg = szegolab::parse_experiment_config(
        szegolab::default_file_loader(config_path));
    std::string kind_name;
    for (const auto& [name, value] : szegolab::experiment_kind_names())
      if (value == cfg.kind) kind_name = name;
    std::cout << "config OK: kind=" << kind_name << ", "
              << cfg.schedule.size() << " schedule points\n";
    return kExitPass;
  } catch (const szegolab::parse_error& ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "szegolab: truncated Toeplitz operators on multiplicative and additive "
      "index sets — convergence experiments for Szego-type limit theorems"};
  app.require_subcommand(1);

  RunOptions opt;
  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("--config", opt.config_path, "experiment config file")
      ->required();
  run->add_option("--out", opt.out_path,
                  "write the report here instead of stdout");
  run->add_option("--format", opt.format, "report format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  auto* seed_opt =
      run->add_option("--seed", opt.seed, "override the Monte Carlo seed");
  auto* max_opt = run->add_option("--max-size", opt.max_size,
                                  "override the dense-matrix size cap");
  run->add_option("--dump-matrix", opt.dump_matrix_path,
                  "also write the final truncated matrix as CSV");
  run->add_option("--set-file", opt.set_file_path,
                  "replace the set family with explicit sets from a file "
                  "(one whitespace-separated set of naturals per line)");

  std::string validate_path;
  auto* validate = app.add_subcommand(
      "validate-config", "parse and check a config file without running");
  validate->add_option("--config", validate_path, "experiment config file")
      ->required();

  auto* describe = app.add_subcommand(
      "describe", "explain what each experiment kind measures");
  auto* list = app.add_subcommand("list-experiments",
                                  "list the available experiment kinds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }

  opt.have_seed = seed_opt->count() > 0;
  opt.have_max_size = max_opt->count() > 0;

  if (run->parsed()) return do_run(opt);
  if (validate->parsed()) return do_validate(validate_path);
  if (describe->parsed()) {
    std::cout << szegolab::describe_experiments();
    return kExitPass;
  }
  if (list->parsed()) {
    for (const auto& [name, value] : szegolab::experiment_kind_names()) {
      (void)value;
      std::cout << name << "\n";
    }
    return kExitPass;
  }
  return kExitConfig;
}

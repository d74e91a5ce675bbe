#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <map>

#include "liftcheck/config.hpp"
#include "liftcheck/pipeline.hpp"
#include "liftcheck/process.hpp"
#include "liftcheck/report.hpp"

namespace fs = std::filesystem;
using namespace liftcheck;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfra = 2;

struct GlobalFlags {
  std::string config;
  std::string run_dir;
  int workers = 0;
  double timeout_secs = 0;
  std::string format = "text";
};

void log_line(const std::string& msg) { std::cerr << "[liftcheck] " << msg << "\n"; }

RunConfig load_config(const GlobalFlags& g, bool required) {
  RunConfig cfg;
  if (!g.config.empty()) {
    cfg = load_run_config(g.config);
  } else if (required) {
    throw ConfigError("--config is required");
  }
  if (g.workers > 0) cfg.workers = g.workers;
  if (g.timeout_secs > 0)
    cfg.toolchain.run_timeout =
        std::chrono::milliseconds(static_cast<long long>(g.timeout_secs * 1000.0));
  return cfg;
}

std::string render(const std::vector<EvaluationRecord>& records, const std::string& format) {
  if (format == "csv") return render_csv(records);
  if (format == "json") return summary_json(records).dump(2) + "\n";
  return render_text(records);
}

bool has_infrastructure_errors(const std::vector<EvaluationRecord>& records) {
  for (const auto& r : records)
    if (r.outcome.terminal == Terminal::InfrastructureError) return true;
  return false;
}

int cmd_generate(const GlobalFlags& g, const std::string& out) {
  auto cfg = load_config(g, false);
  cfg.generator.validate();
  const Toolchain toolchain(cfg.toolchain);
  const int workers = cfg.workers > 0 ? cfg.workers : default_workers();
  auto corpus = generate_corpus(cfg.generator, toolchain, workers, log_line);
  write_corpus(corpus, cfg.generator, out);
  std::cout << "wrote " << corpus.programs.size() << " programs to " << out << "\n";
  if (!corpus.rejected.empty())
    std::cout << "skipped " << corpus.rejected.size() << " seeds (see manifest.json)\n";
  return kExitOk;
}

int run_and_report(const RunConfig& cfg, const GlobalFlags& g, std::optional<std::size_t> stop) {
  if (g.run_dir.empty()) throw ConfigError("--run-dir is required");
  CampaignOptions opts;
  opts.workers = cfg.workers;
  opts.max_new_records = stop;
  opts.log = log_line;
  auto result = run_campaign(cfg, g.run_dir, opts);
  const auto records = load_records(g.run_dir);
  std::cout << render(records, g.format);
  log_line("summary: " + result.summary_path.string());
  if (!result.complete) log_line("campaign incomplete; rerun to resume");
  return has_infrastructure_errors(records) ? kExitInfra : kExitOk;
}

int cmd_report(const GlobalFlags& g) {
  if (g.run_dir.empty()) throw ConfigError("--run-dir is required");
  if (!fs::is_directory(g.run_dir)) throw ConfigError("run directory not found: " + g.run_dir);
  if (!fs::exists(fs::path(g.run_dir) / "records.jsonl"))
    throw ConfigError("no records.jsonl in " + g.run_dir);
  std::cout << render(load_records(g.run_dir), g.format);
  return kExitOk;
}

// Checks the coverage pattern each builtin lifter must produce.
std::vector<std::string> selftest_violations(const std::vector<EvaluationRecord>& records,
                                             std::size_t programs) {
  std::vector<std::string> problems;
  std::map<std::string, std::map<Terminal, std::size_t>> by_lifter;
  for (const auto& r : records) ++by_lifter[r.lifter_name][r.outcome.terminal];
  auto all = [&](const std::string& lifter, Terminal t) {
    const auto& m = by_lifter[lifter];
    std::size_t total = 0;
    for (const auto& [_, n] : m) total += n;
    const std::size_t hit = m.count(t) ? m.at(t) : 0;
    if (hit != total || total != programs * 2)
      problems.push_back(lifter + ": expected " + std::to_string(programs * 2) + " " +
                         std::string(to_string(t)) + ", got " + std::to_string(hit) + "/" +
                         std::to_string(total));
  };
  all("oracle", Terminal::ChecksumMatch);
  all("broken_syntax", Terminal::CompileError);
  all("nonterminating", Terminal::Timeout);
  if (!by_lifter["sabotage"].count(Terminal::ChecksumMismatch))
    problems.push_back("sabotage: no ChecksumMismatch");
  for (const auto& col : taxonomy_table(records)) {
    const auto& c = col.counts;
    const auto sum = c.lifting_error + c.compilation_error + c.runtime_crash + c.timeout +
                     c.checksum_error + c.checksum_correct;
    if (sum != c.tested || c.tested != programs)
      problems.push_back(col.lifter + "/" + std::string(to_string(col.opt_level)) +
                         ": column sums to " + std::to_string(sum) + " of " +
                         std::to_string(programs));
  }
  return problems;
}

int cmd_selftest(const GlobalFlags& g, std::size_t programs) {
  auto cfg = selftest_config(programs);
  if (g.workers > 0) cfg.workers = g.workers;
  if (g.timeout_secs > 0)
    cfg.toolchain.run_timeout =
        std::chrono::milliseconds(static_cast<long long>(g.timeout_secs * 1000.0));

  std::optional<TempDir> scratch;
  GlobalFlags flags = g;
  if (flags.run_dir.empty()) {
    scratch.emplace("liftcheck-selftest");
    flags.run_dir = scratch->path().string();
  }
  const int status = run_and_report(cfg, flags, std::nullopt);
  const auto problems = selftest_violations(load_records(flags.run_dir), programs);
  for (const auto& p : problems) std::cerr << "selftest: " << p << "\n";
  if (!problems.empty()) return kExitInfra;
  std::cerr << "selftest: ok\n";
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differential testing harness for binary lifters"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalFlags g;
  app.add_option("--config", g.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--run-dir", g.run_dir, "Directory holding programs, records and summaries");
  app.add_option("--workers", g.workers, "Parallel workers (default: available CPUs)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--timeout-secs", g.timeout_secs, "Per-execution timeout of lifted binaries")
      ->check(CLI::PositiveNumber);
  app.add_option("--format", g.format, "Report format")
      ->check(CLI::IsMember({"text", "csv", "json"}));

  std::string out_dir;
  auto* gen = app.add_subcommand("generate", "Generate test programs and a manifest");
  gen->add_option("--out", out_dir, "Output directory")->required();

  std::optional<std::size_t> stop_after;
  auto* run = app.add_subcommand("run", "Run or resume an evaluation campaign");
  run->add_option("--stop-after", stop_after, "Stop after this many new records");

  app.add_subcommand("report", "Render tables from an existing run directory");

  std::size_t selftest_programs = 20;
  auto* self = app.add_subcommand("selftest", "Run the builtin lifters and check the taxonomy");
  self->add_option("--programs", selftest_programs, "Number of generated programs")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  std::signal(SIGPIPE, SIG_IGN);
  try {
    if (gen->parsed()) return cmd_generate(g, out_dir);
    if (run->parsed()) return run_and_report(load_config(g, true), g, stop_after);
    if (self->parsed()) return cmd_selftest(g, selftest_programs);
    return cmd_report(g);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const LifterUnavailable& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfra;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfra;
  }
}

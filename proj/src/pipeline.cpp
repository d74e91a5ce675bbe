#include "liftcheck/pipeline.hpp"

#include <omp.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "liftcheck/report.hpp"

namespace liftcheck {

namespace fs = std::filesystem;
using nlohmann::json;

GroundTruth establish_ground_truth(const TestProgram& program, OptLevel opt,
                                   const Toolchain& toolchain) {
  auto built = toolchain.compile(program.source, opt, SourceLanguage::C, program.id);
  if (auto* err = std::get_if<CompileError>(&built))
    throw std::runtime_error(program.id + " failed to compile at " + std::string(to_string(opt)) +
                             ": " + err->diagnostic);
  GroundTruth gt;
  gt.artifact = std::move(std::get<BinaryArtifact>(built));
  auto run = toolchain.execute(gt.artifact);
  auto* sum = std::get_if<ChecksumValue>(&run);
  if (!sum)
    throw std::runtime_error(program.id + " produced no reference checksum at " +
                             std::string(to_string(opt)));
  gt.checksum = sum->value;
  return gt;
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

}  // namespace

EvaluationRecord evaluate_one(const TestProgram& program, const LifterSpec& lifter, OptLevel opt,
                              const GroundTruth& truth, const Toolchain& toolchain,
                              const MetricsConfig& metrics) {
  EvaluationRecord rec;
  rec.program_id = program.id;
  rec.lifter_name = lifter.name;
  rec.opt_level = opt;
  rec.reference_checksum = truth.checksum;

  try {
    LiftRequest req;
    req.program_id = program.id;
    req.binary = &truth.artifact;
    req.original_assembly = truth.artifact.assembly_text;
    req.ground_truth_source = program.source;

    auto t0 = Clock::now();
    auto lifted = lift(lifter, req);
    rec.timings.lift_ms = elapsed_ms(t0);
    if (auto* err = std::get_if<LiftError>(&lifted)) {
      rec.outcome = {Terminal::LiftError, err->detail};
      return rec;
    }
    const auto& out = std::get<Lifted>(lifted);

    t0 = Clock::now();
    auto built = toolchain.compile(out.source, opt, out.language, program.id);
    rec.timings.compile_ms = elapsed_ms(t0);
    if (auto* err = std::get_if<CompileError>(&built)) {
      rec.outcome = {Terminal::CompileError, err->diagnostic.substr(0, 4000)};
      return rec;
    }
    const auto& artifact = std::get<BinaryArtifact>(built);
    rec.similarity = similarity(artifact.assembly_text, truth.artifact.assembly_text, metrics);

    t0 = Clock::now();
    auto run = toolchain.execute(artifact);
    rec.timings.execute_ms = elapsed_ms(t0);
    if (auto* f = std::get_if<RuntimeFailure>(&run)) {
      rec.outcome = {Terminal::RuntimeError, f->detail};
    } else if (std::holds_alternative<TimedOut>(run)) {
      rec.outcome = {Terminal::Timeout, "exceeded " +
                                            std::to_string(toolchain.config().run_timeout.count()) +
                                            " ms"};
    } else {
      const auto value = std::get<ChecksumValue>(run).value;
      rec.lifted_checksum = value;
      if (value == truth.checksum) {
        rec.outcome = {Terminal::ChecksumMatch, out.note};
      } else {
        rec.outcome = {Terminal::ChecksumMismatch,
                       format_checksum(value) + " vs reference " + format_checksum(truth.checksum) +
                           (out.note.empty() ? "" : "; " + out.note)};
      }
    }
  } catch (const std::exception& e) {
    rec.outcome = {Terminal::InfrastructureError, e.what()};
    rec.similarity.reset();
    rec.lifted_checksum.reset();
  }
  return rec;
}

// ---------------------------------------------------------------------------
// RecordStore

RecordStore::RecordStore(fs::path path) : path_(std::move(path)) {
  if (!fs::exists(path_)) return;
  std::string text = read_file(path_);
  const auto last_nl = text.rfind('\n');
  const std::size_t complete = last_nl == std::string::npos ? 0 : last_nl + 1;
  if (complete != text.size()) {
    // Torn tail from an interrupted append.
    text.resize(complete);
    fs::resize_file(path_, complete);
  }
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto rec = record_from_json(json::parse(line));
    records_.push_back(rec);
    // Infrastructure faults are retried on resume.
    if (rec.outcome.terminal != Terminal::InfrastructureError) keys_.insert(rec.key());
  }
}

bool RecordStore::contains(const std::string& key) const {
  std::lock_guard lock(mu_);
  return keys_.count(key) > 0;
}

void RecordStore::append(const EvaluationRecord& record) {
  const std::string line = to_json(record).dump() + "\n";
  std::lock_guard lock(mu_);
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  out << line;
  out.flush();
  if (!out) throw std::runtime_error("failed to append to " + path_.string());
  records_.push_back(record);
  if (record.outcome.terminal != Terminal::InfrastructureError) keys_.insert(record.key());
}

std::vector<EvaluationRecord> RecordStore::records() const {
  std::lock_guard lock(mu_);
  // Last write wins for keys that were retried.
  std::map<std::string, const EvaluationRecord*> latest;
  for (const auto& r : records_) latest[r.key()] = &r;
  std::vector<EvaluationRecord> out;
  out.reserve(latest.size());
  for (const auto& [_, r] : latest) out.push_back(*r);
  return out;
}

std::size_t RecordStore::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

// ---------------------------------------------------------------------------
// Campaign

namespace {

class Semaphore {
 public:
  explicit Semaphore(int permits) : permits_(permits) {}
  void acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return permits_ > 0; });
    --permits_;
  }
  void release() {
    {
      std::lock_guard lock(mu_);
      ++permits_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int permits_;
};

json run_fingerprint(const RunConfig& config) {
  json j = to_json(config);
  j["pipeline"].erase("workers");
  return j;
}

void check_or_write_meta(const RunConfig& config, const Toolchain& toolchain,
                         const fs::path& run_dir) {
  const auto meta_path = run_dir / "run_meta.json";
  const json fp = run_fingerprint(config);
  const std::string digest = sha256_hex(fp.dump());
  if (fs::exists(meta_path)) {
    auto meta = json::parse(read_file(meta_path));
    if (meta.value("config_sha256", "") != digest)
      throw ConfigError("run directory " + run_dir.string() +
                        " was created with a different configuration");
    return;
  }
  json meta{{"schema_version", kSummarySchemaVersion},
            {"config", fp},
            {"config_sha256", digest},
            {"toolchain_version", toolchain.version_info()}};
  if (config.generator.backend == GeneratorBackend::ExternalCsmith)
    meta["csmith_flags"] = csmith_flags(0);
  write_file(meta_path, meta.dump(2) + "\n");
}

}  // namespace

std::vector<EvaluationRecord> load_records(const fs::path& run_dir) {
  return RecordStore(run_dir / "records.jsonl").records();
}

json write_summary(const fs::path& run_dir) {
  const auto records = load_records(run_dir);
  json summary = summary_json(records);
  write_file(run_dir / "summary.json", summary.dump(2) + "\n");
  write_file(run_dir / "boxplot.json", boxplot_export(records).dump(2) + "\n");
  return summary;
}

CampaignResult run_campaign(const RunConfig& config, const fs::path& run_dir,
                            const CampaignOptions& options) {
  config.validate();
  auto log = [&](const std::string& msg) {
    if (options.log) options.log(msg);
  };

  // Unavailable lifters abort before any generation work.
  for (const auto& l : config.lifters) {
    auto h = health_check(l);
    if (!h.ok) throw LifterUnavailable("lifter '" + l.name + "' unavailable: " + h.detail);
  }

  const int workers = options.workers > 0 ? options.workers
                      : config.workers > 0 ? config.workers
                                           : default_workers();
  const Toolchain toolchain(config.toolchain);
  fs::create_directories(run_dir);
  check_or_write_meta(config, toolchain, run_dir);

  Corpus corpus;
  if (auto existing = read_corpus(run_dir / "programs")) {
    corpus = std::move(*existing);
  } else {
    log("generating " + std::to_string(config.generator.program_count) + " programs");
    corpus = generate_corpus(config.generator, toolchain, workers, log);
    write_corpus(corpus, config.generator, run_dir / "programs");
  }

  // Csmith programs need csmith.h when recompiled by the pipeline as well.
  Toolchain program_toolchain = toolchain;
  if (config.generator.backend == GeneratorBackend::ExternalCsmith &&
      !config.generator.csmith_include.empty()) {
    auto tc = config.toolchain;
    tc.include_dirs.push_back(config.generator.csmith_include);
    program_toolchain = Toolchain(tc);
  }

  RecordStore store(run_dir / "records.jsonl");

  struct Cell {
    std::size_t program;
    std::size_t opt;
    std::size_t lifter;
  };
  const std::size_t n_prog = corpus.programs.size();
  const std::size_t n_opt = config.opt_levels.size();
  std::vector<Cell> pending;
  std::vector<char> needs_truth(n_prog * n_opt, 0);
  CampaignResult result;
  for (std::size_t p = 0; p < n_prog; ++p)
    for (std::size_t o = 0; o < n_opt; ++o)
      for (std::size_t l = 0; l < config.lifters.size(); ++l) {
        ++result.total;
        if (store.contains(record_key(corpus.programs[p].id, config.lifters[l].name,
                                      config.opt_levels[o]))) {
          ++result.skipped;
          continue;
        }
        pending.push_back({p, o, l});
        needs_truth[p * n_opt + o] = 1;
      }
  if (result.skipped > 0) log("resuming: " + std::to_string(result.skipped) + " records present");

  // Stage A, once per (program, opt level).
  std::vector<std::optional<GroundTruth>> truths(n_prog * n_opt);
  std::vector<std::string> truth_errors(n_prog * n_opt);
  const auto n_truth = static_cast<std::ptrdiff_t>(truths.size());
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (std::ptrdiff_t i = 0; i < n_truth; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    if (!needs_truth[idx]) continue;
    try {
      truths[idx] = establish_ground_truth(corpus.programs[idx / n_opt],
                                           config.opt_levels[idx % n_opt], program_toolchain);
    } catch (const std::exception& e) {
      truth_errors[idx] = e.what();
    }
  }

  std::map<std::string, std::unique_ptr<Semaphore>> caps;
  for (const auto& l : config.lifters)
    if (l.max_concurrency > 0) caps[l.name] = std::make_unique<Semaphore>(l.max_concurrency);

  std::atomic<std::size_t> reserved{0};
  std::atomic<std::size_t> written{0};
  std::atomic<bool> append_failed{false};
  std::string append_error;
  const auto n_pending = static_cast<std::ptrdiff_t>(pending.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (std::ptrdiff_t i = 0; i < n_pending; ++i) {
    if (append_failed) continue;
    if (options.max_new_records && reserved.fetch_add(1) >= *options.max_new_records) continue;
    const Cell& cell = pending[static_cast<std::size_t>(i)];
    const auto& program = corpus.programs[cell.program];
    const auto& lifter = config.lifters[cell.lifter];
    const OptLevel opt = config.opt_levels[cell.opt];
    const auto& truth = truths[cell.program * n_opt + cell.opt];

    EvaluationRecord rec;
    if (!truth) {
      rec.program_id = program.id;
      rec.lifter_name = lifter.name;
      rec.opt_level = opt;
      rec.outcome = {Terminal::InfrastructureError,
                     "ground truth unavailable: " + truth_errors[cell.program * n_opt + cell.opt]};
    } else {
      Semaphore* cap = nullptr;
      if (auto it = caps.find(lifter.name); it != caps.end()) cap = it->second.get();
      if (cap) cap->acquire();
      rec = evaluate_one(program, lifter, opt, *truth, toolchain, config.metrics);
      if (cap) cap->release();
    }
    try {
      store.append(rec);
      const auto n = ++written;
      if (n % 50 == 0) log(std::to_string(n) + "/" + std::to_string(pending.size()) + " records");
    } catch (const std::exception& e) {
#pragma omp critical(liftcheck_append_error)
      append_error = e.what();
      append_failed = true;
    }
  }
  if (append_failed) throw std::runtime_error(append_error);

  result.evaluated = written;
  result.complete = result.skipped + result.evaluated == result.total;
  result.summary = write_summary(run_dir);
  result.summary_path = run_dir / "summary.json";
  return result;
}

}  // namespace liftcheck

#pragma once

#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "liftcheck/config.hpp"
#include "liftcheck/generator.hpp"
#include "liftcheck/lifters.hpp"
#include "liftcheck/record.hpp"

namespace liftcheck {

// Stage A result for one (program, opt level), shared by every lifter.
struct GroundTruth {
  BinaryArtifact artifact;
  std::uint32_t checksum = 0;
};

// Compiles and runs the original program. Throws std::runtime_error when the
// program does not yield a checksum.
GroundTruth establish_ground_truth(const TestProgram& program, OptLevel opt,
                                   const Toolchain& toolchain);

// lift -> compile -> execute -> compare; the first failing stage decides the
// outcome. Similarity is scored whenever round-trip assembly exists.
EvaluationRecord evaluate_one(const TestProgram& program, const LifterSpec& lifter,
                              OptLevel opt, const GroundTruth& truth,
                              const Toolchain& toolchain, const MetricsConfig& metrics);

// Append-only JSON-lines store keyed by record key. A torn final line left by
// a killed process is dropped on open.
class RecordStore {
 public:
  explicit RecordStore(std::filesystem::path path);

  bool contains(const std::string& key) const;
  void append(const EvaluationRecord& record);
  std::vector<EvaluationRecord> records() const;
  std::size_t size() const;

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::vector<EvaluationRecord> records_;
  std::set<std::string> keys_;
};

class LifterUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CampaignOptions {
  int workers = 0;  // overrides config when > 0
  // Stop after this many new records (testing aid for interrupted runs).
  std::optional<std::size_t> max_new_records;
  std::function<void(const std::string&)> log;
};

struct CampaignResult {
  std::size_t evaluated = 0;  // records written by this invocation
  std::size_t skipped = 0;    // already present from a previous invocation
  std::size_t total = 0;
  bool complete = false;
  nlohmann::json summary;
  std::filesystem::path summary_path;
};

// Run directory: programs/, records.jsonl, summary.json, boxplot.json,
// run_meta.json.
CampaignResult run_campaign(const RunConfig& config, const std::filesystem::path& run_dir,
                            const CampaignOptions& options = {});

// Rewrites summary.json and boxplot.json from records.jsonl.
nlohmann::json write_summary(const std::filesystem::path& run_dir);

std::vector<EvaluationRecord> load_records(const std::filesystem::path& run_dir);

}  // namespace liftcheck

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "liftcheck/record.hpp"
#include "liftcheck/stats.hpp"

namespace liftcheck {

inline constexpr int kSummarySchemaVersion = 1;

struct TaxonomyCounts {
  std::size_t tested = 0;
  std::size_t lifting_error = 0;
  std::size_t compilation_error = 0;
  std::size_t runtime_crash = 0;
  std::size_t timeout = 0;
  std::size_t checksum_error = 0;
  std::size_t checksum_correct = 0;
  std::size_t infrastructure_error = 0;  // not part of `tested`

  std::size_t compilation_success() const { return tested - lifting_error - compilation_error; }
  // Crashes and timeouts share one reported bucket.
  std::size_t runtime_error() const { return runtime_crash + timeout; }
};

struct TaxonomyColumn {
  std::string lifter;
  OptLevel opt_level = OptLevel::O0;
  TaxonomyCounts counts;
};

// One column per (lifter, opt level), sorted by lifter name then level.
std::vector<TaxonomyColumn> taxonomy_table(std::span<const EvaluationRecord> records);

inline constexpr const char* kMetricNames[] = {"BLEU-1", "BLEU-4", "CodeBLEU"};
double metric_value(const SimilarityScores& s, std::string_view metric);

struct CorrelationRow {
  std::string lifter;
  OptLevel opt_level = OptLevel::O0;
  std::string metric;
  std::size_t n_pass = 0;
  std::size_t n_fail = 0;
  std::optional<CorrelationResult> result;  // empty -> "n/a"
  std::string na_reason;
};

// Population: records that compiled and executed with similarity scores;
// pass = ChecksumMatch, everything else in the population is fail.
std::vector<CorrelationRow> correlation_table(std::span<const EvaluationRecord> records);

inline constexpr const char* kCorrelationPopulation =
    "records whose lifted source compiled and was executed (ChecksumMatch, "
    "ChecksumMismatch, RuntimeError, Timeout); pass = ChecksumMatch, fail = the rest";

// Groups keyed by (lifter, opt level, metric, match|mismatch) carrying the
// distribution summary and raw scores.
nlohmann::json boxplot_export(std::span<const EvaluationRecord> records);

// summary.json document. A pure function of the record multiset.
nlohmann::json summary_json(std::span<const EvaluationRecord> records);

std::string render_text(std::span<const EvaluationRecord> records);

// Fixed column orders:
//   taxonomy: table,lifter,opt_level,tested,lifting_error,compilation_error,
//             compilation_success,compilation_success_pct,runtime_error,
//             runtime_error_crash,runtime_error_timeout,checksum_error,
//             checksum_correct,checksum_correct_pct,infrastructure_error
//   correlation: table,lifter,opt_level,metric,n_pass,n_fail,pass_mean,
//                fail_mean,r,p_value,stars
// Percentage columns carry the number without a '%' sign.
std::string render_csv(std::span<const EvaluationRecord> records);

// Records sorted by key, the canonical order for every aggregate.
std::vector<EvaluationRecord> canonical_order(std::span<const EvaluationRecord> records);

}  // namespace liftcheck

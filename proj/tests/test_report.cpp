#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "liftcheck/report.hpp"

using namespace liftcheck;

namespace {

EvaluationRecord rec(const std::string& prog, const std::string& lifter, OptLevel opt, Terminal t,
                     std::optional<double> score = std::nullopt) {
  EvaluationRecord r;
  r.program_id = prog;
  r.lifter_name = lifter;
  r.opt_level = opt;
  r.outcome = {t, ""};
  r.reference_checksum = 0x1234;
  if (score) r.similarity = SimilarityScores{*score, *score * 0.5, *score * 0.8};
  r.timings.lift_ms = 1.5;
  return r;
}

// One lifter, O0: 2 lift errors, 1 compile error, 1 crash, 1 timeout,
// 2 mismatches, 3 matches.
std::vector<EvaluationRecord> sample() {
  std::vector<EvaluationRecord> v;
  int i = 0;
  auto id = [&] { return "prog_" + std::to_string(++i); };
  v.push_back(rec(id(), "l", OptLevel::O0, Terminal::LiftError));
  v.push_back(rec(id(), "l", OptLevel::O0, Terminal::LiftError));
  v.push_back(rec(id(), "l", OptLevel::O0, Terminal::CompileError));
  v.push_back(rec(id(), "l", OptLevel::O0, Terminal::RuntimeError, 0.2));
  v.push_back(rec(id(), "l", OptLevel::O0, Terminal::Timeout, 0.3));
  v.push_back(rec(id(), "l", OptLevel::O0, Terminal::ChecksumMismatch, 0.4));
  v.push_back(rec(id(), "l", OptLevel::O0, Terminal::ChecksumMismatch, 0.5));
  v.push_back(rec(id(), "l", OptLevel::O0, Terminal::ChecksumMatch, 0.7));
  v.push_back(rec(id(), "l", OptLevel::O0, Terminal::ChecksumMatch, 0.8));
  v.push_back(rec(id(), "l", OptLevel::O0, Terminal::ChecksumMatch, 0.9));
  v.push_back(rec(id(), "l", OptLevel::O0, Terminal::InfrastructureError));
  return v;
}

}  // namespace

TEST(Taxonomy, CountsPartitionTested) {
  const auto table = taxonomy_table(sample());
  ASSERT_EQ(table.size(), 1u);
  const auto& c = table[0].counts;
  EXPECT_EQ(c.tested, 10u);
  EXPECT_EQ(c.lifting_error, 2u);
  EXPECT_EQ(c.compilation_error, 1u);
  EXPECT_EQ(c.compilation_success(), 7u);
  EXPECT_EQ(c.runtime_error(), 2u);
  EXPECT_EQ(c.checksum_error, 2u);
  EXPECT_EQ(c.checksum_correct, 3u);
  EXPECT_EQ(c.infrastructure_error, 1u);
  EXPECT_EQ(c.lifting_error + c.compilation_error + c.runtime_error() + c.checksum_error +
                c.checksum_correct,
            c.tested);
}

TEST(Taxonomy, ColumnsSortedByLifterThenLevel) {
  std::vector<EvaluationRecord> v{rec("p", "z", OptLevel::O3, Terminal::LiftError),
                                  rec("p", "a", OptLevel::O3, Terminal::LiftError),
                                  rec("p", "a", OptLevel::O0, Terminal::LiftError)};
  const auto t = taxonomy_table(v);
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[0].lifter, "a");
  EXPECT_EQ(t[0].opt_level, OptLevel::O0);
  EXPECT_EQ(t[1].opt_level, OptLevel::O3);
  EXPECT_EQ(t[2].lifter, "z");
}

TEST(Correlation, PopulationIsExecutedRecords) {
  const auto rows = correlation_table(sample());
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& row : rows) {
    EXPECT_EQ(row.n_pass, 3u);
    EXPECT_EQ(row.n_fail, 4u);
    ASSERT_TRUE(row.result);
    EXPECT_GT(row.result->r, 0.8);
  }
  EXPECT_EQ(rows[0].metric, "BLEU-1");
  EXPECT_NEAR(rows[0].result->pass_mean, 0.8, 1e-12);
  EXPECT_NEAR(rows[0].result->fail_mean, 0.35, 1e-12);
}

TEST(Correlation, SingleClassIsNotApplicable) {
  std::vector<EvaluationRecord> v;
  for (int i = 0; i < 5; ++i)
    v.push_back(rec("p" + std::to_string(i), "o", OptLevel::O0, Terminal::ChecksumMatch, 0.1 * i));
  const auto rows = correlation_table(v);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_FALSE(rows[0].result);
  EXPECT_FALSE(rows[0].na_reason.empty());
  const auto j = summary_json(v);
  EXPECT_EQ(j["correlation"][0]["status"], "n/a");
}

TEST(Summary, SchemaAndPercentages) {
  const auto j = summary_json(sample());
  EXPECT_EQ(j["schema_version"], kSummarySchemaVersion);
  EXPECT_EQ(j["record_count"], 11);
  const auto& t = j["taxonomy"][0];
  EXPECT_EQ(t["tested"], 10);
  EXPECT_EQ(t["checksum_correct_pct"], "30.00%");
  EXPECT_EQ(t["compilation_success_pct"], "70.00%");
  EXPECT_EQ(t["semantic_score"], "0.3000");
  EXPECT_FALSE(j.dump().find("lift_ms") != std::string::npos);
}

TEST(Summary, IndependentOfRecordOrder) {
  auto v = sample();
  const auto a = summary_json(v).dump();
  std::mt19937 rng(3);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(v.begin(), v.end(), rng);
    EXPECT_EQ(summary_json(v).dump(), a);
    EXPECT_EQ(render_csv(v), render_csv(sample()));
    EXPECT_EQ(boxplot_export(v).dump(), boxplot_export(sample()).dump());
  }
}

TEST(Csv, ColumnOrder) {
  const auto csv = render_csv(sample());
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header,
            "table,lifter,opt_level,tested,lifting_error,compilation_error,compilation_success,"
            "compilation_success_pct,runtime_error,runtime_error_crash,runtime_error_timeout,"
            "checksum_error,checksum_correct,checksum_correct_pct,infrastructure_error");
  std::string row;
  std::getline(in, row);
  EXPECT_EQ(row, "taxonomy,l,O0,10,2,1,7,70.00,2,1,1,2,3,30.00,1");
  EXPECT_NE(csv.find("table,lifter,opt_level,metric,n_pass,n_fail,pass_mean,fail_mean,r,p_value,stars"),
            std::string::npos);
}

TEST(Text, ContainsBothTables) {
  const auto text = render_text(sample());
  EXPECT_NE(text.find("Tested programs"), std::string::npos);
  EXPECT_NE(text.find("3 (30.00%)"), std::string::npos);
  EXPECT_NE(text.find("CodeBLEU"), std::string::npos);
}

TEST(Boxplot, GroupsByOutcome) {
  const auto j = boxplot_export(sample());
  ASSERT_EQ(j["groups"].size(), 6u);  // 3 metrics x match/mismatch
  std::size_t match = 0, mismatch = 0;
  for (const auto& g : j["groups"]) {
    if (g["outcome"] == "match") match += g["count"].get<std::size_t>();
    else mismatch += g["count"].get<std::size_t>();
  }
  EXPECT_EQ(match, 9u);
  EXPECT_EQ(mismatch, 12u);  // every executed non-match, crashes and timeouts included
}

TEST(Record, JsonRoundTrip) {
  auto r = rec("prog_9", "llm", OptLevel::O3, Terminal::ChecksumMismatch, 0.25);
  r.lifted_checksum = 0xFFFFFFFFu;
  r.outcome.detail = "x";
  const auto back = record_from_json(to_json(r));
  EXPECT_EQ(back.key(), "prog_9|llm|O3");
  EXPECT_EQ(back.outcome.terminal, Terminal::ChecksumMismatch);
  EXPECT_EQ(back.lifted_checksum, 0xFFFFFFFFu);
  EXPECT_EQ(back.similarity->bleu1, 0.25);
  EXPECT_EQ(back.timings.lift_ms, 1.5);
  EXPECT_FALSE(back.timings.compile_ms);
  EXPECT_TRUE(back.executed());
  EXPECT_FALSE(back.passed());
}

TEST(Record, TerminalNames) {
  for (auto t : {Terminal::LiftError, Terminal::CompileError, Terminal::RuntimeError,
                 Terminal::Timeout, Terminal::ChecksumMismatch, Terminal::ChecksumMatch,
                 Terminal::InfrastructureError})
    EXPECT_EQ(parse_terminal(to_string(t)), t);
  EXPECT_THROW(parse_terminal("Nope"), std::invalid_argument);
}

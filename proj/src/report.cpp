#include "liftcheck/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

namespace liftcheck {

using nlohmann::json;

std::vector<EvaluationRecord> canonical_order(std::span<const EvaluationRecord> records) {
  std::vector<EvaluationRecord> out(records.begin(), records.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.lifter_name, a.opt_level, a.program_id) <
           std::tie(b.lifter_name, b.opt_level, b.program_id);
  });
  return out;
}

std::vector<TaxonomyColumn> taxonomy_table(std::span<const EvaluationRecord> records) {
  std::map<std::pair<std::string, OptLevel>, TaxonomyCounts> cells;
  for (const auto& r : records) {
    auto& c = cells[{r.lifter_name, r.opt_level}];
    if (r.outcome.terminal == Terminal::InfrastructureError) {
      ++c.infrastructure_error;
      continue;
    }
    ++c.tested;
    switch (r.outcome.terminal) {
      case Terminal::LiftError: ++c.lifting_error; break;
      case Terminal::CompileError: ++c.compilation_error; break;
      case Terminal::RuntimeError: ++c.runtime_crash; break;
      case Terminal::Timeout: ++c.timeout; break;
      case Terminal::ChecksumMismatch: ++c.checksum_error; break;
      case Terminal::ChecksumMatch: ++c.checksum_correct; break;
      case Terminal::InfrastructureError: break;
    }
  }
  std::vector<TaxonomyColumn> cols;
  for (const auto& [key, counts] : cells) cols.push_back({key.first, key.second, counts});
  return cols;
}

double metric_value(const SimilarityScores& s, std::string_view metric) {
  if (metric == "BLEU-1") return s.bleu1;
  if (metric == "BLEU-4") return s.bleu4;
  if (metric == "CodeBLEU") return s.codebleu;
  throw std::invalid_argument("unknown metric: " + std::string(metric));
}

namespace {

struct Population {
  std::vector<const EvaluationRecord*> members;
};

// (lifter, opt) -> executed records with similarity, canonical order.
std::map<std::pair<std::string, OptLevel>, Population> populations(
    const std::vector<EvaluationRecord>& sorted) {
  std::map<std::pair<std::string, OptLevel>, Population> pops;
  for (const auto& r : sorted) {
    auto& p = pops[{r.lifter_name, r.opt_level}];
    if (r.executed() && r.similarity) p.members.push_back(&r);
  }
  return pops;
}

}  // namespace

std::vector<CorrelationRow> correlation_table(std::span<const EvaluationRecord> records) {
  const auto sorted = canonical_order(records);
  std::vector<CorrelationRow> rows;
  for (const auto& [key, pop] : populations(sorted)) {
    for (const char* metric : kMetricNames) {
      CorrelationRow row;
      row.lifter = key.first;
      row.opt_level = key.second;
      row.metric = metric;
      std::vector<double> scores;
      std::vector<bool> pass;
      for (const auto* r : pop.members) {
        scores.push_back(metric_value(*r->similarity, metric));
        pass.push_back(r->passed());
        ++(r->passed() ? row.n_pass : row.n_fail);
      }
      try {
        auto res = point_biserial(scores, pass);
        res.metric_name = metric;
        res.opt_level = key.second;
        row.result = res;
      } catch (const StatsError& e) {
        row.na_reason = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

json boxplot_export(std::span<const EvaluationRecord> records) {
  const auto sorted = canonical_order(records);
  json groups = json::array();
  for (const auto& [key, pop] : populations(sorted)) {
    for (const char* metric : kMetricNames) {
      for (const bool match : {true, false}) {
        std::vector<double> scores;
        for (const auto* r : pop.members)
          if (r->passed() == match) scores.push_back(metric_value(*r->similarity, metric));
        if (scores.empty()) continue;
        const auto s = distribution_summary(scores);
        groups.push_back({{"lifter", key.first},
                          {"opt_level", to_string(key.second)},
                          {"metric", metric},
                          {"outcome", match ? "match" : "mismatch"},
                          {"count", s.count},
                          {"min", s.min},
                          {"q1", s.q1},
                          {"median", s.median},
                          {"q3", s.q3},
                          {"max", s.max},
                          {"mean", s.mean},
                          {"scores", scores}});
      }
    }
  }
  return json{{"schema_version", kSummarySchemaVersion}, {"groups", std::move(groups)}};
}

json summary_json(std::span<const EvaluationRecord> records) {
  json taxonomy = json::array();
  for (const auto& col : taxonomy_table(records)) {
    const auto& c = col.counts;
    json entry{{"lifter", col.lifter},
               {"opt_level", to_string(col.opt_level)},
               {"tested", c.tested},
               {"lifting_error", c.lifting_error},
               {"compilation_error", c.compilation_error},
               {"compilation_success", c.compilation_success()},
               {"runtime_error", c.runtime_error()},
               {"runtime_error_crash", c.runtime_crash},
               {"runtime_error_timeout", c.timeout},
               {"checksum_error", c.checksum_error},
               {"checksum_correct", c.checksum_correct},
               {"infrastructure_error", c.infrastructure_error}};
    if (c.tested > 0) {
      const auto score = semantic_score(c.checksum_correct, c.tested);
      entry["compilation_success_pct"] = render_fraction(c.compilation_success() * 100, c.tested, 2) + "%";
      entry["checksum_correct_pct"] = score.percent_string();
      entry["semantic_score"] = score.ratio_string();
      entry["semantic_score_value"] = score.value();
    } else {
      entry["semantic_score"] = nullptr;
    }
    taxonomy.push_back(std::move(entry));
  }

  json correlation = json::array();
  for (const auto& row : correlation_table(records)) {
    json entry{{"lifter", row.lifter},
               {"opt_level", to_string(row.opt_level)},
               {"metric", row.metric},
               {"n_pass", row.n_pass},
               {"n_fail", row.n_fail}};
    if (row.result) {
      entry["pass_mean"] = row.result->pass_mean;
      entry["fail_mean"] = row.result->fail_mean;
      entry["r"] = row.result->r;
      entry["p_value"] = row.result->p_value;
      entry["stars"] = significance_stars(row.result->p_value);
    } else {
      entry["status"] = "n/a";
      entry["reason"] = row.na_reason;
    }
    correlation.push_back(std::move(entry));
  }

  return json{{"schema_version", kSummarySchemaVersion},
              {"record_count", records.size()},
              {"correlation_population", kCorrelationPopulation},
              {"taxonomy", std::move(taxonomy)},
              {"correlation", std::move(correlation)}};
}

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string count_pct(std::size_t n, std::size_t tested) {
  if (tested == 0) return std::to_string(n);
  return std::to_string(n) + " (" + render_fraction(n * 100, tested, 2) + "%)";
}

std::string pad(const std::string& s, std::size_t w, bool right = false) {
  if (s.size() >= w) return s;
  return right ? std::string(w - s.size(), ' ') + s : s + std::string(w - s.size(), ' ');
}

}  // namespace

std::string render_text(std::span<const EvaluationRecord> records) {
  std::ostringstream out;
  const auto cols = taxonomy_table(records);
  if (cols.empty()) return "no records\n";

  out << "Outcome taxonomy\n";
  std::vector<std::pair<std::string, std::vector<std::string>>> rows = {
      {"Lifter", {}},           {"Opt. level", {}},        {"Tested programs", {}},
      {"Lifting error", {}},    {"Compilation error", {}}, {"Compilation success", {}},
      {"Runtime error", {}},    {"  crash", {}},           {"  timeout", {}},
      {"Checksum error", {}},   {"Checksum correct", {}},  {"Semantic score", {}},
      {"Infrastructure error", {}}};
  for (const auto& col : cols) {
    const auto& c = col.counts;
    std::size_t i = 0;
    rows[i++].second.push_back(col.lifter);
    rows[i++].second.push_back(std::string(to_string(col.opt_level)));
    rows[i++].second.push_back(std::to_string(c.tested));
    rows[i++].second.push_back(std::to_string(c.lifting_error));
    rows[i++].second.push_back(std::to_string(c.compilation_error));
    rows[i++].second.push_back(count_pct(c.compilation_success(), c.tested));
    rows[i++].second.push_back(std::to_string(c.runtime_error()));
    rows[i++].second.push_back(std::to_string(c.runtime_crash));
    rows[i++].second.push_back(std::to_string(c.timeout));
    rows[i++].second.push_back(std::to_string(c.checksum_error));
    rows[i++].second.push_back(count_pct(c.checksum_correct, c.tested));
    rows[i++].second.push_back(c.tested ? semantic_score(c.checksum_correct, c.tested).ratio_string()
                                        : "n/a");
    rows[i++].second.push_back(std::to_string(c.infrastructure_error));
  }
  std::size_t label_w = 0, cell_w = 0;
  for (const auto& [label, cells] : rows) {
    label_w = std::max(label_w, label.size());
    for (const auto& cell : cells) cell_w = std::max(cell_w, cell.size());
  }
  for (const auto& [label, cells] : rows) {
    out << pad(label, label_w + 2);
    for (const auto& cell : cells) out << pad(cell, cell_w + 2, true);
    out << "\n";
  }

  out << "\nRound-trip similarity vs. execution result\n";
  out << pad("Lifter", 16) << pad("Opt", 5) << pad("Pass/Fail", 11) << pad("Metric", 10)
      << pad("Pass mean", 11, true) << pad("Fail mean", 11, true) << pad("r", 12, true) << "\n";
  for (const auto& row : correlation_table(records)) {
    out << pad(row.lifter, 16) << pad(std::string(to_string(row.opt_level)), 5)
        << pad(std::to_string(row.n_pass) + "/" + std::to_string(row.n_fail), 11)
        << pad(row.metric, 10);
    if (row.result) {
      out << pad(fmt("%.2f", row.result->pass_mean), 11, true)
          << pad(fmt("%.2f", row.result->fail_mean), 11, true)
          << pad(fmt("%.2f", row.result->r) + significance_stars(row.result->p_value), 12, true);
    } else {
      out << pad("n/a", 11, true) << pad("n/a", 11, true) << pad("n/a", 12, true);
    }
    out << "\n";
  }
  out << "Significance: * p < 0.05, ** p < 0.01, *** p < 0.001\n";
  return out.str();
}

std::string render_csv(std::span<const EvaluationRecord> records) {
  std::ostringstream out;
  out << "table,lifter,opt_level,tested,lifting_error,compilation_error,compilation_success,"
         "compilation_success_pct,runtime_error,runtime_error_crash,runtime_error_timeout,"
         "checksum_error,checksum_correct,checksum_correct_pct,infrastructure_error\n";
  for (const auto& col : taxonomy_table(records)) {
    const auto& c = col.counts;
    auto pct = [&](std::size_t n) {
      return c.tested ? render_fraction(n * 100, c.tested, 2) : std::string();
    };
    out << "taxonomy," << col.lifter << "," << to_string(col.opt_level) << "," << c.tested << ","
        << c.lifting_error << "," << c.compilation_error << "," << c.compilation_success() << ","
        << pct(c.compilation_success()) << "," << c.runtime_error() << "," << c.runtime_crash
        << "," << c.timeout << "," << c.checksum_error << "," << c.checksum_correct << ","
        << pct(c.checksum_correct) << "," << c.infrastructure_error << "\n";
  }
  out << "\ntable,lifter,opt_level,metric,n_pass,n_fail,pass_mean,fail_mean,r,p_value,stars\n";
  for (const auto& row : correlation_table(records)) {
    out << "correlation," << row.lifter << "," << to_string(row.opt_level) << "," << row.metric
        << "," << row.n_pass << "," << row.n_fail << ",";
    if (row.result) {
      out << fmt("%.6f", row.result->pass_mean) << "," << fmt("%.6f", row.result->fail_mean) << ","
          << fmt("%.6f", row.result->r) << "," << fmt("%.6g", row.result->p_value) << ","
          << significance_stars(row.result->p_value) << "\n";
    } else {
      out << "n/a,n/a,n/a,n/a,\n";
    }
  }
  return out.str();
}

}  // namespace liftcheck

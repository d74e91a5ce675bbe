#include "liftcheck/record.hpp"

#include <stdexcept>

namespace liftcheck {

using nlohmann::json;

std::string_view to_string(Terminal t) {
  switch (t) {
    case Terminal::LiftError: return "LiftError";
    case Terminal::CompileError: return "CompileError";
    case Terminal::RuntimeError: return "RuntimeError";
    case Terminal::Timeout: return "Timeout";
    case Terminal::ChecksumMismatch: return "ChecksumMismatch";
    case Terminal::ChecksumMatch: return "ChecksumMatch";
    case Terminal::InfrastructureError: return "InfrastructureError";
  }
  return "InfrastructureError";
}

Terminal parse_terminal(std::string_view s) {
  for (auto t : {Terminal::LiftError, Terminal::CompileError, Terminal::RuntimeError,
                 Terminal::Timeout, Terminal::ChecksumMismatch, Terminal::ChecksumMatch,
                 Terminal::InfrastructureError})
    if (to_string(t) == s) return t;
  throw std::invalid_argument("unknown outcome: " + std::string(s));
}

std::string record_key(std::string_view program_id, std::string_view lifter, OptLevel opt) {
  std::string k(program_id);
  k += '|';
  k += lifter;
  k += '|';
  k += to_string(opt);
  return k;
}

std::string EvaluationRecord::key() const {
  return record_key(program_id, lifter_name, opt_level);
}

bool EvaluationRecord::executed() const {
  switch (outcome.terminal) {
    case Terminal::RuntimeError:
    case Terminal::Timeout:
    case Terminal::ChecksumMismatch:
    case Terminal::ChecksumMatch:
      return true;
    default:
      return false;
  }
}

json to_json(const EvaluationRecord& r) {
  json j{{"program_id", r.program_id},
         {"lifter", r.lifter_name},
         {"opt_level", to_string(r.opt_level)},
         {"outcome", to_string(r.outcome.terminal)},
         {"detail", r.outcome.detail},
         {"reference_checksum", r.reference_checksum}};
  if (r.lifted_checksum) j["lifted_checksum"] = *r.lifted_checksum;
  if (r.similarity)
    j["similarity"] = {{"bleu1", r.similarity->bleu1},
                       {"bleu4", r.similarity->bleu4},
                       {"codebleu", r.similarity->codebleu}};
  json t = json::object();
  if (r.timings.lift_ms) t["lift"] = *r.timings.lift_ms;
  if (r.timings.compile_ms) t["compile"] = *r.timings.compile_ms;
  if (r.timings.execute_ms) t["execute"] = *r.timings.execute_ms;
  j["timings_ms"] = std::move(t);
  return j;
}

EvaluationRecord record_from_json(const json& j) {
  EvaluationRecord r;
  r.program_id = j.at("program_id").get<std::string>();
  r.lifter_name = j.at("lifter").get<std::string>();
  r.opt_level = parse_opt_level(j.at("opt_level").get<std::string>());
  r.outcome.terminal = parse_terminal(j.at("outcome").get<std::string>());
  r.outcome.detail = j.value("detail", "");
  r.reference_checksum = j.at("reference_checksum").get<std::uint32_t>();
  if (j.contains("lifted_checksum")) r.lifted_checksum = j.at("lifted_checksum").get<std::uint32_t>();
  if (j.contains("similarity")) {
    const auto& s = j.at("similarity");
    r.similarity = SimilarityScores{s.at("bleu1").get<double>(), s.at("bleu4").get<double>(),
                                    s.at("codebleu").get<double>()};
  }
  if (j.contains("timings_ms")) {
    const auto& t = j.at("timings_ms");
    if (t.contains("lift")) r.timings.lift_ms = t.at("lift").get<double>();
    if (t.contains("compile")) r.timings.compile_ms = t.at("compile").get<double>();
    if (t.contains("execute")) r.timings.execute_ms = t.at("execute").get<double>();
  }
  return r;
}

}  // namespace liftcheck

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "liftcheck/metrics.hpp"
#include "liftcheck/toolchain.hpp"

namespace liftcheck {

// Failure taxonomy. InfrastructureError is a harness fault and is kept out of
// every taxonomy count.
enum class Terminal {
  LiftError,
  CompileError,
  RuntimeError,
  Timeout,
  ChecksumMismatch,
  ChecksumMatch,
  InfrastructureError,
};

std::string_view to_string(Terminal t);
Terminal parse_terminal(std::string_view s);

struct Outcome {
  Terminal terminal = Terminal::InfrastructureError;
  std::string detail;
};

struct StageTimings {
  std::optional<double> lift_ms;
  std::optional<double> compile_ms;
  std::optional<double> execute_ms;
};

struct EvaluationRecord {
  std::string program_id;
  std::string lifter_name;
  OptLevel opt_level = OptLevel::O0;
  Outcome outcome;
  std::uint32_t reference_checksum = 0;
  std::optional<std::uint32_t> lifted_checksum;
  std::optional<SimilarityScores> similarity;
  StageTimings timings;

  std::string key() const;
  // The lifted program compiled and ran to some end state.
  bool executed() const;
  bool passed() const { return outcome.terminal == Terminal::ChecksumMatch; }
};

std::string record_key(std::string_view program_id, std::string_view lifter, OptLevel opt);

nlohmann::json to_json(const EvaluationRecord& r);
EvaluationRecord record_from_json(const nlohmann::json& j);

}  // namespace liftcheck

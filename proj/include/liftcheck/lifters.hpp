#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "liftcheck/toolchain.hpp"

namespace liftcheck {

enum class LifterKind {
  ExternalCommand,
  HttpLlm,
  BuiltinOracle,
  BuiltinSabotage,
  BuiltinBrokenSyntax,
  BuiltinNonterminating,
};

std::string_view to_string(LifterKind k);
LifterKind parse_lifter_kind(std::string_view s);

struct ExternalCommandConfig {
  // Placeholders: {binary} {asm_in} {out}. When {out} is missing or empty
  // after the run, stdout is taken as the lifted source.
  std::string command_template;
};

struct HttpEndpointConfig {
  std::string url;  // http(s)://host:port/path
  std::string prompt_template =
      "Disassemble this x86-64 assembly into a complete LLVM-IR module that "
      "defines main:\n\n<code>{assembly}</code>";
  double temperature = 1.0;
  int max_tokens = 8192;
  std::string auth_header = "Authorization";
  std::string auth_env;  // header value read from this variable when set
  int max_retries = 2;   // transport-level retries
};

struct LifterSpec {
  std::string name;
  LifterKind kind = LifterKind::BuiltinOracle;
  std::optional<ExternalCommandConfig> command;
  std::optional<HttpEndpointConfig> endpoint;
  SourceLanguage output_language = SourceLanguage::C;
  std::chrono::milliseconds request_timeout{600000};
  int max_concurrency = 0;  // 0 = no per-lifter cap

  // Exactly the kind-specific config must be present.
  void validate() const;
};

struct LiftRequest {
  std::string program_id;
  const BinaryArtifact* binary = nullptr;
  std::string original_assembly;
  // Harness side channel, read only by the builtin lifters.
  std::string ground_truth_source;
};

struct Lifted {
  std::string source;
  SourceLanguage language = SourceLanguage::C;
  std::string note;
};

struct LiftError {
  std::string detail;
};

using LiftResult = std::variant<Lifted, LiftError>;

// Never throws for tool misbehaviour; every failure becomes LiftError.
LiftResult lift(const LifterSpec& spec, const LiftRequest& request);

struct HealthStatus {
  bool ok = true;
  std::string detail;
};

HealthStatus health_check(const LifterSpec& spec);

std::string render_prompt(const std::string& tmpl, std::string_view assembly);

// Builtin lifter transforms.
struct SabotageTarget {
  std::string global;
  std::size_t offset = 0;  // of the literal
  std::size_t length = 0;
  std::string replacement;
};
// A scalar global whose initial value reaches the CRC unchanged: either folded
// right after crc32_gentab() in main, or referenced only by its declaration
// and its transparent_crc call.
std::optional<SabotageTarget> find_sabotage_target(std::string_view source);
std::string sabotage_source(std::string_view source, const SabotageTarget& target);
std::string break_syntax(std::string_view source);
std::string make_nonterminating(std::string_view source);

}  // namespace liftcheck

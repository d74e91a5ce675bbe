#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "liftcheck/toolchain.hpp"

namespace liftcheck {

enum class GeneratorBackend { ExternalCsmith, Builtin };

std::string_view to_string(GeneratorBackend b);
GeneratorBackend parse_backend(std::string_view s);

struct GenerationConfig {
  std::uint64_t seed_start = 1;
  std::size_t program_count = 20;
  std::size_t token_budget = 8192;
  std::size_t min_statements = 20;
  GeneratorBackend backend = GeneratorBackend::Builtin;
  std::string csmith_path;
  // Directory holding csmith.h; guessed from csmith_path when empty.
  std::string csmith_include;
  std::size_t max_retries_per_slot = 8;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct TestProgram {
  std::string id;
  std::uint64_t seed = 0;
  std::string source;
  std::size_t token_count = 0;
  GeneratorBackend origin = GeneratorBackend::Builtin;
  // Checksum both O0 and O3 binaries printed during the self-check.
  std::optional<std::uint32_t> checksum;
};

class GenerationError : public std::runtime_error {
 public:
  enum class Kind { BackendUnavailable, BudgetUnsatisfiable, SelfCheckFailed };
  GenerationError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string program_id_for_seed(std::uint64_t seed);

// Whitespace-separated runs of [A-Za-z0-9_] count as one token each; every
// other non-space character is its own token.
std::size_t count_tokens(std::string_view source);

struct StatementCensus {
  std::size_t statements = 0;  // executable statements outside harness helpers
  bool has_loop = false;
  bool calls_user_function = false;  // a call to a defined function other than main
};

// Lightweight C scan: comments, strings and preprocessor lines are skipped;
// `;`-terminated statements and control keywords inside function bodies are
// counted. CRC/safe-math harness functions are excluded.
StatementCensus census(std::string_view source);

bool is_trivial(std::string_view source, std::size_t min_statements);
inline bool is_trivial(const TestProgram& p, std::size_t min_statements) {
  return is_trivial(p.source, min_statements);
}

// Pure function of (seed, size_scale). Larger scales yield longer programs.
std::string builtin_program_source(std::uint64_t seed, double size_scale = 1.0);

// Arguments passed to csmith for a given retry attempt (seed excluded).
std::vector<std::string> csmith_flags(std::size_t attempt);

// Generates, filters by budget and triviality, then runs the O0/O3 self-check.
TestProgram generate_program(const GenerationConfig& config, std::uint64_t seed,
                             const Toolchain& toolchain);

struct CorpusEvent {
  std::uint64_t seed;
  std::string reason;
};

struct Corpus {
  std::vector<TestProgram> programs;      // ordered by seed
  std::vector<CorpusEvent> rejected;      // self-check failures, skipped seeds
};

// Produces config.program_count programs starting at seed_start. Seeds whose
// self-check fails are skipped and logged through `log` and Corpus::rejected.
Corpus generate_corpus(const GenerationConfig& config,
                       const Toolchain& toolchain, int workers,
                       const std::function<void(const std::string&)>& log = {});

// prog_<seed>.c files plus manifest.json.
void write_corpus(const Corpus& corpus, const GenerationConfig& config,
                  const std::filesystem::path& dir);
// Reads a directory written by write_corpus. Returns nullopt when absent.
std::optional<Corpus> read_corpus(const std::filesystem::path& dir);

std::string sha256_hex(std::string_view data);

}  // namespace liftcheck

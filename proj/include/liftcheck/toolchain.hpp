#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "liftcheck/process.hpp"

namespace liftcheck {

enum class OptLevel { O0, O3 };

std::string_view to_string(OptLevel level);
OptLevel parse_opt_level(std::string_view s);
inline constexpr OptLevel kAllOptLevels[] = {OptLevel::O0, OptLevel::O3};

enum class SourceLanguage { C, LlvmIr };

std::string_view to_string(SourceLanguage lang);
SourceLanguage parse_language(std::string_view s);

struct ToolchainConfig {
  // Placeholders: {input} {output} {opt}
  std::string c_compile = "cc -std=gnu99 -w {opt} {input} -o {output}";
  std::string c_assembly =
      "cc -std=gnu99 -w {opt} -S -masm=intel -fno-asynchronous-unwind-tables "
      "{input} -o {output}";
  std::string ir_compile = "clang -w -Wno-override-module {opt} -x ir {input} -o {output}";
  std::string ir_assembly =
      "clang -w -Wno-override-module {opt} -x ir -S -masm=intel "
      "-fno-asynchronous-unwind-tables {input} -o {output}";
  // Added as -I<dir> after the compiler word of C templates.
  std::vector<std::string> include_dirs;
  std::chrono::milliseconds compile_timeout{60000};
  std::chrono::milliseconds run_timeout{5000};
};

// A linked executable plus the assembly of the same translation unit. Owns
// the scratch directory holding the binary.
struct BinaryArtifact {
  std::string program_id;
  OptLevel opt_level = OptLevel::O0;
  std::filesystem::path binary_path;
  std::string assembly_text;
  std::shared_ptr<TempDir> storage;
};

struct CompileError {
  std::string diagnostic;
};

struct ChecksumValue {
  std::uint32_t value = 0;
};
struct RuntimeFailure {
  std::string detail;
};
struct TimedOut {};

// Exactly one of checksum / runtime error / timeout.
using ExecutionResult = std::variant<ChecksumValue, RuntimeFailure, TimedOut>;

// Finds the unique `checksum = <hex>` line. Returns nullopt when the line is
// missing, repeated, or its value does not fit in 32 bits.
std::optional<std::uint32_t> parse_checksum(std::string_view stdout_text);
std::string format_checksum(std::uint32_t value);

class Toolchain {
 public:
  explicit Toolchain(ToolchainConfig config = {});

  const ToolchainConfig& config() const { return config_; }

  std::variant<BinaryArtifact, CompileError> compile(
      const std::string& source, OptLevel opt, SourceLanguage lang,
      const std::string& program_id = {}) const;

  std::variant<std::string, CompileError> emit_assembly(
      const std::string& source, OptLevel opt, SourceLanguage lang) const;

  ExecutionResult execute(const BinaryArtifact& artifact,
                          std::optional<std::chrono::milliseconds> timeout =
                              std::nullopt) const;

  // Runs `compiler --version` for each template's compiler word.
  std::string version_info() const;

 private:
  std::vector<std::string> command(const std::string& tmpl,
                                   SourceLanguage lang, OptLevel opt,
                                   const std::string& input,
                                   const std::string& output) const;

  ToolchainConfig config_;
};

}  // namespace liftcheck

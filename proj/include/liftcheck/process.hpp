#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace liftcheck {

// Result of one child process. Exactly one of {exited, signaled, timed_out}
// describes termination.
struct ProcessResult {
  bool timed_out = false;
  std::optional<int> exit_code;
  std::optional<int> term_signal;
  std::string out;
  std::string err;

  bool ok() const { return !timed_out && exit_code && *exit_code == 0; }
  std::string describe() const;
};

struct ProcessOptions {
  std::filesystem::path cwd;
  std::chrono::milliseconds timeout{0};  // 0 = unbounded
  // When set, the child sees only these variables.
  std::optional<std::map<std::string, std::string>> env;
  std::size_t output_limit = 64u << 20;
};

// Runs argv[0] (PATH-resolved) with stdin closed. The child is placed in its
// own process group; on timeout the whole group is killed.
ProcessResult run_process(const std::vector<std::string>& argv,
                          const ProcessOptions& opts = {});

// Splits a command template on whitespace and replaces every `{key}` in each
// word. No shell is involved.
std::vector<std::string> expand_template(
    const std::string& tmpl, const std::map<std::string, std::string>& vars);

// PATH lookup; absolute or relative paths containing '/' are checked as-is.
std::optional<std::filesystem::path> find_executable(const std::string& name);

// Private scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "liftcheck");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& content);

// Minimal environment handed to executed programs.
std::map<std::string, std::string> minimal_env();

}  // namespace liftcheck

#include "liftcheck/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

extern char** environ;

namespace liftcheck {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void throw_errno(const std::string& what) {
  throw std::system_error(errno, std::generic_category(), what);
}

struct Pipe {
  int fds[2] = {-1, -1};
  Pipe() {
    if (::pipe2(fds, O_CLOEXEC) != 0) throw_errno("pipe2");
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  void close_read() {
    if (fds[0] >= 0) ::close(fds[0]);
    fds[0] = -1;
  }
  void close_write() {
    if (fds[1] >= 0) ::close(fds[1]);
    fds[1] = -1;
  }
};

}  // namespace

std::string ProcessResult::describe() const {
  if (timed_out) return "timeout";
  if (term_signal) return "killed by signal " + std::to_string(*term_signal) +
                          " (" + ::strsignal(*term_signal) + ")";
  if (exit_code) return "exit code " + std::to_string(*exit_code);
  return "unknown termination";
}

std::optional<fs::path> find_executable(const std::string& name) {
  if (name.empty()) return std::nullopt;
  auto is_exec = [](const fs::path& p) {
    std::error_code ec;
    return fs::is_regular_file(p, ec) && ::access(p.c_str(), X_OK) == 0;
  };
  if (name.find('/') != std::string::npos) {
    if (is_exec(name)) return fs::path(name);
    return std::nullopt;
  }
  const char* path_env = std::getenv("PATH");
  std::stringstream dirs(path_env ? path_env : "/usr/local/bin:/usr/bin:/bin");
  std::string dir;
  while (std::getline(dirs, dir, ':')) {
    if (dir.empty()) dir = ".";
    fs::path candidate = fs::path(dir) / name;
    if (is_exec(candidate)) return candidate;
  }
  return std::nullopt;
}

std::map<std::string, std::string> minimal_env() {
  std::map<std::string, std::string> env;
  env["PATH"] = "/usr/local/bin:/usr/bin:/bin";
  env["LANG"] = "C";
  env["LC_ALL"] = "C";
  return env;
}

ProcessResult run_process(const std::vector<std::string>& argv,
                          const ProcessOptions& opts) {
  if (argv.empty()) throw std::invalid_argument("run_process: empty argv");

  ProcessResult result;
  auto exe = find_executable(argv[0]);
  if (!exe) {
    result.exit_code = 127;
    result.err = "executable not found: " + argv[0];
    return result;
  }

  // Everything the child touches is prepared before fork.
  std::vector<char*> cargv;
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);

  std::vector<std::string> env_storage;
  std::vector<char*> cenv;
  char** envp = environ;
  if (opts.env) {
    for (const auto& [k, v] : *opts.env) env_storage.push_back(k + "=" + v);
    for (auto& e : env_storage) cenv.push_back(e.data());
    cenv.push_back(nullptr);
    envp = cenv.data();
  }
  const std::string exe_path = exe->string();
  const std::string cwd = opts.cwd.string();

  Pipe out_pipe, err_pipe;
  const pid_t pid = ::fork();
  if (pid < 0) throw_errno("fork");
  if (pid == 0) {
    ::setpgid(0, 0);
    int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) {
      ::dup2(devnull, STDIN_FILENO);
      ::close(devnull);
    } else {
      ::close(STDIN_FILENO);
    }
    ::dup2(out_pipe.fds[1], STDOUT_FILENO);
    ::dup2(err_pipe.fds[1], STDERR_FILENO);
    if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) ::_exit(126);
    ::execve(exe_path.c_str(), cargv.data(), envp);
    ::_exit(127);
  }
  // Racing the child's own setpgid is harmless; one of the two wins.
  ::setpgid(pid, pid);
  out_pipe.close_write();
  err_pipe.close_write();

  using clock = std::chrono::steady_clock;
  const auto deadline = clock::now() + opts.timeout;
  const bool bounded = opts.timeout.count() > 0;

  std::array<pollfd, 2> fds{{{out_pipe.fds[0], POLLIN, 0},
                             {err_pipe.fds[0], POLLIN, 0}}};
  std::array<std::string*, 2> sinks{&result.out, &result.err};
  int open_fds = 2;
  char buf[8192];
  while (open_fds > 0) {
    int wait_ms = -1;
    if (bounded) {
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - clock::now());
      if (left.count() <= 0) {
        result.timed_out = true;
        break;
      }
      wait_ms = static_cast<int>(left.count());
    }
    int rc = ::poll(fds.data(), fds.size(), wait_ms);
    if (rc < 0) {
      if (errno == EINTR) continue;
      ::kill(-pid, SIGKILL);
      ::waitpid(pid, nullptr, 0);
      throw_errno("poll");
    }
    if (rc == 0) continue;  // deadline re-checked at loop head
    for (std::size_t i = 0; i < fds.size(); ++i) {
      if (fds[i].fd < 0 || fds[i].revents == 0) continue;
      ssize_t n = ::read(fds[i].fd, buf, sizeof buf);
      if (n > 0) {
        if (sinks[i]->size() < opts.output_limit) sinks[i]->append(buf, n);
      } else if (n == 0 || (n < 0 && errno != EINTR && errno != EAGAIN)) {
        fds[i].fd = -1;
        --open_fds;
      }
    }
  }

  int status = 0;
  if (result.timed_out) {
    ::kill(-pid, SIGKILL);
    ::waitpid(pid, &status, 0);
    return result;
  }

  // Pipes closed; the child may still be running (e.g. it closed stdout).
  for (;;) {
    pid_t w = ::waitpid(pid, &status, bounded ? WNOHANG : 0);
    if (w == pid) break;
    if (w < 0 && errno != EINTR) throw_errno("waitpid");
    if (bounded && clock::now() >= deadline) {
      result.timed_out = true;
      ::kill(-pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      return result;
    }
    if (bounded) ::usleep(1000);
  }
  // Reap stragglers left in the group.
  ::kill(-pid, SIGKILL);

  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  if (WIFSIGNALED(status)) result.term_signal = WTERMSIG(status);
  return result;
}

std::vector<std::string> expand_template(
    const std::string& tmpl, const std::map<std::string, std::string>& vars) {
  std::vector<std::string> words;
  std::istringstream in(tmpl);
  std::string word;
  while (in >> word) {
    for (const auto& [key, value] : vars) {
      const std::string needle = "{" + key + "}";
      for (std::size_t pos = word.find(needle); pos != std::string::npos;
           pos = word.find(needle, pos + value.size())) {
        word.replace(pos, needle.size(), value);
      }
    }
    // A placeholder expanding to nothing (e.g. an empty {opt}) drops the word.
    if (!word.empty()) words.push_back(word);
  }
  return words;
}

TempDir::TempDir(const std::string& prefix) {
  fs::path base = fs::temp_directory_path();
  std::string pattern = (base / (prefix + "-XXXXXX")).string();
  if (::mkdtemp(pattern.data()) == nullptr) throw_errno("mkdtemp");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
  if (!out) throw std::runtime_error("short write to " + p.string());
}

}  // namespace liftcheck

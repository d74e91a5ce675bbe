#include <gtest/gtest.h>

#include <chrono>
#include <csignal>

#include "liftcheck/process.hpp"

using namespace liftcheck;

TEST(Process, CapturesOutputAndExitCode) {
  auto r = run_process({"sh", "-c", "echo out; echo err >&2; exit 3"});
  EXPECT_EQ(r.out, "out\n");
  EXPECT_EQ(r.err, "err\n");
  ASSERT_TRUE(r.exit_code);
  EXPECT_EQ(*r.exit_code, 3);
  EXPECT_FALSE(r.ok());
}

TEST(Process, ReportsSignal) {
  auto r = run_process({"sh", "-c", "kill -SEGV $$"});
  ASSERT_TRUE(r.term_signal);
  EXPECT_EQ(*r.term_signal, SIGSEGV);
  EXPECT_FALSE(r.exit_code);
}

TEST(Process, TimeoutKillsProcessGroup) {
  const auto t0 = std::chrono::steady_clock::now();
  // The grandchild keeps the pipe open; only a group kill ends the wait.
  auto r = run_process({"sh", "-c", "sleep 30 & sleep 30"}, {.timeout = std::chrono::milliseconds(300)});
  const auto dt = std::chrono::steady_clock::now() - t0;
  EXPECT_TRUE(r.timed_out);
  EXPECT_LT(dt, std::chrono::seconds(5));
}

TEST(Process, MissingExecutable) {
  auto r = run_process({"/nonexistent/tool"});
  ASSERT_TRUE(r.exit_code);
  EXPECT_EQ(*r.exit_code, 127);
}

TEST(Process, StdinIsEmpty) {
  auto r = run_process({"cat"}, {.timeout = std::chrono::milliseconds(5000)});
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.out, "");
}

TEST(Process, EnvironmentIsReplaced) {
  ProcessOptions opts;
  opts.env = std::map<std::string, std::string>{{"ONLY", "1"}, {"PATH", "/usr/bin:/bin"}};
  auto r = run_process({"sh", "-c", "echo ${ONLY}${HOME}"}, opts);
  EXPECT_EQ(r.out, "1\n");
}

TEST(Process, ExpandTemplate) {
  auto argv = expand_template("cc {opt} {input} -o {output} {extra}",
                              {{"opt", "-O3"}, {"input", "a.c"}, {"output", "a.out"}, {"extra", ""}});
  EXPECT_EQ(argv, (std::vector<std::string>{"cc", "-O3", "a.c", "-o", "a.out"}));
  EXPECT_EQ(expand_template("tool --in={input}", {{"input", "x y"}}),
            (std::vector<std::string>{"tool", "--in=x y"}));
}

TEST(Process, TempDirIsRemoved) {
  std::filesystem::path p;
  {
    TempDir d("unit");
    p = d.path();
    write_file(p / "f.txt", "hello");
    EXPECT_EQ(read_file(p / "f.txt"), "hello");
  }
  EXPECT_FALSE(std::filesystem::exists(p));
}

TEST(Process, FindExecutable) {
  EXPECT_TRUE(find_executable("sh"));
  EXPECT_FALSE(find_executable("definitely-not-a-tool-xyz"));
}

#include <gtest/gtest.h>

#include "liftcheck/config.hpp"

using namespace liftcheck;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

const char* kLifters = R"("lifters": [{"name": "o", "kind": "builtin_oracle"}])";

}  // namespace

TEST(Config, FullDocument) {
  const auto cfg = parse_run_config(R"({
    "generator": {"seed_start": 100, "program_count": 7, "token_budget": 4000, "backend": "builtin"},
    "toolchain": {"run_timeout_secs": 2.5, "include_dirs": ["/opt/inc"]},
    "lifters": [
      {"name": "llm", "kind": "http_llm", "output_language": "llvm-ir",
       "max_concurrency": 2,
       "endpoint": {"url": "http://localhost:8000/v1/complete", "auth_env": "TOKEN", "max_retries": 4}},
      {"name": "ext", "kind": "external_command", "command": "mctoll {binary} -o {out}"}
    ],
    "metrics": {"normalization": "raw", "codebleu_weights": [0.1, 0.2, 0.3, 0.4]},
    "pipeline": {"opt_levels": ["O3"], "workers": 3}
  })");
  EXPECT_EQ(cfg.generator.seed_start, 100u);
  EXPECT_EQ(cfg.generator.program_count, 7u);
  EXPECT_EQ(cfg.toolchain.run_timeout.count(), 2500);
  EXPECT_EQ(cfg.toolchain.include_dirs.size(), 1u);
  ASSERT_EQ(cfg.lifters.size(), 2u);
  EXPECT_EQ(cfg.lifters[0].kind, LifterKind::HttpLlm);
  EXPECT_EQ(cfg.lifters[0].output_language, SourceLanguage::LlvmIr);
  EXPECT_EQ(cfg.lifters[0].endpoint->max_retries, 4);
  EXPECT_EQ(cfg.lifters[0].max_concurrency, 2);
  EXPECT_EQ(cfg.lifters[1].command->command_template, "mctoll {binary} -o {out}");
  EXPECT_EQ(cfg.metrics.normalization, Normalization::Raw);
  EXPECT_DOUBLE_EQ(cfg.metrics.weights.dataflow, 0.4);
  EXPECT_EQ(cfg.opt_levels, std::vector<OptLevel>{OptLevel::O3});
  EXPECT_EQ(cfg.workers, 3);
}

TEST(Config, Defaults) {
  const auto cfg = parse_run_config(std::string("{") + kLifters + "}");
  EXPECT_EQ(cfg.generator.token_budget, 8192u);
  EXPECT_EQ(cfg.toolchain.run_timeout.count(), 5000);
  EXPECT_EQ(cfg.opt_levels.size(), 2u);
  EXPECT_EQ(cfg.metrics.normalization, Normalization::Normalized);
}

TEST(Config, SyntaxErrorReportsLine) {
  const auto msg = error_of("{\n  \"generator\": {\n    \"seed_start\": ,\n  }\n}");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(Config, FieldErrorsNamePath) {
  EXPECT_NE(error_of(std::string(R"({"generator": {"token_budget": 0}, )") + kLifters + "}")
                .find("generator.token_budget"),
            std::string::npos);
  EXPECT_NE(error_of(std::string(R"({"generator": {"token_budgit": 5}, )") + kLifters + "}")
                .find("generator.token_budgit: unknown field"),
            std::string::npos);
  EXPECT_NE(error_of(std::string(R"({"generator": {"seed_start": "one"}, )") + kLifters + "}")
                .find("generator.seed_start: wrong type"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"lifters": [{"name": "x", "kind": "warp"}]})").find("lifters[0].kind"),
            std::string::npos);
  EXPECT_NE(error_of(std::string(R"({"metrics": {"codebleu_weights": [1, 1, 0, 0]}, )") + kLifters + "}")
                .find("metrics.codebleu_weights"),
            std::string::npos);
  EXPECT_NE(error_of(std::string(R"({"pipeline": {"opt_levels": ["O2"]}, )") + kLifters + "}")
                .find("pipeline.opt_levels"),
            std::string::npos);
}

TEST(Config, LifterRules) {
  EXPECT_NE(error_of("{}").find("at least one lifter"), std::string::npos);
  EXPECT_NE(error_of(R"({"lifters": [{"name": "a", "kind": "builtin_oracle"},
                                     {"name": "a", "kind": "builtin_sabotage"}]})")
                .find("duplicate"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"lifters": [{"name": "a", "kind": "http_llm"}]})").find("lifters[0]"),
            std::string::npos);
}

TEST(Config, JsonExcludesSecretValues) {
  ::setenv("LIFTCHECK_SECRET", "s3cr3t", 1);
  auto cfg = parse_run_config(R"({"lifters": [{"name": "llm", "kind": "http_llm",
      "endpoint": {"url": "http://h/x", "auth_env": "LIFTCHECK_SECRET"}}]})");
  const auto text = to_json(cfg).dump();
  EXPECT_EQ(text.find("s3cr3t"), std::string::npos);
  EXPECT_NE(text.find("LIFTCHECK_SECRET"), std::string::npos);
  ::unsetenv("LIFTCHECK_SECRET");
  // The dump parses back to an equivalent config.
  EXPECT_EQ(to_json(parse_run_config(text)).dump(), text);
}

TEST(Config, SelftestProfile) {
  const auto cfg = selftest_config();
  EXPECT_EQ(cfg.generator.program_count, 20u);
  EXPECT_EQ(cfg.lifters.size(), 4u);
  EXPECT_NO_THROW(cfg.validate());
}

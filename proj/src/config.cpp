#include "liftcheck/config.hpp"

#include <omp.h>

#include <set>

#include "liftcheck/process.hpp"

namespace liftcheck {

using nlohmann::json;

namespace {

// Typed field access with path-qualified diagnostics and unknown-key checks.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(field(key) + ": wrong type (" + j_.at(key).dump() + ")");
    }
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (const auto& [key, _] : j_.items())
      if (!seen_.count(key)) throw ConfigError(field(key) + ": unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Fn>
auto checked(const std::string& field, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(field + ": " + e.what());
  }
}

std::chrono::milliseconds seconds(double s) {
  return std::chrono::milliseconds(static_cast<long long>(s * 1000.0));
}

LifterSpec parse_lifter(const json& j, const std::string& path) {
  Section s(j, path);
  LifterSpec spec;
  spec.name = s.get<std::string>("name", "");
  spec.kind = checked(s.field("kind"), [&] { return parse_lifter_kind(s.get<std::string>("kind", "")); });
  spec.output_language = checked(s.field("output_language"), [&] {
    return parse_language(s.get<std::string>("output_language", "c"));
  });
  spec.request_timeout = seconds(s.get<double>("request_timeout_secs", 600.0));
  spec.max_concurrency = s.get<int>("max_concurrency", 0);
  if (s.has("command")) spec.command = ExternalCommandConfig{s.get<std::string>("command", "")};
  if (s.has("endpoint")) {
    Section e(s.raw("endpoint"), s.field("endpoint"));
    HttpEndpointConfig cfg;
    cfg.url = e.get<std::string>("url", "");
    cfg.prompt_template = e.get<std::string>("prompt_template", cfg.prompt_template);
    cfg.temperature = e.get<double>("temperature", cfg.temperature);
    cfg.max_tokens = e.get<int>("max_tokens", cfg.max_tokens);
    cfg.auth_header = e.get<std::string>("auth_header", cfg.auth_header);
    cfg.auth_env = e.get<std::string>("auth_env", cfg.auth_env);
    cfg.max_retries = e.get<int>("max_retries", cfg.max_retries);
    e.finish();
    if (cfg.max_tokens <= 0) throw ConfigError(e.field("max_tokens") + ": must be > 0");
    if (cfg.max_retries < 0) throw ConfigError(e.field("max_retries") + ": must be >= 0");
    spec.endpoint = cfg;
  }
  s.finish();
  if (spec.max_concurrency < 0) throw ConfigError(s.field("max_concurrency") + ": must be >= 0");
  checked(path, [&] {
    spec.validate();
    return 0;
  });
  return spec;
}

}  // namespace

int default_workers() { return std::max(1, omp_get_num_procs()); }

void RunConfig::validate() const {
  checked("generator", [&] {
    generator.validate();
    return 0;
  });
  if (lifters.empty()) throw ConfigError("lifters: at least one lifter is required");
  std::set<std::string> names;
  for (const auto& l : lifters) {
    checked("lifters", [&] {
      l.validate();
      return 0;
    });
    if (!names.insert(l.name).second)
      throw ConfigError("lifters: duplicate lifter name '" + l.name + "'");
    if (l.name.find('|') != std::string::npos)
      throw ConfigError("lifters: name '" + l.name + "' must not contain '|'");
  }
  checked("metrics.codebleu_weights", [&] {
    metrics.weights.validate();
    return 0;
  });
  if (opt_levels.empty()) throw ConfigError("pipeline.opt_levels: must not be empty");
  if (workers < 0) throw ConfigError("pipeline.workers: must be >= 0");
  if (toolchain.run_timeout.count() <= 0)
    throw ConfigError("toolchain.run_timeout_secs: must be > 0");
}

RunConfig parse_run_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line:column.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("config parse error at line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": " + e.what());
  }

  RunConfig cfg;
  Section top(root, "");

  if (top.has("generator")) {
    Section g(top.raw("generator"), "generator");
    auto& gc = cfg.generator;
    gc.seed_start = g.get<std::uint64_t>("seed_start", gc.seed_start);
    gc.program_count = g.get<std::size_t>("program_count", gc.program_count);
    gc.token_budget = g.get<std::size_t>("token_budget", gc.token_budget);
    gc.min_statements = g.get<std::size_t>("min_statements", gc.min_statements);
    gc.backend = checked(g.field("backend"), [&] {
      return parse_backend(g.get<std::string>("backend", std::string(to_string(gc.backend))));
    });
    gc.csmith_path = g.get<std::string>("csmith_path", gc.csmith_path);
    gc.csmith_include = g.get<std::string>("csmith_include", gc.csmith_include);
    gc.max_retries_per_slot = g.get<std::size_t>("max_retries_per_slot", gc.max_retries_per_slot);
    g.finish();
  }

  if (top.has("toolchain")) {
    Section t(top.raw("toolchain"), "toolchain");
    auto& tc = cfg.toolchain;
    tc.c_compile = t.get<std::string>("c_compile", tc.c_compile);
    tc.c_assembly = t.get<std::string>("c_assembly", tc.c_assembly);
    tc.ir_compile = t.get<std::string>("ir_compile", tc.ir_compile);
    tc.ir_assembly = t.get<std::string>("ir_assembly", tc.ir_assembly);
    tc.include_dirs = t.get<std::vector<std::string>>("include_dirs", tc.include_dirs);
    tc.compile_timeout = seconds(t.get<double>("compile_timeout_secs", 60.0));
    tc.run_timeout = seconds(t.get<double>("run_timeout_secs", 5.0));
    t.finish();
  }

  if (top.has("lifters")) {
    const auto& arr = top.raw("lifters");
    if (!arr.is_array()) throw ConfigError("lifters: expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
      cfg.lifters.push_back(parse_lifter(arr[i], "lifters[" + std::to_string(i) + "]"));
  }

  if (top.has("metrics")) {
    Section m(top.raw("metrics"), "metrics");
    cfg.metrics.normalization = checked(m.field("normalization"), [&] {
      return parse_normalization(m.get<std::string>("normalization", "normalized"));
    });
    if (m.has("codebleu_weights")) {
      auto w = m.get<std::vector<double>>("codebleu_weights", {});
      if (w.size() != 4) throw ConfigError("metrics.codebleu_weights: expected 4 numbers");
      cfg.metrics.weights = {w[0], w[1], w[2], w[3]};
    }
    m.finish();
  }

  if (top.has("pipeline")) {
    Section p(top.raw("pipeline"), "pipeline");
    if (p.has("opt_levels")) {
      cfg.opt_levels.clear();
      for (const auto& s : p.get<std::vector<std::string>>("opt_levels", {}))
        cfg.opt_levels.push_back(checked(p.field("opt_levels"), [&] { return parse_opt_level(s); }));
    }
    cfg.workers = p.get<int>("workers", cfg.workers);
    p.finish();
  }
  top.finish();

  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return parse_run_config(text);
}

json to_json(const RunConfig& c) {
  json lifters = json::array();
  for (const auto& l : c.lifters) {
    json j{{"name", l.name},
           {"kind", to_string(l.kind)},
           {"output_language", to_string(l.output_language)},
           {"request_timeout_secs", l.request_timeout.count() / 1000.0},
           {"max_concurrency", l.max_concurrency}};
    if (l.command) j["command"] = l.command->command_template;
    if (l.endpoint)
      j["endpoint"] = {{"url", l.endpoint->url},
                       {"prompt_template", l.endpoint->prompt_template},
                       {"temperature", l.endpoint->temperature},
                       {"max_tokens", l.endpoint->max_tokens},
                       {"auth_header", l.endpoint->auth_header},
                       {"auth_env", l.endpoint->auth_env},
                       {"max_retries", l.endpoint->max_retries}};
    lifters.push_back(std::move(j));
  }
  std::vector<std::string> levels;
  for (auto o : c.opt_levels) levels.emplace_back(to_string(o));
  const auto& g = c.generator;
  const auto& t = c.toolchain;
  const auto& w = c.metrics.weights;
  return json{
      {"generator",
       {{"seed_start", g.seed_start},
        {"program_count", g.program_count},
        {"token_budget", g.token_budget},
        {"min_statements", g.min_statements},
        {"backend", to_string(g.backend)},
        {"csmith_path", g.csmith_path},
        {"csmith_include", g.csmith_include},
        {"max_retries_per_slot", g.max_retries_per_slot}}},
      {"toolchain",
       {{"c_compile", t.c_compile},
        {"c_assembly", t.c_assembly},
        {"ir_compile", t.ir_compile},
        {"ir_assembly", t.ir_assembly},
        {"include_dirs", t.include_dirs},
        {"compile_timeout_secs", t.compile_timeout.count() / 1000.0},
        {"run_timeout_secs", t.run_timeout.count() / 1000.0}}},
      {"lifters", std::move(lifters)},
      {"metrics",
       {{"normalization", to_string(c.metrics.normalization)},
        {"codebleu_weights", {w.ngram, w.weighted_ngram, w.syntax, w.dataflow}}}},
      {"pipeline", {{"opt_levels", levels}, {"workers", c.workers}}}};
}

RunConfig selftest_config(std::size_t program_count) {
  RunConfig cfg;
  cfg.generator.program_count = program_count;
  cfg.generator.backend = GeneratorBackend::Builtin;
  cfg.toolchain.run_timeout = std::chrono::milliseconds(1000);
  for (auto [name, kind] : {std::pair{"oracle", LifterKind::BuiltinOracle},
                            std::pair{"sabotage", LifterKind::BuiltinSabotage},
                            std::pair{"broken_syntax", LifterKind::BuiltinBrokenSyntax},
                            std::pair{"nonterminating", LifterKind::BuiltinNonterminating}}) {
    LifterSpec spec;
    spec.name = name;
    spec.kind = kind;
    cfg.lifters.push_back(spec);
  }
  return cfg;
}

}  // namespace liftcheck

#include "liftcheck/lifters.hpp"

#include <cstdlib>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace liftcheck {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(LifterKind k) {
  switch (k) {
    case LifterKind::ExternalCommand: return "external_command";
    case LifterKind::HttpLlm: return "http_llm";
    case LifterKind::BuiltinOracle: return "builtin_oracle";
    case LifterKind::BuiltinSabotage: return "builtin_sabotage";
    case LifterKind::BuiltinBrokenSyntax: return "builtin_broken_syntax";
    case LifterKind::BuiltinNonterminating: return "builtin_nonterminating";
  }
  return "unknown";
}

LifterKind parse_lifter_kind(std::string_view s) {
  for (auto k : {LifterKind::ExternalCommand, LifterKind::HttpLlm, LifterKind::BuiltinOracle,
                 LifterKind::BuiltinSabotage, LifterKind::BuiltinBrokenSyntax,
                 LifterKind::BuiltinNonterminating})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown lifter kind: " + std::string(s));
}

void LifterSpec::validate() const {
  const std::string where = "lifter '" + name + "'";
  if (name.empty()) throw std::invalid_argument("lifters[].name: must be non-empty");
  switch (kind) {
    case LifterKind::ExternalCommand:
      if (!command || command->command_template.empty() || endpoint)
        throw std::invalid_argument(where + ": external_command needs only a command template");
      break;
    case LifterKind::HttpLlm:
      if (!endpoint || endpoint->url.empty() || command)
        throw std::invalid_argument(where + ": http_llm needs only an endpoint url");
      if (endpoint->prompt_template.find("{assembly}") == std::string::npos)
        throw std::invalid_argument(where + ": prompt template lacks {assembly}");
      break;
    default:
      if (command || endpoint)
        throw std::invalid_argument(where + ": builtin lifters take no command or endpoint");
  }
  if (request_timeout.count() <= 0)
    throw std::invalid_argument(where + ": request_timeout must be positive");
}

std::string render_prompt(const std::string& tmpl, std::string_view assembly) {
  std::string out = tmpl;
  const std::string key = "{assembly}";
  for (auto pos = out.find(key); pos != std::string::npos;
       pos = out.find(key, pos + assembly.size()))
    out.replace(pos, key.size(), assembly);
  return out;
}

// ---------------------------------------------------------------------------
// Builtin transforms

std::optional<SabotageTarget> find_sabotage_target(std::string_view source) {
  static const std::regex decl_re(
      R"(^static\s+(?:const\s+)?(?:volatile\s+)?[A-Za-z_][A-Za-z0-9_ ]*?\b(g_\d+)\s*=\s*\(?(0x[0-9A-Fa-f]+|\d+)[uUlL]*\)?\s*;)");
  const std::string src(source);

  // Globals folded into the CRC immediately after the table is built.
  std::set<std::string> folded_first;
  if (auto at = src.find("crc32_gentab();\n"); at != std::string::npos) {
    std::istringstream rest(src.substr(at + 16));
    std::string line;
    static const std::regex fold_re(R"(^\s*transparent_crc\((g_\d+)\);\s*$)");
    while (std::getline(rest, line)) {
      std::smatch m;
      if (!std::regex_match(line, m, fold_re)) break;
      folded_first.insert(m[1]);
    }
  }

  std::size_t line_begin = 0;
  while (line_begin < src.size()) {
    auto line_end = src.find('\n', line_begin);
    if (line_end == std::string::npos) line_end = src.size();
    const std::string line = src.substr(line_begin, line_end - line_begin);
    std::smatch m;
    if (std::regex_search(line, m, decl_re)) {
      const std::string global = m[1];
      bool eligible = folded_first.count(global) > 0;
      if (!eligible) {
        const std::regex use_re("\\b" + global + "\\b");
        const auto uses = std::distance(std::sregex_iterator(src.begin(), src.end(), use_re),
                                        std::sregex_iterator());
        eligible = uses == 2 && src.find("transparent_crc(" + global + ",") != std::string::npos;
      }
      if (eligible) {
        const std::string literal = m[2];
        const bool hex = literal.size() > 1 && (literal[1] == 'x' || literal[1] == 'X');
        const unsigned long long v = std::stoull(literal, nullptr, hex ? 16 : 10);
        std::ostringstream rep;
        if (hex) rep << "0x" << std::uppercase << std::hex << (v ^ 1ull);
        else rep << (v ^ 1ull);
        SabotageTarget t;
        t.global = global;
        t.offset = line_begin + static_cast<std::size_t>(m.position(2));
        t.length = literal.size();
        t.replacement = rep.str();
        return t;
      }
    }
    line_begin = line_end + 1;
  }
  return std::nullopt;
}

std::string sabotage_source(std::string_view source, const SabotageTarget& target) {
  std::string out(source);
  out.replace(target.offset, target.length, target.replacement);
  return out;
}

std::string break_syntax(std::string_view source) {
  std::string out(source);
  auto pos = out.rfind('}');
  if (pos == std::string::npos) return out + "\nint main( {\n";
  out.replace(pos, 1, "@ /* unterminated */");
  return out;
}

std::string make_nonterminating(std::string_view source) {
  static const std::regex main_re(R"(int\s+main\s*\([^)]*\)\s*\{)");
  static const char* spin = "\n    { volatile unsigned int spin_ = 0u; for (;;) spin_++; }\n";
  const std::string src(source);
  std::smatch m;
  if (!std::regex_search(src, m, main_re))
    return std::string("int main(void)\n{") + spin + "}\n";
  const auto insert_at = static_cast<std::size_t>(m.position(0) + m.length(0));
  return src.substr(0, insert_at) + spin + src.substr(insert_at);
}

// ---------------------------------------------------------------------------
// HTTP adapter

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

std::optional<ParsedUrl> parse_url(const std::string& url) {
  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, url_re)) return std::nullopt;
  return ParsedUrl{m[1], m[2].matched ? m[2].str() : std::string("/")};
}

struct HttpOutcome {
  bool transport_ok = false;
  int status = 0;
  std::string body;
  std::string error;
};

HttpOutcome post_json(const HttpEndpointConfig& cfg, std::chrono::milliseconds timeout,
                      const json& payload) {
  HttpOutcome out;
  auto url = parse_url(cfg.url);
  if (!url) {
    out.error = "malformed endpoint url: " + cfg.url;
    return out;
  }
  httplib::Client cli(url->origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout).count();
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout).count() % 1000000;
  cli.set_connection_timeout(std::min<long>(secs, 10), usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!cfg.auth_env.empty()) {
    if (const char* v = std::getenv(cfg.auth_env.c_str())) headers.emplace(cfg.auth_header, v);
  }
  auto res = cli.Post(url->path, headers, payload.dump(), "application/json");
  if (!res) {
    out.error = "transport error: " + httplib::to_string(res.error());
    return out;
  }
  out.transport_ok = true;
  out.status = res->status;
  out.body = res->body;
  return out;
}

bool retryable(const HttpOutcome& o) {
  return !o.transport_ok || o.status == 429 || o.status >= 500;
}

LiftResult lift_http(const LifterSpec& spec, const LiftRequest& req) {
  const auto& cfg = *spec.endpoint;
  json payload{{"prompt", render_prompt(cfg.prompt_template, req.original_assembly)},
               {"temperature", cfg.temperature},
               {"max_tokens", cfg.max_tokens}};
  HttpOutcome o;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(200 * attempt));
    o = post_json(cfg, spec.request_timeout, payload);
    if (!retryable(o)) break;
  }
  if (!o.transport_ok) return LiftError{o.error};
  if (o.status != 200) return LiftError{"endpoint returned HTTP " + std::to_string(o.status)};
  try {
    auto body = json::parse(o.body);
    auto completion = body.at("completion").get<std::string>();
    if (completion.empty()) return LiftError{"empty completion"};
    return Lifted{std::move(completion), spec.output_language, {}};
  } catch (const std::exception& e) {
    return LiftError{std::string("malformed endpoint response: ") + e.what()};
  }
}

LiftResult lift_external(const LifterSpec& spec, const LiftRequest& req) {
  TempDir dir("lc-lift");
  const auto asm_in = dir.path() / "input.s";
  const auto out = dir.path() / (spec.output_language == SourceLanguage::C ? "lifted.c" : "lifted.ll");
  write_file(asm_in, req.original_assembly);
  const std::string binary =
      req.binary ? fs::absolute(req.binary->binary_path).string() : std::string();
  auto argv = expand_template(spec.command->command_template,
                              {{"binary", binary}, {"asm_in", asm_in.string()}, {"out", out.string()}});
  if (argv.empty()) return LiftError{"empty command template"};
  ProcessOptions po;
  po.cwd = dir.path();
  po.timeout = spec.request_timeout;
  auto r = run_process(argv, po);
  if (r.timed_out) return LiftError{"lifter timed out"};
  if (!r.ok()) {
    std::string detail = "lifter " + r.describe();
    if (!r.err.empty()) detail += ": " + r.err.substr(0, 2000);
    return LiftError{detail};
  }
  std::string text;
  std::error_code ec;
  if (fs::exists(out, ec) && fs::file_size(out, ec) > 0) text = read_file(out);
  else text = r.out;
  if (text.find_first_not_of(" \t\r\n") == std::string::npos)
    return LiftError{"lifter produced no output"};
  return Lifted{std::move(text), spec.output_language, {}};
}

}  // namespace

LiftResult lift(const LifterSpec& spec, const LiftRequest& req) {
  try {
    switch (spec.kind) {
      case LifterKind::ExternalCommand: return lift_external(spec, req);
      case LifterKind::HttpLlm: return lift_http(spec, req);
      default: break;
    }
    if (req.ground_truth_source.empty())
      return LiftError{"builtin lifter requires the ground-truth side channel"};
    const auto& src = req.ground_truth_source;
    switch (spec.kind) {
      case LifterKind::BuiltinOracle:
        return Lifted{src, SourceLanguage::C, {}};
      case LifterKind::BuiltinSabotage: {
        if (auto target = find_sabotage_target(src))
          return Lifted{sabotage_source(src, *target), SourceLanguage::C,
                        "perturbed initializer of " + target->global};
        return Lifted{src, SourceLanguage::C, "no eligible constant; source unchanged"};
      }
      case LifterKind::BuiltinBrokenSyntax:
        return Lifted{break_syntax(src), SourceLanguage::C, {}};
      case LifterKind::BuiltinNonterminating:
        return Lifted{make_nonterminating(src), SourceLanguage::C, {}};
      default: break;
    }
    return LiftError{"unsupported lifter kind"};
  } catch (const std::exception& e) {
    return LiftError{std::string("lifter fault: ") + e.what()};
  }
}

HealthStatus health_check(const LifterSpec& spec) {
  try {
    spec.validate();
  } catch (const std::exception& e) {
    return {false, e.what()};
  }
  switch (spec.kind) {
    case LifterKind::ExternalCommand: {
      auto argv = expand_template(spec.command->command_template, {});
      if (argv.empty() || !find_executable(argv[0]))
        return {false, "executable not found: " + (argv.empty() ? std::string() : argv[0])};
      return {};
    }
    case LifterKind::HttpLlm: {
      json payload{{"prompt", render_prompt(spec.endpoint->prompt_template, "ret")},
                   {"temperature", spec.endpoint->temperature},
                   {"max_tokens", 1}};
      auto timeout = std::min(spec.request_timeout, std::chrono::milliseconds(30000));
      auto o = post_json(*spec.endpoint, timeout, payload);
      if (!o.transport_ok) return {false, o.error};
      if (o.status != 200) return {false, "endpoint returned HTTP " + std::to_string(o.status)};
      try {
        auto body = json::parse(o.body);
        if (!body.contains("completion")) return {false, "response lacks 'completion'"};
      } catch (const std::exception& e) {
        return {false, std::string("malformed response: ") + e.what()};
      }
      return {};
    }
    default:
      return {};
  }
}

}  // namespace liftcheck

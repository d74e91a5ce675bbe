#include "liftcheck/generator.hpp"

#include <omp.h>
#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace liftcheck {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(GeneratorBackend b) {
  return b == GeneratorBackend::Builtin ? "builtin" : "external-csmith";
}

GeneratorBackend parse_backend(std::string_view s) {
  if (s == "builtin") return GeneratorBackend::Builtin;
  if (s == "external-csmith" || s == "csmith") return GeneratorBackend::ExternalCsmith;
  throw std::invalid_argument("unknown generator backend: " + std::string(s));
}

void GenerationConfig::validate() const {
  if (token_budget == 0)
    throw std::invalid_argument("generator.token_budget: must be > 0");
  if (program_count == 0)
    throw std::invalid_argument("generator.program_count: must be >= 1");
  if (min_statements == 0)
    throw std::invalid_argument("generator.min_statements: must be >= 1");
  if (max_retries_per_slot == 0)
    throw std::invalid_argument("generator.max_retries_per_slot: must be >= 1");
  if (backend == GeneratorBackend::ExternalCsmith && csmith_path.empty())
    throw std::invalid_argument("generator.csmith_path: required by the external-csmith backend");
}

std::string program_id_for_seed(std::uint64_t seed) {
  return "prog_" + std::to_string(seed);
}

// ---------------------------------------------------------------------------
// Token counting and the triviality census

namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace

std::size_t count_tokens(std::string_view source) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < source.size();) {
    char c = source[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (is_word_char(c)) {
      while (i < source.size() && is_word_char(source[i])) ++i;
      ++count;
    } else {
      ++i;
      ++count;
    }
  }
  return count;
}

namespace {

// Comments, literals and preprocessor lines removed; literals become `0`.
std::string strip_c(std::string_view src) {
  std::string out;
  out.reserve(src.size());
  bool line_start = true;
  for (std::size_t i = 0; i < src.size();) {
    char c = src[i];
    if (line_start && c == '#') {
      // Skip the directive including backslash continuations.
      while (i < src.size() && src[i] != '\n') {
        if (src[i] == '\\' && i + 1 < src.size() && src[i + 1] == '\n') ++i;
        ++i;
      }
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      auto end = src.find("*/", i + 2);
      i = end == std::string_view::npos ? src.size() : end + 2;
      out.push_back(' ');
      continue;
    }
    if (c == '"' || c == '\'') {
      ++i;
      while (i < src.size() && src[i] != c) {
        if (src[i] == '\\') ++i;
        ++i;
      }
      ++i;
      out += " 0 ";
      line_start = false;
      continue;
    }
    if (c == '\n') {
      line_start = true;
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      line_start = false;
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

std::vector<std::string> lex(std::string_view text) {
  std::vector<std::string> toks;
  for (std::size_t i = 0; i < text.size();) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (is_word_char(c)) {
      std::size_t j = i;
      while (j < text.size() && is_word_char(text[j])) ++j;
      toks.emplace_back(text.substr(i, j - i));
      i = j;
    } else {
      toks.emplace_back(1, c);
      ++i;
    }
  }
  return toks;
}

const std::set<std::string>& harness_functions() {
  static const std::set<std::string> names = {
      "crc32_gentab", "crc32_byte",          "crc32_8bytes",
      "transparent_crc", "transparent_crc_bytes", "safe_div",
      "safe_mod",     "platform_main_begin", "platform_main_end"};
  return names;
}

struct FunctionBody {
  std::string name;
  std::size_t begin = 0;  // index of `{`
  std::size_t end = 0;    // index of matching `}`
};

std::size_t match_close(const std::vector<std::string>& toks, std::size_t open,
                        const char* o, const char* c) {
  int depth = 0;
  for (std::size_t i = open; i < toks.size(); ++i) {
    if (toks[i] == o) ++depth;
    if (toks[i] == c && --depth == 0) return i;
  }
  return toks.size() - 1;
}

std::vector<FunctionBody> find_functions(const std::vector<std::string>& toks) {
  std::vector<FunctionBody> fns;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i] != "{") continue;
    std::size_t close = match_close(toks, i, "{", "}");
    if (i > 0 && toks[i - 1] == ")") {
      // Walk back to the `(` opening the parameter list.
      int depth = 0;
      std::size_t j = i - 1;
      for (;; --j) {
        if (toks[j] == ")") ++depth;
        if (toks[j] == "(" && --depth == 0) break;
        if (j == 0) break;
      }
      if (j > 0 && is_word_char(toks[j - 1][0])) {
        fns.push_back({toks[j - 1], i, close});
      }
    }
    i = close;  // initializers, structs and bodies are all skipped whole
  }
  return fns;
}

}  // namespace

StatementCensus census(std::string_view source) {
  const auto toks = lex(strip_c(source));
  const auto fns = find_functions(toks);
  std::set<std::string> user_fns;
  for (const auto& f : fns)
    if (f.name != "main" && !harness_functions().count(f.name)) user_fns.insert(f.name);

  StatementCensus c;
  for (const auto& f : fns) {
    if (harness_functions().count(f.name)) continue;
    int paren = 0;
    for (std::size_t i = f.begin + 1; i < f.end; ++i) {
      const auto& t = toks[i];
      if (t == "(") ++paren;
      else if (t == ")") --paren;
      else if (t == ";" && paren == 0) ++c.statements;
      else if (t == "for" || t == "while" || t == "do") {
        c.has_loop = true;
        // `while` closing a do-loop shares the do's statement.
        if (!(t == "while" && i > 0 && toks[i - 1] == "}")) ++c.statements;
      } else if (t == "if" || t == "switch") {
        ++c.statements;
      } else if (i + 1 < f.end && toks[i + 1] == "(" && user_fns.count(t)) {
        c.calls_user_function = true;
      }
    }
  }
  return c;
}

bool is_trivial(std::string_view source, std::size_t min_statements) {
  auto c = census(source);
  return c.statements < min_statements ||
         (!c.has_loop && !c.calls_user_function);
}

// ---------------------------------------------------------------------------
// Builtin generator

namespace {

constexpr const char* kHarness = R"(#include <stdint.h>
#include <stdio.h>

static uint32_t crc32_tab[256];
static uint32_t crc32_context = 0xFFFFFFFFu;

static void crc32_gentab(void)
{
    const uint32_t poly = 0xEDB88320u;
    int i, j;
    for (i = 0; i < 256; i++) {
        uint32_t crc = (uint32_t)i;
        for (j = 8; j > 0; j--) {
            if (crc & 1u)
                crc = (crc >> 1) ^ poly;
            else
                crc >>= 1;
        }
        crc32_tab[i] = crc;
    }
}

static void crc32_byte(uint8_t b)
{
    crc32_context = ((crc32_context >> 8) & 0x00FFFFFFu) ^ crc32_tab[(crc32_context ^ b) & 0xFFu];
}

__attribute__((noinline)) static void transparent_crc(uint32_t val)
{
    int i;
    for (i = 0; i < 4; i++)
        crc32_byte((uint8_t)((val >> (i * 8)) & 0xFFu));
}

static uint32_t safe_div(uint32_t a, uint32_t b)
{
    return b == 0u ? a : a / b;
}

static uint32_t safe_mod(uint32_t a, uint32_t b)
{
    return b == 0u ? a : a % b;
}

)";

class ProgramBuilder {
 public:
  ProgramBuilder(std::uint64_t seed, double scale)
      : rng_(seed ^ 0x9E3779B97F4A7C15ull), scale_(scale) {}

  std::string build(std::uint64_t seed) {
    n_globals_ = 2 + pick(5);
    n_arrays_ = 1 + pick(2);
    n_funcs_ = 1 + pick(8);

    out_ << "/* liftcheck builtin program, seed " << seed << " */\n" << kHarness;
    for (std::size_t g = 0; g < n_globals_; ++g)
      out_ << "static uint32_t g_" << g << " = " << constant() << ";\n";
    for (std::size_t a = 0; a < n_arrays_; ++a) {
      out_ << "static uint32_t g_arr_" << a << "[8] = {";
      for (int k = 0; k < 8; ++k) out_ << (k ? ", " : "") << constant();
      out_ << "};\n";
    }
    out_ << "\n";
    for (std::size_t f = 1; f <= n_funcs_; ++f) emit_function(f);
    emit_main();
    return out_.str();
  }

 private:
  struct Scope {
    std::vector<std::string> readable;
    std::vector<std::string> writable;
    std::size_t callable = 0;  // may call func_1 .. func_<callable>
    int loop_depth = 0;
    int if_depth = 0;
    bool calls_in_loops = true;
    std::size_t loop_counter = 0;
  };

  std::size_t pick(std::size_t n) { return n == 0 ? 0 : rng_() % n; }
  bool chance(int percent) { return pick(100) < static_cast<std::size_t>(percent); }

  std::string constant() {
    char buf[24];
    std::uint32_t v;
    switch (pick(4)) {
      case 0: v = static_cast<std::uint32_t>(pick(16)); break;
      case 1: v = static_cast<std::uint32_t>(pick(256)); break;
      default: v = static_cast<std::uint32_t>(rng_()); break;
    }
    std::snprintf(buf, sizeof buf, "0x%Xu", v);
    return buf;
  }

  std::size_t scaled(std::size_t base, std::size_t spread) {
    double n = scale_ * static_cast<double>(base + pick(spread));
    return std::max<std::size_t>(1, static_cast<std::size_t>(n));
  }

  void line(int indent, const std::string& text) {
    out_ << std::string(static_cast<std::size_t>(indent) * 4, ' ') << text << "\n";
  }

  std::string leaf(const Scope& s) {
    auto r = pick(10);
    if (r < 2) return constant();
    if (r < 3 && n_arrays_ > 0) {
      const auto arr = pick(n_arrays_);
      const auto& idx = s.readable[pick(s.readable.size())];
      return "g_arr_" + std::to_string(arr) + "[(" + idx + ") & 7u]";
    }
    return s.readable[pick(s.readable.size())];
  }

  // Side-effect free: no calls other than the pure safe_* helpers.
  std::string expr(const Scope& s, int depth) {
    if (depth <= 0 || chance(30)) return leaf(s);
    auto a = expr(s, depth - 1);
    auto b = expr(s, depth - 1);
    switch (pick(12)) {
      case 0: return "(" + a + " + " + b + ")";
      case 1: return "(" + a + " - " + b + ")";
      case 2: return "(" + a + " * " + b + ")";
      case 3: return "(" + a + " ^ " + b + ")";
      case 4: return "(" + a + " & " + b + ")";
      case 5: return "(" + a + " | " + b + ")";
      case 6: return "safe_div(" + a + ", " + b + ")";
      case 7: return "safe_mod(" + a + ", " + b + ")";
      case 8: return "(" + a + " << (" + b + " & 31u))";
      case 9: return "(" + a + " >> (" + b + " & 31u))";
      case 10: return "(uint32_t)(" + a + (chance(50) ? " < " : " == ") + b + ")";
      default: {
        const auto c = expr(s, depth - 1);
        return "(" + a + " ? " + b + " : " + c + ")";
      }
    }
  }

  std::string target(const Scope& s, std::string* crc_arg) {
    if (n_arrays_ > 0 && chance(20)) {
      const auto arr = pick(n_arrays_);
      const auto idx = expr(s, 1);
      auto t = "g_arr_" + std::to_string(arr) + "[(" + idx + ") & 7u]";
      *crc_arg = t;
      return t;
    }
    auto t = s.writable[pick(s.writable.size())];
    *crc_arg = t;
    return t;
  }

  void statement(Scope& s, int indent) {
    auto r = pick(100);
    const bool can_call = s.callable > 0 && (s.loop_depth == 0 || s.calls_in_loops);
    if (r < 12 && s.loop_depth < 2) {
      emit_loop(s, indent);
    } else if (r < 22 && s.if_depth < 2) {
      emit_if(s, indent);
    } else if (r < 37 && can_call) {
      const auto t = s.writable[pick(s.writable.size())];
      const auto crc = t;
      const auto callee = "func_" + std::to_string(1 + pick(s.callable));
      const auto arg0 = expr(s, 2);
      const auto arg1 = expr(s, 2);
      line(indent, t + " = " + callee + "(" + arg0 + ", " + arg1 + ");");
      line(indent, "transparent_crc(" + crc + ");");
    } else {
      std::string crc;
      const auto t = target(s, &crc);
      static const char* ops[] = {" = ", " += ", " ^= ", " -= ", " |= "};
      const char* op = ops[pick(5)];
      const auto rhs = expr(s, 3);
      line(indent, t + op + rhs + ";");
      line(indent, "transparent_crc(" + crc + ");");
    }
  }

  void block(Scope& s, int indent, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) statement(s, indent);
  }

  void emit_loop(Scope& s, int indent) {
    auto var = "i_" + std::to_string(s.loop_counter++);
    auto bound = 1 + pick(8);
    line(indent, "for (uint32_t " + var + " = 0u; " + var + " < " +
                     std::to_string(bound) + "u; " + var + "++) {");
    Scope inner = s;
    inner.loop_depth++;
    inner.readable.push_back(var);
    block(inner, indent + 1, 1 + pick(4));
    s.loop_counter = inner.loop_counter;
    line(indent, "}");
  }

  void emit_if(Scope& s, int indent) {
    line(indent, "if (" + expr(s, 2) + ") {");
    Scope inner = s;
    inner.if_depth++;
    block(inner, indent + 1, 1 + pick(3));
    s.loop_counter = inner.loop_counter;
    if (chance(50)) {
      line(indent, "} else {");
      block(inner, indent + 1, 1 + pick(3));
      s.loop_counter = inner.loop_counter;
    }
    line(indent, "}");
  }

  Scope globals_scope() {
    Scope s;
    for (std::size_t g = 0; g < n_globals_; ++g) {
      s.readable.push_back("g_" + std::to_string(g));
      s.writable.push_back("g_" + std::to_string(g));
    }
    return s;
  }

  void declare_locals(Scope& s, std::size_t n, int indent) {
    for (std::size_t l = 0; l < n; ++l) {
      auto name = "l_" + std::to_string(l);
      line(indent, "uint32_t " + name + " = " + expr(s, 1) + ";");
      s.readable.push_back(name);
      s.writable.push_back(name);
    }
  }

  void emit_function(std::size_t index) {
    out_ << "static uint32_t func_" << index << "(uint32_t p_0, uint32_t p_1)\n{\n";
    Scope s = globals_scope();
    s.readable.push_back("p_0");
    s.readable.push_back("p_1");
    s.writable.push_back("p_0");
    s.writable.push_back("p_1");
    s.callable = index - 1;
    // Calls nested in helper loops would multiply run time down the chain.
    s.calls_in_loops = false;
    declare_locals(s, 1 + pick(3), 1);
    block(s, 1, scaled(3, 6));
    line(1, "return " + expr(s, 2) + ";");
    out_ << "}\n\n";
  }

  void emit_main() {
    out_ << "int main(void)\n{\n";
    Scope s = globals_scope();
    s.callable = n_funcs_;
    declare_locals(s, 2 + pick(3), 1);
    line(1, "crc32_gentab();");
    for (std::size_t g = 0; g < n_globals_; ++g)
      line(1, "transparent_crc(g_" + std::to_string(g) + ");");
    block(s, 1, scaled(14, 16));
    for (std::size_t g = 0; g < n_globals_; ++g)
      line(1, "transparent_crc(g_" + std::to_string(g) + ");");
    for (std::size_t a = 0; a < n_arrays_; ++a)
      line(1, "for (int k = 0; k < 8; k++) transparent_crc(g_arr_" +
                  std::to_string(a) + "[k]);");
    line(1, "printf(\"checksum = %X\\n\", (unsigned int)(crc32_context ^ 0xFFFFFFFFu));");
    line(1, "return 0;");
    out_ << "}\n";
  }

  std::mt19937_64 rng_;
  double scale_;
  std::ostringstream out_;
  std::size_t n_globals_ = 0;
  std::size_t n_arrays_ = 0;
  std::size_t n_funcs_ = 0;
};

}  // namespace

std::string builtin_program_source(std::uint64_t seed, double size_scale) {
  return ProgramBuilder(seed, size_scale).build(seed);
}

std::vector<std::string> csmith_flags(std::size_t attempt) {
  const auto a = static_cast<long>(attempt);
  return {"--no-argc",
          "--no-bitfields",
          "--no-packed-struct",
          "--no-volatile-pointers",
          "--no-unions",
          "--max-funcs",
          std::to_string(std::max(1L, 8 - 2 * a)),
          "--max-block-size",
          std::to_string(std::max(1L, 4 - a))};
}

namespace {

std::string guess_csmith_include(const std::string& csmith_path) {
  std::error_code ec;
  fs::path exe = fs::weakly_canonical(csmith_path, ec);
  fs::path prefix = exe.parent_path().parent_path();
  for (const auto& candidate : {prefix / "include", prefix / "include" / "csmith", prefix / "runtime"}) {
    if (fs::exists(candidate / "csmith.h", ec)) return candidate.string();
  }
  if (fs::is_directory(prefix / "include", ec)) {
    for (const auto& entry : fs::directory_iterator(prefix / "include", ec)) {
      if (fs::exists(entry.path() / "csmith.h", ec)) return entry.path().string();
    }
  }
  return {};
}

std::string csmith_source(const GenerationConfig& config, std::uint64_t seed,
                          std::size_t attempt) {
  std::vector<std::string> argv{config.csmith_path};
  auto flags = csmith_flags(attempt);
  argv.insert(argv.end(), flags.begin(), flags.end());
  argv.push_back("--seed");
  argv.push_back(std::to_string(seed));
  auto r = run_process(argv, {.timeout = std::chrono::milliseconds(60000)});
  if (r.exit_code && *r.exit_code == 127 && r.out.empty())
    throw GenerationError(GenerationError::Kind::BackendUnavailable, r.err);
  if (!r.ok() || r.out.empty())
    throw GenerationError(GenerationError::Kind::SelfCheckFailed,
                          "csmith seed " + std::to_string(seed) + ": " + r.describe() +
                              " " + r.err);
  return r.out;
}

std::string describe(const ExecutionResult& r) {
  if (auto* c = std::get_if<ChecksumValue>(&r)) return format_checksum(c->value);
  if (auto* e = std::get_if<RuntimeFailure>(&r)) return "runtime error: " + e->detail;
  return "timeout";
}

}  // namespace

TestProgram generate_program(const GenerationConfig& config, std::uint64_t seed,
                             const Toolchain& toolchain) {
  using Kind = GenerationError::Kind;
  Toolchain local = toolchain;
  if (config.backend == GeneratorBackend::ExternalCsmith) {
    if (!find_executable(config.csmith_path))
      throw GenerationError(Kind::BackendUnavailable,
                            "csmith not found at '" + config.csmith_path + "'");
    auto tc = toolchain.config();
    auto inc = config.csmith_include.empty() ? guess_csmith_include(config.csmith_path)
                                             : config.csmith_include;
    if (!inc.empty()) tc.include_dirs.push_back(inc);
    local = Toolchain(tc);
  }

  TestProgram prog;
  prog.id = program_id_for_seed(seed);
  prog.seed = seed;
  prog.origin = config.backend;

  bool fitted = false;
  std::size_t last_tokens = 0;
  for (std::size_t attempt = 0; attempt < config.max_retries_per_slot; ++attempt) {
    std::string src;
    if (config.backend == GeneratorBackend::Builtin) {
      double scale = 1.0;
      for (std::size_t k = 0; k < attempt; ++k) scale *= 0.6;
      src = builtin_program_source(seed, scale);
    } else {
      src = csmith_source(config, seed, attempt);
    }
    last_tokens = count_tokens(src);
    if (last_tokens > config.token_budget || is_trivial(src, config.min_statements))
      continue;
    prog.source = std::move(src);
    prog.token_count = last_tokens;
    fitted = true;
    break;
  }
  if (!fitted)
    throw GenerationError(
        Kind::BudgetUnsatisfiable,
        "seed " + std::to_string(seed) + ": no non-trivial program within " +
            std::to_string(config.token_budget) + " tokens after " +
            std::to_string(config.max_retries_per_slot) + " attempts (last " +
            std::to_string(last_tokens) + " tokens)");

  std::optional<std::uint32_t> sums[2];
  for (int i = 0; i < 2; ++i) {
    const OptLevel opt = kAllOptLevels[i];
    auto built = local.compile(prog.source, opt, SourceLanguage::C, prog.id);
    if (auto* err = std::get_if<CompileError>(&built))
      throw GenerationError(Kind::SelfCheckFailed,
                            prog.id + " does not compile at " +
                                std::string(to_string(opt)) + ": " + err->diagnostic);
    auto run = local.execute(std::get<BinaryArtifact>(built));
    auto* value = std::get_if<ChecksumValue>(&run);
    if (!value)
      throw GenerationError(Kind::SelfCheckFailed,
                            prog.id + " at " + std::string(to_string(opt)) + ": " +
                                describe(run));
    sums[i] = value->value;
  }
  if (*sums[0] != *sums[1])
    throw GenerationError(Kind::SelfCheckFailed,
                          prog.id + ": O0 " + format_checksum(*sums[0]) + " != O3 " +
                              format_checksum(*sums[1]));
  prog.checksum = sums[0];
  return prog;
}

Corpus generate_corpus(const GenerationConfig& config, const Toolchain& toolchain,
                       int workers, const std::function<void(const std::string&)>& log) {
  config.validate();
  Corpus corpus;
  const std::size_t max_skips = 4 * config.program_count + 16;
  std::uint64_t next_seed = config.seed_start;

  while (corpus.programs.size() < config.program_count) {
    const std::size_t want = config.program_count - corpus.programs.size();
    std::vector<std::optional<TestProgram>> slots(want);
    std::vector<std::string> failures(want);
    std::vector<int> fatal(want, 0);
    std::string fatal_msg;
    GenerationError::Kind fatal_kind{};

#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, workers))
    for (std::size_t i = 0; i < want; ++i) {
      try {
        slots[i] = generate_program(config, next_seed + i, toolchain);
      } catch (const GenerationError& e) {
        if (e.kind() == GenerationError::Kind::SelfCheckFailed) {
          failures[i] = e.what();
        } else {
          fatal[i] = 1;
#pragma omp critical(liftcheck_gen_fatal)
          {
            fatal_msg = e.what();
            fatal_kind = e.kind();
          }
        }
      }
    }
    if (std::find(fatal.begin(), fatal.end(), 1) != fatal.end())
      throw GenerationError(fatal_kind, fatal_msg);

    for (std::size_t i = 0; i < want; ++i) {
      if (slots[i]) {
        corpus.programs.push_back(std::move(*slots[i]));
      } else {
        corpus.rejected.push_back({next_seed + i, failures[i]});
        if (log) log("self-check failed, seed skipped: " + failures[i]);
      }
    }
    next_seed += want;
    if (corpus.rejected.size() > max_skips)
      throw GenerationError(GenerationError::Kind::SelfCheckFailed,
                            "too many self-check failures (" +
                                std::to_string(corpus.rejected.size()) + ")");
  }
  return corpus;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

void write_corpus(const Corpus& corpus, const GenerationConfig& config,
                  const fs::path& dir) {
  fs::create_directories(dir);
  json manifest;
  manifest["schema_version"] = 1;
  manifest["backend"] = to_string(config.backend);
  manifest["token_budget"] = config.token_budget;
  manifest["min_statements"] = config.min_statements;
  if (config.backend == GeneratorBackend::ExternalCsmith)
    manifest["csmith_flags"] = csmith_flags(0);
  json programs = json::array();
  for (const auto& p : corpus.programs) {
    const auto file = "prog_" + std::to_string(p.seed) + ".c";
    write_file(dir / file, p.source);
    json entry{{"id", p.id},
               {"seed", p.seed},
               {"token_count", p.token_count},
               {"origin", to_string(p.origin) == "builtin" ? "builtin" : "csmith"},
               {"sha256", sha256_hex(p.source)},
               {"file", file}};
    if (p.checksum) entry["checksum"] = *p.checksum;
    programs.push_back(std::move(entry));
  }
  manifest["programs"] = std::move(programs);
  json rejected = json::array();
  for (const auto& r : corpus.rejected)
    rejected.push_back({{"seed", r.seed}, {"reason", r.reason}});
  manifest["rejected"] = std::move(rejected);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

std::optional<Corpus> read_corpus(const fs::path& dir) {
  if (!fs::exists(dir / "manifest.json")) return std::nullopt;
  auto manifest = json::parse(read_file(dir / "manifest.json"));
  Corpus corpus;
  for (const auto& e : manifest.at("programs")) {
    TestProgram p;
    p.id = e.at("id").get<std::string>();
    p.seed = e.at("seed").get<std::uint64_t>();
    p.source = read_file(dir / e.at("file").get<std::string>());
    if (sha256_hex(p.source) != e.at("sha256").get<std::string>())
      throw std::runtime_error("manifest hash mismatch for " + p.id);
    p.token_count = e.at("token_count").get<std::size_t>();
    p.origin = e.at("origin").get<std::string>() == "builtin"
                   ? GeneratorBackend::Builtin
                   : GeneratorBackend::ExternalCsmith;
    if (e.contains("checksum")) p.checksum = e.at("checksum").get<std::uint32_t>();
    corpus.programs.push_back(std::move(p));
  }
  for (const auto& r : manifest.value("rejected", json::array()))
    corpus.rejected.push_back({r.at("seed").get<std::uint64_t>(),
                               r.at("reason").get<std::string>()});
  return corpus;
}

}  // namespace liftcheck

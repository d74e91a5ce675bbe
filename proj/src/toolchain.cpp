#include "liftcheck/toolchain.hpp"

#include <cstdio>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace liftcheck {

namespace fs = std::filesystem;

std::string_view to_string(OptLevel level) {
  return level == OptLevel::O0 ? "O0" : "O3";
}

OptLevel parse_opt_level(std::string_view s) {
  if (s == "O0" || s == "-O0") return OptLevel::O0;
  if (s == "O3" || s == "-O3") return OptLevel::O3;
  throw std::invalid_argument("unknown optimization level: " + std::string(s));
}

std::string_view to_string(SourceLanguage lang) {
  return lang == SourceLanguage::C ? "c" : "llvm-ir";
}

SourceLanguage parse_language(std::string_view s) {
  if (s == "c") return SourceLanguage::C;
  if (s == "llvm-ir") return SourceLanguage::LlvmIr;
  throw std::invalid_argument("unknown source language: " + std::string(s));
}

std::optional<std::uint32_t> parse_checksum(std::string_view text) {
  static const std::regex line_re(R"(checksum\s*=\s*([0-9A-Fa-f]+))");
  std::optional<std::uint32_t> found;
  int matches = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::smatch m;
    if (!std::regex_search(line, m, line_re)) continue;
    if (++matches > 1) return std::nullopt;
    std::string digits = m[1].str();
    auto nz = digits.find_first_not_of('0');
    digits = nz == std::string::npos ? "0" : digits.substr(nz);
    if (digits.size() > 8) return std::nullopt;
    found = static_cast<std::uint32_t>(std::stoul(digits, nullptr, 16));
  }
  return found;
}

std::string format_checksum(std::uint32_t value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "checksum = %X", value);
  return buf;
}

Toolchain::Toolchain(ToolchainConfig config) : config_(std::move(config)) {}

std::vector<std::string> Toolchain::command(const std::string& tmpl,
                                            SourceLanguage lang, OptLevel opt,
                                            const std::string& input,
                                            const std::string& output) const {
  auto argv = expand_template(
      tmpl, {{"input", input},
             {"output", output},
             {"opt", "-" + std::string(to_string(opt))}});
  if (argv.empty()) throw std::invalid_argument("empty compiler template");
  if (lang == SourceLanguage::C) {
    std::vector<std::string> includes;
    for (const auto& dir : config_.include_dirs) includes.push_back("-I" + dir);
    argv.insert(argv.begin() + 1, includes.begin(), includes.end());
  }
  return argv;
}

namespace {

const char* source_name(SourceLanguage lang) {
  return lang == SourceLanguage::C ? "prog.c" : "prog.ll";
}

std::string diagnostic(const ProcessResult& r) {
  std::string d = r.err;
  if (!r.out.empty()) d += (d.empty() ? "" : "\n") + r.out;
  if (d.empty()) d = r.describe();
  return d;
}

}  // namespace

std::variant<BinaryArtifact, CompileError> Toolchain::compile(
    const std::string& source, OptLevel opt, SourceLanguage lang,
    const std::string& program_id) const {
  auto dir = std::make_shared<TempDir>("lc-build");
  write_file(dir->path() / source_name(lang), source);

  const auto& link_tmpl =
      lang == SourceLanguage::C ? config_.c_compile : config_.ir_compile;
  ProcessOptions po;
  po.cwd = dir->path();
  po.timeout = config_.compile_timeout;
  auto linked = run_process(
      command(link_tmpl, lang, opt, source_name(lang), "prog.bin"), po);
  if (!linked.ok()) return CompileError{diagnostic(linked)};

  auto assembly = emit_assembly(source, opt, lang);
  if (auto* err = std::get_if<CompileError>(&assembly)) return *err;

  BinaryArtifact artifact;
  artifact.program_id = program_id;
  artifact.opt_level = opt;
  artifact.binary_path = dir->path() / "prog.bin";
  artifact.assembly_text = std::move(std::get<std::string>(assembly));
  artifact.storage = std::move(dir);
  if (!fs::exists(artifact.binary_path))
    return CompileError{"compiler produced no binary"};
  return artifact;
}

std::variant<std::string, CompileError> Toolchain::emit_assembly(
    const std::string& source, OptLevel opt, SourceLanguage lang) const {
  // Fixed file names keep `.file` directives identical across runs.
  TempDir dir("lc-asm");
  write_file(dir.path() / source_name(lang), source);
  const auto& tmpl =
      lang == SourceLanguage::C ? config_.c_assembly : config_.ir_assembly;
  ProcessOptions po;
  po.cwd = dir.path();
  po.timeout = config_.compile_timeout;
  auto r = run_process(command(tmpl, lang, opt, source_name(lang), "prog.s"),
                       po);
  if (!r.ok()) return CompileError{diagnostic(r)};
  if (!fs::exists(dir.path() / "prog.s"))
    return CompileError{"compiler produced no assembly"};
  return read_file(dir.path() / "prog.s");
}

ExecutionResult Toolchain::execute(
    const BinaryArtifact& artifact,
    std::optional<std::chrono::milliseconds> timeout) const {
  TempDir sandbox("lc-run");
  ProcessOptions po;
  po.cwd = sandbox.path();
  po.timeout = timeout.value_or(config_.run_timeout);
  po.env = minimal_env();
  po.output_limit = 1u << 20;
  auto r = run_process({fs::absolute(artifact.binary_path).string()}, po);
  if (r.timed_out) return TimedOut{};
  if (r.term_signal || !r.exit_code || *r.exit_code != 0)
    return RuntimeFailure{r.describe()};
  auto checksum = parse_checksum(r.out);
  if (!checksum) return RuntimeFailure{"malformed-output: no unique checksum line"};
  return ChecksumValue{*checksum};
}

std::string Toolchain::version_info() const {
  std::ostringstream out;
  for (const auto* tmpl : {&config_.c_compile, &config_.ir_compile}) {
    auto argv = expand_template(*tmpl, {});
    if (argv.empty()) continue;
    auto r = run_process({argv[0], "--version"},
                         {.timeout = std::chrono::milliseconds(10000)});
    std::string first = r.out.substr(0, r.out.find('\n'));
    out << argv[0] << ": " << (first.empty() ? r.describe() : first) << "\n";
  }
  return out.str();
}

}  // namespace liftcheck

#include "liftcheck/metrics.hpp"

#include <omp.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace liftcheck {

std::string_view to_string(Normalization n) {
  return n == Normalization::Raw ? "raw" : "normalized";
}

Normalization parse_normalization(std::string_view s) {
  if (s == "raw") return Normalization::Raw;
  if (s == "normalized") return Normalization::Normalized;
  throw std::invalid_argument("unknown normalization: " + std::string(s));
}

TokenSequence make_sequence(std::vector<std::string> tokens) {
  TokenSequence seq;
  seq.tokens = std::move(tokens);
  if (!seq.tokens.empty()) seq.line_starts.push_back(0);
  return seq;
}

// ---------------------------------------------------------------------------
// Tokenization

namespace {

std::string strip_local_label_suffix(const std::string& tok) {
  // .L23 -> .L, .LBB0_4 -> .LBB, .LC0[rip] -> .LC[rip]
  std::string out;
  for (std::size_t i = 0; i < tok.size();) {
    if (tok[i] == '.' && i + 1 < tok.size() && tok[i + 1] == 'L') {
      out += ".L";
      i += 2;
      while (i < tok.size() && std::isalpha(static_cast<unsigned char>(tok[i])))
        out.push_back(tok[i++]);
      while (i < tok.size() &&
             (std::isdigit(static_cast<unsigned char>(tok[i])) || tok[i] == '_'))
        ++i;
    } else {
      out.push_back(tok[i++]);
    }
  }
  return out;
}

void split_line(std::string_view line, std::vector<std::string>& out) {
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char c : line) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else if (c == ',') {
      flush();
      out.emplace_back(",");
    } else {
      cur.push_back(c);
    }
  }
  flush();
}

}  // namespace

TokenSequence tokenize_asm(std::string_view text, Normalization mode) {
  TokenSequence seq;
  seq.normalization = mode;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;

    if (mode == Normalization::Normalized) {
      auto cut = line.find_first_of("#;");
      if (cut != std::string_view::npos) line = line.substr(0, cut);
    }
    std::vector<std::string> toks;
    split_line(line, toks);
    if (toks.empty()) continue;
    if (mode == Normalization::Normalized) {
      const auto& head = toks.front();
      if (head[0] == '.' && head.back() != ':') continue;  // directive
      for (auto& t : toks) t = strip_local_label_suffix(t);
    }
    seq.line_starts.push_back(seq.tokens.size());
    for (auto& t : toks) seq.tokens.push_back(std::move(t));
  }
  return seq;
}

// ---------------------------------------------------------------------------
// BLEU

namespace {

// Tokens interned per pair; n-grams keyed by their id string.
struct Interned {
  std::u32string cand;
  std::u32string ref;
};

Interned intern(const TokenSequence& c, const TokenSequence& r) {
  std::unordered_map<std::string_view, char32_t> ids;
  auto id = [&](const std::string& t) {
    auto [it, fresh] = ids.emplace(t, static_cast<char32_t>(ids.size() + 1));
    return it->second;
  };
  Interned out;
  for (const auto& t : c.tokens) out.cand.push_back(id(t));
  for (const auto& t : r.tokens) out.ref.push_back(id(t));
  return out;
}

using NgramCounts = std::unordered_map<std::u32string, double>;

NgramCounts count_ngrams(const std::u32string& seq, std::size_t n) {
  NgramCounts counts;
  if (seq.size() < n) return counts;
  for (std::size_t i = 0; i + n <= seq.size(); ++i) counts[seq.substr(i, n)] += 1;
  return counts;
}

double brevity_penalty(std::size_t cand_len, std::size_t ref_len) {
  if (cand_len >= ref_len) return 1.0;
  return std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
}

// Clipped precision for order n >= 2 with add-one smoothing on zero matches.
double smoothed_precision(const std::u32string& cand, const std::u32string& ref,
                          std::size_t n) {
  const auto cc = count_ngrams(cand, n);
  const auto rc = count_ngrams(ref, n);
  double matches = 0;
  for (const auto& [g, count] : cc) {
    auto it = rc.find(g);
    if (it != rc.end()) matches += std::min(count, it->second);
  }
  const double total = cand.size() >= n ? static_cast<double>(cand.size() - n + 1) : 0.0;
  if (matches == 0) return 1.0 / (total + 1.0);
  return matches / total;
}

// `unigram_weight` returns the weight of a unigram id; nullptr = all 1.
template <typename WeightFn>
double bleu_impl(const std::u32string& cand, const std::u32string& ref, int max_n,
                 WeightFn unigram_weight) {
  if (cand.empty()) return 0.0;
  const auto cc = count_ngrams(cand, 1);
  const auto rc = count_ngrams(ref, 1);
  double num = 0, den = 0;
  for (const auto& [g, count] : cc) {
    const double w = unigram_weight(g[0]);
    auto it = rc.find(g);
    if (it != rc.end()) num += std::min(count, it->second) * w;
    den += count * w;
  }
  if (num == 0) return 0.0;
  double log_sum = std::log(num / den);
  for (int n = 2; n <= max_n; ++n)
    log_sum += std::log(smoothed_precision(cand, ref, static_cast<std::size_t>(n)));
  return brevity_penalty(cand.size(), ref.size()) * std::exp(log_sum / max_n);
}

}  // namespace

double bleu(const TokenSequence& candidate, const TokenSequence& reference, int max_n) {
  if (max_n < 1) throw std::invalid_argument("bleu: max_n must be >= 1");
  auto ids = intern(candidate, reference);
  return bleu_impl(ids.cand, ids.ref, max_n, [](char32_t) { return 1.0; });
}

// ---------------------------------------------------------------------------
// CodeBLEU over assembly

void CodeBleuWeights::validate() const {
  for (double w : {ngram, weighted_ngram, syntax, dataflow})
    if (!(w >= 0.0)) throw std::invalid_argument("codebleu weights must be non-negative");
  if (std::abs(ngram + weighted_ngram + syntax + dataflow - 1.0) > 1e-9)
    throw std::invalid_argument("codebleu weights must sum to 1");
}

double CodeBleuComponents::combine(const CodeBleuWeights& w) const {
  double v = w.ngram * ngram + w.weighted_ngram * weighted_ngram + w.syntax * syntax +
             w.dataflow * dataflow;
  return std::clamp(v, 0.0, 1.0);
}

namespace {

struct Instruction {
  std::string mnemonic;
  std::vector<std::vector<std::string>> operands;
};

struct Line {
  std::optional<std::string> label;  // set for label lines
  Instruction insn;
};

std::vector<Line> parse_lines(const TokenSequence& seq) {
  std::vector<Line> lines;
  for (std::size_t li = 0; li < seq.line_starts.size(); ++li) {
    const std::size_t begin = seq.line_starts[li];
    const std::size_t end =
        li + 1 < seq.line_starts.size() ? seq.line_starts[li + 1] : seq.tokens.size();
    if (begin >= end) continue;
    Line line;
    std::size_t i = begin;
    if (seq.tokens[i].size() > 1 && seq.tokens[i].back() == ':') {
      line.label = seq.tokens[i].substr(0, seq.tokens[i].size() - 1);
      lines.push_back(line);
      ++i;
      if (i >= end) continue;
      line = Line{};
    }
    line.insn.mnemonic = seq.tokens[i++];
    std::vector<std::string> operand;
    for (; i < end; ++i) {
      if (seq.tokens[i] == ",") {
        line.insn.operands.push_back(std::move(operand));
        operand.clear();
      } else {
        operand.push_back(seq.tokens[i]);
      }
    }
    if (!operand.empty()) line.insn.operands.push_back(std::move(operand));
    lines.push_back(std::move(line));
  }
  return lines;
}

std::optional<std::string> register_family(std::string name) {
  if (!name.empty() && name[0] == '%') name.erase(0, 1);
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  static const std::map<std::string, std::string> legacy = {
      {"rax", "a"},  {"eax", "a"},  {"ax", "a"},   {"al", "a"},  {"ah", "a"},
      {"rbx", "b"},  {"ebx", "b"},  {"bx", "b"},   {"bl", "b"},  {"bh", "b"},
      {"rcx", "c"},  {"ecx", "c"},  {"cx", "c"},   {"cl", "c"},  {"ch", "c"},
      {"rdx", "d"},  {"edx", "d"},  {"dx", "d"},   {"dl", "d"},  {"dh", "d"},
      {"rsi", "si"}, {"esi", "si"}, {"si", "si"},  {"sil", "si"},
      {"rdi", "di"}, {"edi", "di"}, {"di", "di"},  {"dil", "di"},
      {"rbp", "bp"}, {"ebp", "bp"}, {"bp", "bp"},  {"bpl", "bp"},
      {"rsp", "sp"}, {"esp", "sp"}, {"sp", "sp"},  {"spl", "sp"},
      {"rip", "ip"}, {"eip", "ip"}};
  if (auto it = legacy.find(name); it != legacy.end()) return it->second;
  auto all_digits = [](std::string_view s) {
    return !s.empty() &&
           std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
  };
  // r8..r15 with optional d/w/b suffix
  if (name.size() >= 2 && name[0] == 'r') {
    std::string_view rest(name);
    rest.remove_prefix(1);
    if (!rest.empty() && (rest.back() == 'd' || rest.back() == 'w' || rest.back() == 'b'))
      rest.remove_suffix(1);
    if (all_digits(rest)) return "r" + std::string(rest);
  }
  for (std::string_view vec : {"xmm", "ymm", "zmm"}) {
    if (name.rfind(vec, 0) == 0 && all_digits(std::string_view(name).substr(3)))
      return "xmm" + name.substr(3);
  }
  return std::nullopt;
}

std::vector<std::string> registers_in(const std::vector<std::string>& operand) {
  std::vector<std::string> regs;
  for (const auto& tok : operand) {
    std::string piece;
    auto flush = [&] {
      if (!piece.empty())
        if (auto fam = register_family(piece)) regs.push_back(*fam);
      piece.clear();
    };
    for (char c : tok) {
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '%') piece.push_back(c);
      else flush();
    }
    flush();
  }
  return regs;
}

std::string operand_kind(const std::vector<std::string>& operand) {
  if (operand.empty()) return "none";
  for (const auto& t : operand)
    if (t.find('[') != std::string::npos || t.find('(') != std::string::npos ||
        t == "PTR" || t == "ptr")
      return "mem";
  const auto& t = operand.back();
  if (operand.size() == 1 && register_family(t)) return "reg";
  std::string_view v(t);
  if (!v.empty() && v[0] == '$') v.remove_prefix(1);
  if (!v.empty() && (v[0] == '-' || v[0] == '+')) v.remove_prefix(1);
  if (!v.empty() && std::isdigit(static_cast<unsigned char>(v[0]))) return "imm";
  return "sym";
}

bool is_att(const std::vector<Line>& lines) {
  for (const auto& l : lines)
    for (const auto& op : l.insn.operands)
      for (const auto& t : op)
        if (t.find('%') != std::string::npos) return true;
  return false;
}

bool starts_with_any(const std::string& s, std::initializer_list<std::string_view> prefixes) {
  for (auto p : prefixes)
    if (s.rfind(p, 0) == 0) return true;
  return false;
}

// Instructions that never write their first (Intel) operand.
bool writes_nothing(const std::string& m) {
  return starts_with_any(m, {"cmp", "test", "push", "j", "call", "ret", "nop", "ucomis",
                             "comis", "bt", "leave", "hlt", "ud2"});
}

// Instructions whose destination is written without being read.
bool pure_write(const std::string& m) {
  return starts_with_any(m, {"mov", "lea", "pop", "set", "cvt"});
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double multiset_f1(std::vector<std::string> a, std::vector<std::string> b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<std::string> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  if (common.empty()) return 0.0;
  const double p = static_cast<double>(common.size()) / static_cast<double>(a.size());
  const double r = static_cast<double>(common.size()) / static_cast<double>(b.size());
  return 2 * p * r / (p + r);
}

}  // namespace

std::vector<std::string> instruction_shapes(const TokenSequence& seq) {
  std::vector<std::string> shapes;
  for (const auto& line : parse_lines(seq)) {
    if (line.label) continue;
    std::string s = line.insn.mnemonic + "(";
    for (std::size_t i = 0; i < line.insn.operands.size(); ++i)
      s += (i ? "," : "") + operand_kind(line.insn.operands[i]);
    shapes.push_back(s + ")");
  }
  return shapes;
}

std::vector<std::string> def_use_pairs(const TokenSequence& seq) {
  const auto lines = parse_lines(seq);
  const bool att = is_att(lines);
  std::vector<std::string> pairs;

  std::size_t fn_begin = 0;
  while (fn_begin < lines.size()) {
    // A function runs until the next non-local label.
    std::size_t fn_end = fn_begin + 1;
    while (fn_end < lines.size() &&
           !(lines[fn_end].label && (*lines[fn_end].label)[0] != '.'))
      ++fn_end;

    std::map<std::string, std::size_t> canon;
    for (std::size_t i = fn_begin; i < fn_end; ++i)
      for (const auto& op : lines[i].insn.operands)
        for (const auto& reg : registers_in(op)) canon.emplace(reg, canon.size());

    std::map<std::string, std::string> last_def;  // family -> defining mnemonic
    for (std::size_t i = fn_begin; i < fn_end; ++i) {
      const auto& insn = lines[i].insn;
      if (lines[i].label || insn.operands.empty()) continue;
      const std::size_t dest_idx = att ? insn.operands.size() - 1 : 0;
      const auto& dest = insn.operands[dest_idx];
      const bool dest_is_reg = operand_kind(dest) == "reg";
      const bool defines = dest_is_reg && !writes_nothing(insn.mnemonic);

      std::vector<std::string> uses;
      for (std::size_t k = 0; k < insn.operands.size(); ++k) {
        if (k == dest_idx && defines && pure_write(insn.mnemonic)) continue;
        for (auto& reg : registers_in(insn.operands[k])) uses.push_back(reg);
      }
      for (const auto& reg : uses) {
        auto it = last_def.find(reg);
        if (it == last_def.end()) continue;
        pairs.push_back(it->second + "|r" + std::to_string(canon.at(reg)) + "|" +
                        insn.mnemonic);
      }
      if (defines) last_def[registers_in(dest).front()] = insn.mnemonic;
    }
    fn_begin = fn_end;
  }
  return pairs;
}

CodeBleuComponents codebleu_components(const TokenSequence& candidate,
                                       const TokenSequence& reference) {
  CodeBleuComponents c;
  if (candidate.empty()) return c;

  auto ids = intern(candidate, reference);
  c.ngram = bleu_impl(ids.cand, ids.ref, 4, [](char32_t) { return 1.0; });

  // Mnemonic vocabulary comes from the first token of each instruction line.
  std::set<char32_t> keywords;
  auto collect = [&](const TokenSequence& seq, const std::u32string& idseq) {
    for (std::size_t li = 0; li < seq.line_starts.size(); ++li) {
      std::size_t i = seq.line_starts[li];
      if (i < idseq.size() && !(seq.tokens[i].size() > 1 && seq.tokens[i].back() == ':'))
        keywords.insert(idseq[i]);
    }
  };
  collect(candidate, ids.cand);
  collect(reference, ids.ref);
  c.weighted_ngram = bleu_impl(ids.cand, ids.ref, 4, [&](char32_t id) {
    return keywords.count(id) ? 5.0 : 1.0;
  });

  const auto cs = instruction_shapes(candidate);
  const auto rs = instruction_shapes(reference);
  if (cs.empty() && rs.empty()) {
    c.syntax = 1.0;
  } else if (!cs.empty() && !rs.empty()) {
    c.syntax = static_cast<double>(lcs_length(cs, rs)) /
               static_cast<double>(std::max(cs.size(), rs.size()));
  }

  c.dataflow = multiset_f1(def_use_pairs(candidate), def_use_pairs(reference));
  return c;
}

double codebleu(const TokenSequence& candidate, const TokenSequence& reference,
                const CodeBleuWeights& weights) {
  weights.validate();
  if (candidate.empty()) return 0.0;
  return codebleu_components(candidate, reference).combine(weights);
}

SimilarityScores similarity(std::string_view candidate_asm, std::string_view reference_asm,
                            const MetricsConfig& config) {
  const auto cand = tokenize_asm(candidate_asm, config.normalization);
  const auto ref = tokenize_asm(reference_asm, config.normalization);
  SimilarityScores s;
  s.bleu1 = bleu(cand, ref, 1);
  s.bleu4 = bleu(cand, ref, 4);
  s.codebleu = codebleu(cand, ref, config.weights);
  return s;
}

std::vector<SimilarityScores> score_pairs_serial(std::span<const AsmPair> pairs,
                                                 const MetricsConfig& config) {
  std::vector<SimilarityScores> out(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i)
    out[i] = similarity(pairs[i].candidate, pairs[i].reference, config);
  return out;
}

std::vector<SimilarityScores> score_pairs(std::span<const AsmPair> pairs,
                                          const MetricsConfig& config, int threads) {
  config.weights.validate();
  std::vector<SimilarityScores> out(pairs.size());
  const int nt = threads > 0 ? threads : omp_get_max_threads();
  const auto n = static_cast<std::ptrdiff_t>(pairs.size());
#pragma omp parallel for schedule(dynamic, 4) num_threads(nt)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] =
        similarity(pairs[static_cast<std::size_t>(i)].candidate,
                   pairs[static_cast<std::size_t>(i)].reference, config);
  return out;
}

}  // namespace liftcheck

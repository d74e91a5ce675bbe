#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace liftcheck {

enum class Normalization { Raw, Normalized };

std::string_view to_string(Normalization n);
Normalization parse_normalization(std::string_view s);

// Flat token list plus the index where each source line starts, so
// instruction structure survives for the syntax and dataflow submetrics.
struct TokenSequence {
  std::vector<std::string> tokens;
  Normalization normalization = Normalization::Raw;
  std::vector<std::size_t> line_starts;

  bool empty() const { return tokens.empty(); }
  std::size_t size() const { return tokens.size(); }
};

// Treats the tokens as a single line.
TokenSequence make_sequence(std::vector<std::string> tokens);

// Splits on whitespace and commas, keeping commas as tokens. Normalized mode
// also drops comments and `.`-directives and strips numeric suffixes from
// `.L` local labels.
TokenSequence tokenize_asm(std::string_view text, Normalization mode);

// Sentence BLEU with clipped n-gram precision, brevity penalty and add-one
// smoothing for zero-match orders n >= 2. Empty candidate scores 0.
double bleu(const TokenSequence& candidate, const TokenSequence& reference, int max_n);

struct CodeBleuWeights {
  double ngram = 0.25;
  double weighted_ngram = 0.25;
  double syntax = 0.25;
  double dataflow = 0.25;

  void validate() const;  // non-negative, sums to 1
};

struct CodeBleuComponents {
  double ngram = 0;           // BLEU-4
  double weighted_ngram = 0;  // BLEU-4 with mnemonics weighted 5x in unigrams
  double syntax = 0;          // LCS over (mnemonic, operand-shape) per instruction
  double dataflow = 0;        // F1 over register def-use pairs, per function

  double combine(const CodeBleuWeights& w) const;
};

// Instruction summary used by the syntax submetric, e.g. "mov(reg,mem)".
std::vector<std::string> instruction_shapes(const TokenSequence& seq);

// Def-use pairs rendered as "def_mnemonic|r<canonical id>|use_mnemonic".
// Registers are folded to their family (eax -> a) and numbered by first
// appearance within each function.
std::vector<std::string> def_use_pairs(const TokenSequence& seq);

CodeBleuComponents codebleu_components(const TokenSequence& candidate,
                                       const TokenSequence& reference);
double codebleu(const TokenSequence& candidate, const TokenSequence& reference,
                const CodeBleuWeights& weights = {});

struct SimilarityScores {
  double bleu1 = 0;
  double bleu4 = 0;
  double codebleu = 0;
};

struct MetricsConfig {
  Normalization normalization = Normalization::Normalized;
  CodeBleuWeights weights;
};

SimilarityScores similarity(std::string_view candidate_asm,
                            std::string_view reference_asm,
                            const MetricsConfig& config = {});

struct AsmPair {
  std::string candidate;
  std::string reference;
};

// Reference loop; the parallel kernel must match it bit for bit.
std::vector<SimilarityScores> score_pairs_serial(std::span<const AsmPair> pairs,
                                                 const MetricsConfig& config = {});
// OpenMP kernel over pairs. threads <= 0 uses the OpenMP default.
std::vector<SimilarityScores> score_pairs(std::span<const AsmPair> pairs,
                                          const MetricsConfig& config = {},
                                          int threads = 0);

}  // namespace liftcheck

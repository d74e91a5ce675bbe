#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bleu_reference.hpp"
#include "liftcheck/metrics.hpp"

using namespace liftcheck;

namespace {

TokenSequence words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return make_sequence(out);
}

const char* kAsm = R"(	.file	"prog.c"
	.intel_syntax noprefix
	.text
	.globl	main
	.type	main, @function
main:
	push	rbp
	mov	rbp, rsp
	mov	DWORD PTR -4[rbp], 7
	mov	eax, DWORD PTR -4[rbp]
	add	eax, 3
	mov	edx, eax
	cmp	edx, 9
	jle	.L2
	call	func_1
.L2:
	mov	eax, 0
	pop	rbp
	ret   # done
)";

}  // namespace

TEST(Bleu, HandComputed) {
  const auto cand = words("the cat sat on the mat");
  const auto ref = words("the cat is on the mat");
  EXPECT_NEAR(bleu(cand, ref, 1), 5.0 / 6.0, 1e-15);
  // p1=5/6, p2=3/5, p3=1/4, p4 smoothed to 1/4.
  EXPECT_NEAR(bleu(cand, ref, 4), std::pow(2.0, -1.25), 1e-15);
}

TEST(Bleu, BrevityPenalty) {
  EXPECT_NEAR(bleu(words("the cat"), words("the cat sat on"), 1), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(bleu(words("the cat sat on"), words("the cat"), 1), 0.5, 1e-15);
}

TEST(Bleu, EdgeCases) {
  EXPECT_EQ(bleu(words(""), words("a b"), 4), 0.0);
  EXPECT_EQ(bleu(words("x y z"), words("a b c"), 4), 0.0);
  EXPECT_EQ(bleu(words("a b c d e"), words("a b c d e"), 4), 1.0);
  // Single matching token: higher orders have no n-grams and count as 1.
  EXPECT_NEAR(bleu(words("a"), words("a"), 4), 1.0, 1e-15);
}

TEST(Bleu, ClipsRepeatedTokens) {
  EXPECT_NEAR(bleu(words("the the the the"), words("the cat"), 1), 0.25, 1e-15);
}

TEST(Bleu, AgreesWithReferenceOnRandomPairs) {
  std::mt19937_64 rng(1234);
  std::uniform_int_distribution<int> len(0, 30);
  std::uniform_int_distribution<int> vocab(0, 6);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> c(len(rng)), r(len(rng) + 1);
    for (auto& t : c) t = "t" + std::to_string(vocab(rng));
    for (auto& t : r) t = "t" + std::to_string(vocab(rng));
    for (int n : {1, 2, 4}) {
      EXPECT_NEAR(bleu(make_sequence(c), make_sequence(r), n), testutil::reference_bleu(c, r, n),
                  1e-12);
    }
  }
}

TEST(Tokenize, RawKeepsEverything) {
  const auto seq = tokenize_asm("\tmov\teax, DWORD PTR -4[rbp]\n.L3:\n", Normalization::Raw);
  const std::vector<std::string> expect{"mov", "eax", ",", "DWORD", "PTR", "-4[rbp]", ".L3:"};
  EXPECT_EQ(seq.tokens, expect);
  EXPECT_EQ(seq.line_starts, (std::vector<std::size_t>{0, 6}));
}

TEST(Tokenize, NormalizedDropsDirectivesCommentsAndLabelNumbers) {
  const auto seq = tokenize_asm(kAsm, Normalization::Normalized);
  for (const auto& t : seq.tokens) {
    EXPECT_NE(t, ".file");
    EXPECT_NE(t, ".text");
    EXPECT_NE(t, "#");
    EXPECT_NE(t, "done");
    EXPECT_NE(t, ".L2");
  }
  EXPECT_NE(std::find(seq.tokens.begin(), seq.tokens.end(), ".L"), seq.tokens.end());
  EXPECT_NE(std::find(seq.tokens.begin(), seq.tokens.end(), ".L:"), seq.tokens.end());
  EXPECT_EQ(seq.tokens.front(), "main:");
}

TEST(Tokenize, RenumberedLabelsCompareEqual) {
  std::string other = kAsm;
  for (std::size_t p; (p = other.find(".L2")) != std::string::npos;) other.replace(p, 3, ".L17");
  const MetricsConfig norm;
  EXPECT_EQ(similarity(other, kAsm, norm).bleu4, 1.0);
  MetricsConfig raw;
  raw.normalization = Normalization::Raw;
  EXPECT_LT(similarity(other, kAsm, raw).bleu4, 1.0);
}

TEST(Syntax, InstructionShapes) {
  const auto shapes = instruction_shapes(tokenize_asm(kAsm, Normalization::Normalized));
  ASSERT_GE(shapes.size(), 5u);
  EXPECT_EQ(shapes[0], "push(reg)");
  EXPECT_EQ(shapes[1], "mov(reg,reg)");
  EXPECT_EQ(shapes[2], "mov(mem,imm)");
  EXPECT_EQ(shapes[3], "mov(reg,mem)");
  EXPECT_EQ(shapes.back(), "ret()");
}

TEST(Dataflow, DefUsePairsFoldRegisterFamilies) {
  const auto seq = tokenize_asm(
      "f:\n\tmov eax, 1\n\tadd eax, 2\n\tmov edx, eax\n\tcmp edx, 3\n", Normalization::Normalized);
  const auto pairs = def_use_pairs(seq);
  // eax is register 0, edx register 1, in order of first appearance.
  const std::vector<std::string> expect{"mov|r0|add", "add|r0|mov", "mov|r1|cmp"};
  EXPECT_EQ(pairs, expect);
}

TEST(Dataflow, RenamingRegistersKeepsPairs) {
  const auto a = tokenize_asm("f:\n\tmov eax, 1\n\tadd eax, 2\n\tmov edx, eax\n",
                              Normalization::Normalized);
  const auto b = tokenize_asm("f:\n\tmov ecx, 1\n\tadd ecx, 2\n\tmov esi, ecx\n",
                              Normalization::Normalized);
  EXPECT_EQ(def_use_pairs(a), def_use_pairs(b));
  EXPECT_EQ(codebleu_components(a, b).dataflow, 1.0);
  EXPECT_LT(codebleu_components(a, b).ngram, 1.0);
}

TEST(CodeBleu, IdentityIsOne) {
  const auto seq = tokenize_asm(kAsm, Normalization::Normalized);
  const auto c = codebleu_components(seq, seq);
  EXPECT_EQ(c.ngram, 1.0);
  EXPECT_EQ(c.weighted_ngram, 1.0);
  EXPECT_EQ(c.syntax, 1.0);
  EXPECT_EQ(c.dataflow, 1.0);
  EXPECT_EQ(codebleu(seq, seq), 1.0);
}

TEST(CodeBleu, CombineUsesWeights) {
  CodeBleuComponents c{0.2, 0.4, 0.6, 0.8};
  EXPECT_NEAR(c.combine({}), 0.5, 1e-15);
  EXPECT_NEAR(c.combine({1, 0, 0, 0}), 0.2, 1e-15);
  EXPECT_NEAR(c.combine({0, 0, 0.5, 0.5}), 0.7, 1e-15);
}

TEST(CodeBleu, WeightValidation) {
  EXPECT_NO_THROW(CodeBleuWeights{}.validate());
  EXPECT_THROW((CodeBleuWeights{0.5, 0.5, 0.5, -0.5}.validate()), std::invalid_argument);
  EXPECT_THROW((CodeBleuWeights{0.3, 0.3, 0.3, 0.3}.validate()), std::invalid_argument);
}

TEST(CodeBleu, ComponentsStayInUnitRange) {
  std::mt19937_64 rng(99);
  const char* mnemonics[] = {"mov", "add", "sub", "imul", "xor", "cmp", "jne", "lea"};
  const char* regs[] = {"eax", "ebx", "ecx", "edx", "rsi", "rdi", "r8d", "7", "DWORD PTR [rbp-4]"};
  auto random_asm = [&] {
    std::string s = "main:\n";
    const int n = static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i)
      s += std::string("\t") + mnemonics[rng() % 8] + " " + regs[rng() % 6] + ", " +
           regs[rng() % 9] + "\n";
    return s;
  };
  for (int i = 0; i < 100; ++i) {
    const auto a = tokenize_asm(random_asm(), Normalization::Normalized);
    const auto b = tokenize_asm(random_asm(), Normalization::Normalized);
    const auto c = codebleu_components(a, b);
    for (double v : {c.ngram, c.weighted_ngram, c.syntax, c.dataflow}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Similarity, ParallelMatchesSerialBitForBit) {
  std::vector<AsmPair> pairs;
  std::string mutated = kAsm;
  for (int i = 0; i < 64; ++i) {
    mutated += "\tadd\teax, " + std::to_string(i) + "\n";
    pairs.push_back({mutated, kAsm});
  }
  const auto serial = score_pairs_serial(pairs);
  for (int threads : {1, 2, 4}) {
    const auto par = score_pairs(pairs, {}, threads);
    ASSERT_EQ(par.size(), serial.size());
    for (std::size_t i = 0; i < par.size(); ++i) {
      EXPECT_EQ(par[i].bleu1, serial[i].bleu1);
      EXPECT_EQ(par[i].bleu4, serial[i].bleu4);
      EXPECT_EQ(par[i].codebleu, serial[i].codebleu);
    }
  }
}

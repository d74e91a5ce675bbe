#include "liftcheck/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace liftcheck {

std::string render_fraction(std::uint64_t num, std::uint64_t den, int decimals) {
  if (den == 0) throw StatsError("render_fraction: zero denominator");
  std::uint64_t scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  // round half up: floor((2 * num * scale + den) / (2 * den))
  const unsigned __int128 scaled =
      (static_cast<unsigned __int128>(num) * scale * 2 + den) / (2 * static_cast<unsigned __int128>(den));
  const auto whole = static_cast<std::uint64_t>(scaled / scale);
  const auto frac = static_cast<std::uint64_t>(scaled % scale);
  std::string out = std::to_string(whole);
  if (decimals > 0) {
    std::string f = std::to_string(frac);
    out += "." + std::string(static_cast<std::size_t>(decimals) - f.size(), '0') + f;
  }
  return out;
}

std::string SemanticScore::ratio_string(int decimals) const {
  return render_fraction(correct, tested, decimals);
}

std::string SemanticScore::percent_string(int decimals) const {
  return render_fraction(correct * 100, tested, decimals) + "%";
}

SemanticScore semantic_score(std::uint64_t correct, std::uint64_t tested) {
  if (tested == 0) throw StatsError("semantic score undefined: no tested programs");
  if (correct > tested) throw StatsError("semantic score: correct exceeds tested");
  return {correct, tested};
}

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_tailed(double t, double df) {
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return std::clamp(regularized_incomplete_beta(df / 2.0, 0.5, x), 0.0, 1.0);
}

CorrelationResult point_biserial(std::span<const double> scores, const std::vector<bool>& pass) {
  if (scores.size() != pass.size())
    throw StatsError("point_biserial: scores and labels differ in length");
  const std::size_t n = scores.size();
  if (n < 3) throw StatsError("point_biserial: need at least 3 observations");

  CorrelationResult res;
  double sum_pass = 0, sum_fail = 0, sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += scores[i];
    if (pass[i]) {
      ++res.n_pass;
      sum_pass += scores[i];
    } else {
      ++res.n_fail;
      sum_fail += scores[i];
    }
  }
  if (res.n_pass == 0 || res.n_fail == 0)
    throw StatsError("point_biserial: one label class is empty");
  const double nd = static_cast<double>(n);
  const double mean = sum / nd;
  double ss = 0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  const double sd = std::sqrt(ss / nd);
  if (!(sd > 0)) throw StatsError("point_biserial: zero score variance");

  res.pass_mean = sum_pass / static_cast<double>(res.n_pass);
  res.fail_mean = sum_fail / static_cast<double>(res.n_fail);
  const double np = static_cast<double>(res.n_pass), nf = static_cast<double>(res.n_fail);
  res.r = std::clamp((res.pass_mean - res.fail_mean) / sd * std::sqrt(np * nf / (nd * nd)),
                     -1.0, 1.0);

  const double df = nd - 2.0;
  const double one_minus_r2 = 1.0 - res.r * res.r;
  const double t = one_minus_r2 <= 0.0 ? std::copysign(std::numeric_limits<double>::infinity(), res.r)
                                       : res.r * std::sqrt(df / one_minus_r2);
  res.p_value = student_t_two_tailed(t, df);
  return res;
}

DistributionSummary distribution_summary(std::span<const double> scores) {
  if (scores.empty()) throw StatsError("distribution_summary: empty input");
  std::vector<double> v(scores.begin(), scores.end());
  std::sort(v.begin(), v.end());
  auto quantile = [&](double p) {
    const double h = (static_cast<double>(v.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
  };
  DistributionSummary s;
  s.count = v.size();
  s.min = v.front();
  s.max = v.back();
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  double sum = 0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  return s;
}

std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

}  // namespace liftcheck

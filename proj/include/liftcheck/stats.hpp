#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "liftcheck/toolchain.hpp"

namespace liftcheck {

class StatsError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// correct / tested, kept as an exact rational for rendering.
struct SemanticScore {
  std::uint64_t correct = 0;
  std::uint64_t tested = 0;

  double value() const { return static_cast<double>(correct) / static_cast<double>(tested); }
  // Round-half-up decimal rendering of the ratio, e.g. "0.3301".
  std::string ratio_string(int decimals = 4) const;
  // e.g. "33.01%"
  std::string percent_string(int decimals = 2) const;
};

// Throws StatsError when tested == 0 or correct > tested.
SemanticScore semantic_score(std::uint64_t correct, std::uint64_t tested);

// Renders numerator/denominator as a rounded decimal without going through
// floating point.
std::string render_fraction(std::uint64_t num, std::uint64_t den, int decimals);

struct CorrelationResult {
  std::string metric_name;
  OptLevel opt_level = OptLevel::O0;
  std::size_t n_pass = 0;
  std::size_t n_fail = 0;
  double pass_mean = 0;
  double fail_mean = 0;
  double r = 0;
  double p_value = 1;
};

// r = (M_pass - M_fail) / s_n * sqrt(n_pass * n_fail / n^2), s_n the
// population standard deviation; two-tailed p from Student's t with n-2 df.
// Throws StatsError on length mismatch, n < 3, a missing class or zero variance.
CorrelationResult point_biserial(std::span<const double> scores,
                                 const std::vector<bool>& pass);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);
// P(|T| >= |t|) for Student's t with df degrees of freedom.
double student_t_two_tailed(double t, double df);

struct DistributionSummary {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0;
  std::size_t count = 0;
};

// Quartiles by linear interpolation between closest ranks (inclusive).
// Throws StatsError on empty input.
DistributionSummary distribution_summary(std::span<const double> scores);

std::string significance_stars(double p);

}  // namespace liftcheck

#pragma once

#include <optional>
#include <span>
#include <vector>

namespace xalign {

struct StatsResult {
  double t = 0.0;
  int df = 0;
  double p = 1.0;  // two-sided
  std::optional<double> q;
  int n = 0;
  double mean_difference = 0.0;
};

/// Paired t-test on a - b with sample (ddof 1) standard deviation.
/// Throws NumericError("degenerate differences") when the differences have
/// zero variance.
StatsResult paired_t(std::span<const double> a, std::span<const double> b);

/// Benjamini-Hochberg step-up adjusted p-values, returned in input order.
std::vector<double> bh_fdr(std::span<const double> p_values);

/// Sample standard deviation / sqrt(n).
double standard_error(std::span<const double> values);

double mean(std::span<const double> values);

/// I_x(a, b), continued-fraction evaluation (modified Lentz).
double regularized_incomplete_beta(double a, double b, double x);

/// P(T <= t) for Student's t with `df` degrees of freedom.
double student_t_cdf(double t, double df);

/// P(|T| >= |t|).
double student_t_two_sided_p(double t, double df);

}  // namespace xalign

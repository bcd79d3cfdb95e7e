#pragma once

#include <span>
#include <string>
#include <vector>

namespace cpte {

struct FeatureTable;

struct TTestResult {
  double t_statistic = 0.0;
  double degrees_of_freedom = 0.0;
  double p_value = 1.0;
  double median_a = 0.0;
  double median_b = 0.0;
};

// Regularized incomplete beta I_x(a, b), continued fraction (modified Lentz).
double incomplete_beta(double a, double b, double x);

// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
double student_t_two_sided(double t, double df);

double median(std::vector<double> v);

// Two-sided Welch test with Welch-Satterthwaite degrees of freedom.
// Both groups constant: p = 1 if the means agree, 0 otherwise.
TTestResult welch_ttest(std::span<const double> a, std::span<const double> b);

enum class SummaryUnit { Epoch, SubjectMean };

struct GroupSummary {
  std::string feature;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  TTestResult test;
};

// `feature` is a column name ("CC_Fp1") or a measure name ("CC", "SC", "EC")
// meaning that measure's node average per row. GroupA is `a`, GroupB is `b`.
GroupSummary group_summary(const FeatureTable& table, const std::string& feature,
                           SummaryUnit unit = SummaryUnit::Epoch);

}  // namespace cpte

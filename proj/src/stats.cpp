#include "cpte/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "cpte/error.hpp"
#include "cpte/features.hpp"

namespace cpte {

namespace {

// Continued fraction for I_x(a, b), valid for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 100000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw Error("beta_nonconvergence", "incomplete beta continued fraction did not converge");
}

// I_x(a, b) with y = 1 - x supplied separately to avoid cancellation.
double incomplete_beta_xy(double a, double b, double x, double y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double log_front =
      a * std::log(x) + b * std::log(y) - (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, y) / b;
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments moments(std::span<const double> v) {
  Moments m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  for (double x : v) m.var += (x - m.mean) * (x - m.mean);
  m.var /= static_cast<double>(v.size() - 1);
  return m;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error("bad_argument", "incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw Error("bad_argument", "incomplete beta needs x in [0, 1]");
  return incomplete_beta_xy(a, b, x, 1.0 - x);
}

double student_t_two_sided(double t, double df) {
  if (!(df > 0.0)) throw Error("bad_argument", "degrees of freedom must be positive");
  if (std::isnan(t)) throw Error("bad_argument", "t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  const double x = df / (df + t2);
  const double y = t2 / (df + t2);
  return std::clamp(incomplete_beta_xy(df / 2.0, 0.5, x, y), 0.0, 1.0);
}

double median(std::vector<double> v) {
  if (v.empty()) throw Error("empty_input", "median of an empty sequence");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

TTestResult welch_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw Error("insufficient_samples", "each group needs at least 2 samples");
  const Moments ma = moments(a);
  const Moments mb = moments(b);
  TTestResult r;
  r.median_a = median({a.begin(), a.end()});
  r.median_b = median({b.begin(), b.end()});

  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double sa = ma.var / na;
  const double sb = mb.var / nb;
  const double se2 = sa + sb;
  const double diff = ma.mean - mb.mean;
  if (se2 == 0.0) {
    r.degrees_of_freedom = na + nb - 2.0;
    if (diff == 0.0) {
      r.t_statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.t_statistic = diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
    }
    return r;
  }
  r.t_statistic = diff / std::sqrt(se2);
  r.degrees_of_freedom = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  r.p_value = student_t_two_sided(r.t_statistic, r.degrees_of_freedom);
  return r;
}

GroupSummary group_summary(const FeatureTable& table, const std::string& feature, SummaryUnit unit) {
  const std::vector<double> column = table.feature_values(feature);
  std::vector<double> a, b;
  if (unit == SummaryUnit::Epoch) {
    for (std::size_t r = 0; r < table.rows(); ++r)
      (table.labels[r] == Group::A ? a : b).push_back(column[r]);
  } else {
    std::map<std::string, std::pair<double, std::size_t>> sums;
    std::map<std::string, Group> groups;
    for (std::size_t r = 0; r < table.rows(); ++r) {
      auto& s = sums[table.subject_ids[r]];
      s.first += column[r];
      ++s.second;
      groups[table.subject_ids[r]] = table.labels[r];
    }
    for (const auto& [subject, s] : sums)
      (groups[subject] == Group::A ? a : b).push_back(s.first / static_cast<double>(s.second));
  }
  if (a.empty() || b.empty()) throw Error("single_group", "group summary needs rows from both groups");
  GroupSummary out;
  out.feature = feature;
  out.n_a = a.size();
  out.n_b = b.size();
  out.test = welch_ttest(a, b);
  return out;
}

}  // namespace cpte

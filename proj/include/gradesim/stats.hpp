#pragma once

#include <utility>
#include <vector>

namespace gradesim {

double mean(const std::vector<double>& x);
/// Sample standard deviation (n - 1); 0 for fewer than two values.
double stddev(const std::vector<double>& x);

/// Ranks starting at 1, ties receive their average rank.
std::vector<double> ranks(const std::vector<double>& x);
/// Spearman rank correlation (Pearson on average ranks). NaN if either side is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

struct SignTest {
  int positive = 0;
  int negative = 0;
  int ties = 0;
  double p_value = 1.0;  // two-sided exact binomial, ties dropped
};
SignTest sign_test(const std::vector<double>& deltas);

double chi2_quantile(double p, double dof);

/// Two-sided envelope for the average NEES of `runs` runs of a `dim`-dimensional
/// state: chi2 quantiles of runs*dim degrees of freedom divided by runs.
std::pair<double, double> anees_bounds(int runs, int dim, double confidence = 0.95);

}  // namespace gradesim

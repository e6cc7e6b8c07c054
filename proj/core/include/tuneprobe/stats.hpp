#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace tuneprobe {

/// Two equal-length finite series with at least three pairs.
struct PairedSeries {
  std::vector<double> x;
  std::vector<double> y;

  PairedSeries(std::vector<double> xs, std::vector<double> ys);
};

double pearson(const PairedSeries& s);

/// Pearson correlation of mid-ranks.
double spearman(const PairedSeries& s);

/// Mid-ranks (1-based); ties share the mean of their positions.
std::vector<double> mid_ranks(std::span<const double> v);

/// Coefficient of determination of an OLS fit with intercept. `features` is
/// n x k, one observation per row.
double multiple_r2(const Eigen::MatrixXd& features, std::span<const double> y);

enum class TestStatistic { MeanDiff, Slope };

std::string_view to_string(TestStatistic s);

/// MeanDiff: mean(a) - mean(b) over two independent groups.
/// Slope: OLS slope of b on a, with a and b paired (equal length).
double test_statistic(std::span<const double> a, std::span<const double> b, TestStatistic statistic);

/// Two-sided p = (1 + #{|stat_perm| >= |stat_obs|}) / (1 + n_perm). MeanDiff
/// shuffles group labels; Slope shuffles b against a.
double permutation_test(std::span<const double> a, std::span<const double> b, TestStatistic statistic,
                        int n_perm = 10000, std::uint64_t seed = 1);

/// Same count over every distinct relabeling (MeanDiff: all group splits;
/// Slope: all orderings of b). The observed labeling is included, so the
/// result is #{|stat| >= |obs|} / #relabelings.
double exact_permutation_test(std::span<const double> a, std::span<const double> b, TestStatistic statistic);

/// |mean(a) - mean(b)| / sqrt((var(a) + var(b)) / 2), sample variances.
double d_prime(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> v);
double sample_variance(std::span<const double> v);

}  // namespace tuneprobe

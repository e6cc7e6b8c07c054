#include "tuneprobe/stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "tuneprobe/error.hpp"

namespace tuneprobe {

PairedSeries::PairedSeries(std::vector<double> xs, std::vector<double> ys) : x(std::move(xs)), y(std::move(ys)) {
  if (x.size() != y.size()) fail(ErrorKind::ShapeMismatch, "paired series lengths differ");
  if (x.size() < 3) fail(ErrorKind::InvalidArgument, "paired series need at least three pairs");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) fail(ErrorKind::NonFinite, "paired series contain non-finite values");
  }
}

double mean(std::span<const double> v) {
  if (v.empty()) fail(ErrorKind::EmptySet, "mean of an empty list");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
  if (v.size() < 2) fail(ErrorKind::InvalidArgument, "sample variance needs at least two values");
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

namespace {

double correlation(std::span<const double> x, std::span<const double> y) {
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) fail(ErrorKind::ZeroVariance, "correlation with a constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double slope(std::span<const double> x, std::span<const double> y) {
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) fail(ErrorKind::ZeroVariance, "slope against a constant predictor");
  return sxy / sxx;
}

void check_groups(std::span<const double> a, std::span<const double> b, TestStatistic statistic) {
  if (a.size() < 2 || b.size() < 2) fail(ErrorKind::InvalidArgument, "each group needs at least two values");
  if (statistic == TestStatistic::Slope && a.size() != b.size()) {
    fail(ErrorKind::ShapeMismatch, "slope statistic needs paired series of equal length");
  }
}

// Relative slack so relabelings that reproduce the observed statistic up to
// rounding still count as extreme.
bool at_least_as_extreme(double stat, double observed) {
  return std::abs(stat) >= std::abs(observed) - 1e-12 * std::max(1.0, std::abs(observed));
}

}  // namespace

double pearson(const PairedSeries& s) { return correlation(s.x, s.y); }

std::vector<double> mid_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(const PairedSeries& s) {
  const auto rx = mid_ranks(s.x);
  const auto ry = mid_ranks(s.y);
  return correlation(rx, ry);
}

double multiple_r2(const Eigen::MatrixXd& features, std::span<const double> y) {
  const Eigen::Index n = features.rows();
  const Eigen::Index k = features.cols();
  if (static_cast<Eigen::Index>(y.size()) != n) fail(ErrorKind::ShapeMismatch, "feature rows and targets differ");
  if (n <= k + 1) fail(ErrorKind::RankDeficient, "multiple correlation needs more observations than features + 1");
  Eigen::MatrixXd design(n, k + 1);
  design.col(0).setOnes();
  design.rightCols(k) = features;
  const Eigen::Map<const Eigen::VectorXd> target(y.data(), n);

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < k + 1) fail(ErrorKind::RankDeficient, "design matrix is rank deficient");
  const Eigen::VectorXd beta = qr.solve(target);
  const Eigen::VectorXd residual = target - design * beta;
  const double ss_res = residual.squaredNorm();
  const double ss_tot = (target.array() - target.mean()).matrix().squaredNorm();
  if (ss_tot == 0.0) fail(ErrorKind::ZeroVariance, "multiple correlation with a constant target");
  return std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
}

std::string_view to_string(TestStatistic s) { return s == TestStatistic::MeanDiff ? "mean_diff" : "slope"; }

double test_statistic(std::span<const double> a, std::span<const double> b, TestStatistic statistic) {
  check_groups(a, b, statistic);
  if (statistic == TestStatistic::MeanDiff) return mean(a) - mean(b);
  return slope(a, b);
}

double permutation_test(std::span<const double> a, std::span<const double> b, TestStatistic statistic, int n_perm,
                        std::uint64_t seed) {
  check_groups(a, b, statistic);
  if (n_perm < 1) fail(ErrorKind::InvalidArgument, "n_perm must be positive");
  const double observed = test_statistic(a, b, statistic);
  std::mt19937_64 rng(seed);
  std::int64_t count = 0;
  if (statistic == TestStatistic::MeanDiff) {
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto na = static_cast<std::ptrdiff_t>(a.size());
    for (int p = 0; p < n_perm; ++p) {
      std::shuffle(pooled.begin(), pooled.end(), rng);
      const double stat = mean(std::span<const double>(pooled.data(), static_cast<std::size_t>(na))) -
                          mean(std::span<const double>(pooled.data() + na, pooled.size() - static_cast<std::size_t>(na)));
      if (at_least_as_extreme(stat, observed)) ++count;
    }
  } else {
    std::vector<double> shuffled(b.begin(), b.end());
    for (int p = 0; p < n_perm; ++p) {
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      if (at_least_as_extreme(slope(a, shuffled), observed)) ++count;
    }
  }
  return static_cast<double>(1 + count) / static_cast<double>(1 + n_perm);
}

double exact_permutation_test(std::span<const double> a, std::span<const double> b, TestStatistic statistic) {
  check_groups(a, b, statistic);
  const double observed = test_statistic(a, b, statistic);
  std::int64_t count = 0;
  std::int64_t total = 0;
  if (statistic == TestStatistic::MeanDiff) {
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    if (pooled.size() > 30) fail(ErrorKind::InvalidArgument, "exhaustive enumeration limited to 30 values");
    std::vector<bool> in_a(pooled.size(), false);
    std::fill(in_a.begin(), in_a.begin() + static_cast<std::ptrdiff_t>(a.size()), true);
    std::vector<double> ga, gb;
    do {
      ga.clear();
      gb.clear();
      for (std::size_t i = 0; i < pooled.size(); ++i) (in_a[i] ? ga : gb).push_back(pooled[i]);
      if (at_least_as_extreme(mean(ga) - mean(gb), observed)) ++count;
      ++total;
    } while (std::prev_permutation(in_a.begin(), in_a.end()));
  } else {
    if (b.size() > 10) fail(ErrorKind::InvalidArgument, "exhaustive enumeration limited to 10 pairs");
    std::vector<std::size_t> order(b.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> y(b.size());
    do {
      for (std::size_t i = 0; i < order.size(); ++i) y[i] = b[order[i]];
      if (at_least_as_extreme(slope(a, y), observed)) ++count;
      ++total;
    } while (std::next_permutation(order.begin(), order.end()));
  }
  return static_cast<double>(count) / static_cast<double>(total);
}

double d_prime(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) fail(ErrorKind::InvalidArgument, "d' needs at least two values per group");
  const double va = sample_variance(a);
  const double vb = sample_variance(b);
  if (!std::isfinite(va) || !std::isfinite(vb)) fail(ErrorKind::NonFinite, "d' with non-finite variance");
  if (va == 0.0 && vb == 0.0) fail(ErrorKind::ZeroVariance, "d' with zero variance in both groups");
  return std::abs(mean(a) - mean(b)) / std::sqrt(0.5 * (va + vb));
}

}  // namespace tuneprobe

#include "gibbsnls/weighted_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "gibbsnls/random_stream.hpp"

namespace gibbsnls {

double weighted_mean(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size()) throw std::invalid_argument("weighted_mean: size mismatch");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    num += weights[i] * values[i];
    den += weights[i];
  }
  if (!(den > 0.0)) throw std::domain_error("weighted_mean: weights sum to zero");
  return num / den;
}

double bootstrap_se(std::span<const double> values, std::span<const double> weights,
                    std::size_t reps, std::uint64_t seed, std::uint64_t stream_base) {
  const std::size_t n = values.size();
  if (n < 2 || reps < 2) return 0.0;
  std::vector<double> means;
  means.reserve(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    CounterStream stream(seed, stream_base + r, StreamTag::kResample);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const auto i = static_cast<std::size_t>(stream.below(n));
      num += weights[i] * values[i];
      den += weights[i];
    }
    if (den > 0.0) means.push_back(num / den);
  }
  if (means.size() < 2) return 0.0;
  const double m = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(means.size());
  double ss = 0.0;
  for (double v : means) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(means.size() - 1));
}

namespace {

struct Pool {
  std::vector<double> value;   // sorted ascending
  std::vector<double> weight;
  std::vector<char> from_x;
  std::vector<std::size_t> group_end;  // end index of each run of equal values
};

Pool make_pool(std::span<const double> x, std::span<const double> wx, std::span<const double> y,
               std::span<const double> wy) {
  std::vector<std::size_t> order(x.size() + y.size());
  std::iota(order.begin(), order.end(), 0);
  auto val = [&](std::size_t i) { return i < x.size() ? x[i] : y[i - x.size()]; };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return val(a) < val(b); });
  Pool pool;
  for (std::size_t i : order) {
    pool.value.push_back(val(i));
    pool.weight.push_back(i < x.size() ? wx[i] : wy[i - x.size()]);
    pool.from_x.push_back(i < x.size() ? 1 : 0);
  }
  for (std::size_t i = 0; i < pool.value.size(); ++i) {
    if (i + 1 == pool.value.size() || pool.value[i + 1] != pool.value[i]) pool.group_end.push_back(i + 1);
  }
  return pool;
}

// KS distance between the two groups described by multiplicities ca, cb.
double pool_distance(const Pool& pool, const std::vector<double>& ca, const std::vector<double>& cb) {
  double ta = 0.0;
  double tb = 0.0;
  for (std::size_t i = 0; i < pool.value.size(); ++i) {
    ta += ca[i] * pool.weight[i];
    tb += cb[i] * pool.weight[i];
  }
  if (!(ta > 0.0) || !(tb > 0.0)) return 0.0;
  double fa = 0.0;
  double fb = 0.0;
  double best = 0.0;
  std::size_t i = 0;
  for (std::size_t end : pool.group_end) {
    for (; i < end; ++i) {
      fa += ca[i] * pool.weight[i];
      fb += cb[i] * pool.weight[i];
    }
    best = std::max(best, std::abs(fa / ta - fb / tb));
  }
  return best;
}

}  // namespace

double weighted_ks_statistic(std::span<const double> x, std::span<const double> wx,
                             std::span<const double> y, std::span<const double> wy) {
  const Pool pool = make_pool(x, wx, y, wy);
  std::vector<double> ca(pool.value.size());
  std::vector<double> cb(pool.value.size());
  for (std::size_t i = 0; i < pool.value.size(); ++i) {
    ca[i] = pool.from_x[i] ? 1.0 : 0.0;
    cb[i] = 1.0 - ca[i];
  }
  return pool_distance(pool, ca, cb);
}

KsResult weighted_ks_test(std::span<const double> x, std::span<const double> wx,
                          std::span<const double> y, std::span<const double> wy, std::size_t reps,
                          std::uint64_t seed, std::uint64_t stream_base) {
  if (x.size() != wx.size() || y.size() != wy.size()) throw std::invalid_argument("weighted_ks_test: size mismatch");
  KsResult result;
  result.statistic = weighted_ks_statistic(x, wx, y, wy);
  if (x.empty() || y.empty() || reps == 0) return result;
  const Pool pool = make_pool(x, wx, y, wy);
  const std::size_t total = pool.value.size();
  std::vector<double> ca(total);
  std::vector<double> cb(total);
  std::size_t exceed = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    std::fill(ca.begin(), ca.end(), 0.0);
    std::fill(cb.begin(), cb.end(), 0.0);
    CounterStream stream(seed, stream_base + r, StreamTag::kResample);
    for (std::size_t k = 0; k < x.size(); ++k) ca[stream.below(total)] += 1.0;
    for (std::size_t k = 0; k < y.size(); ++k) cb[stream.below(total)] += 1.0;
    if (pool_distance(pool, ca, cb) >= result.statistic) ++exceed;
  }
  result.p_value = static_cast<double>(1 + exceed) / static_cast<double>(1 + reps);
  return result;
}

double pooled_z(double mean_a, double se_a, double mean_b, double se_b) {
  const double diff = mean_b - mean_a;
  if (diff == 0.0) return 0.0;
  const double se = std::sqrt(se_a * se_a + se_b * se_b);
  if (se == 0.0) return std::copysign(std::numeric_limits<double>::infinity(), diff);
  return diff / se;
}

}  // namespace gibbsnls

#include "trt/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "trt/codecs.hpp"
#include "trt/error.hpp"

namespace trt {

std::int64_t bucket_start(std::int64_t t, std::int64_t bucket, std::int64_t origin) {
  require(bucket > 0, "bucket width must be positive");
  // Work in unsigned arithmetic so t - origin cannot overflow.
  const auto offset = static_cast<std::uint64_t>(t) - static_cast<std::uint64_t>(origin);
  const auto signed_offset = static_cast<std::int64_t>(offset);
  std::int64_t k = signed_offset / bucket;
  if (signed_offset % bucket != 0 && signed_offset < 0) --k;
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(origin) +
                                   static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(bucket));
}

namespace {

struct Fold {
  std::size_t count = 0;
  double sum = 0;
  double min = std::numeric_limits<double>::quiet_NaN();
  double max = std::numeric_limits<double>::quiet_NaN();

  void add(double v) {
    ++count;
    sum += v;
    if (std::isnan(v)) return;
    if (std::isnan(min) || v < min) min = v;
    if (std::isnan(max) || v > max) max = v;
  }

  double result(AggFn fn) const {
    switch (fn) {
      case AggFn::count: return static_cast<double>(count);
      case AggFn::sum: return sum;
      case AggFn::avg: return sum / static_cast<double>(count);
      case AggFn::min: return min;
      case AggFn::max: return max;
    }
    return 0;
  }
};

// Neumaier-compensated running sum. The window area is a long chain of
// additions and subtractions of large terms that nearly cancel, so plain
// accumulation drifts once the window is short relative to the gaps.
class CompensatedSum {
 public:
  explicit CompensatedSum(double init = 0) : sum_(init) {}
  CompensatedSum& operator+=(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      c_ += (sum_ - t) + x;
    } else {
      c_ += (x - t) + sum_;
    }
    sum_ = t;
    return *this;
  }
  CompensatedSum& operator-=(double x) { return *this += -x; }
  // Adds x * y without rounding the product first.
  void add_product(double x, double y) {
    const double p = x * y;
    *this += p;
    *this += std::fma(x, y, -p);
  }
  [[nodiscard]] double value() const { return sum_ + c_; }

 private:
  double sum_ = 0;
  double c_ = 0;
};

}  // namespace

std::vector<BucketValue> resample(std::span<const std::int64_t> times, std::span<const double> values,
                                  std::int64_t bucket, AggFn fn, std::int64_t origin) {
  require(bucket > 0, "bucket width must be positive");
  require(times.size() == values.size(), "times and values differ in length");
  std::vector<BucketValue> out;
  Fold fold;
  std::int64_t current = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    require(i == 0 || times[i - 1] <= times[i], "times must be non-decreasing");
    const auto b = bucket_start(times[i], bucket, origin);
    if (fold.count > 0 && b != current) {
      out.push_back({current, fold.result(fn)});
      fold = Fold{};
    }
    current = b;
    fold.add(values[i]);
  }
  if (fold.count > 0) out.push_back({current, fold.result(fn)});
  return out;
}

std::vector<SmaPoint> sma(std::span<const std::int64_t> times, std::span<const double> values, std::int64_t tau) {
  require(tau > 0, "sma horizon must be positive");
  require(times.size() == values.size(), "times and values differ in length");
  require(!times.empty(), "sma needs at least one observation");
  const auto& T = times;
  const auto& X = values;
  const auto dt = [&](std::size_t a, std::size_t b) { return static_cast<double>(T[b] - T[a]); };
  const double width = static_cast<double>(tau);

  std::vector<SmaPoint> out;
  out.reserve(T.size());
  std::size_t left = 0;
  double left_x = X[0];
  double left_dt = width;
  CompensatedSum area;
  area.add_product(left_x, left_dt);
  out.push_back({T[0], X[0]});
  for (std::size_t right = 1; right < T.size(); ++right) {
    require(T[right - 1] <= T[right], "times must be non-decreasing");
    // Expand the interval on the right end.
    area.add_product(X[right - 1], dt(right - 1, right));
    area.add_product(-left_x, left_dt);
    // Shrink the interval on the left end.
    const std::int64_t t_left_new = T[right] - tau;
    while (T[left] <= t_left_new) {
      area.add_product(-X[left], dt(left, left + 1));
      ++left;
    }
    // Partial segment between the new window start and T[left].
    left_x = X[left == 0 ? 0 : left - 1];
    left_dt = static_cast<double>(T[left] - t_left_new);
    area.add_product(left_x, left_dt);
    out.push_back({T[right], area.value() / width});
  }
  return out;
}

const char* to_string(Spacing s) noexcept {
  return s == Spacing::evenly_spaced ? "evenly-spaced" : "unevenly-spaced";
}

double quantile(std::vector<double> values, double q) {
  require(!values.empty(), "quantile of an empty set");
  require(q >= 0 && q <= 1, "quantile outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

SpacingReport spacing_report(std::span<const std::int64_t> times) {
  require(times.size() >= 2, "spacing report needs at least two observations");
  std::vector<double> deltas;
  deltas.reserve(times.size() - 1);
  for (std::size_t i = 1; i < times.size(); ++i) deltas.push_back(static_cast<double>(times[i] - times[i - 1]));
  SpacingReport r;
  r.mad = mad(deltas);
  r.iqr = quantile(deltas, 0.75) - quantile(deltas, 0.25);
  r.classification = r.mad == 0 ? Spacing::evenly_spaced : Spacing::unevenly_spaced;
  return r;
}

}  // namespace trt

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "trt/types.hpp"

namespace trt {

struct BucketValue {
  std::int64_t start = 0;
  double value = 0;

  friend bool operator==(const BucketValue&, const BucketValue&) = default;
};

// Floor of t to a multiple of `bucket` ticks counted from `origin`.
[[nodiscard]] std::int64_t bucket_start(std::int64_t t, std::int64_t bucket, std::int64_t origin = 0);

// Groups observations into buckets aligned to multiples of `bucket` ticks
// from `origin` and folds each non-empty bucket with `fn`. Empty buckets are
// omitted. Times must be non-decreasing. Throws contract_violation for
// bucket <= 0 or mismatched lengths.
[[nodiscard]] std::vector<BucketValue> resample(std::span<const std::int64_t> times, std::span<const double> values,
                                                std::int64_t bucket, AggFn fn, std::int64_t origin = 0);

struct SmaPoint {
  std::int64_t time = 0;
  double value = 0;
};

// Simple moving average over a horizon of tau ticks for an unevenly spaced
// series, treating it as a last-observation-carried-forward step function.
// The window before the first observation is padded with values[0]. Runs
// in O(n) by maintaining the window area incrementally.
[[nodiscard]] std::vector<SmaPoint> sma(std::span<const std::int64_t> times, std::span<const double> values,
                                        std::int64_t tau);

enum class Spacing { evenly_spaced, unevenly_spaced };
[[nodiscard]] const char* to_string(Spacing s) noexcept;

struct SpacingReport {
  double mad = 0;
  double iqr = 0;
  Spacing classification = Spacing::evenly_spaced;
};

// Quartile with linear interpolation between order statistics.
[[nodiscard]] double quantile(std::vector<double> values, double q);

// MAD and IQR of the consecutive deltas. Evenly spaced iff MAD == 0.
[[nodiscard]] SpacingReport spacing_report(std::span<const std::int64_t> times);

}  // namespace trt

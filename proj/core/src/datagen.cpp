#include "trt/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "trt/error.hpp"

namespace trt {

namespace {

// Nearest double to a multiple of step, for steps of the form 1/n.
double round_to(double v, double step) {
  const double n = std::round(1.0 / step);
  return std::round(v * n) / n;
}

std::string default_name(std::string_view preset) {
  std::string s(preset);
  std::replace(s.begin(), s.end(), '-', '_');
  return s;
}

Dataset srbench_like(const GenOptions& o) {
  Dataset d;
  d.schema.name = o.series.empty() ? "srbench_like" : o.series;
  d.schema.precision = o.precision.value_or(TimestampPrecision::seconds);
  d.schema.ts_codec = TsCodec::delta_rle_rice;
  const std::int64_t tps = ticks_per_second(d.schema.precision);
  const std::int64_t period = o.period.value_or(600 * tps);
  const std::int64_t jitter = o.jitter.value_or(0);
  static constexpr const char* kNames[] = {"air_temperature", "relative_humidity", "wind_speed",
                                           "wind_direction",  "pressure",          "visibility"};
  const std::size_t ncols = o.columns.value_or(6);
  for (std::size_t c = 0; c < ncols; ++c) {
    d.schema.columns.push_back({c < 6 ? kNames[c] : "field" + std::to_string(c), ColumnType::float64});
  }
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> step(0.0, 0.3);
  std::uniform_int_distribution<std::int64_t> jit(-jitter, jitter);
  std::bernoulli_distribution missing(0.01);
  std::vector<double> level{-2.0, 80.0, 12.0, 270.0, 1012.0, 8.0};
  std::int64_t t = o.start * tps;
  d.rows.reserve(o.rows);
  for (std::size_t i = 0; i < o.rows; ++i) {
    Row r;
    r.timestamp = t + (jitter > 0 ? jit(rng) : 0);
    if (!d.rows.empty()) r.timestamp = std::max(r.timestamp, d.rows.back().timestamp);
    for (std::size_t c = 0; c < ncols; ++c) {
      double& v = level[c % level.size()];
      v += step(rng);
      r.values.emplace_back(round_to(v, 0.1));
    }
    d.rows.push_back(std::move(r));
    t += missing(rng) ? 2 * period : period;
  }
  return d;
}

Dataset shelburne_like(const GenOptions& o) {
  Dataset d;
  d.schema.name = o.series.empty() ? "shelburne_like" : o.series;
  d.schema.precision = o.precision.value_or(TimestampPrecision::nanoseconds);
  d.schema.ts_codec = TsCodec::dod;
  const std::int64_t tps = ticks_per_second(d.schema.precision);
  const std::int64_t period = o.period.value_or(10 * tps);
  // Most intervals are exactly one period (delta MAD 0); the rest are late by
  // up to `jitter` (delta IQR around 0.3 ms) with rare early readings and
  // rare multi-period outages.
  const std::int64_t jitter = o.jitter.value_or(std::max<std::int64_t>(tps / 1250, 0));
  static constexpr const char* kNames[] = {"air_temp", "humidity", "soil_moisture", "solar_radiation",
                                           "battery_volts", "leaf_wetness"};
  const std::size_t ncols = o.columns.value_or(6);
  for (std::size_t c = 0; c < ncols; ++c) {
    d.schema.columns.push_back({c < 6 ? kNames[c] : "sensor" + std::to_string(c), ColumnType::float64});
  }
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_int_distribution<std::int64_t> late(1, std::max<std::int64_t>(jitter, 1));
  std::uniform_int_distribution<std::int64_t> early(-std::max<std::int64_t>(jitter / 4, 1), -1);
  std::discrete_distribution<int> interval_kind({55, 40, 5});
  std::bernoulli_distribution outage(0.001);
  // Readings are ADC counts converted to engineering units, so values repeat
  // between samples but carry many decimal digits.
  struct Channel {
    double offset, scale, base_count, amplitude, walk, noise;
  };
  const Channel kChannels[] = {{-40.0, 0.0390625, 1400, 150, 0.8, 0.6},  {0.0, 0.0244140625, 2700, 600, 2.0, 1.0},
                               {0.0, 0.00048828125, 640, 8, 0.05, 0.3},   {0.0, 0.48828125, 600, 580, 3.0, 1.5},
                               {0.0, 0.003662109375, 3440, 20, 0.05, 0.4}, {0.0, 0.0009765625, 1000, 800, 4.0, 0.5}};
  std::vector<double> drift(ncols, 0.0);
  std::int64_t t = o.start * tps;
  d.rows.reserve(o.rows);
  const double day = 86400.0;
  for (std::size_t i = 0; i < o.rows; ++i) {
    Row r;
    r.timestamp = t;
    const double phase = 2 * std::numbers::pi * std::fmod(static_cast<double>(t / tps), day) / day;
    for (std::size_t c = 0; c < ncols; ++c) {
      const auto& ch = kChannels[c % 6];
      drift[c] += ch.walk * noise(rng);
      const double count = std::max(0.0, std::round(ch.base_count + ch.amplitude * std::sin(phase) + drift[c] +
                                                    ch.noise * noise(rng)));
      r.values.emplace_back(ch.offset + count * ch.scale * (1.0 + 1e-3 * static_cast<double>(c + 1) / 3.0));
    }
    d.rows.push_back(std::move(r));
    std::int64_t step = period;
    switch (interval_kind(rng)) {
      case 1: step += jitter > 0 ? late(rng) : 0; break;
      case 2: step += jitter > 0 ? early(rng) : 0; break;
      default: break;
    }
    if (outage(rng)) step += period * static_cast<std::int64_t>(2 + rng() % 30);
    t += step;
  }
  return d;
}

Dataset taxi_like(const GenOptions& o) {
  Dataset d;
  d.schema.name = o.series.empty() ? "taxi_like" : o.series;
  d.schema.precision = o.precision.value_or(TimestampPrecision::seconds);
  d.schema.ts_codec = TsCodec::delta_rle_rice;
  const std::int64_t tps = ticks_per_second(d.schema.precision);
  const std::int64_t mean_gap = o.period.value_or(3 * tps);
  const double dup = o.duplicate_rate.value_or(0.27);
  struct Col {
    const char* name;
    ColumnType type;
  };
  static constexpr Col kCols[] = {{"vendor_id", ColumnType::int64},        {"passenger_count", ColumnType::int64},
                                  {"trip_distance", ColumnType::float64},  {"fare_amount", ColumnType::float64},
                                  {"tip_amount", ColumnType::float64},     {"store_and_fwd", ColumnType::boolean}};
  const std::size_t ncols = o.columns.value_or(6);
  for (std::size_t c = 0; c < ncols; ++c) {
    std::string name = kCols[c % 6].name;
    if (c >= 6) name += std::to_string(c);
    d.schema.columns.push_back({name, kCols[c % 6].type});
  }
  std::mt19937_64 rng(o.seed);
  std::bernoulli_distribution same_time(dup);
  std::exponential_distribution<double> gap(1.0 / static_cast<double>(std::max<std::int64_t>(mean_gap, 1)));
  std::lognormal_distribution<double> distance(0.8, 0.7);
  std::discrete_distribution<int> passengers({0, 70, 14, 5, 3, 5, 3});
  std::bernoulli_distribution flag(0.01);
  std::uniform_real_distribution<double> tip_share(0.0, 0.25);
  std::int64_t t = o.start * tps;
  d.rows.reserve(o.rows);
  for (std::size_t i = 0; i < o.rows; ++i) {
    if (i > 0 && !same_time(rng)) t += std::max<std::int64_t>(1, static_cast<std::int64_t>(std::llround(gap(rng))));
    Row r;
    r.timestamp = t;
    const double dist = round_to(distance(rng), 0.01);
    const double fare = round_to(2.5 + 2.5 * dist, 0.5);
    for (std::size_t c = 0; c < ncols; ++c) {
      switch (c % 6) {
        case 0: r.values.emplace_back(static_cast<std::int64_t>(1 + rng() % 2)); break;
        case 1: r.values.emplace_back(static_cast<std::int64_t>(passengers(rng))); break;
        case 2: r.values.emplace_back(dist); break;
        case 3: r.values.emplace_back(fare); break;
        case 4: r.values.emplace_back(round_to(fare * tip_share(rng), 0.01)); break;
        default: r.values.emplace_back(flag(rng)); break;
      }
    }
    d.rows.push_back(std::move(r));
  }
  return d;
}

}  // namespace

std::vector<std::string> generator_names() { return {"srbench-like", "shelburne-like", "taxi-like"}; }

Dataset generate(std::string_view preset, const GenOptions& options) {
  Dataset d;
  if (preset == "srbench-like") {
    d = srbench_like(options);
  } else if (preset == "shelburne-like") {
    d = shelburne_like(options);
  } else if (preset == "taxi-like") {
    d = taxi_like(options);
  } else {
    fail(Errc::contract_violation, "unknown generator '" + std::string(preset) + "'");
  }
  if (options.series.empty()) d.schema.name = default_name(preset);
  d.schema.validate();
  return d;
}

void bounded_shuffle(std::vector<Row>& rows, std::size_t window, std::uint64_t seed) {
  if (window <= 1) return;
  std::mt19937_64 rng(seed);
  for (std::size_t begin = 0; begin < rows.size(); begin += window) {
    const auto end = std::min(rows.size(), begin + window);
    std::shuffle(rows.begin() + static_cast<std::ptrdiff_t>(begin), rows.begin() + static_cast<std::ptrdiff_t>(end), rng);
  }
}

}  // namespace trt

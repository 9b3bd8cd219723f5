#include "trt/timefmt.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "trt/error.hpp"

namespace trt {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) noexcept {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  [[noreturn]] void bad(const char* what) const {
    fail(Errc::parse_error, "invalid timestamp '" + std::string(text_) + "': " + what);
  }

  int digits(std::size_t n) {
    int v = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (pos_ >= text_.size() || text_[pos_] < '0' || text_[pos_] > '9') bad("expected digit");
      v = v * 10 + (text_[pos_++] - '0');
    }
    return v;
  }

  void expect(char c) {
    if (pos_ >= text_.size() || text_[pos_] != c) bad("unexpected character");
    ++pos_;
  }

  [[nodiscard]] bool at_end() const noexcept { return pos_ >= text_.size(); }
  [[nodiscard]] char peek() const noexcept { return at_end() ? '\0' : text_[pos_]; }
  char take() { return text_[pos_++]; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

ParsedTime parse_rfc3339(std::string_view text, TimestampPrecision precision) {
  using namespace std::chrono;
  Cursor c(text);
  const int year = c.digits(4);
  c.expect('-');
  const int month = c.digits(2);
  c.expect('-');
  const int day = c.digits(2);
  if (c.peek() != 'T' && c.peek() != 't' && c.peek() != ' ') c.bad("expected 'T'");
  c.take();
  const int hour = c.digits(2);
  c.expect(':');
  const int minute = c.digits(2);
  c.expect(':');
  const int second = c.digits(2);

  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 60) c.bad("field out of range");

  // Fraction kept as nanoseconds plus a flag for anything finer.
  std::int64_t nanos = 0;
  bool finer_than_ns = false;
  if (c.peek() == '.') {
    c.take();
    int n = 0;
    while (!c.at_end() && c.peek() >= '0' && c.peek() <= '9') {
      const int d = c.take() - '0';
      if (n < 9) {
        nanos = nanos * 10 + d;
      } else if (d != 0) {
        finer_than_ns = true;
      }
      ++n;
    }
    if (n == 0) c.bad("empty fraction");
    for (int i = n; i < 9; ++i) nanos *= 10;
  }

  std::int64_t offset_seconds = 0;
  if (!c.at_end()) {
    const char z = c.take();
    if (z == 'Z' || z == 'z') {
    } else if (z == '+' || z == '-') {
      const int oh = c.digits(2);
      c.expect(':');
      const int om = c.digits(2);
      if (oh > 23 || om > 59) c.bad("offset out of range");
      offset_seconds = (oh * 3600 + om * 60) * (z == '+' ? 1 : -1);
    } else {
      c.bad("unexpected trailing characters");
    }
    if (!c.at_end()) c.bad("unexpected trailing characters");
  }

  const std::int64_t days = sys_days{ymd}.time_since_epoch().count();
  const std::int64_t epoch_seconds = days * 86400 + hour * 3600 + minute * 60 + second - offset_seconds;
  const std::int64_t per_second = ticks_per_second(precision);
  const std::int64_t nanos_per_tick = 1'000'000'000 / per_second;
  ParsedTime out;
  out.ticks = epoch_seconds * per_second + nanos / nanos_per_tick;
  out.truncated = finer_than_ns || nanos % nanos_per_tick != 0;
  return out;
}

ParsedTime parse_timestamp(std::string_view text, TimestampPrecision precision) {
  std::int64_t v = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec == std::errc{} && ptr == last && !text.empty()) return {v, false};
  return parse_rfc3339(text, precision);
}

std::string format_rfc3339(std::int64_t ticks, TimestampPrecision precision) {
  using namespace std::chrono;
  const std::int64_t per_second = ticks_per_second(precision);
  const std::int64_t secs = floor_div(ticks, per_second);
  const std::int64_t sub = ticks - secs * per_second;
  const std::int64_t days = floor_div(secs, 86400);
  const std::int64_t rem = secs - days * 86400;
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[64];
  int n = std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                        static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                        static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60), static_cast<int>(rem % 60));
  if (precision == TimestampPrecision::milliseconds) {
    n += std::snprintf(buf + n, sizeof buf - n, ".%03lld", static_cast<long long>(sub));
  } else if (precision == TimestampPrecision::nanoseconds) {
    n += std::snprintf(buf + n, sizeof buf - n, ".%09lld", static_cast<long long>(sub));
  }
  return std::string(buf, static_cast<std::size_t>(n)) + "Z";
}

std::int64_t convert_ticks(std::int64_t ticks, TimestampPrecision from, TimestampPrecision to) {
  const std::int64_t f = ticks_per_second(from);
  const std::int64_t t = ticks_per_second(to);
  if (f == t) return ticks;
  if (t > f) return ticks * (t / f);
  return floor_div(ticks, f / t);
}

}  // namespace trt

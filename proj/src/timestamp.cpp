#include "pamforge/timestamp.hpp"

#include <charconv>
#include <cstdio>

#include "pamforge/error.hpp"

namespace pamforge {

namespace {

using namespace std::chrono;

std::optional<int> read_digits(std::string_view text, std::size_t pos, std::size_t width) {
  if (pos + width > text.size()) return std::nullopt;
  int v = 0;
  for (std::size_t i = 0; i < width; ++i) {
    const char c = text[pos + i];
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return v;
}

std::optional<UtcTime> compose(int y, int mo, int d, int h, int mi, int s, long long ms) {
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) return std::nullopt;
  return UtcTime{sys_days{ymd}} + hours{h} + minutes{mi} + seconds{s} + milliseconds{ms};
}

}  // namespace

std::string format_iso8601(UtcTime t) {
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const auto since_midnight = floor<milliseconds>(t - day_point);
  const long long total_ms = since_midnight.count();
  const long long h = total_ms / 3'600'000;
  const long long mi = total_ms / 60'000 % 60;
  const long long s = total_ms / 1000 % 60;
  const long long ms = total_ms % 1000;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), h, mi, s, ms);
  return buf;
}

std::optional<UtcTime> parse_iso8601(std::string_view text) {
  // YYYY-MM-DDTHH:MM:SS[.fff]Z
  if (text.size() < 20) return std::nullopt;
  auto y = read_digits(text, 0, 4);
  auto mo = read_digits(text, 5, 2);
  auto d = read_digits(text, 8, 2);
  auto h = read_digits(text, 11, 2);
  auto mi = read_digits(text, 14, 2);
  auto s = read_digits(text, 17, 2);
  if (!y || !mo || !d || !h || !mi || !s) return std::nullopt;
  if (text[4] != '-' || text[7] != '-' || text[10] != 'T' || text[13] != ':' || text[16] != ':') return std::nullopt;
  long long ms = 0;
  std::size_t pos = 19;
  if (text[pos] == '.') {
    auto frac = read_digits(text, pos + 1, 3);
    if (!frac) return std::nullopt;
    ms = *frac;
    pos += 4;
  }
  if (pos + 1 != text.size() || text[pos] != 'Z') return std::nullopt;
  return compose(*y, *mo, *d, *h, *mi, *s, ms);
}

TimestampPattern::TimestampPattern(std::string pattern) : pattern_(std::move(pattern)) {
  for (std::size_t i = 0; i < pattern_.size(); ++i) {
    if (pattern_[i] != '%') continue;
    if (i + 1 >= pattern_.size()) throw Error(ErrorCode::SchemaError, "timestamp pattern ends with '%'");
    const char t = pattern_[++i];
    if (std::string_view("YmdHMS%").find(t) == std::string_view::npos)
      throw Error(ErrorCode::SchemaError, std::string("unsupported timestamp token %") + t);
  }
}

std::optional<UtcTime> TimestampPattern::match_at(std::string_view text) const {
  int y = 1970, mo = 1, d = 1, h = 0, mi = 0, s = 0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < pattern_.size(); ++i) {
    const char c = pattern_[i];
    if (c != '%' || pattern_[i + 1] == '%') {
      if (c == '%') ++i;
      if (pos >= text.size() || text[pos] != c) return std::nullopt;
      ++pos;
      continue;
    }
    const char token = pattern_[++i];
    const std::size_t width = token == 'Y' ? 4 : 2;
    auto v = read_digits(text, pos, width);
    if (!v) return std::nullopt;
    pos += width;
    switch (token) {
      case 'Y': y = *v; break;
      case 'm': mo = *v; break;
      case 'd': d = *v; break;
      case 'H': h = *v; break;
      case 'M': mi = *v; break;
      case 'S': s = *v; break;
    }
  }
  return compose(y, mo, d, h, mi, s, 0);
}

std::optional<UtcTime> TimestampPattern::match(std::string_view filename) const {
  if (pattern_.empty()) return std::nullopt;
  for (std::size_t start = 0; start < filename.size(); ++start) {
    if (auto t = match_at(filename.substr(start))) return t;
  }
  return std::nullopt;
}

}  // namespace pamforge

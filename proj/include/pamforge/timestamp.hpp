#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace pamforge {

using UtcTime = std::chrono::sys_time<std::chrono::nanoseconds>;

// "YYYY-MM-DDTHH:MM:SS.mmmZ" (milliseconds, truncated).
std::string format_iso8601(UtcTime t);
std::optional<UtcTime> parse_iso8601(std::string_view text);

// Filename timestamp pattern. Supported tokens: %Y %m %d %H %M %S, %% for a
// literal percent sign; every other character matches itself. The first
// position in the filename where the whole pattern matches wins.
class TimestampPattern {
 public:
  TimestampPattern() = default;
  explicit TimestampPattern(std::string pattern);

  const std::string& pattern() const noexcept { return pattern_; }
  bool empty() const noexcept { return pattern_.empty(); }

  std::optional<UtcTime> match(std::string_view filename) const;

 private:
  std::optional<UtcTime> match_at(std::string_view text) const;

  std::string pattern_;
};

}  // namespace pamforge

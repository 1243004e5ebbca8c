#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace pamforge {

// Exact positive-or-zero fraction, always stored reduced with den > 0.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  // Accepts "30", "0.5", "1/8". Returns nullopt on anything else.
  static std::optional<Rational> parse(std::string_view text);
  // Exact decimal expansion of the shortest round-trip form of value.
  static std::optional<Rational> from_double(double value);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
  bool is_integer() const noexcept { return den_ == 1; }
  bool positive() const noexcept { return num_ > 0; }

  // this * factor when the product is an integer; nullopt otherwise.
  std::optional<std::int64_t> times_integer(std::int64_t factor) const;

  std::string to_string() const;

  friend bool operator==(const Rational&, const Rational&) = default;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace pamforge

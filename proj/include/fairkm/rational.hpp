#pragma once

#include "fairkm/errors.hpp"

#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>

namespace fairkm {

/// Exact fraction over 64-bit integers, always stored in lowest terms with a
/// positive denominator. Used for balances and targets so that fairness
/// constraints are checked without rounding.
class Rational
{
public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t value) : num_(value) {}  // NOLINT(implicit)

  Rational(std::int64_t num, std::int64_t den)
  {
    if (den == 0)
    {
      throw InvalidInput("Rational: zero denominator");
    }
    assign(static_cast<__int128>(num), static_cast<__int128>(den));
  }

  [[nodiscard]] constexpr std::int64_t num() const { return num_; }
  [[nodiscard]] constexpr std::int64_t den() const { return den_; }

  [[nodiscard]] double to_double() const
  {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  [[nodiscard]] bool is_zero() const { return num_ == 0; }

  /// floor(this * count), exact.
  [[nodiscard]] std::int64_t floor_times(std::int64_t count) const
  {
    __int128 p = static_cast<__int128>(num_) * count;
    __int128 q = p / den_;
    if (p % den_ != 0 && p < 0)
    {
      --q;
    }
    return static_cast<std::int64_t>(q);
  }

  /// ceil(this * count), exact.
  [[nodiscard]] std::int64_t ceil_times(std::int64_t count) const
  {
    __int128 p = static_cast<__int128>(num_) * count;
    __int128 q = p / den_;
    if (p % den_ != 0 && p > 0)
    {
      ++q;
    }
    return static_cast<std::int64_t>(q);
  }

  /// True iff  a >= this * b  for non-negative integer counts a, b.
  [[nodiscard]] bool satisfied_by(std::int64_t a, std::int64_t b) const
  {
    return static_cast<__int128>(a) * den_ >= static_cast<__int128>(num_) * b;
  }

  [[nodiscard]] std::string str() const
  {
    if (den_ == 1)
    {
      return std::to_string(num_);
    }
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  /// Parses "3/4", "0.75", "75e-2" or an integer into an exact fraction.
  static Rational parse(std::string_view text)
  {
    auto const slash = text.find('/');
    if (slash != std::string_view::npos)
    {
      return Rational(parse_integer(text.substr(0, slash)), parse_integer(text.substr(slash + 1)));
    }
    return parse_decimal(text);
  }

  /// Exact fraction of the shortest decimal that round-trips to `value`,
  /// so from_double(0.01) == 1/100.
  static Rational from_double(double value)
  {
    if (!std::isfinite(value))
    {
      throw InvalidInput("Rational: non-finite value");
    }
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return parse_decimal(std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)));
  }

  friend Rational operator+(Rational const &a, Rational const &b)
  {
    Rational r;
    r.assign(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
             static_cast<__int128>(a.den_) * b.den_);
    return r;
  }
  friend Rational operator-(Rational const &a, Rational const &b)
  {
    Rational r;
    r.assign(static_cast<__int128>(a.num_) * b.den_ - static_cast<__int128>(b.num_) * a.den_,
             static_cast<__int128>(a.den_) * b.den_);
    return r;
  }
  friend Rational operator*(Rational const &a, Rational const &b)
  {
    Rational r;
    r.assign(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
    return r;
  }
  friend Rational operator/(Rational const &a, Rational const &b)
  {
    if (b.num_ == 0)
    {
      throw InvalidInput("Rational: division by zero");
    }
    Rational r;
    r.assign(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
    return r;
  }

  friend bool operator==(Rational const &a, Rational const &b)
  {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(Rational const &a, Rational const &b)
  {
    __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
    __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
    if (lhs < rhs)
    {
      return std::strong_ordering::less;
    }
    if (lhs > rhs)
    {
      return std::strong_ordering::greater;
    }
    return std::strong_ordering::equal;
  }

  friend std::ostream &operator<<(std::ostream &os, Rational const &r) { return os << r.str(); }

private:
  void assign(__int128 num, __int128 den)
  {
    if (den < 0)
    {
      num = -num;
      den = -den;
    }
    __int128 a = num < 0 ? -num : num;
    __int128 b = den;
    while (b != 0)
    {
      __int128 t = a % b;
      a          = b;
      b          = t;
    }
    if (a > 1)
    {
      num /= a;
      den /= a;
    }
    constexpr __int128 limit = INT64_MAX;
    if (num > limit || num < -limit || den > limit)
    {
      throw InvalidInput("Rational: overflow");
    }
    num_ = static_cast<std::int64_t>(num);
    den_ = static_cast<std::int64_t>(den);
  }

  static std::int64_t parse_integer(std::string_view text)
  {
    std::int64_t value{};
    auto const *first = text.data();
    auto const *last  = text.data() + text.size();
    if (first != last && *first == '+')
    {
      ++first;
    }
    auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last)
    {
      throw InvalidInput("cannot parse integer '" + std::string(text) + "'");
    }
    return value;
  }

  static Rational parse_decimal(std::string_view text)
  {
    std::string const original(text);
    bool negative = false;
    if (!text.empty() && (text.front() == '-' || text.front() == '+'))
    {
      negative = text.front() == '-';
      text.remove_prefix(1);
    }
    std::int64_t exponent = 0;
    auto const   epos     = text.find_first_of("eE");
    if (epos != std::string_view::npos)
    {
      exponent = parse_integer(text.substr(epos + 1));
      text     = text.substr(0, epos);
    }
    __int128 mantissa = 0;
    bool     any      = false;
    bool     seen_dot = false;
    for (char c : text)
    {
      if (c == '.' && !seen_dot)
      {
        seen_dot = true;
        continue;
      }
      if (c < '0' || c > '9')
      {
        throw InvalidInput("cannot parse number '" + original + "'");
      }
      mantissa = mantissa * 10 + (c - '0');
      any      = true;
      if (seen_dot)
      {
        --exponent;
      }
      if (mantissa > static_cast<__int128>(INT64_MAX))
      {
        throw InvalidInput("number '" + original + "' has too many digits");
      }
    }
    if (!any)
    {
      throw InvalidInput("cannot parse number '" + original + "'");
    }
    __int128 num = negative ? -mantissa : mantissa;
    __int128 den = 1;
    for (; exponent > 0; --exponent)
    {
      num *= 10;
      if (num > static_cast<__int128>(INT64_MAX) * 1000)
      {
        throw InvalidInput("number '" + original + "' out of range");
      }
    }
    for (; exponent < 0; ++exponent)
    {
      den *= 10;
      if (den > static_cast<__int128>(INT64_MAX) * 1000)
      {
        throw InvalidInput("number '" + original + "' out of range");
      }
    }
    Rational r;
    r.assign(num, den);
    return r;
  }

  std::int64_t num_{0};
  std::int64_t den_{1};
};

}  // namespace fairkm

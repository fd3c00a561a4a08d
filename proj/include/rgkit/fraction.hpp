#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace rgkit {

// Exact signed fraction with a positive denominator, kept in lowest terms.
// Comparisons go through 128-bit products, so they never overflow.
class Fraction {
 public:
  constexpr Fraction() = default;
  constexpr Fraction(std::int64_t n) : num_(n) {}  // NOLINT: implicit by design
  Fraction(std::int64_t n, std::int64_t d) : num_(n), den_(d) {
    if (den_ == 0) {
      throw std::domain_error("fraction with zero denominator");
    }
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    std::int64_t const g = std::gcd(num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  std::int64_t numerator() const noexcept { return num_; }
  std::int64_t denominator() const noexcept { return den_; }
  double to_double() const noexcept {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }
  std::string str() const {
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
  }

  friend Fraction operator+(Fraction a, Fraction b) { return combine(a, b, 1); }
  friend Fraction operator-(Fraction a, Fraction b) { return combine(a, b, -1); }
  friend Fraction operator*(Fraction a, Fraction b) {
    __int128 const n = static_cast<__int128>(a.num_) * b.num_;
    __int128 const d = static_cast<__int128>(a.den_) * b.den_;
    return narrow(n, d);
  }
  friend Fraction operator/(Fraction a, Fraction b) {
    if (b.num_ == 0) {
      throw std::domain_error("division by zero fraction");
    }
    __int128 const n = static_cast<__int128>(a.num_) * b.den_;
    __int128 const d = static_cast<__int128>(a.den_) * b.num_;
    return narrow(n, d);
  }

  friend bool operator==(Fraction const&, Fraction const&) = default;
  friend std::strong_ordering operator<=>(Fraction const& a, Fraction const& b) {
    __int128 const l = static_cast<__int128>(a.num_) * b.den_;
    __int128 const r = static_cast<__int128>(b.num_) * a.den_;
    return l <=> r;
  }

 private:
  static Fraction combine(Fraction a, Fraction b, int sign) {
    __int128 const n = static_cast<__int128>(a.num_) * b.den_ +
                       sign * static_cast<__int128>(b.num_) * a.den_;
    __int128 const d = static_cast<__int128>(a.den_) * b.den_;
    return narrow(n, d);
  }

  static Fraction narrow(__int128 n, __int128 d) {
    __int128 a = n < 0 ? -n : n;
    __int128 b = d < 0 ? -d : d;
    while (b != 0) {
      __int128 const t = a % b;
      a = b;
      b = t;
    }
    if (a > 1) {
      n /= a;
      d /= a;
    }
    constexpr __int128 kMax = INT64_MAX;
    if (n > kMax || n < -kMax || d > kMax || d < -kMax) {
      throw std::overflow_error("fraction does not fit in 64 bits");
    }
    return Fraction(static_cast<std::int64_t>(n), static_cast<std::int64_t>(d));
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace rgkit

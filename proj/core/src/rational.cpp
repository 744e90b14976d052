#include "oscillode/rational.hpp"

#include <limits>
#include <stdexcept>

namespace oscillode {
namespace {

int128 gcd_wide(int128 a, int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    int128 r = a % b;
    a = b;
    b = r;
  }
  return a;
}

constexpr int128 kMax = std::numeric_limits<std::int64_t>::max();
constexpr int128 kMin = std::numeric_limits<std::int64_t>::min();

}  // namespace

Rational::Rational(std::int64_t numerator) : num_(numerator), den_(1) {}

Rational::Rational(std::int64_t numerator, std::int64_t denominator) {
  *this = from_wide(numerator, denominator);
}

Rational Rational::from_wide(int128 numerator, int128 denominator) {
  if (denominator == 0) throw std::domain_error("rational with zero denominator");
  if (denominator < 0) {
    numerator = -numerator;
    denominator = -denominator;
  }
  const int128 g = gcd_wide(numerator, denominator);
  if (g > 1) {
    numerator /= g;
    denominator /= g;
  }
  if (numerator > kMax || numerator < kMin || denominator > kMax) {
    throw std::overflow_error("rational arithmetic overflow");
  }
  Rational r;
  r.num_ = static_cast<std::int64_t>(numerator);
  r.den_ = static_cast<std::int64_t>(denominator == 0 ? 1 : denominator);
  if (r.num_ == 0) r.den_ = 1;
  return r;
}

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::parse(const std::string& text) {
  const auto slash = text.find('/');
  try {
    std::size_t used = 0;
    if (slash == std::string::npos) {
      const long long n = std::stoll(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return Rational(n);
    }
    const std::string top = text.substr(0, slash);
    const std::string bottom = text.substr(slash + 1);
    const long long n = std::stoll(top, &used);
    if (used != top.size()) throw std::invalid_argument(text);
    const long long d = std::stoll(bottom, &used);
    if (used != bottom.size()) throw std::invalid_argument(text);
    return Rational(n, d);
  } catch (const std::logic_error&) {
    throw std::invalid_argument("not a rational number: '" + text + "'");
  }
}

Rational Rational::operator-() const { return from_wide(-static_cast<int128>(num_), den_); }

Rational& Rational::operator+=(const Rational& other) {
  *this = from_wide(static_cast<int128>(num_) * other.den_ + static_cast<int128>(other.num_) * den_,
                    static_cast<int128>(den_) * other.den_);
  return *this;
}

Rational& Rational::operator-=(const Rational& other) { return *this += -other; }

Rational& Rational::operator*=(const Rational& other) {
  *this = from_wide(static_cast<int128>(num_) * other.num_, static_cast<int128>(den_) * other.den_);
  return *this;
}

Rational& Rational::operator/=(const Rational& other) {
  if (other.num_ == 0) throw std::domain_error("rational division by zero");
  *this = from_wide(static_cast<int128>(num_) * other.den_, static_cast<int128>(den_) * other.num_);
  return *this;
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  const int128 lhs = static_cast<int128>(a.num_) * b.den_;
  const int128 rhs = static_cast<int128>(b.num_) * a.den_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

}  // namespace oscillode

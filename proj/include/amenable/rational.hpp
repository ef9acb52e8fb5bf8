#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <boost/rational.hpp>

#include "amenable/error.hpp"

namespace amenable {

using Rational = boost::rational<std::int64_t>;

inline double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

inline std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

// Accepts "p/q", an integer, or a finite decimal such as "0.125"; decimals
// are converted exactly (0.4 -> 2/5).
inline Rational parse_rational(std::string_view text) {
  auto bad = [&] { fail(Errc::parameter_domain, "not a rational number: '" + std::string(text) + "'"); };
  if (text.empty()) bad();
  auto parse_int = [&](std::string_view s) -> std::int64_t {
    if (s.empty()) bad();
    std::size_t pos = 0;
    bool neg = false;
    if (s[0] == '-' || s[0] == '+') {
      neg = s[0] == '-';
      pos = 1;
    }
    if (pos == s.size()) bad();
    std::int64_t v = 0;
    for (; pos < s.size(); ++pos) {
      if (s[pos] < '0' || s[pos] > '9') bad();
      if (v > (INT64_MAX - 9) / 10) bad();
      v = v * 10 + (s[pos] - '0');
    }
    return neg ? -v : v;
  };
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    std::int64_t den = parse_int(text.substr(slash + 1));
    if (den == 0) bad();
    return Rational(parse_int(text.substr(0, slash)), den);
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = text.substr(dot + 1);
    if (frac.size() > 15) bad();
    bool neg = !whole.empty() && whole[0] == '-';
    std::int64_t w = (whole.empty() || whole == "-" || whole == "+") ? 0 : parse_int(whole);
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    std::int64_t f = frac.empty() ? 0 : parse_int(frac);
    if (f < 0) bad();
    std::int64_t mag = (w < 0 ? -w : w) * scale + f;
    return Rational(neg ? -mag : mag, scale);
  }
  return Rational(parse_int(text));
}

}  // namespace amenable

#include "mg/rational.hpp"

#include <cctype>

namespace mg {

std::string to_string(const Rational& r) {
  std::string out = numerator(r).str();
  if (denominator(r) != 1) {
    out += '/';
    out += denominator(r).str();
  }
  return out;
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

std::optional<Rational> parse_rational(std::string_view text) {
  if (text.empty()) return std::nullopt;
  bool negative = false;
  if (text[0] == '+' || text[0] == '-') {
    negative = text[0] == '-';
    text.remove_prefix(1);
  }
  auto slash = text.find('/');
  auto dot = text.find('.');
  try {
    Rational value;
    if (slash != std::string_view::npos) {
      std::string_view num = text.substr(0, slash);
      std::string_view den = text.substr(slash + 1);
      if (!all_digits(num) || !all_digits(den)) return std::nullopt;
      Integer d{std::string(den)};
      if (d == 0) return std::nullopt;
      value = Rational(Integer{std::string(num)}, d);
    } else if (dot != std::string_view::npos) {
      std::string_view whole = text.substr(0, dot);
      std::string_view frac = text.substr(dot + 1);
      if (whole.empty() && frac.empty()) return std::nullopt;
      if (!whole.empty() && !all_digits(whole)) return std::nullopt;
      if (!frac.empty() && !all_digits(frac)) return std::nullopt;
      Integer scale = 1;
      for (size_t i = 0; i < frac.size(); ++i) scale *= 10;
      Integer w = whole.empty() ? Integer{0} : Integer{std::string(whole)};
      Integer f = frac.empty() ? Integer{0} : Integer{std::string(frac)};
      value = Rational(w * scale + f, scale);
    } else {
      if (!all_digits(text)) return std::nullopt;
      value = Rational(Integer{std::string(text)});
    }
    if (negative) value = -value;
    return value;
  } catch (...) {
    return std::nullopt;
  }
}

}  // namespace mg

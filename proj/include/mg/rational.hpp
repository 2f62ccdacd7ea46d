#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace mg {

// All probabilities, truth values and weights are exact rationals; floats
// appear only at presentation time.
using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

// Canonical text form: "n" when the denominator is 1, otherwise "n/d" in
// lowest terms with the sign on the numerator.
std::string to_string(const Rational& r);

// Accepts "n", "n/d" and decimal literals ("0.25" -> 1/4). Returns nullopt on
// anything else; never throws.
std::optional<Rational> parse_rational(std::string_view text);

inline bool in_unit_interval(const Rational& r) { return r >= 0 && r <= 1; }

}  // namespace mg

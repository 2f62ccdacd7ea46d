#pragma once

#include "mg/error.hpp"
#include "mg/rational.hpp"

namespace mg {

// (strength, confidence) uncertainty label. Both components are exact
// rationals in [0,1].
struct TruthValue {
  Rational strength;
  Rational confidence;

  TruthValue() : strength(1), confidence(1) {}
  TruthValue(Rational s, Rational c) : strength(std::move(s)), confidence(std::move(c)) {
    if (!in_unit_interval(strength) || !in_unit_interval(confidence)) {
      fail(ErrorCode::InvalidArgument, "truth value components must lie in [0,1]");
    }
  }

  bool operator==(const TruthValue& other) const = default;
};

// Revision rule for duplicate inserts: the higher-confidence value wins,
// ties keep the incumbent. Returns true when `stored` was replaced.
inline bool revise_truth(TruthValue& stored, const TruthValue& incoming) {
  if (incoming.confidence > stored.confidence) {
    stored = incoming;
    return true;
  }
  return false;
}

inline std::string to_string(const TruthValue& tv) {
  return "(tv " + to_string(tv.strength) + " " + to_string(tv.confidence) + ")";
}

}  // namespace mg

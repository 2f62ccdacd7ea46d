#pragma once

#include "mg/store.hpp"

#include <map>
#include <optional>
#include <vector>

namespace mg {

// Pattern variables are ordinary atoms: nodes of type "Variable" (or
// "SubgraphVariable", which currently behaves the same and is reserved for
// future multi-atom binding).
bool is_variable_atom(const Atom& atom);
bool is_variable_atom(const Snapshot& snap, AtomId id);
bool contains_variable(const Snapshot& snap, AtomId id);

// Substitution from variable atoms to bound atoms. A variable binds any
// single non-variable atom; the bound atom roots a whole sub-metagraph.
using Bindings = std::map<AtomId, AtomId>;

// A conjunction of clauses rooted at a ("Query", clauses...) link. Patterns
// are themselves atoms in the metagraph.
struct Pattern {
  AtomId root;
  std::vector<AtomId> clauses;
  std::vector<AtomId> variables;  // sorted, every variable reachable in a clause

  static Pattern from_clauses(Store& store, const std::vector<AtomId>& clauses);
  static Pattern from_root(const Snapshot& snap, AtomId root);
};

void collect_variables(const Snapshot& snap, AtomId clause, std::vector<AtomId>& out);

struct MatchCursor {
  AtomId locus;
  Bindings partial;
  std::vector<AtomId> remaining_clauses;
};

struct MoveStep {
  enum class Kind { ToTarget, ToIncoming };
  Kind kind = Kind::ToTarget;
  size_t index = 0;  // ToTarget
  AtomId link;       // ToIncoming

  static MoveStep to_target(size_t i) { return MoveStep{Kind::ToTarget, i, {}}; }
  static MoveStep to_incoming(AtomId link) {
    return MoveStep{Kind::ToIncoming, 0, link};
  }
};

// Anchored structural match, no search: concrete nodes match only themselves,
// links match links with equal type name, arity and pairwise-matching
// targets, variables extend the seed consistently.
std::optional<Bindings> match_at(AtomId pattern_clause, AtomId target,
                                 const Bindings& seed, const Snapshot& snap);

// Index-driven candidate generation; complete (every true match is a
// candidate). Variable-free clauses yield exactly themselves.
std::vector<AtomId> candidate_roots(AtomId pattern_clause, const Snapshot& snap);

MatchCursor move_locus(const MatchCursor& cursor, const MoveStep& step,
                       const Snapshot& snap);

// All complete consistent bindings satisfying every clause, duplicate-free
// and sorted. Composed from candidate_roots + match_at clause by clause;
// results are independent of clause order.
std::vector<Bindings> query(const Pattern& pattern, const Snapshot& snap);

// Semantics ground truth: enumerates variable assignments over non-variable
// atoms and filters by substitution-then-structural-equality. Independent of
// the matcher and of the type indexes. Throws CapExceeded above atom_cap.
std::vector<Bindings> brute_force_query(const Pattern& pattern, const Snapshot& snap,
                                        size_t atom_cap = 2000);

}  // namespace mg

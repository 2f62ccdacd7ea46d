#include "mg/pattern.hpp"

#include <algorithm>
#include <set>

namespace mg {

bool is_variable_atom(const Atom& atom) {
  return atom.is_node() &&
         (atom.type_name == "Variable" || atom.type_name == "SubgraphVariable");
}

bool is_variable_atom(const Snapshot& snap, AtomId id) {
  return is_variable_atom(snap.resolve(id));
}

bool contains_variable(const Snapshot& snap, AtomId id) {
  Atom atom = snap.resolve(id);
  if (is_variable_atom(atom)) return true;
  for (AtomId t : atom.targets) {
    if (contains_variable(snap, t)) return true;
  }
  return false;
}

void collect_variables(const Snapshot& snap, AtomId clause, std::vector<AtomId>& out) {
  Atom atom = snap.resolve(clause);
  if (is_variable_atom(atom)) {
    if (std::find(out.begin(), out.end(), clause) == out.end()) out.push_back(clause);
    return;
  }
  for (AtomId t : atom.targets) collect_variables(snap, t, out);
}

Pattern Pattern::from_clauses(Store& store, const std::vector<AtomId>& clauses) {
  if (clauses.empty()) {
    fail(ErrorCode::InvalidArgument, "pattern needs at least one clause");
  }
  AtomId root = store.add_link("Query", clauses);
  Pattern p;
  p.root = root;
  p.clauses = clauses;
  Snapshot snap = store.snapshot();
  for (AtomId c : clauses) collect_variables(snap, c, p.variables);
  std::sort(p.variables.begin(), p.variables.end());
  return p;
}

Pattern Pattern::from_root(const Snapshot& snap, AtomId root) {
  Atom atom = snap.resolve(root);
  Pattern p;
  p.root = root;
  if (atom.is_link() && atom.type_name == "Query") {
    p.clauses = atom.targets;
  } else {
    p.clauses = {root};
  }
  if (p.clauses.empty()) {
    fail(ErrorCode::InvalidArgument, "pattern needs at least one clause");
  }
  for (AtomId c : p.clauses) collect_variables(snap, c, p.variables);
  std::sort(p.variables.begin(), p.variables.end());
  return p;
}

namespace {

bool match_rec(const Snapshot& snap, AtomId clause, AtomId target, Bindings& bindings) {
  Atom c = snap.resolve(clause);
  if (is_variable_atom(c)) {
    if (is_variable_atom(snap, target)) return false;  // variables bind non-variables
    auto it = bindings.find(clause);
    if (it != bindings.end()) return it->second == target;
    bindings.emplace(clause, target);
    return true;
  }
  if (c.is_node()) return clause == target;  // content-addressed identity
  Atom t = snap.resolve(target);
  if (!t.is_link() || t.type_name != c.type_name ||
      t.targets.size() != c.targets.size()) {
    return false;
  }
  for (size_t i = 0; i < c.targets.size(); ++i) {
    if (!match_rec(snap, c.targets[i], t.targets[i], bindings)) return false;
  }
  return true;
}

}  // namespace

std::optional<Bindings> match_at(AtomId pattern_clause, AtomId target,
                                 const Bindings& seed, const Snapshot& snap) {
  snap.resolve(pattern_clause);
  snap.resolve(target);
  Bindings bindings = seed;
  if (!match_rec(snap, pattern_clause, target, bindings)) return std::nullopt;
  return bindings;
}

std::vector<AtomId> candidate_roots(AtomId pattern_clause, const Snapshot& snap) {
  Atom clause = snap.resolve(pattern_clause);
  if (is_variable_atom(clause)) {
    std::vector<AtomId> out;
    for (AtomId id : snap.all_atoms()) {
      if (!is_variable_atom(snap, id)) out.push_back(id);
    }
    return out;
  }
  if (!contains_variable(snap, pattern_clause)) return {pattern_clause};
  return snap.atoms_of_type(clause.type_name);
}

MatchCursor move_locus(const MatchCursor& cursor, const MoveStep& step,
                       const Snapshot& snap) {
  MatchCursor next = cursor;
  if (step.kind == MoveStep::Kind::ToTarget) {
    Atom atom = snap.resolve(cursor.locus);
    if (!atom.is_link() || step.index >= atom.targets.size()) {
      fail(ErrorCode::InvalidStep,
           "ToTarget(" + std::to_string(step.index) + ") out of range");
    }
    next.locus = atom.targets[step.index];
    return next;
  }
  auto inc = snap.incoming(cursor.locus);
  if (std::find(inc.begin(), inc.end(), step.link) == inc.end()) {
    fail(ErrorCode::InvalidStep, "ToIncoming link is not incoming at the locus");
  }
  next.locus = step.link;
  return next;
}

std::vector<Bindings> query(const Pattern& pattern, const Snapshot& snap) {
  // Cheapest-first clause ordering; the result set is order-independent.
  struct Ranked {
    AtomId clause;
    size_t estimate;
    size_t position;
  };
  std::vector<Ranked> order;
  order.reserve(pattern.clauses.size());
  for (size_t i = 0; i < pattern.clauses.size(); ++i) {
    AtomId c = pattern.clauses[i];
    Atom atom = snap.resolve(c);
    size_t estimate;
    if (is_variable_atom(atom)) {
      estimate = snap.atom_count();
    } else if (!contains_variable(snap, c)) {
      estimate = 1;
    } else {
      estimate = snap.type_bucket_size(atom.type_name);
    }
    order.push_back({c, estimate, i});
  }
  std::stable_sort(order.begin(), order.end(), [](const Ranked& a, const Ranked& b) {
    return a.estimate < b.estimate;
  });

  std::vector<Bindings> partials{Bindings{}};
  for (const Ranked& r : order) {
    std::vector<AtomId> candidates = candidate_roots(r.clause, snap);
    std::set<Bindings> next;
    for (const Bindings& partial : partials) {
      for (AtomId cand : candidates) {
        if (auto extended = match_at(r.clause, cand, partial, snap)) {
          next.insert(std::move(*extended));
        }
      }
    }
    partials.assign(next.begin(), next.end());
    if (partials.empty()) break;
  }
  return partials;
}

namespace {

// Substitute an assignment into a clause, producing a ground spec for
// structural lookup. All variables must be assigned.
AtomSpec substitute_clause(const Snapshot& snap, AtomId clause, const Bindings& b) {
  Atom atom = snap.resolve(clause);
  if (is_variable_atom(atom)) {
    auto it = b.find(clause);
    if (it == b.end()) {
      fail(ErrorCode::Internal, "brute force: unassigned variable in ground check");
    }
    return AtomSpec::ref(it->second);
  }
  if (atom.is_node()) return AtomSpec::ref(clause);
  std::vector<AtomSpec> children;
  children.reserve(atom.targets.size());
  for (AtomId t : atom.targets) children.push_back(substitute_clause(snap, t, b));
  return AtomSpec::link(atom.type_name, std::move(children));
}

}  // namespace

std::vector<Bindings> brute_force_query(const Pattern& pattern, const Snapshot& snap,
                                        size_t atom_cap) {
  if (snap.atom_count() > atom_cap) {
    fail(ErrorCode::CapExceeded,
         "brute force oracle capped at " + std::to_string(atom_cap) + " atoms");
  }

  std::vector<AtomId> domain;
  for (AtomId id : snap.all_atoms()) {
    if (!is_variable_atom(snap, id)) domain.push_back(id);
  }

  // Per-clause variable sets, then a variable order that grounds clauses as
  // early as possible so presence checks can prune the enumeration.
  std::vector<std::vector<AtomId>> clause_vars(pattern.clauses.size());
  for (size_t i = 0; i < pattern.clauses.size(); ++i) {
    collect_variables(snap, pattern.clauses[i], clause_vars[i]);
    std::sort(clause_vars[i].begin(), clause_vars[i].end());
  }

  std::vector<AtomId> var_order;
  std::vector<char> clause_done(pattern.clauses.size(), 0);
  auto assigned = [&](AtomId v) {
    return std::find(var_order.begin(), var_order.end(), v) != var_order.end();
  };
  while (var_order.size() < pattern.variables.size()) {
    size_t best = pattern.clauses.size();
    size_t best_missing = SIZE_MAX;
    for (size_t i = 0; i < pattern.clauses.size(); ++i) {
      if (clause_done[i]) continue;
      size_t missing = 0;
      for (AtomId v : clause_vars[i]) {
        if (!assigned(v)) ++missing;
      }
      if (missing < best_missing) {
        best_missing = missing;
        best = i;
      }
    }
    if (best == pattern.clauses.size()) break;
    for (AtomId v : clause_vars[best]) {
      if (!assigned(v)) var_order.push_back(v);
    }
    clause_done[best] = 1;
  }
  for (AtomId v : pattern.variables) {
    if (!assigned(v)) var_order.push_back(v);
  }

  // Checkpoints: clauses fully grounded once the k-th variable is assigned.
  std::vector<std::vector<size_t>> checks(var_order.size() + 1);
  for (size_t i = 0; i < pattern.clauses.size(); ++i) {
    size_t ready = 0;
    for (size_t k = 0; k < var_order.size(); ++k) {
      if (std::binary_search(clause_vars[i].begin(), clause_vars[i].end(),
                             var_order[k])) {
        ready = k + 1;
      }
    }
    checks[ready].push_back(i);
  }

  std::vector<Bindings> results;
  Bindings current;

  auto clause_holds = [&](size_t i) {
    AtomSpec ground = substitute_clause(snap, pattern.clauses[i], current);
    return snap.find(ground).has_value();
  };

  auto enumerate = [&](size_t depth, auto&& self) -> void {
    for (size_t i : checks[depth]) {
      if (!clause_holds(i)) return;
    }
    if (depth == var_order.size()) {
      results.push_back(current);
      return;
    }
    for (AtomId atom : domain) {
      current[var_order[depth]] = atom;
      self(depth + 1, self);
    }
    current.erase(var_order[depth]);
  };
  enumerate(0, enumerate);

  std::sort(results.begin(), results.end());
  results.erase(std::unique(results.begin(), results.end()), results.end());
  return results;
}

}  // namespace mg

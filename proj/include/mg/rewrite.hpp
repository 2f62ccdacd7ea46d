#pragma once

#include "mg/pattern.hpp"
#include "mg/store.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mg {

// A rewrite rule stored as a ("Rule", [premise, conclusion]) link, where a
// multi-clause premise is an ("And", clauses...) link. Every variable in the
// conclusion occurs in the premise.
struct RewriteRule {
  AtomId rule_atom;
  std::vector<AtomId> premise_clauses;
  AtomId conclusion;
  TruthValue tv;
  std::string tv_formula = "product";
  std::vector<AtomId> variables;  // premise variables, sorted

  static RewriteRule from_atom(const Snapshot& snap, AtomId rule_atom);
};

RewriteRule make_rule(Store& store, const std::vector<AtomId>& premise_clauses,
                      AtomId conclusion, TruthValue tv);

// Ground substitution into a template; throws UnboundVariable when a template
// variable is missing from the bindings. Pure, no store mutation.
AtomSpec instantiate(AtomId template_atom, const Bindings& bindings,
                     const Snapshot& snap);

struct RuleApplication {
  Bindings bindings;
  AtomSpec conclusion;
  TruthValue tv;
};

// All premise matches anchored at the locus, extended across the remaining
// premise clauses, with conclusion TVs computed by the rule's formula.
// Pure — the caller commits.
std::vector<RuleApplication> apply_rule_at(const RewriteRule& rule, AtomId locus,
                                           const Snapshot& snap);

enum class ChainPolicy { FIFO, ExhaustiveToFixpoint };

struct ChainStep {
  AtomId rule_atom;
  Bindings bindings;
  AtomSpec produced;
  TruthValue tv;
  std::optional<AtomId> produced_id;  // set when the step was committed
};

struct ChainTrace {
  std::vector<ChainStep> steps;
  uint64_t final_version = 0;
  size_t rounds = 0;
  // NoProgressBudget: the step budget ran out before a fixpoint was reached.
  bool budget_exhausted = false;
};

// Repeated rule application through the store's commit path. With
// ExhaustiveToFixpoint, max_steps bounds the number of commit rounds and the
// result is independent of worker_count; with FIFO, max_steps bounds agenda
// pops over a (rule, newly-added-atom) queue.
ChainTrace forward_chain(Store& store, const std::vector<RewriteRule>& rules,
                         size_t max_steps, ChainPolicy policy,
                         size_t worker_count = 1);

// Depth-bounded goal-directed search: direct query matches plus recursive
// subgoaling of rule premises whose conclusion unifies with the goal (fresh
// variable renaming per recursion). Returns bindings over the goal's
// variables, each with its derivation trace. Does not commit conclusions.
//
// data_version bounds what counts as present data: atoms created after it
// (the materialized goal pattern, renamed subgoal atoms) are never direct
// matches. Defaults to the store version at entry.
std::vector<std::pair<Bindings, ChainTrace>> backward_chain(
    Store& store, const Pattern& goal, const std::vector<RewriteRule>& rules,
    size_t max_depth, std::optional<uint64_t> data_version = {});

// Replays a trace's produced atoms against a store (used to validate traces).
void replay_trace(Store& store, const ChainTrace& trace);

}  // namespace mg

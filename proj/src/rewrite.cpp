#include "mg/rewrite.hpp"

#include "mg/dump.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <thread>

namespace mg {

namespace {

bool vars_subset(const std::vector<AtomId>& sub, const std::vector<AtomId>& super) {
  for (AtomId v : sub) {
    if (std::find(super.begin(), super.end(), v) == super.end()) return false;
  }
  return true;
}

}  // namespace

RewriteRule RewriteRule::from_atom(const Snapshot& snap, AtomId rule_atom) {
  Atom atom = snap.resolve(rule_atom);
  if (!atom.is_link() || atom.type_name != "Rule" || atom.targets.size() != 2) {
    fail(ErrorCode::InvalidArgument,
         "rule atom must be a (Rule premise conclusion) link");
  }
  RewriteRule rule;
  rule.rule_atom = rule_atom;
  AtomId premise_root = atom.targets[0];
  rule.conclusion = atom.targets[1];
  Atom premise = snap.resolve(premise_root);
  if (premise.is_link() && premise.type_name == "And") {
    rule.premise_clauses = premise.targets;
  } else {
    rule.premise_clauses = {premise_root};
  }
  if (rule.premise_clauses.empty()) {
    fail(ErrorCode::InvalidArgument, "rule premise must have at least one clause");
  }
  rule.tv = atom.tv.value_or(TruthValue{});
  for (AtomId c : rule.premise_clauses) collect_variables(snap, c, rule.variables);
  std::sort(rule.variables.begin(), rule.variables.end());
  std::vector<AtomId> conclusion_vars;
  collect_variables(snap, rule.conclusion, conclusion_vars);
  if (!vars_subset(conclusion_vars, rule.variables)) {
    fail(ErrorCode::InvalidArgument,
         "rule conclusion uses a variable missing from the premise");
  }
  return rule;
}

RewriteRule make_rule(Store& store, const std::vector<AtomId>& premise_clauses,
                      AtomId conclusion, TruthValue tv) {
  if (premise_clauses.empty()) {
    fail(ErrorCode::InvalidArgument, "rule premise must have at least one clause");
  }
  AtomId premise_root = premise_clauses.size() == 1
                            ? premise_clauses[0]
                            : store.add_link("And", premise_clauses);
  AtomId rule_atom = store.add_link("Rule", {premise_root, conclusion}, tv);
  return RewriteRule::from_atom(store.snapshot(), rule_atom);
}

AtomSpec instantiate(AtomId template_atom, const Bindings& bindings,
                     const Snapshot& snap) {
  Atom atom = snap.resolve(template_atom);
  if (is_variable_atom(atom)) {
    auto it = bindings.find(template_atom);
    if (it == bindings.end()) {
      fail(ErrorCode::UnboundVariable,
           "variable " + atom.name + " is not bound in the substitution");
    }
    return AtomSpec::ref(it->second);
  }
  if (atom.is_node()) return AtomSpec::ref(template_atom);
  std::vector<AtomSpec> children;
  children.reserve(atom.targets.size());
  for (AtomId t : atom.targets) children.push_back(instantiate(t, bindings, snap));
  return AtomSpec::link(atom.type_name, std::move(children));
}

namespace {

// Default "product" formula: rule TV times the TVs of the matched premise
// instances; atoms without a TV count as (1,1).
TruthValue conclusion_tv(const RewriteRule& rule, const Bindings& bindings,
                         const Snapshot& snap) {
  Rational s = rule.tv.strength;
  Rational c = rule.tv.confidence;
  for (AtomId clause : rule.premise_clauses) {
    AtomSpec ground = instantiate(clause, bindings, snap);
    TruthValue premise_tv;
    if (auto id = snap.find(ground)) {
      Atom atom = snap.resolve(*id);
      if (atom.tv) premise_tv = *atom.tv;
    }
    s *= premise_tv.strength;
    c *= premise_tv.confidence;
  }
  return TruthValue(s, c);
}

}  // namespace

std::vector<RuleApplication> apply_rule_at(const RewriteRule& rule, AtomId locus,
                                           const Snapshot& snap) {
  snap.resolve(locus);
  std::set<Bindings> seen;
  std::vector<RuleApplication> out;

  for (size_t anchor = 0; anchor < rule.premise_clauses.size(); ++anchor) {
    auto anchored = match_at(rule.premise_clauses[anchor], locus, {}, snap);
    if (!anchored) continue;
    std::vector<Bindings> partials{*anchored};
    for (size_t j = 0; j < rule.premise_clauses.size() && !partials.empty(); ++j) {
      if (j == anchor) continue;
      AtomId clause = rule.premise_clauses[j];
      std::vector<AtomId> candidates = candidate_roots(clause, snap);
      std::set<Bindings> next;
      for (const Bindings& partial : partials) {
        for (AtomId cand : candidates) {
          if (auto m = match_at(clause, cand, partial, snap)) next.insert(std::move(*m));
        }
      }
      partials.assign(next.begin(), next.end());
    }
    for (const Bindings& b : partials) {
      if (!seen.insert(b).second) continue;
      out.push_back(RuleApplication{b, instantiate(rule.conclusion, b, snap),
                                    conclusion_tv(rule, b, snap)});
    }
  }
  std::sort(out.begin(), out.end(), [](const RuleApplication& a, const RuleApplication& b) {
    return a.bindings < b.bindings;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Forward chaining

namespace {

struct TaggedApplication {
  size_t rule_index = 0;
  RuleApplication app;
};

// Deterministic canonical order regardless of which worker found what.
void sort_applications(std::vector<TaggedApplication>& apps, const Snapshot& snap) {
  std::vector<std::pair<std::string, size_t>> keys(apps.size());
  for (size_t i = 0; i < apps.size(); ++i) {
    keys[i] = {spec_structure(snap, apps[i].app.conclusion), i};
  }
  std::sort(keys.begin(), keys.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    const TaggedApplication& x = apps[a.second];
    const TaggedApplication& y = apps[b.second];
    if (x.rule_index != y.rule_index) return x.rule_index < y.rule_index;
    return x.app.bindings < y.app.bindings;
  });
  std::vector<TaggedApplication> sorted;
  sorted.reserve(apps.size());
  for (const auto& [key, idx] : keys) sorted.push_back(std::move(apps[idx]));
  apps = std::move(sorted);
}

void dedup_applications(std::vector<TaggedApplication>& apps) {
  std::set<std::pair<size_t, Bindings>> seen;
  std::vector<TaggedApplication> unique;
  unique.reserve(apps.size());
  for (auto& t : apps) {
    if (seen.emplace(t.rule_index, t.app.bindings).second) {
      unique.push_back(std::move(t));
    }
  }
  apps = std::move(unique);
}

std::vector<TaggedApplication> collect_applications(
    const std::vector<RewriteRule>& rules, const Snapshot& snap, size_t worker_count) {
  std::vector<AtomId> loci = snap.all_atoms();
  size_t workers = std::max<size_t>(1, std::min(worker_count, loci.size() ? loci.size() : 1));

  std::vector<std::vector<TaggedApplication>> partial(workers);
  auto run = [&](size_t w) {
    for (size_t k = w; k < loci.size(); k += workers) {
      for (size_t r = 0; r < rules.size(); ++r) {
        for (RuleApplication& app : apply_rule_at(rules[r], loci[k], snap)) {
          partial[w].push_back(TaggedApplication{r, std::move(app)});
        }
      }
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (size_t w = 0; w < workers; ++w) threads.emplace_back(run, w);
    for (auto& t : threads) t.join();
  }

  std::vector<TaggedApplication> merged;
  for (auto& p : partial) {
    for (auto& t : p) merged.push_back(std::move(t));
  }
  dedup_applications(merged);
  sort_applications(merged, snap);
  return merged;
}

}  // namespace

ChainTrace forward_chain(Store& store, const std::vector<RewriteRule>& rules,
                         size_t max_steps, ChainPolicy policy, size_t worker_count) {
  ChainTrace trace;

  if (policy == ChainPolicy::ExhaustiveToFixpoint) {
    bool fixpoint = false;
    while (trace.rounds < max_steps) {
      Snapshot snap = store.snapshot();
      std::vector<TaggedApplication> apps = collect_applications(rules, snap, worker_count);
      std::vector<AtomSpec> additions;
      additions.reserve(apps.size());
      for (const TaggedApplication& t : apps) {
        AtomSpec spec = t.app.conclusion;
        spec.tv = t.app.tv;
        additions.push_back(std::move(spec));
      }
      CommitResult result = store.commit(snap, additions, {});
      if (!result.mutated) {
        fixpoint = true;
        break;
      }
      Snapshot post = store.snapshot();
      for (size_t i = 0; i < apps.size(); ++i) {
        AtomId id = result.ids[i];
        bool is_new = !snap.contains(id);
        bool tv_changed = !is_new && snap.resolve(id).tv != post.resolve(id).tv;
        if (!is_new && !tv_changed) continue;  // pure rederivation
        trace.steps.push_back(ChainStep{rules[apps[i].rule_index].rule_atom,
                                        apps[i].app.bindings, apps[i].app.conclusion,
                                        apps[i].app.tv, id});
      }
      trace.rounds += 1;
    }
    trace.budget_exhausted = !fixpoint;
    trace.final_version = store.version();
    return trace;
  }

  // FIFO over a (rule, atom) agenda seeded with the initial store; every
  // newly created atom re-enters paired with every rule.
  std::vector<std::pair<size_t, AtomId>> agenda;
  {
    Snapshot snap = store.snapshot();
    for (AtomId id : snap.all_atoms()) {
      for (size_t r = 0; r < rules.size(); ++r) agenda.emplace_back(r, id);
    }
  }
  size_t cursor = 0;
  size_t pops = 0;
  while (cursor < agenda.size() && pops < max_steps) {
    auto [rule_index, locus] = agenda[cursor++];
    ++pops;
    Snapshot snap = store.snapshot();
    if (!snap.contains(locus)) continue;
    std::vector<RuleApplication> apps = apply_rule_at(rules[rule_index], locus, snap);
    if (apps.empty()) continue;
    std::vector<AtomSpec> additions;
    for (const RuleApplication& app : apps) {
      AtomSpec spec = app.conclusion;
      spec.tv = app.tv;
      additions.push_back(std::move(spec));
    }
    CommitResult result = store.commit(snap, additions, {});
    if (!result.mutated) continue;
    Snapshot post = store.snapshot();
    for (size_t i = 0; i < apps.size(); ++i) {
      AtomId id = result.ids[i];
      bool is_new = !snap.contains(id);
      bool tv_changed = !is_new && snap.resolve(id).tv != post.resolve(id).tv;
      if (!is_new && !tv_changed) continue;
      trace.steps.push_back(ChainStep{rules[rule_index].rule_atom, apps[i].bindings,
                                      apps[i].conclusion, apps[i].tv, id});
      if (is_new) {
        for (size_t r = 0; r < rules.size(); ++r) agenda.emplace_back(r, id);
      }
    }
    trace.rounds += 1;
  }
  trace.budget_exhausted = cursor < agenda.size();
  trace.final_version = store.version();
  return trace;
}

// ---------------------------------------------------------------------------
// Backward chaining

namespace {

AtomId walk(AtomId v, const Bindings& chains) {
  while (true) {
    auto it = chains.find(v);
    if (it == chains.end()) return v;
    v = it->second;
  }
}

// Lightweight two-sided unification. Fresh (renamed rule) variables bind any
// term; goal-side variables bind only variable-free terms.
bool unify(AtomId a, AtomId b, Bindings& chains, const std::set<AtomId>& fresh,
           const Snapshot& snap) {
  a = walk(a, chains);
  b = walk(b, chains);
  if (a == b) return true;
  bool a_var = is_variable_atom(snap, a);
  bool b_var = is_variable_atom(snap, b);
  if (a_var && fresh.count(a)) {
    chains[a] = b;
    return true;
  }
  if (b_var && fresh.count(b)) {
    chains[b] = a;
    return true;
  }
  if (a_var) {
    if (contains_variable(snap, b)) return false;
    chains[a] = b;
    return true;
  }
  if (b_var) {
    if (contains_variable(snap, a)) return false;
    chains[b] = a;
    return true;
  }
  Atom aa = snap.resolve(a);
  Atom bb = snap.resolve(b);
  if (aa.is_node() || bb.is_node()) return false;
  if (aa.type_name != bb.type_name || aa.targets.size() != bb.targets.size()) {
    return false;
  }
  for (size_t i = 0; i < aa.targets.size(); ++i) {
    if (!unify(aa.targets[i], bb.targets[i], chains, fresh, snap)) return false;
  }
  return true;
}

class BackwardChainer {
 public:
  BackwardChainer(Store& store, const std::vector<RewriteRule>& rules,
                  uint64_t data_version)
      : store_(store), rules_(rules), data_version_(data_version) {}

  struct Result {
    Bindings bindings;
    std::vector<ChainStep> steps;
  };

  std::vector<Result> solve(const std::vector<AtomId>& clauses, Bindings ground,
                            size_t depth) {
    if (clauses.empty()) return {Result{std::move(ground), {}}};
    AtomId goal = clauses.front();
    std::vector<AtomId> rest(clauses.begin() + 1, clauses.end());
    std::vector<Result> out;

    Snapshot snap = store_.snapshot();
    Snapshot data = store_.snapshot_at(data_version_);
    for (AtomId cand : candidate_roots(goal, snap)) {
      if (!data.contains(cand)) continue;  // goal/subgoal scaffolding is not data
      if (auto m = match_at(goal, cand, ground, snap)) {
        for (Result& r : solve(rest, *m, depth)) out.push_back(std::move(r));
      }
    }

    if (depth == 0) return out;
    for (const RewriteRule& rule : rules_) {
      Fresh fresh = freshen(rule);
      Bindings chains = ground;
      Snapshot snap2 = store_.snapshot();
      if (!unify(fresh.conclusion, goal, chains, fresh.vars, snap2)) continue;

      // Bake every resolved variable into the premise instances so later
      // matching binds goal variables directly.
      Bindings bake;
      for (const auto& [var, value] : chains) bake[var] = walk(var, chains);
      std::vector<AtomId> premise_instances;
      premise_instances.reserve(fresh.premises.size());
      for (AtomId p : fresh.premises) premise_instances.push_back(materialize(p, bake));

      Bindings ground2;
      for (const auto& [var, value] : chains) {
        AtomId w = walk(var, chains);
        Snapshot s = store_.snapshot();
        if (!is_variable_atom(s, w)) ground2[var] = w;
      }

      for (Result& pr : solve(premise_instances, ground2, depth - 1)) {
        AtomSpec concl;
        try {
          concl = resolve_term(fresh.conclusion, chains, pr.bindings);
        } catch (const EngineError&) {
          continue;  // conclusion variable never grounded along this path
        }
        Snapshot snap3 = store_.snapshot();
        TruthValue tv = premise_product(rule, premise_instances, pr.bindings, snap3);
        ChainStep step{rule.rule_atom, pr.bindings, concl, tv, std::nullopt};
        for (Result& r2 : solve(rest, pr.bindings, depth)) {
          Result res;
          res.bindings = std::move(r2.bindings);
          res.steps = pr.steps;
          res.steps.push_back(step);
          res.steps.insert(res.steps.end(), r2.steps.begin(), r2.steps.end());
          out.push_back(std::move(res));
        }
      }
    }
    return out;
  }

 private:
  struct Fresh {
    AtomId conclusion;
    std::vector<AtomId> premises;
    std::set<AtomId> vars;
  };

  AtomId materialize(AtomId tmpl, const Bindings& sub) {
    if (auto it = sub.find(tmpl); it != sub.end() && it->second != tmpl) {
      return it->second;
    }
    Atom atom = store_.resolve(tmpl);
    if (atom.is_node()) return tmpl;
    std::vector<AtomId> children;
    children.reserve(atom.targets.size());
    bool changed = false;
    for (AtomId t : atom.targets) {
      AtomId c = materialize(t, sub);
      changed |= c != t;
      children.push_back(c);
    }
    if (!changed) return tmpl;
    return store_.add_link(atom.type_name, children);
  }

  Fresh freshen(const RewriteRule& rule) {
    Fresh fresh;
    Bindings sub;
    Snapshot snap = store_.snapshot();
    for (AtomId v : rule.variables) {
      Atom var = snap.resolve(v);
      std::string name;
      do {
        name = var.name + "~" + std::to_string(++fresh_counter_);
      } while (store_.snapshot().find_node(var.type_name, name));
      AtomId f = store_.add_node(var.type_name, name);
      sub[v] = f;
      fresh.vars.insert(f);
    }
    fresh.conclusion = materialize(rule.conclusion, sub);
    for (AtomId p : rule.premise_clauses) fresh.premises.push_back(materialize(p, sub));
    return fresh;
  }

  AtomSpec resolve_term(AtomId term, const Bindings& chains, const Bindings& ground) {
    Snapshot snap = store_.snapshot();
    Atom atom = snap.resolve(term);
    if (is_variable_atom(atom)) {
      AtomId w = walk(term, chains);
      if (is_variable_atom(snap, w)) {
        auto it = ground.find(w);
        if (it == ground.end()) {
          fail(ErrorCode::UnboundVariable, "unresolved variable in conclusion");
        }
        w = it->second;
      }
      return AtomSpec::ref(w);
    }
    if (atom.is_node()) return AtomSpec::ref(term);
    std::vector<AtomSpec> children;
    children.reserve(atom.targets.size());
    for (AtomId t : atom.targets) children.push_back(resolve_term(t, chains, ground));
    return AtomSpec::link(atom.type_name, std::move(children));
  }

  TruthValue premise_product(const RewriteRule& rule,
                             const std::vector<AtomId>& premise_instances,
                             const Bindings& bindings, const Snapshot& snap) {
    Rational s = rule.tv.strength;
    Rational c = rule.tv.confidence;
    for (AtomId clause : premise_instances) {
      TruthValue premise_tv;
      try {
        AtomSpec ground = instantiate(clause, bindings, snap);
        if (auto id = snap.find(ground)) {
          Atom atom = snap.resolve(*id);
          if (atom.tv) premise_tv = *atom.tv;
        }
      } catch (const EngineError&) {
        // Premise proven by a deeper rule rather than present; defaults apply.
      }
      s *= premise_tv.strength;
      c *= premise_tv.confidence;
    }
    return TruthValue(s, c);
  }

  Store& store_;
  const std::vector<RewriteRule>& rules_;
  uint64_t data_version_;
  uint64_t fresh_counter_ = 0;
};

}  // namespace

std::vector<std::pair<Bindings, ChainTrace>> backward_chain(
    Store& store, const Pattern& goal, const std::vector<RewriteRule>& rules,
    size_t max_depth, std::optional<uint64_t> data_version) {
  BackwardChainer chainer(store, rules, data_version.value_or(store.version()));
  auto raw = chainer.solve(goal.clauses, {}, max_depth);

  std::map<Bindings, ChainTrace> best;
  for (auto& r : raw) {
    Bindings projected;
    bool complete = true;
    for (AtomId v : goal.variables) {
      auto it = r.bindings.find(v);
      if (it == r.bindings.end()) {
        complete = false;
        break;
      }
      projected[v] = it->second;
    }
    if (!complete) continue;
    auto it = best.find(projected);
    if (it == best.end() || r.steps.size() < it->second.steps.size()) {
      ChainTrace trace;
      trace.steps = std::move(r.steps);
      trace.final_version = store.version();
      best[projected] = std::move(trace);
    }
  }

  std::vector<std::pair<Bindings, ChainTrace>> out;
  out.reserve(best.size());
  for (auto& [bindings, trace] : best) out.emplace_back(bindings, std::move(trace));
  return out;
}

void replay_trace(Store& store, const ChainTrace& trace) {
  for (const ChainStep& step : trace.steps) {
    AtomSpec spec = step.produced;
    spec.tv = step.tv;
    store.commit(store.snapshot(), {spec}, {});
  }
}

}  // namespace mg

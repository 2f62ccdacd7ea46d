#include "mg/harness.hpp"

#include "mg/dump.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace mg {

namespace {

// Deterministic picks straight off the generator stream (distribution
// classes are implementation defined; raw modulo is portable).
struct Rng {
  std::mt19937_64 gen;

  explicit Rng(uint64_t seed) : gen(seed) {}

  size_t pick(size_t n) { return n == 0 ? 0 : static_cast<size_t>(gen() % n); }
  bool chance(uint32_t percent) { return pick(100) < percent; }
  Rational tenths() { return Rational(static_cast<int>(pick(11)), 10); }
};

std::optional<TruthValue> maybe_tv(Rng& rng, uint32_t percent) {
  if (!rng.chance(percent)) return std::nullopt;
  return TruthValue(rng.tenths(), rng.tenths());
}

}  // namespace

Store gen_store(const GeneratorConfig& cfg) {
  Rng rng(cfg.seed);
  Store store;
  size_t budget = std::max<size_t>(1, cfg.atom_budget);

  size_t node_count = std::max<size_t>(1, budget / 3 + rng.pick(3));
  node_count = std::min(node_count, budget);
  std::vector<AtomId> atoms;
  for (size_t i = 0; i < node_count; ++i) {
    atoms.push_back(store.add_node("Concept", "n" + std::to_string(i), maybe_tv(rng, 30)));
  }
  if (budget > 4 && rng.chance(30)) {
    atoms.push_back(store.add_node("Variable", "$s" + std::to_string(rng.pick(2))));
  }

  static const char* link_types[] = {"Inheritance", "Similarity", "Member",
                                     "Evaluation", "List"};
  while (store.atom_count() < budget) {
    const char* type = link_types[rng.pick(5)];
    size_t arity = std::string_view(type) == "List" ? 1 + rng.pick(3) : 2;
    std::vector<AtomId> targets;
    for (size_t i = 0; i < arity; ++i) targets.push_back(atoms[rng.pick(atoms.size())]);
    AtomId link = store.add_link(type, targets, maybe_tv(rng, 30));
    atoms.push_back(link);
    if (atoms.size() > 4 * budget) break;  // dedup may stall growth
  }
  return store;
}

namespace {

// Replace up to `max_vars` positions of a link structure with variables.
AtomSpec abstract_positions(const Snapshot& snap, AtomId root,
                            const std::vector<AtomId>& var_pool, Rng& rng,
                            size_t max_vars, size_t depth = 0) {
  Atom atom = snap.resolve(root);
  if (atom.is_node() || max_vars == 0) return AtomSpec::ref(root);
  std::vector<AtomSpec> children;
  size_t replaced = 0;
  for (AtomId t : atom.targets) {
    bool can_replace = replaced < max_vars && !is_variable_atom(snap, t);
    if (can_replace && rng.chance(40)) {
      children.push_back(AtomSpec::ref(var_pool[rng.pick(var_pool.size())]));
      ++replaced;
    } else if (depth == 0 && snap.resolve(t).is_link() && rng.chance(30)) {
      AtomSpec nested =
          abstract_positions(snap, t, var_pool, rng, max_vars - replaced, depth + 1);
      children.push_back(std::move(nested));
      ++replaced;  // conservative: nested call may have used a slot
    } else {
      children.push_back(AtomSpec::ref(t));
    }
  }
  return AtomSpec::link(atom.type_name, std::move(children));
}

}  // namespace

Pattern gen_pattern(const GeneratorConfig& cfg, Store& store) {
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  Snapshot snap = store.snapshot();

  std::vector<AtomId> var_pool;
  static const char* var_names[] = {"$a", "$b", "$c", "$d"};
  size_t nvars = std::max<size_t>(1, std::min<size_t>(cfg.variable_budget, 4));
  for (size_t i = 0; i < nvars; ++i) {
    var_pool.push_back(store.add_node("Variable", var_names[i]));
  }

  std::vector<AtomId> links;
  for (AtomId id : snap.all_atoms()) {
    if (snap.resolve(id).is_link()) links.push_back(id);
  }

  size_t clause_count = 1 + rng.pick(std::max<size_t>(1, cfg.clause_budget));
  std::vector<AtomId> clauses;
  for (size_t i = 0; i < clause_count; ++i) {
    if (links.empty() || rng.chance(8)) {
      clauses.push_back(var_pool[rng.pick(var_pool.size())]);
      continue;
    }
    AtomId base = links[rng.pick(links.size())];
    AtomSpec spec = abstract_positions(snap, base, var_pool, rng, 2);
    clauses.push_back(store.add(spec));
  }
  return Pattern::from_clauses(store, clauses);
}

namespace {

lam::TermPtr gen_term_rec(Rng& rng, size_t depth, std::vector<std::string>& bound) {
  using namespace lam;
  static const char* const_names[] = {"a", "b", "c", "f", "g"};
  static const char* binder_names[] = {"x", "y", "z", "w"};
  static const Rational probs[] = {Rational(1, 2), Rational(1, 3), Rational(1, 4),
                                   Rational(2, 3)};

  if (depth == 0 || rng.chance(25)) {
    size_t roll = rng.pick(bound.empty() ? 6 : 8);
    if (roll < 5) return constant(const_names[roll]);
    if (roll == 5) return star();
    return var(bound[rng.pick(bound.size())]);
  }
  switch (rng.pick(10)) {
    case 0:
    case 1:
    case 2:
      return app(gen_term_rec(rng, depth - 1, bound), gen_term_rec(rng, depth - 1, bound));
    case 3:
    case 4: {
      std::string binder = binder_names[rng.pick(4)];
      Mult mult = static_cast<Mult>(rng.pick(3));
      TermPtr annotation;
      if (rng.chance(50)) {
        annotation = rng.chance(60) ? star() : gen_term_rec(rng, depth - 1, bound);
      }
      bound.push_back(binder);
      TermPtr body = gen_term_rec(rng, depth - 1, bound);
      bound.pop_back();
      return lam::lam(binder, mult, annotation, body);
    }
    case 5:
    case 6:
      return choice(probs[rng.pick(4)], gen_term_rec(rng, depth - 1, bound),
                    gen_term_rec(rng, depth - 1, bound));
    case 7: {
      std::string binder = binder_names[rng.pick(4)];
      Mult mult = static_cast<Mult>(rng.pick(3));
      TermPtr dom = rng.chance(60) ? star() : gen_term_rec(rng, depth - 1, bound);
      bound.push_back(binder);
      TermPtr cod = gen_term_rec(rng, depth - 1, bound);
      bound.pop_back();
      return pi(binder, mult, dom, cod);
    }
    case 8:
      return rng.chance(50) ? cast_up(gen_term_rec(rng, depth - 1, bound))
                            : cast_down(gen_term_rec(rng, depth - 1, bound));
    default:
      return ann(gen_term_rec(rng, depth - 1, bound),
                 rng.chance(60) ? star() : gen_term_rec(rng, depth - 1, bound));
  }
}

}  // namespace

lam::TermPtr gen_term(const GeneratorConfig& cfg) {
  Rng rng(cfg.seed ^ 0xc2b2ae3d27d4eb4fULL);
  std::vector<std::string> bound;
  return gen_term_rec(rng, std::max<size_t>(1, cfg.term_depth), bound);
}

Store gen_dag_store(uint64_t seed, size_t nodes,
                    std::vector<std::pair<size_t, size_t>>* edges) {
  Rng rng(seed);
  Store store;
  std::vector<AtomId> ids;
  nodes = std::max<size_t>(2, nodes);
  for (size_t i = 0; i < nodes; ++i) {
    ids.push_back(store.add_node("Concept", "n" + std::to_string(i)));
  }
  std::set<std::pair<size_t, size_t>> chosen;
  size_t edge_target = nodes + rng.pick(nodes);
  for (size_t e = 0; e < edge_target; ++e) {
    size_t i = rng.pick(nodes - 1);
    size_t j = i + 1 + rng.pick(nodes - i - 1);
    if (!chosen.insert({i, j}).second) continue;
    store.add_link("Inheritance", {ids[i], ids[j]}, maybe_tv(rng, 25));
  }
  if (chosen.empty()) {
    chosen.insert({0, 1});
    store.add_link("Inheritance", {ids[0], ids[1]});
  }
  if (edges) edges->assign(chosen.begin(), chosen.end());
  return store;
}

RewriteRule deduction_rule(Store& store) {
  AtomId x = store.add_node("Variable", "$x");
  AtomId y = store.add_node("Variable", "$y");
  AtomId z = store.add_node("Variable", "$z");
  AtomId p1 = store.add_link("Inheritance", {x, y});
  AtomId p2 = store.add_link("Inheritance", {y, z});
  AtomId conclusion = store.add_link("Inheritance", {x, z});
  return make_rule(store, {p1, p2}, conclusion, TruthValue(1, 1));
}

// ---------------------------------------------------------------------------
// Suites

namespace {

struct CaseRecorder {
  SuiteReport& report;

  void record(uint64_t seed, std::string_view suite, size_t index, bool ok,
              const std::string& note = "") {
    report.cases_run += 1;
    std::ostringstream line;
    line << "seed=" << seed << " suite=" << suite << " case=" << index
         << " status=" << (ok ? "ok" : "fail");
    if (!ok && !note.empty()) line << " note=" << note;
    report.lines.push_back(line.str());
    if (!ok) {
      report.failures += 1;
      report.failing_seeds.push_back(seed);
    }
  }
};

std::set<std::pair<size_t, size_t>> closure_oracle(
    size_t n, const std::vector<std::pair<size_t, size_t>>& edges) {
  std::vector<std::vector<char>> m(n, std::vector<char>(n, 0));
  for (auto [i, j] : edges) m[i][j] = 1;
  for (size_t k = 0; k < n; ++k) {
    for (size_t i = 0; i < n; ++i) {
      if (!m[i][k]) continue;
      for (size_t j = 0; j < n; ++j) {
        if (m[k][j]) m[i][j] = 1;
      }
    }
  }
  std::set<std::pair<size_t, size_t>> out;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (m[i][j]) out.insert({i, j});
    }
  }
  return out;
}

std::optional<size_t> concept_index(const Atom& atom) {
  if (!atom.is_node() || atom.type_name != "Concept" || atom.name.size() < 2 ||
      atom.name[0] != 'n') {
    return std::nullopt;
  }
  return std::stoull(atom.name.substr(1));
}

std::set<std::pair<size_t, size_t>> inheritance_pairs(const Snapshot& snap) {
  std::set<std::pair<size_t, size_t>> out;
  for (AtomId id : snap.atoms_of_type("Inheritance")) {
    Atom link = snap.resolve(id);
    if (link.targets.size() != 2) continue;
    auto a = concept_index(snap.resolve(link.targets[0]));
    auto b = concept_index(snap.resolve(link.targets[1]));
    if (a && b) out.insert({*a, *b});
  }
  return out;
}

SuiteReport oracle_suite(const GeneratorConfig& cfg, size_t cases) {
  SuiteReport report;
  report.suite = "oracle";
  CaseRecorder rec{report};
  for (size_t k = 0; k < cases; ++k) {
    uint64_t seed = cfg.seed + k;
    GeneratorConfig sub = cfg;
    sub.seed = seed;
    Rng sizer(seed ^ 0xa5a5a5a5ULL);
    sub.atom_budget = 5 + sizer.pick(std::max<size_t>(1, cfg.atom_budget - 4));
    Store store = gen_store(sub);
    Pattern pattern = gen_pattern(sub, store);
    Snapshot snap = store.snapshot();
    std::string note;
    bool ok = false;
    try {
      auto fast = query(pattern, snap);
      auto slow = brute_force_query(pattern, snap);
      ok = fast == slow;
      if (!ok) {
        note = "query=" + std::to_string(fast.size()) +
               ",bruteforce=" + std::to_string(slow.size());
      }
    } catch (const std::exception& e) {
      note = e.what();
    }
    rec.record(seed, "oracle", k, ok, note);
  }
  std::ostringstream os;
  os << "oracle: " << (report.cases_run - report.failures) << "/" << report.cases_run
     << " cases agree with the brute-force oracle";
  report.summary = os.str();
  return report;
}

SuiteReport chaining_suite(const GeneratorConfig& cfg, size_t cases, size_t workers) {
  SuiteReport report;
  report.suite = "chaining";
  CaseRecorder rec{report};
  for (size_t k = 0; k < cases; ++k) {
    uint64_t seed = cfg.seed + k;
    Rng rng(seed ^ 0x5bd1e995ULL);
    size_t nodes = 3 + rng.pick(10);
    std::vector<std::pair<size_t, size_t>> edges;
    Store base = gen_dag_store(seed, nodes, &edges);
    auto expected = closure_oracle(nodes, edges);

    std::string note;
    bool ok = true;

    // Closure against the graph oracle.
    Store run = base.clone();
    RewriteRule rule = deduction_rule(run);
    forward_chain(run, {rule}, nodes + 2, ChainPolicy::ExhaustiveToFixpoint, 1);
    auto actual = inheritance_pairs(run.snapshot());
    if (actual != expected) {
      ok = false;
      note = "closure mismatch";
    }

    // Worker-count determinism on the same case.
    if (ok) {
      std::string dump1;
      for (size_t w : {size_t(1), workers ? workers : 4}) {
        Store par = base.clone();
        RewriteRule r2 = deduction_rule(par);
        forward_chain(par, {r2}, nodes + 2, ChainPolicy::ExhaustiveToFixpoint, w);
        std::string d = canonical_dump(par.snapshot());
        if (dump1.empty()) {
          dump1 = d;
        } else if (d != dump1) {
          ok = false;
          note = "worker dumps differ";
        }
      }
    }

    // Forward/backward agreement on sampled goals at matching depth.
    if (ok) {
      size_t depth = 1 + rng.pick(3);
      Store fwd = base.clone();
      RewriteRule r3 = deduction_rule(fwd);
      forward_chain(fwd, {r3}, depth, ChainPolicy::ExhaustiveToFixpoint, 1);
      Snapshot reach = fwd.snapshot();

      Store bwd = base.clone();
      RewriteRule r4 = deduction_rule(bwd);
      // One data boundary for all probes: goal atoms materialized by earlier
      // probes must not count as data for later ones.
      uint64_t data_version = bwd.version();
      for (size_t probe = 0; probe < 4 && ok; ++probe) {
        size_t i = rng.pick(nodes);
        size_t j = rng.pick(nodes);
        if (i == j) continue;
        auto a = reach.find_node("Concept", "n" + std::to_string(i));
        auto b = reach.find_node("Concept", "n" + std::to_string(j));
        bool forward_has =
            a && b && reach.find_link("Inheritance", {*a, *b}).has_value();

        AtomId ga = bwd.add_node("Concept", "n" + std::to_string(i));
        AtomId gb = bwd.add_node("Concept", "n" + std::to_string(j));
        AtomId goal_atom = bwd.add_link("Inheritance", {ga, gb});
        Pattern goal = Pattern::from_clauses(bwd, {goal_atom});
        bool backward_has =
            !backward_chain(bwd, goal, {r4}, depth, data_version).empty();
        if (forward_has != backward_has) {
          ok = false;
          note = "agreement mismatch at depth " + std::to_string(depth);
        }
      }
    }
    rec.record(seed, "chaining", k, ok, note);
  }
  std::ostringstream os;
  os << "chaining: " << (report.cases_run - report.failures) << "/" << report.cases_run
     << " cases match the closure oracle and agree forward/backward";
  report.summary = os.str();
  return report;
}

bool distributions_equal(const lam::Distribution& a, const lam::Distribution& b) {
  if (a.residual != b.residual) return false;
  if (a.outcomes.size() != b.outcomes.size()) return false;
  for (size_t i = 0; i < a.outcomes.size(); ++i) {
    if (lam::canonical_key(a.outcomes[i].first) !=
        lam::canonical_key(b.outcomes[i].first)) {
      return false;
    }
    if (a.outcomes[i].second != b.outcomes[i].second) return false;
  }
  return true;
}

lam::Context lambda_test_context() {
  using namespace lam;
  lam::Context ctx;
  TermPtr ty_a = constant("A");
  ctx.push_back({"A", star(), Mult::Many});
  ctx.push_back({"a", ty_a, Mult::Many});
  ctx.push_back({"b", ty_a, Mult::Many});
  ctx.push_back({"c", ty_a, Mult::Many});
  // f and g take linear arguments; each use of a linear variable inside
  // their argument positions counts exactly once.
  ctx.push_back({"f", pi("_", Mult::One, ty_a, ty_a), Mult::Many});
  ctx.push_back({"g", pi("_", Mult::One, ty_a, pi("_", Mult::One, ty_a, ty_a)),
                 Mult::Many});
  return ctx;
}

// Linear bodies over pair/apply constants using the bound variable a chosen
// number of times.
lam::TermPtr linear_body(Rng& rng, const std::string& binder, size_t uses) {
  using namespace lam;
  if (uses == 1) {
    return rng.chance(50) ? var(binder) : app(constant("f"), var(binder));
  }
  size_t left = 1 + rng.pick(uses - 1);
  return app(app(constant("g"), linear_body(rng, binder, left)),
             linear_body(rng, binder, uses - left));
}

SuiteReport lambda_suite(const GeneratorConfig& cfg, size_t cases) {
  using namespace lam;
  SuiteReport report;
  report.suite = "lambda";
  CaseRecorder rec{report};
  lam::Context ctx = lambda_test_context();

  for (size_t k = 0; k < cases; ++k) {
    uint64_t seed = cfg.seed + k;
    GeneratorConfig sub = cfg;
    sub.seed = seed;
    TermPtr term = gen_term(sub);
    bool ok = true;
    std::string note;
    try {
      // Encode/decode identity.
      Store store;
      AtomId id = encode_term(store, term);
      TermPtr back = decode_term(store.snapshot(), id);
      if (print_term(back) != print_term(term)) {
        ok = false;
        note = "encode/decode departs from identity";
      }

      // Decidability surrogate: checking always returns within the bound.
      if (ok) {
        typecheck(ctx, term);
        typecheck_against(ctx, term, star());
      }

      // Expansion-order invariance at a modest budget.
      if (ok) {
        auto bfs = eval_distribution(term, 24, ExpansionOrder::BreadthFirst);
        auto dfs = eval_distribution(term, 24, ExpansionOrder::DepthFirst);
        if (!distributions_equal(bfs, dfs)) {
          ok = false;
          note = "expansion orders disagree";
        } else if (bfs.total_mass() != 1) {
          ok = false;
          note = "mass not conserved";
        }
      }

      // Linearity: duplicated linear variables always rejected, linear
      // identities always accepted.
      if (ok) {
        Rng rng(seed ^ 0x7f4a7c15ULL);
        size_t uses = 2 + rng.pick(3);
        TermPtr dup = lam::lam("v", Mult::One, constant("A"), linear_body(rng, "v", uses));
        auto bad = typecheck(ctx, dup);
        if (bad.ok() || bad.error->reason != IllReason::LinearityViolation) {
          ok = false;
          note = "duplicated linear variable not rejected";
        }
        TermPtr once = lam::lam("v", Mult::One, constant("A"), linear_body(rng, "v", 1));
        if (ok && !typecheck(ctx, once).ok()) {
          ok = false;
          note = "linear single-use term rejected";
        }
      }
    } catch (const std::exception& e) {
      ok = false;
      note = e.what();
    }
    rec.record(seed, "lambda", k, ok, note);
  }
  std::ostringstream os;
  os << "lambda: " << (report.cases_run - report.failures) << "/" << report.cases_run
     << " cases pass round-trip, termination, confluence and linearity checks";
  report.summary = os.str();
  return report;
}

SuiteReport bench_suite(const GeneratorConfig& cfg) {
  SuiteReport report;
  report.suite = "bench";
  CaseRecorder rec{report};

  const size_t store_size = 100000;
  const size_t typed_count = 50;
  Store store;
  std::vector<AtomSpec> batch;
  batch.reserve(store_size);
  for (size_t i = 0; i + typed_count < store_size; ++i) {
    batch.push_back(AtomSpec::node("Concept", "n" + std::to_string(i)));
  }
  CommitResult seeded = store.commit(store.snapshot(), batch, {});
  const std::vector<AtomId>& concepts = seeded.ids;
  Rng rng(cfg.seed);
  batch.clear();
  for (size_t i = 0; i < typed_count; ++i) {
    batch.push_back(AtomSpec::link(
        "Inheritance", {AtomSpec::ref(concepts[rng.pick(concepts.size())]),
                        AtomSpec::ref(concepts[rng.pick(concepts.size())])}));
  }
  store.commit(store.snapshot(), batch, {});
  AtomId vx = store.add_node("Variable", "$x");
  AtomId vy = store.add_node("Variable", "$y");
  AtomId clause = store.add_link("Inheritance", {vx, vy});

  Snapshot snap = store.snapshot();
  size_t typed_atoms = snap.atoms_of_type("Inheritance").size();  // incl. the clause
  store.reset_index_inspections();
  std::vector<AtomId> candidates = candidate_roots(clause, snap);
  uint64_t inspected = store.index_inspections();

  bool ok = inspected == typed_atoms && candidates.size() == typed_atoms &&
            inspected < store.atom_count() / 100;
  std::ostringstream note;
  note << "inspected=" << inspected << " typed=" << typed_atoms
       << " store=" << store.atom_count();
  rec.record(cfg.seed, "bench", 0, ok, ok ? "" : note.str());

  std::ostringstream os;
  os << "bench: typed-clause candidate generation inspected " << inspected
     << " index records out of a " << store.atom_count() << "-atom store";
  report.summary = os.str();
  return report;
}

}  // namespace

SuiteReport run_suite(std::string_view name, const GeneratorConfig& cfg, size_t cases,
                      size_t workers) {
  if (name == "oracle") return oracle_suite(cfg, cases);
  if (name == "chaining") return chaining_suite(cfg, cases, workers);
  if (name == "lambda") return lambda_suite(cfg, cases);
  if (name == "bench") return bench_suite(cfg);
  fail(ErrorCode::InvalidArgument,
       "unknown suite '" + std::string(name) + "' (oracle|chaining|lambda|bench)");
}

}  // namespace mg

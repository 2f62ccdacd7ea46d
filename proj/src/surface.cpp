#include "mg/surface.hpp"

#include "mg/dump.hpp"
#include "mg/lambda.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace mg {

namespace {

[[noreturn]] void grammar_error(const SExpr& e, const std::string& message) {
  fail(ErrorCode::GrammarError, std::to_string(e.line) + ":" + std::to_string(e.column) +
                                    ": " + message + " in " + print(e));
}

bool is_tv_form(const SExpr& e) {
  return e.is_list() && !e.items.empty() && e.items[0].is_symbol("tv");
}

TruthValue parse_tv(const SExpr& e) {
  if (e.items.size() != 3 || !e.items[1].is_number() || !e.items[2].is_number()) {
    grammar_error(e, "expected (tv strength confidence)");
  }
  if (!in_unit_interval(e.items[1].number) || !in_unit_interval(e.items[2].number)) {
    grammar_error(e, "truth value components must lie in [0,1]");
  }
  return TruthValue(e.items[1].number, e.items[2].number);
}

}  // namespace

Session::Session() : types_(store_) { register_builtin_procedures(grounded_); }

TypeRegistry& Session::types() {
  if (!builtin_types_registered_) {
    builtin_types_registered_ = true;
    types_.register_type_system(make_arity_plugin());
    types_.register_type_system(lam::make_lambda_plugin());
  }
  return types_;
}

AtomSpec Session::atom_spec_from(const SExpr& expr) const {
  if (!expr.is_list() || expr.items.empty()) {
    grammar_error(expr, "expected an atom form (TypeName ...)");
  }
  if (!expr.items[0].is_symbol()) {
    grammar_error(expr, "atom forms start with a type name symbol");
  }
  const std::string& type_name = expr.items[0].text;
  if (type_name == "tv" || type_name == "Typed") {
    grammar_error(expr, "'" + type_name + "' is reserved and not an atom type");
  }

  std::vector<SExpr> args(expr.items.begin() + 1, expr.items.end());
  std::optional<TruthValue> tv;
  if (!args.empty() && is_tv_form(args.back())) {
    tv = parse_tv(args.back());
    args.pop_back();
  }
  if (args.empty()) {
    grammar_error(expr, "atom form needs a name or targets");
  }
  if (args.size() == 1 && args[0].is_string()) {
    return AtomSpec::node(type_name, args[0].text, tv);
  }
  std::vector<AtomSpec> children;
  children.reserve(args.size());
  for (const SExpr& child : args) {
    if (!child.is_list()) {
      grammar_error(child, "link targets must be atom forms");
    }
    children.push_back(atom_spec_from(child));
  }
  return AtomSpec::link(type_name, std::move(children), tv);
}

AtomId Session::load_one(const SExpr& expr) {
  if (!expr.is_list() || expr.items.empty() || !expr.items[0].is_symbol()) {
    grammar_error(expr, "top-level forms must be lists headed by a symbol");
  }
  const std::string& head = expr.items[0].text;

  if (lam::is_lambda_form(expr)) {
    return lam::encode_term(store_, lam::term_from_sexpr(expr));
  }

  if (head == "Typed") {
    if (expr.items.size() != 4) {
      grammar_error(expr, "expected (Typed ATOM (TypeSystem \"name\") TYPE)");
    }
    const SExpr& system_form = expr.items[2];
    if (!system_form.is_list() || system_form.items.size() != 2 ||
        !system_form.items[0].is_symbol("TypeSystem") || !system_form.items[1].is_string()) {
      grammar_error(system_form, "expected (TypeSystem \"name\")");
    }
    AtomId subject = load_one(expr.items[1]);
    AtomId type_expr = load_one(expr.items[3]);
    AtomId system_node = store_.add_node("TypeSystem", system_form.items[1].text);
    store_.annotate(subject, system_node, type_expr);
    return subject;
  }

  if (head == "Rule") {
    if (expr.items.size() < 3 || expr.items.size() > 4) {
      grammar_error(expr, "expected (Rule PREMISE CONCLUSION [(tv s c)])");
    }
    std::optional<TruthValue> tv;
    if (expr.items.size() == 4) {
      if (!is_tv_form(expr.items[3])) grammar_error(expr.items[3], "expected (tv s c)");
      tv = parse_tv(expr.items[3]);
    }
    const SExpr& premise_form = expr.items[1];
    std::vector<AtomId> premise_clauses;
    if (premise_form.is_list() && !premise_form.items.empty() &&
        premise_form.items[0].is_symbol("And")) {
      for (size_t i = 1; i < premise_form.items.size(); ++i) {
        premise_clauses.push_back(store_.add(atom_spec_from(premise_form.items[i])));
      }
      if (premise_clauses.empty()) {
        grammar_error(premise_form, "(And ...) premise needs clauses");
      }
    } else {
      premise_clauses.push_back(store_.add(atom_spec_from(premise_form)));
    }
    AtomId conclusion = store_.add(atom_spec_from(expr.items[2]));
    try {
      RewriteRule rule =
          make_rule(store_, premise_clauses, conclusion, tv.value_or(TruthValue{}));
      for (const RewriteRule& existing : rules_) {
        if (existing.rule_atom == rule.rule_atom) return rule.rule_atom;
      }
      rules_.push_back(rule);
      return rule.rule_atom;
    } catch (const EngineError& e) {
      if (e.code() == ErrorCode::InvalidArgument) grammar_error(expr, e.what());
      throw;
    }
  }

  return store_.add(atom_spec_from(expr));
}

std::vector<AtomId> Session::load(const std::vector<SExpr>& exprs) {
  std::vector<AtomId> ids;
  ids.reserve(exprs.size());
  for (const SExpr& e : exprs) ids.push_back(load_one(e));
  return ids;
}

std::vector<AtomId> Session::load_text(const std::string& text) {
  return load(parse(text));
}

std::vector<AtomId> Session::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::InvalidArgument, "cannot open file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_text(buffer.str());
}

std::string Session::render_bindings(const std::vector<Bindings>& results) const {
  Snapshot snap = store_.snapshot();
  std::vector<std::string> lines;
  lines.reserve(results.size());
  for (const Bindings& b : results) {
    std::vector<std::pair<std::string, std::string>> entries;
    for (const auto& [var, value] : b) {
      entries.emplace_back(snap.resolve(var).name, atom_structure(snap, value));
    }
    std::sort(entries.begin(), entries.end());
    std::string line = "{";
    for (size_t i = 0; i < entries.size(); ++i) {
      if (i) line += ", ";
      line += entries[i].first + ": " + entries[i].second;
    }
    line += "}";
    lines.push_back(std::move(line));
  }
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const std::string& l : lines) {
    out += l;
    out += '\n';
  }
  if (results.empty()) out = "(no matches)\n";
  return out;
}

std::string Session::stats() const {
  Snapshot snap = store_.snapshot();
  std::ostringstream os;
  os << "atoms: " << snap.atom_count() << "\n";
  os << "version: " << snap.version() << "\n";
  os << "rules: " << rules_.size() << "\n";
  os << "type-systems: " << types_.system_count() << "\n";
  os << "grounded-procedures: " << grounded_.size() << "\n";
  os << "index-inspections: " << store_.index_inspections() << "\n";
  return os.str();
}

namespace {

std::string render_distribution(const lam::Distribution& dist) {
  std::string out;
  for (size_t i = 0; i < dist.outcomes.size(); ++i) {
    if (i) out += ' ';
    out += lam::print_term(dist.outcomes[i].first) + ":" +
           to_string(dist.outcomes[i].second);
  }
  if (dist.residual != 0) {
    if (!out.empty()) out += ' ';
    out += "residual:" + to_string(dist.residual);
  }
  if (out.empty()) out = "(empty distribution)";
  out += '\n';
  return out;
}

}  // namespace

std::string Session::repl_command(const std::string& line) {
  try {
    std::string trimmed = line;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front()))) {
      trimmed.erase(trimmed.begin());
    }
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back()))) {
      trimmed.pop_back();
    }
    if (trimmed.empty()) return "";

    if (trimmed[0] != '!') {
      // Bare expressions load as atoms.
      std::vector<AtomId> ids = load_text(trimmed);
      Snapshot snap = store_.snapshot();
      std::string out;
      for (AtomId id : ids) {
        out += "#" + std::to_string(id.value) + " " + atom_structure(snap, id) + "\n";
      }
      return out;
    }

    std::istringstream is(trimmed);
    std::string command;
    is >> command;
    std::string rest;
    std::getline(is, rest);
    while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.front()))) {
      rest.erase(rest.begin());
    }

    if (command == "!load") {
      if (rest.empty()) return "error: !load FILE\n";
      std::vector<AtomId> ids = load_file(rest);
      return "loaded " + std::to_string(ids.size()) + " forms\n";
    }
    if (command == "!query") {
      std::vector<SExpr> exprs = parse(rest);
      if (exprs.size() != 1) return "error: !query EXPR\n";
      AtomId root = load_one(exprs[0]);
      Snapshot snap = store_.snapshot();
      Pattern pattern = Pattern::from_root(snap, root);
      return render_bindings(query(pattern, snap));
    }
    if (command == "!forward") {
      std::istringstream args(rest);
      std::string ruleset;
      size_t steps = options_.max_steps;
      args >> ruleset;
      if (ruleset.empty()) return "error: !forward RULESET N\n";
      if (args >> steps) {
      }
      std::vector<RewriteRule> rules = rules_;
      if (ruleset != "*" && ruleset != "loaded") {
        load_file(ruleset);
        rules = rules_;
      }
      if (rules.empty()) return "error: no rules loaded\n";
      ChainTrace trace = forward_chain(store_, rules, steps,
                                       ChainPolicy::ExhaustiveToFixpoint,
                                       options_.workers);
      std::ostringstream os;
      os << "rounds: " << trace.rounds << ", steps: " << trace.steps.size()
         << ", version: " << trace.final_version
         << (trace.budget_exhausted ? " (budget exhausted before fixpoint)"
                                    : " (fixpoint)")
         << "\n";
      return os.str();
    }
    if (command == "!backward") {
      std::vector<SExpr> exprs = parse(rest);
      size_t depth = options_.max_steps;
      if (!exprs.empty() && exprs.back().is_number()) {
        depth = static_cast<size_t>(numerator(exprs.back().number).convert_to<uint64_t>());
        exprs.pop_back();
      }
      if (exprs.size() != 1) return "error: !backward EXPR N\n";
      uint64_t data_version = store_.version();
      AtomId root = load_one(exprs[0]);
      Pattern goal = Pattern::from_root(store_.snapshot(), root);
      auto results = backward_chain(store_, goal, rules_, depth, data_version);
      std::ostringstream os;
      os << results.size() << " solution(s)\n";
      std::vector<Bindings> bindings;
      for (auto& [b, trace] : results) bindings.push_back(b);
      os << render_bindings(bindings);
      return os.str();
    }
    if (command == "!check") {
      std::vector<SExpr> exprs = parse(rest);
      if (exprs.size() != 2 || !exprs[1].is_symbol()) {
        return "error: !check ATOM SYSTEM\n";
      }
      AtomId atom = load_one(exprs[0]);
      auto system = types().find(exprs[1].text);
      if (!system) return "error: unknown type system '" + exprs[1].text + "'\n";
      TypeVerdict verdict = types().check_atom(atom, *system, store_.snapshot());
      return std::string(to_string(verdict)) + "\n";
    }
    if (command == "!eval") {
      std::vector<SExpr> exprs = parse(rest);
      size_t steps = options_.max_steps;
      if (!exprs.empty() && exprs.back().is_number()) {
        steps = static_cast<size_t>(numerator(exprs.back().number).convert_to<uint64_t>());
        exprs.pop_back();
      }
      if (exprs.size() != 1) return "error: !eval LAMBDA N\n";
      lam::TermPtr term = lam::term_from_sexpr(exprs[0]);
      return render_distribution(lam::eval_distribution(term, steps));
    }
    if (command == "!dump") {
      std::string text = canonical_dump(store_.snapshot());
      if (rest.empty() || rest == "-") return text;
      std::ofstream out(rest);
      if (!out) return "error: cannot write '" + rest + "'\n";
      out << text;
      return "dumped " + std::to_string(store_.atom_count()) + " atoms to " + rest + "\n";
    }
    if (command == "!stats") return stats();
    if (command == "!help") {
      return "commands: !load FILE, !query EXPR, !forward RULESET N, !backward EXPR N, "
             "!check ATOM SYSTEM, !eval LAMBDA N, !dump [FILE], !stats, !quit\n";
    }
    return "error: unknown command " + command + " (try !help)\n";
  } catch (const EngineError& e) {
    return std::string("error: ") + e.what() + "\n";
  } catch (const std::exception& e) {
    return std::string("internal error: ") + e.what() + "\n";
  }
}

int run_repl(Session& session, std::istream& in, std::ostream& out, bool color) {
  const char* prompt = color ? "\033[36mmg>\033[0m " : "mg> ";
  std::string line;
  out << prompt << std::flush;
  while (std::getline(in, line)) {
    if (line == "!quit" || line == "!exit") break;
    out << session.repl_command(line);
    out << prompt << std::flush;
  }
  out << "\n";
  return 0;
}

}  // namespace mg

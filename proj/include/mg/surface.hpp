#pragma once

#include "mg/grounded.hpp"
#include "mg/pattern.hpp"
#include "mg/rewrite.hpp"
#include "mg/sexpr.hpp"
#include "mg/store.hpp"
#include "mg/typesys.hpp"

#include <string>
#include <vector>

namespace mg {

struct SessionOptions {
  size_t max_steps = 64;
  size_t workers = 1;
  uint64_t seed = 1;
};

// One engine instance: store, type systems (simple-arity and lambda-iso
// pre-registered), grounded procedures and the loaded rule set.
class Session {
 public:
  Session();

  Store& store() { return store_; }
  // Built-in systems (simple-arity, lambda-iso) register on first use so a
  // fresh session starts with an empty store.
  TypeRegistry& types();
  GroundedRegistry& grounded() { return grounded_; }
  std::vector<RewriteRule>& rules() { return rules_; }
  SessionOptions& options() { return options_; }

  // Atom grammar: (TypeName "name"), (TypeName child...), optional trailing
  // (tv s c), plus Rule / Typed / lambda forms. Returns one id per input
  // expression; throws GrammarError naming the offending form.
  std::vector<AtomId> load(const std::vector<SExpr>& exprs);
  std::vector<AtomId> load_text(const std::string& text);
  std::vector<AtomId> load_file(const std::string& path);

  // One REPL interaction; never throws, errors come back as rendered text.
  std::string repl_command(const std::string& line);

  std::string render_bindings(const std::vector<Bindings>& results) const;
  std::string stats() const;

 private:
  AtomId load_one(const SExpr& expr);
  AtomSpec atom_spec_from(const SExpr& expr) const;

  Store store_;
  TypeRegistry types_;
  bool builtin_types_registered_ = false;
  GroundedRegistry grounded_;
  std::vector<RewriteRule> rules_;
  SessionOptions options_;
};

int run_repl(Session& session, std::istream& in, std::ostream& out, bool color);

}  // namespace mg

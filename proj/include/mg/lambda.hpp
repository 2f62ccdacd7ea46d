#pragma once

#include "mg/rational.hpp"
#include "mg/sexpr.hpp"
#include "mg/store.hpp"
#include "mg/typesys.hpp"

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace mg::lam {

// Multiplicities: erased, linear, unrestricted.
enum class Mult { Zero, One, Many };

std::string_view to_string(Mult m);
Mult mult_mul(Mult a, Mult b);

struct Term;
using TermPtr = std::shared_ptr<const Term>;

// Dependently typed lambda calculus with linear multiplicities, explicit
// cast (IsoType) conversion and probabilistic choice. Terms are immutable.
struct Term {
  struct Var {
    std::string name;
  };
  struct Const {
    std::string name;
  };
  struct Star {};
  struct Lam {
    std::string binder;
    Mult mult = Mult::Many;
    TermPtr ann;  // optional binder type
    TermPtr body;
  };
  struct Pi {
    std::string binder;
    Mult mult = Mult::Many;
    TermPtr dom;
    TermPtr cod;
  };
  struct App {
    TermPtr fn;
    TermPtr arg;
  };
  struct Ann {
    TermPtr term;
    TermPtr type;
  };
  struct CastUp {
    TermPtr term;
  };
  struct CastDown {
    TermPtr term;
  };
  struct Choice {
    Rational prob;  // strictly between 0 and 1
    TermPtr left;
    TermPtr right;
  };

  std::variant<Var, Const, Star, Lam, Pi, App, Ann, CastUp, CastDown, Choice> node;
};

TermPtr var(std::string name);
TermPtr constant(std::string name);
TermPtr star();
TermPtr lam(std::string binder, Mult mult, TermPtr ann, TermPtr body);
TermPtr pi(std::string binder, Mult mult, TermPtr dom, TermPtr cod);
TermPtr app(TermPtr fn, TermPtr arg);
TermPtr ann(TermPtr term, TermPtr type);
TermPtr cast_up(TermPtr term);
TermPtr cast_down(TermPtr term);
TermPtr choice(Rational prob, TermPtr left, TermPtr right);

// Alpha-invariant canonical form (de Bruijn indices for bound variables);
// used as the map key for distributions and for alpha equality.
std::string canonical_key(const TermPtr& t);
bool alpha_equal(const TermPtr& a, const TermPtr& b);

std::set<std::string> free_vars(const TermPtr& t);
TermPtr substitute(const TermPtr& t, const std::string& name, const TermPtr& value);

// One leftmost (normal-order) beta step, used by casts for type conversion.
std::optional<TermPtr> beta_step(const TermPtr& t);

// ---------------------------------------------------------------------------
// Type checking

enum class IllReason {
  UnboundVar,
  NotAFunction,
  TypeMismatch,
  LinearityViolation,
  CastStepUnavailable,
};

std::string_view to_string(IllReason r);

struct TypeError {
  IllReason reason = IllReason::TypeMismatch;
  std::string detail;
};

struct ContextEntry {
  std::string name;
  TermPtr type;
  Mult mult = Mult::Many;
};
using Context = std::vector<ContextEntry>;

struct TypeResult {
  std::optional<TermPtr> type;
  std::optional<TypeError> error;
  size_t steps_used = 0;

  bool ok() const { return type.has_value(); }
};

inline constexpr size_t kDefaultStepLimit = 1u << 22;

// Bidirectional checking. Type equality is syntactic up to alpha; no implicit
// beta conversion. CastDown infers by stepping the inferred type once;
// CastUp checks by stepping the expected type once. Linear usage is counted
// per binder and discharged at scope exit. Terminates on every input; the
// step limit is a hard internal bound, not a tuning knob.
TypeResult typecheck(const Context& ctx, const TermPtr& t,
                     size_t step_limit = kDefaultStepLimit);
TypeResult typecheck_against(const Context& ctx, const TermPtr& t, const TermPtr& type,
                             size_t step_limit = kDefaultStepLimit);

// ---------------------------------------------------------------------------
// Reduction

// Deterministic leftmost call-by-value step. Choice is not a value: it splits
// into two weighted successors when evaluation reaches it, before any
// substitution. Normal forms return an empty list.
std::vector<std::pair<TermPtr, Rational>> reduce_step(const TermPtr& t);
bool is_normal_form(const TermPtr& t);

struct Distribution {
  std::vector<std::pair<TermPtr, Rational>> outcomes;  // sorted by canonical key
  Rational residual = 0;

  Rational total_mass() const;
  std::optional<Rational> probability_of(const TermPtr& t) const;
};

enum class ExpansionOrder { BreadthFirst, DepthFirst };

// Expands reduce_step to depth max_steps; mass reaching normal forms
// accumulates in outcomes, unexhausted branches in residual. Exact rational
// arithmetic; outcomes + residual always sum to exactly 1.
Distribution eval_distribution(const TermPtr& t, size_t max_steps,
                               ExpansionOrder order = ExpansionOrder::BreadthFirst);

// ---------------------------------------------------------------------------
// Metagraph encoding

AtomId encode_term(Store& store, const TermPtr& t);
TermPtr decode_term(const Snapshot& snap, AtomId id);  // MalformedEncoding
bool is_lambda_encoding(const Snapshot& snap, AtomId id);

// ---------------------------------------------------------------------------
// Surface syntax: (lam (x lin T) body), (pi (x many T) U), (app f x),
// (choice 1/2 a b), (cast-up t), (cast-down t), (ann t T), star.

bool is_lambda_form(const SExpr& e);
TermPtr term_from_sexpr(const SExpr& e);
SExpr term_to_sexpr(const TermPtr& t);
std::string print_term(const TermPtr& t);

// Registers the lambda layer as a type system plugin ("lambda-iso"): decode
// the atom and its annotation, check the term against the decoded type.
TypeSystemPlugin make_lambda_plugin();
inline constexpr std::string_view kLambdaSystemName = "lambda-iso";

}  // namespace mg::lam

#include "mg/lambda.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace mg::lam {

std::string_view to_string(Mult m) {
  switch (m) {
    case Mult::Zero: return "zero";
    case Mult::One: return "lin";
    case Mult::Many: return "many";
  }
  return "many";
}

Mult mult_mul(Mult a, Mult b) {
  if (a == Mult::Zero || b == Mult::Zero) return Mult::Zero;
  if (a == Mult::Many || b == Mult::Many) return Mult::Many;
  return Mult::One;
}

std::string_view to_string(IllReason r) {
  switch (r) {
    case IllReason::UnboundVar: return "UnboundVar";
    case IllReason::NotAFunction: return "NotAFunction";
    case IllReason::TypeMismatch: return "TypeMismatch";
    case IllReason::LinearityViolation: return "LinearityViolation";
    case IllReason::CastStepUnavailable: return "CastStepUnavailable";
  }
  return "TypeMismatch";
}

TermPtr var(std::string name) {
  return std::make_shared<Term>(Term{Term::Var{std::move(name)}});
}
TermPtr constant(std::string name) {
  return std::make_shared<Term>(Term{Term::Const{std::move(name)}});
}
TermPtr star() { return std::make_shared<Term>(Term{Term::Star{}}); }
TermPtr lam(std::string binder, Mult mult, TermPtr ann, TermPtr body) {
  return std::make_shared<Term>(
      Term{Term::Lam{std::move(binder), mult, std::move(ann), std::move(body)}});
}
TermPtr pi(std::string binder, Mult mult, TermPtr dom, TermPtr cod) {
  return std::make_shared<Term>(
      Term{Term::Pi{std::move(binder), mult, std::move(dom), std::move(cod)}});
}
TermPtr app(TermPtr fn, TermPtr arg) {
  return std::make_shared<Term>(Term{Term::App{std::move(fn), std::move(arg)}});
}
TermPtr ann(TermPtr term, TermPtr type) {
  return std::make_shared<Term>(Term{Term::Ann{std::move(term), std::move(type)}});
}
TermPtr cast_up(TermPtr term) {
  return std::make_shared<Term>(Term{Term::CastUp{std::move(term)}});
}
TermPtr cast_down(TermPtr term) {
  return std::make_shared<Term>(Term{Term::CastDown{std::move(term)}});
}
TermPtr choice(Rational prob, TermPtr left, TermPtr right) {
  if (!(prob > 0 && prob < 1)) {
    fail(ErrorCode::InvalidArgument, "choice probability must lie strictly in (0,1)");
  }
  return std::make_shared<Term>(
      Term{Term::Choice{std::move(prob), std::move(left), std::move(right)}});
}

// ---------------------------------------------------------------------------
// Canonical form / alpha equality / substitution

namespace {

void key_rec(const TermPtr& t, std::vector<std::string>& binders, std::string& out) {
  if (auto* v = std::get_if<Term::Var>(&t->node)) {
    for (size_t i = binders.size(); i-- > 0;) {
      if (binders[i] == v->name) {
        out += '#';
        out += std::to_string(binders.size() - 1 - i);
        return;
      }
    }
    out += "v!";
    out += v->name;
    return;
  }
  if (auto* c = std::get_if<Term::Const>(&t->node)) {
    out += "c!";
    out += c->name;
    return;
  }
  if (std::get_if<Term::Star>(&t->node)) {
    out += '*';
    return;
  }
  if (auto* l = std::get_if<Term::Lam>(&t->node)) {
    out += "(L";
    out += to_string(l->mult);
    out += ' ';
    if (l->ann) {
      key_rec(l->ann, binders, out);
    } else {
      out += '_';
    }
    out += '.';
    binders.push_back(l->binder);
    key_rec(l->body, binders, out);
    binders.pop_back();
    out += ')';
    return;
  }
  if (auto* p = std::get_if<Term::Pi>(&t->node)) {
    out += "(P";
    out += to_string(p->mult);
    out += ' ';
    key_rec(p->dom, binders, out);
    out += '.';
    binders.push_back(p->binder);
    key_rec(p->cod, binders, out);
    binders.pop_back();
    out += ')';
    return;
  }
  if (auto* a = std::get_if<Term::App>(&t->node)) {
    out += "(A ";
    key_rec(a->fn, binders, out);
    out += ' ';
    key_rec(a->arg, binders, out);
    out += ')';
    return;
  }
  if (auto* an = std::get_if<Term::Ann>(&t->node)) {
    out += "(T ";
    key_rec(an->term, binders, out);
    out += ' ';
    key_rec(an->type, binders, out);
    out += ')';
    return;
  }
  if (auto* cu = std::get_if<Term::CastUp>(&t->node)) {
    out += "(U ";
    key_rec(cu->term, binders, out);
    out += ')';
    return;
  }
  if (auto* cd = std::get_if<Term::CastDown>(&t->node)) {
    out += "(D ";
    key_rec(cd->term, binders, out);
    out += ')';
    return;
  }
  const auto& ch = std::get<Term::Choice>(t->node);
  out += "(C ";
  out += mg::to_string(ch.prob);
  out += ' ';
  key_rec(ch.left, binders, out);
  out += ' ';
  key_rec(ch.right, binders, out);
  out += ')';
}

}  // namespace

std::string canonical_key(const TermPtr& t) {
  std::string out;
  std::vector<std::string> binders;
  key_rec(t, binders, out);
  return out;
}

bool alpha_equal(const TermPtr& a, const TermPtr& b) {
  return canonical_key(a) == canonical_key(b);
}

namespace {

void free_vars_rec(const TermPtr& t, std::vector<std::string>& bound,
                   std::set<std::string>& out) {
  if (auto* v = std::get_if<Term::Var>(&t->node)) {
    if (std::find(bound.begin(), bound.end(), v->name) == bound.end()) {
      out.insert(v->name);
    }
    return;
  }
  if (auto* l = std::get_if<Term::Lam>(&t->node)) {
    if (l->ann) free_vars_rec(l->ann, bound, out);
    bound.push_back(l->binder);
    free_vars_rec(l->body, bound, out);
    bound.pop_back();
    return;
  }
  if (auto* p = std::get_if<Term::Pi>(&t->node)) {
    free_vars_rec(p->dom, bound, out);
    bound.push_back(p->binder);
    free_vars_rec(p->cod, bound, out);
    bound.pop_back();
    return;
  }
  if (auto* a = std::get_if<Term::App>(&t->node)) {
    free_vars_rec(a->fn, bound, out);
    free_vars_rec(a->arg, bound, out);
    return;
  }
  if (auto* an = std::get_if<Term::Ann>(&t->node)) {
    free_vars_rec(an->term, bound, out);
    free_vars_rec(an->type, bound, out);
    return;
  }
  if (auto* cu = std::get_if<Term::CastUp>(&t->node)) {
    free_vars_rec(cu->term, bound, out);
    return;
  }
  if (auto* cd = std::get_if<Term::CastDown>(&t->node)) {
    free_vars_rec(cd->term, bound, out);
    return;
  }
  if (auto* ch = std::get_if<Term::Choice>(&t->node)) {
    free_vars_rec(ch->left, bound, out);
    free_vars_rec(ch->right, bound, out);
    return;
  }
}

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  std::string name = base;
  while (avoid.count(name)) name += '\'';
  return name;
}

}  // namespace

std::set<std::string> free_vars(const TermPtr& t) {
  std::set<std::string> out;
  std::vector<std::string> bound;
  free_vars_rec(t, bound, out);
  return out;
}

TermPtr substitute(const TermPtr& t, const std::string& name, const TermPtr& value) {
  if (auto* v = std::get_if<Term::Var>(&t->node)) {
    return v->name == name ? value : t;
  }
  if (std::get_if<Term::Const>(&t->node) || std::get_if<Term::Star>(&t->node)) {
    return t;
  }
  if (auto* l = std::get_if<Term::Lam>(&t->node)) {
    TermPtr a = l->ann ? substitute(l->ann, name, value) : nullptr;
    if (l->binder == name) return lam(l->binder, l->mult, a, l->body);
    if (free_vars(value).count(l->binder)) {
      std::set<std::string> avoid = free_vars(value);
      for (const auto& fv : free_vars(l->body)) avoid.insert(fv);
      avoid.insert(name);
      std::string nb = fresh_name(l->binder, avoid);
      TermPtr body = substitute(l->body, l->binder, var(nb));
      return lam(nb, l->mult, a, substitute(body, name, value));
    }
    return lam(l->binder, l->mult, a, substitute(l->body, name, value));
  }
  if (auto* p = std::get_if<Term::Pi>(&t->node)) {
    TermPtr d = substitute(p->dom, name, value);
    if (p->binder == name) return pi(p->binder, p->mult, d, p->cod);
    if (free_vars(value).count(p->binder)) {
      std::set<std::string> avoid = free_vars(value);
      for (const auto& fv : free_vars(p->cod)) avoid.insert(fv);
      avoid.insert(name);
      std::string nb = fresh_name(p->binder, avoid);
      TermPtr cod = substitute(p->cod, p->binder, var(nb));
      return pi(nb, p->mult, d, substitute(cod, name, value));
    }
    return pi(p->binder, p->mult, d, substitute(p->cod, name, value));
  }
  if (auto* a = std::get_if<Term::App>(&t->node)) {
    return app(substitute(a->fn, name, value), substitute(a->arg, name, value));
  }
  if (auto* an = std::get_if<Term::Ann>(&t->node)) {
    return ann(substitute(an->term, name, value), substitute(an->type, name, value));
  }
  if (auto* cu = std::get_if<Term::CastUp>(&t->node)) {
    return cast_up(substitute(cu->term, name, value));
  }
  if (auto* cd = std::get_if<Term::CastDown>(&t->node)) {
    return cast_down(substitute(cd->term, name, value));
  }
  const auto& ch = std::get<Term::Choice>(t->node);
  return choice(ch.prob, substitute(ch.left, name, value),
                substitute(ch.right, name, value));
}

std::optional<TermPtr> beta_step(const TermPtr& t) {
  if (auto* a = std::get_if<Term::App>(&t->node)) {
    if (auto* l = std::get_if<Term::Lam>(&a->fn->node)) {
      return substitute(l->body, l->binder, a->arg);
    }
    if (auto s = beta_step(a->fn)) return app(*s, a->arg);
    if (auto s = beta_step(a->arg)) return app(a->fn, *s);
    return std::nullopt;
  }
  if (auto* l = std::get_if<Term::Lam>(&t->node)) {
    if (l->ann) {
      if (auto s = beta_step(l->ann)) return lam(l->binder, l->mult, *s, l->body);
    }
    if (auto s = beta_step(l->body)) return lam(l->binder, l->mult, l->ann, *s);
    return std::nullopt;
  }
  if (auto* p = std::get_if<Term::Pi>(&t->node)) {
    if (auto s = beta_step(p->dom)) return pi(p->binder, p->mult, *s, p->cod);
    if (auto s = beta_step(p->cod)) return pi(p->binder, p->mult, p->dom, *s);
    return std::nullopt;
  }
  if (auto* an = std::get_if<Term::Ann>(&t->node)) {
    if (auto s = beta_step(an->term)) return ann(*s, an->type);
    if (auto s = beta_step(an->type)) return ann(an->term, *s);
    return std::nullopt;
  }
  if (auto* cu = std::get_if<Term::CastUp>(&t->node)) {
    if (auto s = beta_step(cu->term)) return cast_up(*s);
    return std::nullopt;
  }
  if (auto* cd = std::get_if<Term::CastDown>(&t->node)) {
    if (auto s = beta_step(cd->term)) return cast_down(*s);
    return std::nullopt;
  }
  if (auto* ch = std::get_if<Term::Choice>(&t->node)) {
    if (auto s = beta_step(ch->left)) return choice(ch->prob, *s, ch->right);
    if (auto s = beta_step(ch->right)) return choice(ch->prob, ch->left, *s);
    return std::nullopt;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Type checking

namespace {

enum class Usage { Zero, Once, Many };

Usage usage_add(Usage a, Usage b) {
  if (a == Usage::Zero) return b;
  if (b == Usage::Zero) return a;
  return Usage::Many;
}

Usage usage_of_scale(Mult m) {
  switch (m) {
    case Mult::Zero: return Usage::Zero;
    case Mult::One: return Usage::Once;
    case Mult::Many: return Usage::Many;
  }
  return Usage::Many;
}

class Checker {
 public:
  explicit Checker(size_t limit) : limit_(limit) {}

  TypeResult run_infer(const Context& ctx, const TermPtr& t) {
    return run(ctx, [&] { return infer(t); });
  }

  TypeResult run_check(const Context& ctx, const TermPtr& t, const TermPtr& type) {
    return run(ctx, [&] {
      check(t, type);
      return type;
    });
  }

 private:
  struct Entry {
    std::string name;
    TermPtr type;
    Mult mult = Mult::Many;
    Usage usage = Usage::Zero;
  };

  struct IllException {
    TypeError err;
  };

  template <typename F>
  TypeResult run(const Context& ctx, F&& body) {
    for (const ContextEntry& e : ctx) {
      scope_.push_back(Entry{e.name, e.type, e.mult, Usage::Zero});
    }
    TypeResult result;
    try {
      TermPtr type = body();
      for (const Entry& e : scope_) verify_usage(e);
      result.type = type;
    } catch (const IllException& ill) {
      result.error = ill.err;
    }
    result.steps_used = steps_;
    return result;
  }

  [[noreturn]] void ill(IllReason reason, std::string detail) {
    throw IllException{TypeError{reason, std::move(detail)}};
  }

  void tick() {
    if (++steps_ > limit_) {
      fail(ErrorCode::Internal, "typecheck exceeded its step bound");
    }
  }

  struct ScaleGuard {
    Checker& checker;
    Mult saved;
    ScaleGuard(Checker& c, Mult m) : checker(c), saved(c.scale_) { c.scale_ = m; }
    ~ScaleGuard() { checker.scale_ = saved; }
  };

  void push(std::string name, TermPtr type, Mult mult) {
    scope_.push_back(Entry{std::move(name), std::move(type), mult, Usage::Zero});
  }

  void verify_usage(const Entry& e) {
    if (e.mult == Mult::One && e.usage != Usage::Once) {
      ill(IllReason::LinearityViolation,
          "linear variable '" + e.name + "' must be used exactly once");
    }
    if (e.mult == Mult::Zero && e.usage != Usage::Zero) {
      ill(IllReason::LinearityViolation,
          "erased variable '" + e.name + "' used in a runtime position");
    }
  }

  void discharge() {
    Entry e = std::move(scope_.back());
    scope_.pop_back();
    verify_usage(e);
  }

  TermPtr lookup_use(const std::string& name) {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it) {
      if (it->name == name) {
        it->usage = usage_add(it->usage, usage_of_scale(scale_));
        return it->type;
      }
    }
    ill(IllReason::UnboundVar, "unbound variable '" + name + "'");
  }

  std::vector<Usage> usages() const {
    std::vector<Usage> out(scope_.size());
    for (size_t i = 0; i < scope_.size(); ++i) out[i] = scope_[i].usage;
    return out;
  }

  void set_usages(const std::vector<Usage>& u) {
    for (size_t i = 0; i < u.size() && i < scope_.size(); ++i) scope_[i].usage = u[i];
  }

  void check_is_type(const TermPtr& t) {
    ScaleGuard guard(*this, Mult::Zero);
    check(t, star());
  }

  TermPtr infer(const TermPtr& t) {
    tick();
    if (auto* v = std::get_if<Term::Var>(&t->node)) return lookup_use(v->name);
    if (auto* c = std::get_if<Term::Const>(&t->node)) return lookup_use(c->name);
    if (std::get_if<Term::Star>(&t->node)) return star();  // Type-in-Type
    if (auto* p = std::get_if<Term::Pi>(&t->node)) {
      check_is_type(p->dom);
      push(p->binder, p->dom, Mult::Zero);
      check_is_type(p->cod);
      discharge();
      return star();
    }
    if (auto* l = std::get_if<Term::Lam>(&t->node)) {
      if (!l->ann) {
        ill(IllReason::TypeMismatch, "cannot infer the type of an unannotated lambda");
      }
      check_is_type(l->ann);
      push(l->binder, l->ann, l->mult);
      TermPtr body_type = infer(l->body);
      discharge();
      return pi(l->binder, l->mult, l->ann, body_type);
    }
    if (auto* a = std::get_if<Term::App>(&t->node)) {
      TermPtr fn_type = infer(a->fn);
      auto* p = std::get_if<Term::Pi>(&fn_type->node);
      if (!p) {
        ill(IllReason::NotAFunction,
            "application head has type " + canonical_key(fn_type) +
                " which is not a Pi (no implicit conversion; use casts)");
      }
      {
        ScaleGuard guard(*this, mult_mul(scale_, p->mult));
        check(a->arg, p->dom);
      }
      return substitute(p->cod, p->binder, a->arg);
    }
    if (auto* an = std::get_if<Term::Ann>(&t->node)) {
      check_is_type(an->type);
      check(an->term, an->type);
      return an->type;
    }
    if (std::get_if<Term::CastUp>(&t->node)) {
      ill(IllReason::CastStepUnavailable,
          "cast-up cannot be inferred; annotate it with the target type");
    }
    if (auto* cd = std::get_if<Term::CastDown>(&t->node)) {
      if (auto* cu = std::get_if<Term::CastUp>(&cd->term->node)) {
        return infer(cu->term);  // cast pair discharge
      }
      TermPtr inner = infer(cd->term);
      auto stepped = beta_step(inner);
      if (!stepped) {
        ill(IllReason::CastStepUnavailable,
            "cast-down subject type " + canonical_key(inner) + " has no beta step");
      }
      return *stepped;
    }
    const auto& ch = std::get<Term::Choice>(t->node);
    std::vector<Usage> before = usages();
    TermPtr left_type = infer(ch.left);
    std::vector<Usage> left_usage = usages();
    set_usages(before);
    TermPtr right_type = infer(ch.right);
    if (!alpha_equal(left_type, right_type)) {
      ill(IllReason::TypeMismatch, "choice branches have different types");
    }
    if (left_usage != usages()) {
      ill(IllReason::LinearityViolation,
          "choice branches consume different linear resources");
    }
    return left_type;
  }

  void check(const TermPtr& t, const TermPtr& expected) {
    tick();
    if (auto* l = std::get_if<Term::Lam>(&t->node)) {
      auto* p = std::get_if<Term::Pi>(&expected->node);
      if (!p) {
        ill(IllReason::TypeMismatch,
            "lambda checked against non-Pi type " + canonical_key(expected));
      }
      if (l->mult != p->mult) {
        ill(IllReason::TypeMismatch, "binder multiplicity mismatch");
      }
      if (l->ann && !alpha_equal(l->ann, p->dom)) {
        ill(IllReason::TypeMismatch, "binder annotation differs from the Pi domain");
      }
      std::string binder = l->binder;
      TermPtr body = l->body;
      std::set<std::string> cod_free = free_vars(p->cod);
      cod_free.erase(p->binder);
      if (cod_free.count(binder)) {
        std::set<std::string> avoid = cod_free;
        for (const auto& fv : free_vars(body)) avoid.insert(fv);
        avoid.insert(p->binder);
        std::string nb = fresh_name(binder, avoid);
        body = substitute(body, binder, var(nb));
        binder = nb;
      }
      push(binder, p->dom, p->mult);
      check(body, substitute(p->cod, p->binder, var(binder)));
      discharge();
      return;
    }
    if (auto* cu = std::get_if<Term::CastUp>(&t->node)) {
      auto stepped = beta_step(expected);
      if (!stepped) {
        ill(IllReason::CastStepUnavailable,
            "expected type " + canonical_key(expected) + " has no beta step");
      }
      check(cu->term, *stepped);
      return;
    }
    if (auto* cd = std::get_if<Term::CastDown>(&t->node)) {
      if (auto* cu = std::get_if<Term::CastUp>(&cd->term->node)) {
        check(cu->term, expected);  // cast pair discharge at the same type
        return;
      }
    }
    if (auto* ch = std::get_if<Term::Choice>(&t->node)) {
      std::vector<Usage> before = usages();
      check(ch->left, expected);
      std::vector<Usage> left_usage = usages();
      set_usages(before);
      check(ch->right, expected);
      if (left_usage != usages()) {
        ill(IllReason::LinearityViolation,
            "choice branches consume different linear resources");
      }
      return;
    }
    TermPtr inferred = infer(t);
    if (!alpha_equal(inferred, expected)) {
      ill(IllReason::TypeMismatch, "expected " + canonical_key(expected) + " but found " +
                                       canonical_key(inferred));
    }
  }

  std::vector<Entry> scope_;
  Mult scale_ = Mult::One;
  size_t steps_ = 0;
  size_t limit_;
};

}  // namespace

TypeResult typecheck(const Context& ctx, const TermPtr& t, size_t step_limit) {
  return Checker(step_limit).run_infer(ctx, t);
}

TypeResult typecheck_against(const Context& ctx, const TermPtr& t, const TermPtr& type,
                             size_t step_limit) {
  return Checker(step_limit).run_check(ctx, t, type);
}

// ---------------------------------------------------------------------------
// Reduction

bool is_normal_form(const TermPtr& t) {
  if (std::get_if<Term::Var>(&t->node) || std::get_if<Term::Const>(&t->node) ||
      std::get_if<Term::Star>(&t->node) || std::get_if<Term::Lam>(&t->node) ||
      std::get_if<Term::Pi>(&t->node)) {
    return true;
  }
  if (auto* cu = std::get_if<Term::CastUp>(&t->node)) {
    return is_normal_form(cu->term);
  }
  if (auto* cd = std::get_if<Term::CastDown>(&t->node)) {
    if (std::get_if<Term::CastUp>(&cd->term->node)) return false;  // pair cancels
    return is_normal_form(cd->term);
  }
  if (auto* a = std::get_if<Term::App>(&t->node)) {
    if (!is_normal_form(a->fn) || !is_normal_form(a->arg)) return false;
    return !std::holds_alternative<Term::Lam>(a->fn->node);
  }
  // Ann always drops; Choice always splits.
  return false;
}

namespace {

using Successors = std::vector<std::pair<TermPtr, Rational>>;

Successors map_successors(Successors in, const std::function<TermPtr(TermPtr)>& wrap) {
  Successors out;
  out.reserve(in.size());
  for (auto& [term, weight] : in) out.emplace_back(wrap(std::move(term)), weight);
  return out;
}

}  // namespace

std::vector<std::pair<TermPtr, Rational>> reduce_step(const TermPtr& t) {
  if (auto* a = std::get_if<Term::App>(&t->node)) {
    if (!is_normal_form(a->fn)) {
      return map_successors(reduce_step(a->fn),
                            [&](TermPtr s) { return app(std::move(s), a->arg); });
    }
    if (!is_normal_form(a->arg)) {
      return map_successors(reduce_step(a->arg),
                            [&](TermPtr s) { return app(a->fn, std::move(s)); });
    }
    if (auto* l = std::get_if<Term::Lam>(&a->fn->node)) {
      return {{substitute(l->body, l->binder, a->arg), Rational(1)}};
    }
    return {};
  }
  if (auto* an = std::get_if<Term::Ann>(&t->node)) {
    if (!is_normal_form(an->term)) {
      return map_successors(reduce_step(an->term),
                            [&](TermPtr s) { return ann(std::move(s), an->type); });
    }
    return {{an->term, Rational(1)}};
  }
  if (auto* cu = std::get_if<Term::CastUp>(&t->node)) {
    if (!is_normal_form(cu->term)) {
      return map_successors(reduce_step(cu->term),
                            [](TermPtr s) { return cast_up(std::move(s)); });
    }
    return {};
  }
  if (auto* cd = std::get_if<Term::CastDown>(&t->node)) {
    if (auto* cu = std::get_if<Term::CastUp>(&cd->term->node)) {
      if (is_normal_form(cu->term)) return {{cu->term, Rational(1)}};
    }
    if (!is_normal_form(cd->term)) {
      return map_successors(reduce_step(cd->term),
                            [](TermPtr s) { return cast_down(std::move(s)); });
    }
    return {};
  }
  if (auto* ch = std::get_if<Term::Choice>(&t->node)) {
    return {{ch->left, ch->prob}, {ch->right, Rational(1) - ch->prob}};
  }
  return {};
}

Rational Distribution::total_mass() const {
  Rational sum = residual;
  for (const auto& [term, p] : outcomes) sum += p;
  return sum;
}

std::optional<Rational> Distribution::probability_of(const TermPtr& t) const {
  std::string key = canonical_key(t);
  for (const auto& [term, p] : outcomes) {
    if (canonical_key(term) == key) return p;
  }
  return std::nullopt;
}

Distribution eval_distribution(const TermPtr& t, size_t max_steps,
                               ExpansionOrder order) {
  Distribution dist;
  std::map<std::string, std::pair<TermPtr, Rational>> results;

  auto add_result = [&](const TermPtr& term, const Rational& mass) {
    auto [it, inserted] = results.try_emplace(canonical_key(term), term, mass);
    if (!inserted) it->second.second += mass;
  };

  if (order == ExpansionOrder::BreadthFirst) {
    std::map<std::string, std::pair<TermPtr, Rational>> frontier;
    frontier.emplace(canonical_key(t), std::make_pair(t, Rational(1)));
    size_t budget = max_steps;
    while (!frontier.empty()) {
      for (auto it = frontier.begin(); it != frontier.end();) {
        if (is_normal_form(it->second.first)) {
          add_result(it->second.first, it->second.second);
          it = frontier.erase(it);
        } else {
          ++it;
        }
      }
      if (frontier.empty() || budget == 0) break;
      --budget;
      std::map<std::string, std::pair<TermPtr, Rational>> next;
      for (const auto& [key, entry] : frontier) {
        for (const auto& [succ, weight] : reduce_step(entry.first)) {
          Rational mass = entry.second * weight;
          auto [it, inserted] = next.try_emplace(canonical_key(succ), succ, mass);
          if (!inserted) it->second.second += mass;
        }
      }
      frontier = std::move(next);
    }
    for (const auto& [key, entry] : frontier) dist.residual += entry.second;
  } else {
    std::function<void(const TermPtr&, Rational, size_t)> explore =
        [&](const TermPtr& term, Rational mass, size_t left) {
          if (is_normal_form(term)) {
            add_result(term, mass);
            return;
          }
          if (left == 0) {
            dist.residual += mass;
            return;
          }
          for (const auto& [succ, weight] : reduce_step(term)) {
            explore(succ, mass * weight, left - 1);
          }
        };
    explore(t, Rational(1), max_steps);
  }

  dist.outcomes.reserve(results.size());
  for (auto& [key, entry] : results) dist.outcomes.push_back(std::move(entry));
  return dist;
}

// ---------------------------------------------------------------------------
// Metagraph encoding

namespace {

AtomId mult_node(Store& store, Mult m) {
  switch (m) {
    case Mult::Zero: return store.add_node("Multiplicity", "0");
    case Mult::One: return store.add_node("Multiplicity", "1");
    case Mult::Many: return store.add_node("Multiplicity", "many");
  }
  return store.add_node("Multiplicity", "many");
}

Mult decode_mult(const Atom& atom) {
  if (atom.is_node() && atom.type_name == "Multiplicity") {
    if (atom.name == "0") return Mult::Zero;
    if (atom.name == "1") return Mult::One;
    if (atom.name == "many") return Mult::Many;
  }
  fail(ErrorCode::MalformedEncoding, "expected a Multiplicity node");
}

std::string decode_binder(const Snapshot& snap, AtomId id) {
  Atom atom = snap.resolve(id);
  if (!atom.is_node() || atom.type_name != "LambdaVar") {
    fail(ErrorCode::MalformedEncoding, "expected a LambdaVar binder node");
  }
  return atom.name;
}

}  // namespace

AtomId encode_term(Store& store, const TermPtr& t) {
  if (auto* v = std::get_if<Term::Var>(&t->node)) {
    return store.add_node("LambdaVar", v->name);
  }
  if (auto* c = std::get_if<Term::Const>(&t->node)) {
    return store.add_node("LambdaConst", c->name);
  }
  if (std::get_if<Term::Star>(&t->node)) {
    return store.add_node("LambdaStar", "*");
  }
  if (auto* l = std::get_if<Term::Lam>(&t->node)) {
    AtomId binder = store.add_node("LambdaVar", l->binder);
    AtomId mult = mult_node(store, l->mult);
    AtomId annotation =
        l->ann ? encode_term(store, l->ann) : store.add_node("LambdaNoAnn", "_");
    AtomId body = encode_term(store, l->body);
    return store.add_link("Lambda", {binder, mult, annotation, body});
  }
  if (auto* p = std::get_if<Term::Pi>(&t->node)) {
    AtomId binder = store.add_node("LambdaVar", p->binder);
    AtomId mult = mult_node(store, p->mult);
    AtomId dom = encode_term(store, p->dom);
    AtomId cod = encode_term(store, p->cod);
    return store.add_link("LambdaPi", {binder, mult, dom, cod});
  }
  if (auto* a = std::get_if<Term::App>(&t->node)) {
    return store.add_link("LambdaApp",
                          {encode_term(store, a->fn), encode_term(store, a->arg)});
  }
  if (auto* an = std::get_if<Term::Ann>(&t->node)) {
    return store.add_link("LambdaAnn",
                          {encode_term(store, an->term), encode_term(store, an->type)});
  }
  if (auto* cu = std::get_if<Term::CastUp>(&t->node)) {
    return store.add_link("LambdaCastUp", {encode_term(store, cu->term)});
  }
  if (auto* cd = std::get_if<Term::CastDown>(&t->node)) {
    return store.add_link("LambdaCastDown", {encode_term(store, cd->term)});
  }
  const auto& ch = std::get<Term::Choice>(t->node);
  AtomId prob = store.add_node("Rational", mg::to_string(ch.prob));
  return store.add_link("LambdaChoice",
                        {prob, encode_term(store, ch.left), encode_term(store, ch.right)});
}

TermPtr decode_term(const Snapshot& snap, AtomId id) {
  Atom atom = snap.resolve(id);
  const std::string& tn = atom.type_name;
  if (atom.is_node()) {
    if (tn == "LambdaVar") return var(atom.name);
    if (tn == "LambdaConst") return constant(atom.name);
    if (tn == "LambdaStar") return star();
    fail(ErrorCode::MalformedEncoding, "node (" + tn + " \"" + atom.name +
                                           "\") is not a lambda term encoding");
  }
  if (tn == "Lambda" && atom.targets.size() == 4) {
    std::string binder = decode_binder(snap, atom.targets[0]);
    Mult mult = decode_mult(snap.resolve(atom.targets[1]));
    Atom ann_atom = snap.resolve(atom.targets[2]);
    TermPtr annotation;
    if (!(ann_atom.is_node() && ann_atom.type_name == "LambdaNoAnn")) {
      annotation = decode_term(snap, atom.targets[2]);
    }
    return lam(binder, mult, annotation, decode_term(snap, atom.targets[3]));
  }
  if (tn == "LambdaPi" && atom.targets.size() == 4) {
    return pi(decode_binder(snap, atom.targets[0]),
              decode_mult(snap.resolve(atom.targets[1])),
              decode_term(snap, atom.targets[2]), decode_term(snap, atom.targets[3]));
  }
  if (tn == "LambdaApp" && atom.targets.size() == 2) {
    return app(decode_term(snap, atom.targets[0]), decode_term(snap, atom.targets[1]));
  }
  if (tn == "LambdaAnn" && atom.targets.size() == 2) {
    return ann(decode_term(snap, atom.targets[0]), decode_term(snap, atom.targets[1]));
  }
  if (tn == "LambdaCastUp" && atom.targets.size() == 1) {
    return cast_up(decode_term(snap, atom.targets[0]));
  }
  if (tn == "LambdaCastDown" && atom.targets.size() == 1) {
    return cast_down(decode_term(snap, atom.targets[0]));
  }
  if (tn == "LambdaChoice" && atom.targets.size() == 3) {
    Atom prob_atom = snap.resolve(atom.targets[0]);
    if (!prob_atom.is_node() || prob_atom.type_name != "Rational") {
      fail(ErrorCode::MalformedEncoding, "choice probability must be a Rational node");
    }
    auto prob = parse_rational(prob_atom.name);
    if (!prob || !(*prob > 0 && *prob < 1)) {
      fail(ErrorCode::MalformedEncoding, "choice probability must lie in (0,1)");
    }
    return choice(*prob, decode_term(snap, atom.targets[1]),
                  decode_term(snap, atom.targets[2]));
  }
  fail(ErrorCode::MalformedEncoding,
       "link (" + tn + " ...) is not a lambda term encoding");
}

bool is_lambda_encoding(const Snapshot& snap, AtomId id) {
  try {
    decode_term(snap, id);
    return true;
  } catch (const EngineError&) {
    return false;
  }
}

// ---------------------------------------------------------------------------
// Surface syntax

namespace {

std::optional<Mult> mult_from_symbol(const SExpr& e) {
  if (!e.is_symbol()) return std::nullopt;
  if (e.text == "zero") return Mult::Zero;
  if (e.text == "lin") return Mult::One;
  if (e.text == "many") return Mult::Many;
  return std::nullopt;
}

[[noreturn]] void grammar_error(const SExpr& e, const std::string& message) {
  fail(ErrorCode::GrammarError, std::to_string(e.line) + ":" + std::to_string(e.column) +
                                    ": " + message);
}

TermPtr term_rec(const SExpr& e, std::vector<std::string>& bound) {
  if (e.is_symbol()) {
    if (e.text == "star") return star();
    if (std::find(bound.begin(), bound.end(), e.text) != bound.end()) {
      return var(e.text);
    }
    return constant(e.text);
  }
  if (!e.is_list() || e.items.empty() || !e.items[0].is_symbol()) {
    grammar_error(e, "expected a lambda term form");
  }
  const std::string& head = e.items[0].text;
  if (head == "lam" || head == "pi") {
    if (e.items.size() != 3 || !e.items[1].is_list()) {
      grammar_error(e, "expected (" + head + " (x MULT [T]) BODY)");
    }
    const SExpr& binder_form = e.items[1];
    if (binder_form.items.size() < 2 || binder_form.items.size() > 3 ||
        !binder_form.items[0].is_symbol()) {
      grammar_error(binder_form, "expected binder (x MULT [T])");
    }
    auto mult = mult_from_symbol(binder_form.items[1]);
    if (!mult) {
      grammar_error(binder_form.items[1], "multiplicity must be zero, lin or many");
    }
    std::string name = binder_form.items[0].text;
    TermPtr binder_type;
    if (binder_form.items.size() == 3) {
      binder_type = term_rec(binder_form.items[2], bound);
    }
    if (head == "pi" && !binder_type) {
      grammar_error(binder_form, "pi binders require a domain type");
    }
    bound.push_back(name);
    TermPtr body = term_rec(e.items[2], bound);
    bound.pop_back();
    if (head == "pi") return pi(name, *mult, binder_type, body);
    return lam(name, *mult, binder_type, body);
  }
  if (head == "app") {
    if (e.items.size() < 3) grammar_error(e, "expected (app F X ...)");
    TermPtr acc = term_rec(e.items[1], bound);
    for (size_t i = 2; i < e.items.size(); ++i) {
      acc = app(acc, term_rec(e.items[i], bound));
    }
    return acc;
  }
  if (head == "choice") {
    if (e.items.size() != 4 || !e.items[1].is_number()) {
      grammar_error(e, "expected (choice P L R) with a rational P");
    }
    if (!(e.items[1].number > 0 && e.items[1].number < 1)) {
      grammar_error(e.items[1], "choice probability must lie strictly in (0,1)");
    }
    return choice(e.items[1].number, term_rec(e.items[2], bound),
                  term_rec(e.items[3], bound));
  }
  if (head == "cast-up" || head == "cast-down") {
    if (e.items.size() != 2) grammar_error(e, "expected (" + head + " T)");
    TermPtr inner = term_rec(e.items[1], bound);
    return head == "cast-up" ? cast_up(inner) : cast_down(inner);
  }
  if (head == "ann") {
    if (e.items.size() != 3) grammar_error(e, "expected (ann T TYPE)");
    return ann(term_rec(e.items[1], bound), term_rec(e.items[2], bound));
  }
  grammar_error(e, "unknown lambda form '" + head + "'");
}

}  // namespace

bool is_lambda_form(const SExpr& e) {
  if (e.is_symbol("star")) return true;
  if (!e.is_list() || e.items.empty() || !e.items[0].is_symbol()) return false;
  const std::string& head = e.items[0].text;
  return head == "lam" || head == "pi" || head == "app" || head == "choice" ||
         head == "cast-up" || head == "cast-down" || head == "ann";
}

TermPtr term_from_sexpr(const SExpr& e) {
  std::vector<std::string> bound;
  return term_rec(e, bound);
}

SExpr term_to_sexpr(const TermPtr& t) {
  if (auto* v = std::get_if<Term::Var>(&t->node)) return SExpr::symbol(v->name);
  if (auto* c = std::get_if<Term::Const>(&t->node)) return SExpr::symbol(c->name);
  if (std::get_if<Term::Star>(&t->node)) return SExpr::symbol("star");
  if (auto* l = std::get_if<Term::Lam>(&t->node)) {
    std::vector<SExpr> binder{SExpr::symbol(l->binder),
                              SExpr::symbol(std::string(to_string(l->mult)))};
    if (l->ann) binder.push_back(term_to_sexpr(l->ann));
    return SExpr::list(
        {SExpr::symbol("lam"), SExpr::list(std::move(binder)), term_to_sexpr(l->body)});
  }
  if (auto* p = std::get_if<Term::Pi>(&t->node)) {
    std::vector<SExpr> binder{SExpr::symbol(p->binder),
                              SExpr::symbol(std::string(to_string(p->mult))),
                              term_to_sexpr(p->dom)};
    return SExpr::list(
        {SExpr::symbol("pi"), SExpr::list(std::move(binder)), term_to_sexpr(p->cod)});
  }
  if (auto* a = std::get_if<Term::App>(&t->node)) {
    return SExpr::list(
        {SExpr::symbol("app"), term_to_sexpr(a->fn), term_to_sexpr(a->arg)});
  }
  if (auto* an = std::get_if<Term::Ann>(&t->node)) {
    return SExpr::list(
        {SExpr::symbol("ann"), term_to_sexpr(an->term), term_to_sexpr(an->type)});
  }
  if (auto* cu = std::get_if<Term::CastUp>(&t->node)) {
    return SExpr::list({SExpr::symbol("cast-up"), term_to_sexpr(cu->term)});
  }
  if (auto* cd = std::get_if<Term::CastDown>(&t->node)) {
    return SExpr::list({SExpr::symbol("cast-down"), term_to_sexpr(cd->term)});
  }
  const auto& ch = std::get<Term::Choice>(t->node);
  return SExpr::list({SExpr::symbol("choice"), SExpr::num(ch.prob),
                      term_to_sexpr(ch.left), term_to_sexpr(ch.right)});
}

std::string print_term(const TermPtr& t) { return print(term_to_sexpr(t)); }

// ---------------------------------------------------------------------------
// Type system plugin

TypeSystemPlugin make_lambda_plugin() {
  TypeSystemPlugin plugin;
  plugin.name = std::string(kLambdaSystemName);
  plugin.check_atom = [](const Snapshot& snap, AtomId atom,
                         AtomId type_expr) -> TypeVerdict {
    TermPtr subject;
    TermPtr type;
    try {
      subject = decode_term(snap, atom);
      type = decode_term(snap, type_expr);
    } catch (const EngineError&) {
      return TypeVerdict::Reject;  // annotated under this system but not a term
    }
    return typecheck_against({}, subject, type).ok() ? TypeVerdict::Accept
                                                     : TypeVerdict::Reject;
  };
  plugin.types_consistent = [](const Snapshot& snap, AtomId a, AtomId b) -> bool {
    if (a == b) return true;
    try {
      return alpha_equal(decode_term(snap, a), decode_term(snap, b));
    } catch (const EngineError&) {
      return false;
    }
  };
  return plugin;
}

}  // namespace mg::lam

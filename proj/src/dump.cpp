#include "mg/dump.hpp"

#include <algorithm>
#include <tuple>

namespace mg {

namespace {

SExpr tv_form(const TruthValue& tv) {
  return SExpr::list({SExpr::symbol("tv"), SExpr::num(tv.strength),
                      SExpr::num(tv.confidence)});
}

}  // namespace

SExpr atom_to_sexpr(const Snapshot& snap, AtomId id, bool with_tv) {
  Atom atom = snap.resolve(id);
  std::vector<SExpr> items;
  items.push_back(SExpr::symbol(atom.type_name));
  if (atom.is_node()) {
    items.push_back(SExpr::string(atom.name));
  } else {
    for (AtomId t : atom.targets) items.push_back(atom_to_sexpr(snap, t, false));
  }
  if (with_tv && atom.tv) items.push_back(tv_form(*atom.tv));
  return SExpr::list(std::move(items));
}

std::string atom_structure(const Snapshot& snap, AtomId id) {
  return print(atom_to_sexpr(snap, id, false));
}

SExpr spec_to_sexpr(const Snapshot& snap, const AtomSpec& spec, bool with_tv) {
  SExpr out;
  if (auto* id = std::get_if<AtomId>(&spec.shape)) {
    out = atom_to_sexpr(snap, *id, false);
  } else if (auto* node = std::get_if<AtomSpec::Node>(&spec.shape)) {
    out = SExpr::list({SExpr::symbol(node->type_name), SExpr::string(node->name)});
  } else {
    const auto& link = std::get<AtomSpec::Link>(spec.shape);
    std::vector<SExpr> items;
    items.push_back(SExpr::symbol(link.type_name));
    for (const AtomSpec& child : link.targets) {
      items.push_back(spec_to_sexpr(snap, child, false));
    }
    out = SExpr::list(std::move(items));
  }
  if (with_tv && spec.tv) out.items.push_back(tv_form(*spec.tv));
  return out;
}

std::string spec_structure(const Snapshot& snap, const AtomSpec& spec) {
  return print(spec_to_sexpr(snap, spec, false));
}

std::string canonical_dump(const Snapshot& snap) {
  struct Line {
    std::string type_name;
    std::string name;
    std::string rest;
    std::string text;
  };
  std::vector<Line> lines;

  for (AtomId id : snap.all_atoms()) {
    Atom atom = snap.resolve(id);
    std::string rest;
    if (atom.is_link()) {
      for (AtomId t : atom.targets) {
        rest += atom_structure(snap, t);
        rest += ' ';
      }
    }
    lines.push_back(
        Line{atom.type_name, atom.name, rest, print(atom_to_sexpr(snap, id, true))});

    for (const Annotation& ann : atom.annotations) {
      SExpr form = SExpr::list({SExpr::symbol("Typed"), atom_to_sexpr(snap, id, false),
                                atom_to_sexpr(snap, ann.system, false),
                                atom_to_sexpr(snap, ann.type_expr, false)});
      std::string text = print(form);
      lines.push_back(Line{"Typed", "", text, text});
    }
  }

  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    return std::tie(a.type_name, a.name, a.rest) < std::tie(b.type_name, b.name, b.rest);
  });

  std::string out;
  for (const Line& l : lines) {
    out += l.text;
    out += '\n';
  }
  return out;
}

}  // namespace mg

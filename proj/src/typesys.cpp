#include "mg/typesys.hpp"

#include <charconv>

namespace mg {

std::string_view to_string(TypeVerdict v) {
  switch (v) {
    case TypeVerdict::Accept: return "Accept";
    case TypeVerdict::Reject: return "Reject";
    case TypeVerdict::Unknown: return "Unknown";
  }
  return "Unknown";
}

TypeSystemId TypeRegistry::register_type_system(TypeSystemPlugin plugin) {
  if (find(plugin.name)) {
    fail(ErrorCode::DuplicateName,
         "type system '" + plugin.name + "' already registered");
  }
  AtomId node = store_.add_node("TypeSystem", plugin.name);
  TypeSystemId id{static_cast<uint32_t>(entries_.size())};
  entries_.push_back(Entry{std::move(plugin), node});
  return id;
}

const TypeRegistry::Entry& TypeRegistry::entry(TypeSystemId system) const {
  if (system.value >= entries_.size()) {
    fail(ErrorCode::UnknownSystem,
         "type system #" + std::to_string(system.value) + " not registered");
  }
  return entries_[system.value];
}

TypeVerdict TypeRegistry::check_atom(AtomId atom, TypeSystemId system,
                                     const Snapshot& snap) const {
  const Entry& e = entry(system);
  if (!snap.contains(atom)) {
    fail(ErrorCode::UnknownAtom, "check_atom: atom does not resolve");
  }
  auto type_expr = snap.annotation_for(atom, e.node);
  if (!type_expr) return TypeVerdict::Unknown;
  return e.plugin.check_atom(snap, atom, *type_expr);
}

bool TypeRegistry::consistent(std::optional<AtomId> type_a, std::optional<AtomId> type_b,
                              TypeSystemId system) const {
  const Entry& e = entry(system);
  if (!type_a || !type_b) return true;  // the dynamic type is consistent with all
  Snapshot snap = store_.snapshot();
  snap.resolve(*type_a);
  snap.resolve(*type_b);
  return e.plugin.types_consistent(snap, *type_a, *type_b);
}

void TypeRegistry::annotate(AtomId atom, TypeSystemId system, AtomId type_expr) {
  const Entry& e = entry(system);
  store_.annotate(atom, e.node, type_expr);
}

AtomId TypeRegistry::system_node(TypeSystemId system) const { return entry(system).node; }

const std::string& TypeRegistry::system_name(TypeSystemId system) const {
  return entry(system).plugin.name;
}

std::optional<TypeSystemId> TypeRegistry::find(std::string_view name) const {
  for (uint32_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].plugin.name == name) return TypeSystemId{i};
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// simple-arity

namespace {

std::optional<size_t> parse_arity_node(const Snapshot& snap, AtomId id) {
  if (!snap.contains(id)) return std::nullopt;
  Atom atom = snap.resolve(id);
  if (!atom.is_node() || atom.type_name != "Arity") return std::nullopt;
  size_t n = 0;
  auto [ptr, ec] =
      std::from_chars(atom.name.data(), atom.name.data() + atom.name.size(), n);
  if (ec != std::errc{} || ptr != atom.name.data() + atom.name.size()) {
    return std::nullopt;
  }
  return n;
}

}  // namespace

ArityDeclarations default_arity_declarations() {
  return ArityDeclarations{{"Inheritance", 2}, {"Implication", 2}, {"Similarity", 2},
                           {"Member", 2},      {"Evaluation", 2}};
}

TypeSystemPlugin make_arity_plugin() {
  TypeSystemPlugin plugin;
  plugin.name = std::string(kAritySystemName);
  plugin.check_atom = [](const Snapshot& snap, AtomId atom,
                         AtomId type_expr) -> TypeVerdict {
    auto expected = parse_arity_node(snap, type_expr);
    if (!expected) return TypeVerdict::Reject;
    Atom a = snap.resolve(atom);
    size_t actual = a.is_link() ? a.targets.size() : 0;
    return actual == *expected ? TypeVerdict::Accept : TypeVerdict::Reject;
  };
  plugin.types_consistent = [](const Snapshot& snap, AtomId a, AtomId b) -> bool {
    if (a == b) return true;
    auto na = parse_arity_node(snap, a);
    auto nb = parse_arity_node(snap, b);
    return na && nb && *na == *nb;
  };
  return plugin;
}

AtomId arity_type_expr(Store& store, size_t arity) {
  return store.add_node("Arity", std::to_string(arity));
}

std::optional<AtomId> declared_arity_expr(Store& store, const ArityDeclarations& decls,
                                          std::string_view type_name) {
  auto it = decls.find(type_name);
  if (it == decls.end()) return std::nullopt;
  return arity_type_expr(store, it->second);
}

}  // namespace mg

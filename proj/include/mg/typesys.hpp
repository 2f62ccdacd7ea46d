#pragma once

#include "mg/store.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mg {

enum class TypeVerdict { Accept, Reject, Unknown };

std::string_view to_string(TypeVerdict v);

struct TypeSystemId {
  uint32_t value = 0;
  auto operator<=>(const TypeSystemId&) const = default;
};

// A pluggable type system. check_atom receives the annotation's type
// expression alongside the atom and must be pure with respect to the
// snapshot; types_consistent must be reflexive and symmetric (transitivity is
// not required — gradual consistency is not transitive).
struct TypeSystemPlugin {
  std::string name;
  std::function<TypeVerdict(const Snapshot&, AtomId atom, AtomId type_expr)> check_atom;
  std::function<bool(const Snapshot&, AtomId, AtomId)> types_consistent;
};

// Gradual typing framework: a registry of type systems, each described by a
// ("TypeSystem", name) node in the store. Atoms may carry annotations under
// several systems at once; unannotated atoms check as Unknown.
class TypeRegistry {
 public:
  explicit TypeRegistry(Store& store) : store_(store) {}

  TypeSystemId register_type_system(TypeSystemPlugin plugin);

  // Unknown iff the atom carries no annotation under this system at the
  // snapshot version; otherwise the plugin's verdict.
  TypeVerdict check_atom(AtomId atom, TypeSystemId system, const Snapshot& snap) const;

  // The dynamic type (absent argument) is consistent with everything.
  bool consistent(std::optional<AtomId> type_a, std::optional<AtomId> type_b,
                  TypeSystemId system) const;

  void annotate(AtomId atom, TypeSystemId system, AtomId type_expr);

  AtomId system_node(TypeSystemId system) const;
  const std::string& system_name(TypeSystemId system) const;
  std::optional<TypeSystemId> find(std::string_view name) const;
  size_t system_count() const { return entries_.size(); }

  Store& store() { return store_; }

 private:
  struct Entry {
    TypeSystemPlugin plugin;
    AtomId node;
  };

  const Entry& entry(TypeSystemId system) const;

  Store& store_;
  std::vector<Entry> entries_;
};

// Built-in "simple-arity" system: per-type target-count declarations. Type
// expressions are ("Arity", "<n>") nodes; an annotated atom is accepted
// exactly when its target count matches the annotation.
inline constexpr std::string_view kAritySystemName = "simple-arity";

using ArityDeclarations = std::map<std::string, size_t, std::less<>>;

ArityDeclarations default_arity_declarations();
TypeSystemPlugin make_arity_plugin();

// The ("Arity", "<n>") node for a declared type name, added on demand.
AtomId arity_type_expr(Store& store, size_t arity);
std::optional<AtomId> declared_arity_expr(Store& store, const ArityDeclarations& decls,
                                          std::string_view type_name);

}  // namespace mg

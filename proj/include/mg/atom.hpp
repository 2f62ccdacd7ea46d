#pragma once

#include "mg/truth.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mg {

// Stable handle into a Store. Content-addressed: structurally identical live
// atoms always share one id.
struct AtomId {
  uint32_t value = 0;

  auto operator<=>(const AtomId&) const = default;
};

enum class AtomKind { Node, Link };

struct Annotation {
  AtomId system;     // the ("TypeSystem", name) node identifying the plugin
  AtomId type_expr;  // type expression, itself an atom
  auto operator<=>(const Annotation&) const = default;
};

// Read-only view of a stored atom at some snapshot version.
struct Atom {
  AtomKind kind = AtomKind::Node;
  std::string type_name;
  std::string name;             // nodes only
  std::vector<AtomId> targets;  // links only, ordered, duplicates allowed
  std::optional<TruthValue> tv;
  std::vector<Annotation> annotations;

  bool is_node() const { return kind == AtomKind::Node; }
  bool is_link() const { return kind == AtomKind::Link; }
};

// Recursive description of an atom to insert: either a reference to an
// existing atom or a fresh node/link shape. Used by commit batches, rule
// conclusions and grounded results.
struct AtomSpec {
  struct Node {
    std::string type_name;
    std::string name;
  };
  struct Link {
    std::string type_name;
    std::vector<AtomSpec> targets;
  };

  std::variant<AtomId, Node, Link> shape;
  std::optional<TruthValue> tv;  // applies to the root of this spec only

  static AtomSpec ref(AtomId id, std::optional<TruthValue> tv = {}) {
    return AtomSpec{id, std::move(tv)};
  }
  static AtomSpec node(std::string type, std::string name,
                       std::optional<TruthValue> tv = {}) {
    return AtomSpec{Node{std::move(type), std::move(name)}, std::move(tv)};
  }
  static AtomSpec link(std::string type, std::vector<AtomSpec> targets,
                       std::optional<TruthValue> tv = {}) {
    return AtomSpec{Link{std::move(type), std::move(targets)}, std::move(tv)};
  }
};

}  // namespace mg

template <>
struct std::hash<mg::AtomId> {
  size_t operator()(const mg::AtomId& id) const noexcept {
    return std::hash<uint32_t>{}(id.value);
  }
};

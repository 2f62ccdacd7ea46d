#pragma once

#include "mg/sexpr.hpp"
#include "mg/store.hpp"

#include <string>

namespace mg {

// Nested structural form of an atom: (Type "name") or (Type child...).
// Truth values are emitted only when with_tv is set, as a trailing (tv s c).
SExpr atom_to_sexpr(const Snapshot& snap, AtomId id, bool with_tv = false);
std::string atom_structure(const Snapshot& snap, AtomId id);

SExpr spec_to_sexpr(const Snapshot& snap, const AtomSpec& spec, bool with_tv = false);
std::string spec_structure(const Snapshot& snap, const AtomSpec& spec);

// Canonical textual dump: one S-expression per atom plus one (Typed ...) line
// per annotation, sorted by (typeName, name, serialized targets).
// dump -> parse -> load -> dump is byte-identical.
std::string canonical_dump(const Snapshot& snap);

}  // namespace mg

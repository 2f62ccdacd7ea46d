#include "mg/store.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <limits>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

namespace mg {

namespace detail {

constexpr uint64_t kLive = std::numeric_limits<uint64_t>::max();

struct AnnRec {
  AtomId system;
  AtomId type_expr;
  uint64_t created = 0;
  uint64_t removed = kLive;
};

struct AtomRec {
  AtomKind kind = AtomKind::Node;
  uint32_t type_sym = 0;
  std::string name;
  std::vector<AtomId> targets;
  uint64_t created = 0;
  uint64_t removed = kLive;
  // (version, value) pairs in version order; last entry at or below the
  // queried version wins.
  std::vector<std::pair<uint64_t, TruthValue>> tv_history;
  std::vector<AnnRec> annotations;
  std::vector<AtomId> incoming;  // distinct links targeting this atom

  bool live_at(uint64_t version) const {
    return created <= version && version < removed;
  }
};

struct StructKey {
  AtomKind kind = AtomKind::Node;
  uint32_t type_sym = 0;
  std::string name;
  std::vector<AtomId> targets;

  bool operator==(const StructKey&) const = default;
};

struct StructKeyHash {
  size_t operator()(const StructKey& k) const {
    size_t h = std::hash<uint32_t>{}(k.type_sym * 2 + (k.kind == AtomKind::Link));
    h ^= std::hash<std::string>{}(k.name) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    for (AtomId t : k.targets) {
      h ^= std::hash<uint32_t>{}(t.value) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }
};

struct StoreState {
  mutable std::shared_mutex mutex;
  std::vector<AtomRec> atoms;
  std::vector<std::string> type_names;
  std::unordered_map<std::string, uint32_t> type_syms;
  // Structure -> ids carrying that structure over time. At most one is live
  // at any version; removal + re-add yields a fresh id.
  std::unordered_map<StructKey, std::vector<AtomId>, StructKeyHash> dedup;
  std::vector<std::vector<AtomId>> type_index;  // by type_sym, insertion order
  uint64_t version = 0;
  mutable std::atomic<uint64_t> inspections{0};

  uint32_t intern_type(std::string_view name) {
    auto it = type_syms.find(std::string(name));
    if (it != type_syms.end()) return it->second;
    uint32_t sym = static_cast<uint32_t>(type_names.size());
    type_names.emplace_back(name);
    type_syms.emplace(std::string(name), sym);
    type_index.emplace_back();
    return sym;
  }

  std::optional<uint32_t> lookup_type(std::string_view name) const {
    auto it = type_syms.find(std::string(name));
    if (it == type_syms.end()) return std::nullopt;
    return it->second;
  }

  bool in_bounds(AtomId id) const { return id.value < atoms.size(); }

  const AtomRec& rec(AtomId id) const { return atoms[id.value]; }

  void require_live(AtomId id, uint64_t version) const {
    if (!in_bounds(id) || !rec(id).live_at(version)) {
      fail(ErrorCode::UnknownAtom,
           "atom #" + std::to_string(id.value) + " does not resolve at version " +
               std::to_string(version));
    }
  }

  std::optional<AtomId> find_live(const StructKey& key, uint64_t version) const {
    auto it = dedup.find(key);
    if (it == dedup.end()) return std::nullopt;
    for (AtomId id : it->second) {
      if (rec(id).live_at(version)) return id;
    }
    return std::nullopt;
  }

  std::optional<TruthValue> tv_at(const AtomRec& r, uint64_t version) const {
    std::optional<TruthValue> result;
    for (const auto& [v, tv] : r.tv_history) {
      if (v > version) break;
      result = tv;
    }
    return result;
  }

  Atom view(AtomId id, uint64_t version) const {
    require_live(id, version);
    const AtomRec& r = rec(id);
    Atom atom;
    atom.kind = r.kind;
    atom.type_name = type_names[r.type_sym];
    atom.name = r.name;
    atom.targets = r.targets;
    atom.tv = tv_at(r, version);
    for (const AnnRec& a : r.annotations) {
      if (a.created <= version && version < a.removed) {
        atom.annotations.push_back(Annotation{a.system, a.type_expr});
      }
    }
    return atom;
  }
};

}  // namespace detail

using detail::AtomRec;
using detail::StoreState;
using detail::StructKey;

// ---------------------------------------------------------------------------
// Snapshot

bool Snapshot::contains(AtomId id) const {
  std::shared_lock lock(state_->mutex);
  return state_->in_bounds(id) && state_->rec(id).live_at(version_);
}

Atom Snapshot::resolve(AtomId id) const {
  std::shared_lock lock(state_->mutex);
  return state_->view(id, version_);
}

std::vector<AtomId> Snapshot::incoming(AtomId id) const {
  std::shared_lock lock(state_->mutex);
  state_->require_live(id, version_);
  std::vector<AtomId> out;
  for (AtomId link : state_->rec(id).incoming) {
    if (state_->rec(link).live_at(version_)) out.push_back(link);
  }
  return out;
}

std::vector<AtomId> Snapshot::atoms_of_type(std::string_view type_name) const {
  std::shared_lock lock(state_->mutex);
  std::vector<AtomId> out;
  auto sym = state_->lookup_type(type_name);
  if (!sym) return out;
  for (AtomId id : state_->type_index[*sym]) {
    state_->inspections.fetch_add(1, std::memory_order_relaxed);
    if (state_->rec(id).live_at(version_)) out.push_back(id);
  }
  return out;
}

std::vector<AtomId> Snapshot::all_atoms() const {
  std::shared_lock lock(state_->mutex);
  std::vector<AtomId> out;
  for (uint32_t i = 0; i < state_->atoms.size(); ++i) {
    if (state_->atoms[i].live_at(version_)) out.push_back(AtomId{i});
  }
  return out;
}

size_t Snapshot::atom_count() const {
  std::shared_lock lock(state_->mutex);
  size_t n = 0;
  for (const AtomRec& r : state_->atoms) {
    if (r.live_at(version_)) ++n;
  }
  return n;
}

size_t Snapshot::type_bucket_size(std::string_view type_name) const {
  std::shared_lock lock(state_->mutex);
  auto sym = state_->lookup_type(type_name);
  return sym ? state_->type_index[*sym].size() : 0;
}

std::optional<AtomId> Snapshot::find_node(std::string_view type_name,
                                          std::string_view name) const {
  std::shared_lock lock(state_->mutex);
  auto sym = state_->lookup_type(type_name);
  if (!sym) return std::nullopt;
  StructKey key{AtomKind::Node, *sym, std::string(name), {}};
  return state_->find_live(key, version_);
}

std::optional<AtomId> Snapshot::find_link(std::string_view type_name,
                                          const std::vector<AtomId>& targets) const {
  std::shared_lock lock(state_->mutex);
  auto sym = state_->lookup_type(type_name);
  if (!sym) return std::nullopt;
  StructKey key{AtomKind::Link, *sym, "", targets};
  return state_->find_live(key, version_);
}

std::optional<AtomId> Snapshot::find(const AtomSpec& spec) const {
  if (auto* id = std::get_if<AtomId>(&spec.shape)) {
    return contains(*id) ? std::optional<AtomId>(*id) : std::nullopt;
  }
  if (auto* node = std::get_if<AtomSpec::Node>(&spec.shape)) {
    return find_node(node->type_name, node->name);
  }
  const auto& link = std::get<AtomSpec::Link>(spec.shape);
  std::vector<AtomId> targets;
  targets.reserve(link.targets.size());
  for (const AtomSpec& child : link.targets) {
    auto id = find(child);
    if (!id) return std::nullopt;
    targets.push_back(*id);
  }
  return find_link(link.type_name, targets);
}

std::optional<AtomId> Snapshot::annotation_for(AtomId atom, AtomId system_node) const {
  std::shared_lock lock(state_->mutex);
  state_->require_live(atom, version_);
  for (const auto& a : state_->rec(atom).annotations) {
    if (a.system == system_node && a.created <= version_ && version_ < a.removed) {
      return a.type_expr;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Store

Store::Store() : state_(std::make_shared<StoreState>()) {}

Snapshot Store::snapshot() const {
  std::shared_lock lock(state_->mutex);
  return Snapshot(state_, state_->version);
}

Snapshot Store::snapshot_at(uint64_t version) const {
  std::shared_lock lock(state_->mutex);
  if (version > state_->version) {
    fail(ErrorCode::InvalidArgument, "snapshot_at: version is in the future");
  }
  return Snapshot(state_, version);
}

uint64_t Store::version() const {
  std::shared_lock lock(state_->mutex);
  return state_->version;
}

size_t Store::atom_count() const { return snapshot().atom_count(); }

Atom Store::resolve(AtomId id) const { return snapshot().resolve(id); }

bool Store::contains(AtomId id) const { return snapshot().contains(id); }

std::vector<AtomId> Store::incoming(AtomId id) const { return snapshot().incoming(id); }

std::vector<AtomId> Store::atoms_of_type(std::string_view type_name) const {
  return snapshot().atoms_of_type(type_name);
}

uint64_t Store::index_inspections() const {
  return state_->inspections.load(std::memory_order_relaxed);
}

void Store::reset_index_inspections() {
  state_->inspections.store(0, std::memory_order_relaxed);
}

namespace {

struct StagedAtom {
  StructKey key;
  std::optional<TruthValue> tv;
};

// Batch resolution workspace: existing atoms are referenced by id, atoms the
// batch will create are referenced by staging index.
struct BatchPlan {
  std::vector<StagedAtom> staged;
  std::unordered_map<StructKey, size_t, detail::StructKeyHash> staged_index;
  // id per addition root: {is_staged, index-or-id}
  struct Ref {
    bool is_staged = false;
    uint32_t value = 0;
  };
  std::vector<Ref> roots;
  std::vector<std::pair<AtomId, TruthValue>> existing_tv_merges;
  std::vector<AtomId> staged_existing_targets;  // existing atoms gaining incoming
};

}  // namespace

CommitResult Store::commit(const Snapshot& /*base*/,
                           const std::vector<AtomSpec>& additions,
                           const std::vector<AtomId>& removals) {
  std::unique_lock lock(state_->mutex);
  StoreState& st = *state_;
  const uint64_t now = st.version;

  BatchPlan plan;

  // Resolve one spec against current state plus earlier staged entries.
  // Returns a plan-relative reference; throws UnknownAtom on dangling ids.
  auto resolve_spec = [&](const AtomSpec& spec, auto&& self) -> BatchPlan::Ref {
    if (auto* id = std::get_if<AtomId>(&spec.shape)) {
      st.require_live(*id, now);
      if (spec.tv) plan.existing_tv_merges.emplace_back(*id, *spec.tv);
      return {false, id->value};
    }
    StructKey key;
    if (auto* node = std::get_if<AtomSpec::Node>(&spec.shape)) {
      if (node->type_name.empty() || node->name.empty()) {
        fail(ErrorCode::InvalidArgument, "node type and name must be nonempty");
      }
      key = StructKey{AtomKind::Node, 0, node->name, {}};
      auto sym = st.lookup_type(node->type_name);
      if (!sym) {
        // Unknown type name cannot collide with anything stored; intern later.
        key.type_sym = st.intern_type(node->type_name);
      } else {
        key.type_sym = *sym;
      }
    } else {
      const auto& link = std::get<AtomSpec::Link>(spec.shape);
      if (link.type_name.empty()) {
        fail(ErrorCode::InvalidArgument, "link type must be nonempty");
      }
      std::vector<AtomId> targets;
      bool any_staged = false;
      std::vector<BatchPlan::Ref> refs;
      refs.reserve(link.targets.size());
      for (const AtomSpec& child : link.targets) {
        BatchPlan::Ref r = self(child, self);
        refs.push_back(r);
        any_staged |= r.is_staged;
      }
      key.kind = AtomKind::Link;
      key.type_sym = st.intern_type(link.type_name);
      if (!any_staged) {
        for (auto r : refs) targets.push_back(AtomId{r.value});
        key.targets = std::move(targets);
      } else {
        // Targets include staged atoms: encode staged refs with a high bit so
        // the key is still unique within this batch, and remap on apply.
        for (auto r : refs) {
          key.targets.push_back(AtomId{r.is_staged ? (0x80000000u | r.value) : r.value});
        }
      }
    }

    // Reuse an existing live atom or an earlier staged one.
    bool has_staged_target = false;
    for (AtomId t : key.targets) has_staged_target |= (t.value & 0x80000000u) != 0;
    if (!has_staged_target) {
      if (auto id = st.find_live(key, now)) {
        if (spec.tv) plan.existing_tv_merges.emplace_back(*id, *spec.tv);
        return {false, id->value};
      }
    }
    if (auto it = plan.staged_index.find(key); it != plan.staged_index.end()) {
      if (spec.tv) {
        auto& staged_tv = plan.staged[it->second].tv;
        if (!staged_tv) {
          staged_tv = spec.tv;
        } else {
          revise_truth(*staged_tv, *spec.tv);
        }
      }
      return {true, static_cast<uint32_t>(it->second)};
    }
    size_t idx = plan.staged.size();
    plan.staged.push_back(StagedAtom{key, spec.tv});
    plan.staged_index.emplace(key, idx);
    for (AtomId t : key.targets) {
      if (!(t.value & 0x80000000u)) plan.staged_existing_targets.push_back(AtomId{t.value});
    }
    return {true, static_cast<uint32_t>(idx)};
  };

  for (const AtomSpec& spec : additions) {
    plan.roots.push_back(resolve_spec(spec, resolve_spec));
  }

  // Validate removals: each must resolve now, and every live incoming link
  // must itself be removed in this batch; new links must not target it.
  CommitResult result;
  auto conflict = [&](CommitResult::ConflictKind kind, std::string reason) {
    result.status = CommitResult::Status::Conflict;
    result.conflict_kind = kind;
    result.conflict_reason = std::move(reason);
    result.version = now;
    return result;
  };

  if (!removals.empty()) {
    std::vector<char> in_removal(st.atoms.size(), 0);
    for (AtomId r : removals) {
      if (!st.in_bounds(r)) {
        fail(ErrorCode::UnknownAtom, "removal of atom #" + std::to_string(r.value) +
                                         " which was never stored");
      }
      in_removal[r.value] = 1;
    }
    for (AtomId r : removals) {
      if (!st.rec(r).live_at(now)) {
        return conflict(CommitResult::ConflictKind::RemovalUnresolved,
                        "removal target #" + std::to_string(r.value) +
                            " no longer resolves");
      }
      for (AtomId link : st.rec(r).incoming) {
        if (st.rec(link).live_at(now) && !in_removal[link.value]) {
          return conflict(CommitResult::ConflictKind::RemovalHasIncoming,
                          "removal target #" + std::to_string(r.value) +
                              " still has incoming links");
        }
      }
    }
    for (AtomId t : plan.staged_existing_targets) {
      if (in_removal[t.value]) {
        return conflict(CommitResult::ConflictKind::LinksToRemoved,
                        "batch links to atom #" + std::to_string(t.value) +
                            " scheduled for removal");
      }
    }
  }

  // Apply atomically under the exclusive lock.
  const uint64_t next = now + 1;
  bool mutated = false;

  std::vector<AtomId> staged_ids(plan.staged.size());
  for (size_t i = 0; i < plan.staged.size(); ++i) {
    StructKey key = plan.staged[i].key;
    for (AtomId& t : key.targets) {
      if (t.value & 0x80000000u) t = staged_ids[t.value & 0x7fffffffu];
    }
    AtomId id{static_cast<uint32_t>(st.atoms.size())};
    AtomRec rec;
    rec.kind = key.kind;
    rec.type_sym = key.type_sym;
    rec.name = key.name;
    rec.targets = key.targets;
    rec.created = next;
    if (plan.staged[i].tv) rec.tv_history.emplace_back(next, *plan.staged[i].tv);
    st.atoms.push_back(std::move(rec));
    st.dedup[key].push_back(id);
    st.type_index[key.type_sym].push_back(id);
    // Incoming entries are distinct per (link, target) pair.
    std::vector<AtomId> seen;
    for (AtomId t : key.targets) {
      if (std::find(seen.begin(), seen.end(), t) == seen.end()) {
        st.atoms[t.value].incoming.push_back(id);
        seen.push_back(t);
      }
    }
    staged_ids[i] = id;
    mutated = true;
  }

  for (const auto& [id, tv] : plan.existing_tv_merges) {
    AtomRec& rec = st.atoms[id.value];
    auto current = st.tv_at(rec, now);
    if (!current) {
      rec.tv_history.emplace_back(next, tv);
      mutated = true;
    } else {
      TruthValue merged = *current;
      if (revise_truth(merged, tv)) {
        rec.tv_history.emplace_back(next, merged);
        mutated = true;
      }
    }
  }

  for (AtomId r : removals) {
    if (st.atoms[r.value].removed == detail::kLive) {
      st.atoms[r.value].removed = next;
      mutated = true;
    }
  }

  st.version = next;
  result.status = CommitResult::Status::Committed;
  result.version = next;
  result.mutated = mutated;
  result.ids.reserve(plan.roots.size());
  for (auto ref : plan.roots) {
    result.ids.push_back(ref.is_staged ? staged_ids[ref.value] : AtomId{ref.value});
  }
  return result;
}

AtomId Store::add(const AtomSpec& spec) {
  CommitResult r = commit(snapshot(), {spec}, {});
  assert(r.ok());
  return r.ids.at(0);
}

AtomId Store::add_node(std::string_view type_name, std::string_view name,
                       std::optional<TruthValue> tv) {
  return add(AtomSpec::node(std::string(type_name), std::string(name), std::move(tv)));
}

AtomId Store::add_link(std::string_view type_name, std::vector<AtomId> targets,
                       std::optional<TruthValue> tv) {
  std::vector<AtomSpec> specs;
  specs.reserve(targets.size());
  for (AtomId t : targets) specs.push_back(AtomSpec::ref(t));
  return add(AtomSpec::link(std::string(type_name), std::move(specs), std::move(tv)));
}

void Store::remove(AtomId id) {
  CommitResult r = commit(snapshot(), {}, {id});
  if (!r.ok()) {
    if (r.conflict_kind == CommitResult::ConflictKind::RemovalUnresolved) {
      fail(ErrorCode::UnknownAtom, "remove: " + r.conflict_reason);
    }
    fail(ErrorCode::HasIncoming, "remove: " + r.conflict_reason);
  }
}

void Store::annotate(AtomId atom, AtomId system_node, AtomId type_expr) {
  std::unique_lock lock(state_->mutex);
  StoreState& st = *state_;
  st.require_live(atom, st.version);
  st.require_live(system_node, st.version);
  st.require_live(type_expr, st.version);
  for (const auto& a : st.atoms[atom.value].annotations) {
    if (a.system == system_node && a.type_expr == type_expr &&
        a.created <= st.version && st.version < a.removed) {
      return;  // identical live annotation already present
    }
  }
  st.version += 1;
  st.atoms[atom.value].annotations.push_back(
      detail::AnnRec{system_node, type_expr, st.version, detail::kLive});
}

bool Store::strip_annotation(AtomId atom, AtomId system_node, AtomId type_expr) {
  std::unique_lock lock(state_->mutex);
  StoreState& st = *state_;
  st.require_live(atom, st.version);
  for (auto& a : st.atoms[atom.value].annotations) {
    if (a.system == system_node && a.type_expr == type_expr &&
        a.created <= st.version && st.version < a.removed) {
      st.version += 1;
      a.removed = st.version;
      return true;
    }
  }
  return false;
}

Store Store::clone() const {
  std::shared_lock lock(state_->mutex);
  Store copy;
  auto fresh = std::make_shared<StoreState>();
  fresh->atoms = state_->atoms;
  fresh->type_names = state_->type_names;
  fresh->type_syms = state_->type_syms;
  fresh->dedup = state_->dedup;
  fresh->type_index = state_->type_index;
  fresh->version = state_->version;
  copy.state_ = std::move(fresh);
  return copy;
}

}  // namespace mg

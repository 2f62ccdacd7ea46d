#pragma once

#include "mg/atom.hpp"
#include "mg/error.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mg {

namespace detail {
struct StoreState;
}

struct CommitResult {
  enum class Status { Committed, Conflict };
  enum class ConflictKind { None, RemovalUnresolved, RemovalHasIncoming, LinksToRemoved };

  Status status = Status::Committed;
  uint64_t version = 0;          // store version after the batch
  std::vector<AtomId> ids;       // resolved id per addition, in batch order
  bool mutated = false;          // new atom created or a TV actually replaced
  ConflictKind conflict_kind = ConflictKind::None;
  std::string conflict_reason;   // set when status == Conflict

  bool ok() const { return status == Status::Committed; }
};

// Immutable view of the store at a fixed version. Queries against a snapshot
// are unaffected by later commits; snapshots are cheap value handles and safe
// to share across threads.
class Snapshot {
 public:
  uint64_t version() const { return version_; }

  bool contains(AtomId id) const;
  Atom resolve(AtomId id) const;
  std::vector<AtomId> incoming(AtomId id) const;
  std::vector<AtomId> atoms_of_type(std::string_view type_name) const;
  std::vector<AtomId> all_atoms() const;
  size_t atom_count() const;

  // Planner metadata: raw index bucket size for a type name. Does not touch
  // the inspection counter.
  size_t type_bucket_size(std::string_view type_name) const;

  // Structural lookup without insertion; nullopt when no live atom matches.
  std::optional<AtomId> find(const AtomSpec& spec) const;
  std::optional<AtomId> find_node(std::string_view type_name,
                                  std::string_view name) const;
  std::optional<AtomId> find_link(std::string_view type_name,
                                  const std::vector<AtomId>& targets) const;

  std::optional<AtomId> annotation_for(AtomId atom, AtomId system_node) const;

 private:
  friend class Store;
  Snapshot(std::shared_ptr<const detail::StoreState> state, uint64_t version)
      : state_(std::move(state)), version_(version) {}

  std::shared_ptr<const detail::StoreState> state_;
  uint64_t version_ = 0;
};

// RAM-based local metagraph store. Atom identity is content-addressed; links
// may target links. Writes are serialized through a single conflict-checked
// commit path; reads run concurrently over snapshots.
class Store {
 public:
  Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;
  Store(Store&&) = default;
  Store& operator=(Store&&) = default;

  AtomId add_node(std::string_view type_name, std::string_view name,
                  std::optional<TruthValue> tv = {});
  AtomId add_link(std::string_view type_name, std::vector<AtomId> targets,
                  std::optional<TruthValue> tv = {});
  AtomId add(const AtomSpec& spec);

  Atom resolve(AtomId id) const;
  bool contains(AtomId id) const;
  std::vector<AtomId> incoming(AtomId id) const;
  std::vector<AtomId> atoms_of_type(std::string_view type_name) const;
  void remove(AtomId id);

  Snapshot snapshot() const;
  Snapshot snapshot_at(uint64_t version) const;  // any version <= current
  CommitResult commit(const Snapshot& base, const std::vector<AtomSpec>& additions,
                      const std::vector<AtomId>& removals);

  // Per-atom type annotations, versioned like atoms so snapshot checking is
  // stable. The system is identified by its ("TypeSystem", name) node.
  void annotate(AtomId atom, AtomId system_node, AtomId type_expr);
  bool strip_annotation(AtomId atom, AtomId system_node, AtomId type_expr);

  uint64_t version() const;
  size_t atom_count() const;

  // Index-work instrumentation: number of index records touched by
  // atoms_of_type enumerations (including through snapshots).
  uint64_t index_inspections() const;
  void reset_index_inspections();

  Store clone() const;

 private:
  std::shared_ptr<detail::StoreState> state_;
};

}  // namespace mg

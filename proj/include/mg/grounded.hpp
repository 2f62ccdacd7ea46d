#pragma once

#include "mg/store.hpp"

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mg {

enum class ProcedureKind { SchemaExec, PredicateEval };

using GroundedResult = std::variant<AtomSpec, TruthValue>;

// Externally supplied procedure invoked explicitly from the graph via
// ("Execution"/"Evaluation") links. Pure callbacks must return identical
// results for identical snapshots.
struct GroundedProcedure {
  std::string name;
  size_t arity = 0;
  ProcedureKind kind = ProcedureKind::SchemaExec;
  bool pure = true;
  std::function<GroundedResult(const Snapshot&, const std::vector<AtomId>&)> callback;
};

struct ExecutionOutcome {
  GroundedResult value;
  // Impure schema results are handed back marked for an explicit commit;
  // execution itself never writes to the store.
  bool commit_requested = false;
};

class GroundedRegistry {
 public:
  void register_grounded(GroundedProcedure procedure);  // DuplicateName
  const GroundedProcedure* find(std::string_view name) const;
  size_t size() const { return procedures_.size(); }

  // call must be an ("Execution", [(GroundedSchema name), args...]) or
  // ("Evaluation", [(GroundedPredicate name), args...]) link with matching
  // arity. Callback exceptions surface as CallbackFailure with the name.
  ExecutionOutcome execute(AtomId call, const Snapshot& snap) const;

 private:
  std::vector<GroundedProcedure> procedures_;
};

// Built-in fixtures: num:add, num:mul (arity-2 schemas over ("Number", n)
// nodes), str:eq (arity-2 predicate), and an impure "test:counter" hook whose
// invocation count is returned for purity tests.
std::shared_ptr<std::atomic<uint64_t>> register_builtin_procedures(
    GroundedRegistry& registry);

}  // namespace mg

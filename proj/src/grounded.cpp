#include "mg/grounded.hpp"

#include "mg/rational.hpp"

namespace mg {

void GroundedRegistry::register_grounded(GroundedProcedure procedure) {
  if (find(procedure.name)) {
    fail(ErrorCode::DuplicateName,
         "grounded procedure '" + procedure.name + "' already registered");
  }
  procedures_.push_back(std::move(procedure));
}

const GroundedProcedure* GroundedRegistry::find(std::string_view name) const {
  for (const GroundedProcedure& p : procedures_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

ExecutionOutcome GroundedRegistry::execute(AtomId call, const Snapshot& snap) const {
  Atom atom = snap.resolve(call);
  ProcedureKind kind;
  std::string head_type;
  if (atom.is_link() && atom.type_name == "Execution") {
    kind = ProcedureKind::SchemaExec;
    head_type = "GroundedSchema";
  } else if (atom.is_link() && atom.type_name == "Evaluation") {
    kind = ProcedureKind::PredicateEval;
    head_type = "GroundedPredicate";
  } else {
    fail(ErrorCode::UnknownProcedure,
         "grounded call must be an Execution or Evaluation link");
  }
  if (atom.targets.empty()) {
    fail(ErrorCode::UnknownProcedure, "grounded call has no procedure head");
  }
  Atom head = snap.resolve(atom.targets[0]);
  if (!head.is_node() || head.type_name != head_type) {
    fail(ErrorCode::UnknownProcedure,
         "grounded call head must be a (" + head_type + " name) node");
  }
  const GroundedProcedure* procedure = find(head.name);
  if (!procedure || procedure->kind != kind) {
    fail(ErrorCode::UnknownProcedure, "no grounded procedure named '" + head.name + "'");
  }
  std::vector<AtomId> args(atom.targets.begin() + 1, atom.targets.end());
  if (args.size() != procedure->arity) {
    fail(ErrorCode::ArityMismatch,
         "'" + procedure->name + "' expects " + std::to_string(procedure->arity) +
             " arguments, got " + std::to_string(args.size()));
  }
  ExecutionOutcome outcome;
  try {
    outcome.value = procedure->callback(snap, args);
  } catch (const std::exception& e) {
    fail(ErrorCode::CallbackFailure, "'" + procedure->name + "': " + e.what());
  }
  outcome.commit_requested =
      !procedure->pure && procedure->kind == ProcedureKind::SchemaExec;
  return outcome;
}

namespace {

Rational number_arg(const Snapshot& snap, AtomId id) {
  Atom atom = snap.resolve(id);
  if (!atom.is_node() || atom.type_name != "Number") {
    throw std::runtime_error("expected a (Number n) node argument");
  }
  auto r = parse_rational(atom.name);
  if (!r) throw std::runtime_error("malformed Number node '" + atom.name + "'");
  return *r;
}

}  // namespace

std::shared_ptr<std::atomic<uint64_t>> register_builtin_procedures(
    GroundedRegistry& registry) {
  registry.register_grounded(GroundedProcedure{
      "num:add", 2, ProcedureKind::SchemaExec, true,
      [](const Snapshot& snap, const std::vector<AtomId>& args) -> GroundedResult {
        return AtomSpec::node(
            "Number", to_string(number_arg(snap, args[0]) + number_arg(snap, args[1])));
      }});
  registry.register_grounded(GroundedProcedure{
      "num:mul", 2, ProcedureKind::SchemaExec, true,
      [](const Snapshot& snap, const std::vector<AtomId>& args) -> GroundedResult {
        return AtomSpec::node(
            "Number", to_string(number_arg(snap, args[0]) * number_arg(snap, args[1])));
      }});
  registry.register_grounded(GroundedProcedure{
      "str:eq", 2, ProcedureKind::PredicateEval, true,
      [](const Snapshot&, const std::vector<AtomId>& args) -> GroundedResult {
        // Content-addressed identity: equal structure means equal id.
        return args[0] == args[1] ? TruthValue(1, 1) : TruthValue(0, 1);
      }});
  auto counter = std::make_shared<std::atomic<uint64_t>>(0);
  registry.register_grounded(GroundedProcedure{
      "test:counter", 0, ProcedureKind::SchemaExec, false,
      [counter](const Snapshot&, const std::vector<AtomId>&) -> GroundedResult {
        uint64_t n = counter->fetch_add(1) + 1;
        return AtomSpec::node("Number", std::to_string(n));
      }});
  return counter;
}

}  // namespace mg

#include "mg/dump.hpp"
#include "mg/harness.hpp"
#include "mg/surface.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

bool color_enabled() {
  const char* env = std::getenv("ENGINE_COLOR");
  if (env && std::string_view(env) == "0") return false;
  return true;
}

int cmd_repl(mg::Session& session) {
  return mg::run_repl(session, std::cin, std::cout, color_enabled());
}

int cmd_run(mg::Session& session, const std::vector<std::string>& files) {
  size_t loaded = 0;
  for (const std::string& f : files) loaded += session.load_file(f).size();
  std::cout << "loaded " << loaded << " forms, " << session.store().atom_count()
            << " atoms, " << session.rules().size() << " rules\n";
  return 0;
}

int cmd_query(mg::Session& session, const std::string& file, const std::string& pattern) {
  session.load_file(file);
  auto exprs = mg::parse(pattern);
  if (exprs.size() != 1) {
    std::cerr << "error: --pattern expects exactly one expression\n";
    return 1;
  }
  mg::AtomId root = session.load({exprs[0]}).at(0);
  mg::Snapshot snap = session.store().snapshot();
  mg::Pattern p = mg::Pattern::from_root(snap, root);
  std::cout << session.render_bindings(mg::query(p, snap));
  return 0;
}

int cmd_check(mg::Session& session, const std::string& file, const std::string& system) {
  session.load_file(file);
  auto sys = session.types().find(system);
  if (!sys) {
    std::cerr << "error: unknown type system '" << system << "'\n";
    return 1;
  }
  mg::Snapshot snap = session.store().snapshot();
  size_t accept = 0, reject = 0, unknown = 0;
  for (mg::AtomId id : snap.all_atoms()) {
    mg::TypeVerdict v = session.types().check_atom(id, *sys, snap);
    switch (v) {
      case mg::TypeVerdict::Accept: ++accept; break;
      case mg::TypeVerdict::Reject: ++reject; break;
      case mg::TypeVerdict::Unknown: ++unknown; break;
    }
    if (v != mg::TypeVerdict::Unknown) {
      std::cout << mg::to_string(v) << " " << mg::atom_structure(snap, id) << "\n";
    }
  }
  std::cout << "accept: " << accept << ", reject: " << reject
            << ", unknown: " << unknown << "\n";
  return reject == 0 ? 0 : 1;
}

int cmd_test(const std::string& suite, uint64_t seed, size_t cases, size_t workers) {
  mg::GeneratorConfig cfg;
  cfg.seed = seed;
  mg::SuiteReport report = mg::run_suite(suite, cfg, cases, workers);
  for (const std::string& line : report.lines) std::cout << line << "\n";
  std::cout << report.summary << "\n";
  if (!report.ok()) {
    std::cout << "first failing seed: " << report.failing_seeds.front() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"metagraph rewriting engine"};
  cli.require_subcommand(1);
  cli.fallthrough();

  size_t max_steps = 64;
  size_t workers = 1;
  uint64_t seed = 1;
  cli.add_option("--max-steps", max_steps, "default step/depth budget");
  cli.add_option("--workers", workers, "worker count for chaining");
  cli.add_option("--seed", seed, "seed for randomized harnesses");

  auto* repl = cli.add_subcommand("repl", "interactive session");

  std::vector<std::string> run_files;
  auto* run = cli.add_subcommand("run", "load files and report");
  run->add_option("files", run_files, "input files")->required();

  std::string query_file, query_pattern;
  auto* query = cli.add_subcommand("query", "run a pattern over a file");
  query->add_option("file", query_file, "input file")->required();
  query->add_option("--pattern", query_pattern, "pattern expression")->required();

  std::string check_file, check_system;
  auto* check = cli.add_subcommand("check", "type-check atoms in a file");
  check->add_option("file", check_file, "input file")->required();
  check->add_option("--system", check_system, "type system name")->required();

  std::string suite;
  size_t cases = 100;
  auto* test = cli.add_subcommand("test", "run an acceptance suite");
  test->add_option("--suite", suite, "oracle|chaining|lambda|bench")->required();
  test->add_option("--cases", cases, "number of cases");

  CLI11_PARSE(cli, argc, argv);

  try {
    mg::Session session;
    session.options().max_steps = max_steps;
    session.options().workers = workers;
    session.options().seed = seed;

    if (repl->parsed()) return cmd_repl(session);
    if (run->parsed()) return cmd_run(session, run_files);
    if (query->parsed()) return cmd_query(session, query_file, query_pattern);
    if (check->parsed()) return cmd_check(session, check_file, check_system);
    if (test->parsed()) return cmd_test(suite, seed, cases, workers);
    return 1;
  } catch (const mg::EngineError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}

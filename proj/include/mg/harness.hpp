#pragma once

#include "mg/lambda.hpp"
#include "mg/pattern.hpp"
#include "mg/rewrite.hpp"
#include "mg/store.hpp"

#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace mg {

// Identical config => identical generated corpus, on any platform
// (mt19937_64 output is standard-defined).
struct GeneratorConfig {
  uint64_t seed = 1;
  size_t atom_budget = 60;
  size_t clause_budget = 3;
  size_t variable_budget = 3;
  size_t term_depth = 4;
};

Store gen_store(const GeneratorConfig& cfg);
Pattern gen_pattern(const GeneratorConfig& cfg, Store& store);
lam::TermPtr gen_term(const GeneratorConfig& cfg);

// Random inheritance DAG over n concept nodes; returned pairs are the edge
// list (parent index i < child... edges run ni -> nj with i < j).
Store gen_dag_store(uint64_t seed, size_t nodes, std::vector<std::pair<size_t, size_t>>* edges);

// The transitive-closure deduction rule Inh(x,y) & Inh(y,z) => Inh(x,z),
// materialized in the given store.
RewriteRule deduction_rule(Store& store);

struct SuiteReport {
  std::string suite;
  size_t cases_run = 0;
  size_t failures = 0;
  std::vector<std::string> lines;  // machine-readable, one case per line
  std::vector<uint64_t> failing_seeds;
  std::string summary;

  bool ok() const { return failures == 0; }
};

// Suites: oracle (query vs brute force), chaining (closure, agreement,
// determinism), lambda (round trips, linearity, casts, distributions),
// bench (index inspection counts on a large fixture).
SuiteReport run_suite(std::string_view name, const GeneratorConfig& cfg, size_t cases,
                      size_t workers = 1);

}  // namespace mg

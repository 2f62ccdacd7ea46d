#include "mg/store.hpp"

#include "mg/dump.hpp"
#include "mg/harness.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace mg;
using mgtest::thrown_code;

TEST_CASE("content-addressed node identity") {
  Store store;
  AtomId first = store.add_node("Concept", "cat");
  AtomId again = store.add_node("Concept", "cat");
  CHECK(first == again);
  CHECK(store.atom_count() == 1);

  AtomId other = store.add_node("Concept", "dog");
  CHECK(other != first);
  CHECK(store.atom_count() == 2);
}

TEST_CASE("truth value revision keeps the higher confidence") {
  Store store;
  store.add_node("Concept", "cat", TruthValue(Rational(8, 10), Rational(9, 10)));
  // Lower confidence does not replace.
  AtomId id = store.add_node("Concept", "cat", TruthValue(Rational(9, 10), Rational(5, 10)));
  Atom atom = store.resolve(id);
  REQUIRE(atom.tv.has_value());
  CHECK(atom.tv->strength == Rational(8, 10));
  CHECK(atom.tv->confidence == Rational(9, 10));

  // Higher confidence replaces.
  store.add_node("Concept", "cat", TruthValue(Rational(1, 10), Rational(95, 100)));
  atom = store.resolve(id);
  CHECK(atom.tv->strength == Rational(1, 10));
  CHECK(atom.tv->confidence == Rational(95, 100));

  // Ties keep the incumbent.
  store.add_node("Concept", "cat", TruthValue(Rational(7, 10), Rational(95, 100)));
  atom = store.resolve(id);
  CHECK(atom.tv->strength == Rational(1, 10));
}

TEST_CASE("variable nodes are ordinary atoms") {
  Store store;
  AtomId v = store.add_node("Variable", "$x");
  Atom atom = store.resolve(v);
  CHECK(atom.type_name == "Variable");
  CHECK(atom.name == "$x");
}

TEST_CASE("link deduplication and metagraph nesting") {
  Store store;
  AtomId cat = store.add_node("Concept", "cat");
  AtomId animal = store.add_node("Concept", "animal");
  AtomId l1 = store.add_link("Inheritance", {cat, animal});
  AtomId l2 = store.add_link("Inheritance", {cat, animal});
  CHECK(l1 == l2);

  // Links may target links.
  AtomId likes = store.add_node("Predicate", "likes");
  AtomId fish = store.add_node("Concept", "fish");
  AtomId list = store.add_link("List", {cat, fish});
  AtomId eval = store.add_link("Evaluation", {likes, list});
  Atom atom = store.resolve(eval);
  REQUIRE(atom.targets.size() == 2);
  CHECK(store.resolve(atom.targets[1]).is_link());

  // Dangling target.
  CHECK(thrown_code([&] { store.add_link("Inheritance", {AtomId{9999}}); }) ==
        ErrorCode::UnknownAtom);
}

TEST_CASE("resolve round-trips and error paths") {
  Store store;
  AtomId cat = store.add_node("Concept", "cat");
  Atom atom = store.resolve(cat);
  CHECK(atom.is_node());
  CHECK(atom.type_name == "Concept");
  CHECK(atom.name == "cat");

  AtomId a = store.add_node("Concept", "a");
  AtomId b = store.add_node("Concept", "b");
  AtomId link = store.add_link("List", {b, a, b});
  Atom l = store.resolve(link);
  CHECK(l.targets == std::vector<AtomId>{b, a, b});

  AtomId isolated = store.add_node("Concept", "isolated");
  store.remove(isolated);
  CHECK(thrown_code([&] { store.resolve(isolated); }) == ErrorCode::UnknownAtom);
}

TEST_CASE("incoming index") {
  mgtest::Animals fx;
  auto inc = fx.store.incoming(fx.cat);
  CHECK(inc == std::vector<AtomId>{fx.cat_animal});

  AtomId isolated = fx.store.add_node("Concept", "isolated");
  CHECK(fx.store.incoming(isolated).empty());

  auto inc_animal = fx.store.incoming(fx.animal);
  std::set<AtomId> expected{fx.cat_animal, fx.dog_animal, fx.animal_organism};
  CHECK(std::set<AtomId>(inc_animal.begin(), inc_animal.end()) == expected);
}

TEST_CASE("atoms_of_type enumeration and maintenance") {
  Store store;
  for (int i = 0; i < 100; ++i) store.add_node("Concept", "n" + std::to_string(i));
  std::vector<AtomId> links;
  for (int i = 0; i < 3; ++i) {
    AtomId a = store.add_node("Concept", "n" + std::to_string(i));
    AtomId b = store.add_node("Concept", "n" + std::to_string(i + 1));
    links.push_back(store.add_link("Inheritance", {a, b}));
  }
  CHECK(store.atoms_of_type("Inheritance").size() == 3);
  CHECK(store.atoms_of_type("NoSuchType").empty());

  store.remove(links[0]);
  CHECK(store.atoms_of_type("Inheritance").size() == 2);
}

TEST_CASE("inspection counter counts index records") {
  Store store;
  for (int i = 0; i < 50; ++i) store.add_node("Concept", "n" + std::to_string(i));
  AtomId a = store.add_node("Concept", "n0");
  AtomId b = store.add_node("Concept", "n1");
  store.add_link("Similarity", {a, b});
  store.reset_index_inspections();
  auto ids = store.atoms_of_type("Similarity");
  CHECK(ids.size() == 1);
  CHECK(store.index_inspections() == 1);

  store.reset_index_inspections();
  store.atoms_of_type("Concept");
  CHECK(store.index_inspections() == 50);
}

TEST_CASE("remove honors referential integrity") {
  mgtest::Animals fx;
  CHECK(thrown_code([&] { fx.store.remove(fx.animal); }) == ErrorCode::HasIncoming);

  // Removing the link first unlocks the target.
  fx.store.remove(fx.cat_animal);
  fx.store.remove(fx.cat);
  CHECK(!fx.store.contains(fx.cat));

  CHECK(thrown_code([&] { fx.store.remove(fx.cat); }) == ErrorCode::UnknownAtom);
  CHECK(thrown_code([&] { fx.store.remove(AtomId{40404}); }) == ErrorCode::UnknownAtom);
}

TEST_CASE("snapshot isolation and version monotonicity") {
  Store store;
  store.add_node("Concept", "cat");
  Snapshot snap = store.snapshot();
  uint64_t v1 = snap.version();

  Snapshot snap2 = store.snapshot();
  CHECK(snap2.version() == v1);  // no intervening writes

  AtomId dog = store.add_node("Concept", "dog");
  CHECK(store.version() > v1);
  CHECK(!snap.contains(dog));
  CHECK(snap.atom_count() == 1);
  CHECK(store.snapshot().atom_count() == 2);
  CHECK(snap.atoms_of_type("Concept").size() == 1);
}

TEST_CASE("snapshot sees historical truth values") {
  Store store;
  AtomId id = store.add_node("Concept", "cat", TruthValue(Rational(1, 2), Rational(1, 2)));
  Snapshot before = store.snapshot();
  store.add_node("Concept", "cat", TruthValue(Rational(3, 4), Rational(3, 4)));
  CHECK(before.resolve(id).tv->strength == Rational(1, 2));
  CHECK(store.resolve(id).tv->strength == Rational(3, 4));
}

TEST_CASE("commit applies batches atomically") {
  Store store;
  Snapshot base = store.snapshot();

  SUBCASE("empty batch commits and changes nothing") {
    CommitResult r = store.commit(base, {}, {});
    CHECK(r.ok());
    CHECK(!r.mutated);
    CHECK(store.atom_count() == 0);
  }

  SUBCASE("disjoint batches commute") {
    std::vector<AtomSpec> batch_a{
        AtomSpec::link("Inheritance", {AtomSpec::node("Concept", "cat"),
                                       AtomSpec::node("Concept", "animal")})};
    std::vector<AtomSpec> batch_b{
        AtomSpec::link("Similarity", {AtomSpec::node("Concept", "dog"),
                                      AtomSpec::node("Concept", "wolf")})};
    Store ab;
    ab.commit(ab.snapshot(), batch_a, {});
    ab.commit(ab.snapshot(), batch_b, {});
    Store ba;
    ba.commit(ba.snapshot(), batch_b, {});
    ba.commit(ba.snapshot(), batch_a, {});
    CHECK(canonical_dump(ab.snapshot()) == canonical_dump(ba.snapshot()));
  }

  SUBCASE("removal of a newly linked atom conflicts") {
    AtomId cat = store.add_node("Concept", "cat");
    Snapshot stale = store.snapshot();
    store.add_link("Inheritance", {cat, store.add_node("Concept", "animal")});
    CommitResult r = store.commit(stale, {}, {cat});
    CHECK(!r.ok());
    CHECK(r.conflict_kind == CommitResult::ConflictKind::RemovalHasIncoming);
  }

  SUBCASE("stale base alone is not a conflict") {
    Snapshot stale = store.snapshot();
    store.add_node("Concept", "unrelated");
    CommitResult r = store.commit(stale, {AtomSpec::node("Concept", "cat")}, {});
    CHECK(r.ok());
  }

  SUBCASE("batch linking to its own removal target conflicts") {
    AtomId cat = store.add_node("Concept", "cat");
    std::vector<AtomSpec> additions{
        AtomSpec::link("Inheritance",
                       {AtomSpec::ref(cat), AtomSpec::node("Concept", "animal")})};
    CommitResult r = store.commit(store.snapshot(), additions, {cat});
    CHECK(!r.ok());
    CHECK(r.conflict_kind == CommitResult::ConflictKind::LinksToRemoved);
    CHECK(store.contains(cat));
    CHECK(store.atoms_of_type("Inheritance").empty());  // nothing applied
  }

  SUBCASE("removal of never-stored id is a malformed batch") {
    CHECK(thrown_code([&] { store.commit(store.snapshot(), {}, {AtomId{777}}); }) ==
          ErrorCode::UnknownAtom);
  }

  SUBCASE("intra-batch references resolve against earlier entries") {
    std::vector<AtomSpec> additions{
        AtomSpec::node("Concept", "cat"),
        AtomSpec::link("Inheritance", {AtomSpec::node("Concept", "cat"),
                                       AtomSpec::node("Concept", "animal")})};
    CommitResult r = store.commit(store.snapshot(), additions, {});
    REQUIRE(r.ok());
    Atom link = store.resolve(r.ids[1]);
    CHECK(link.targets[0] == r.ids[0]);
  }

  SUBCASE("batch removing link and its target in one go") {
    AtomId cat = store.add_node("Concept", "cat");
    AtomId animal = store.add_node("Concept", "animal");
    AtomId link = store.add_link("Inheritance", {cat, animal});
    CommitResult r = store.commit(store.snapshot(), {}, {link, cat});
    CHECK(r.ok());
    CHECK(!store.contains(link));
    CHECK(!store.contains(cat));
    CHECK(store.contains(animal));
  }
}

TEST_CASE("canonical dump is sorted and round-trip stable") {
  mgtest::Animals fx;
  std::string dump = canonical_dump(fx.store.snapshot());
  // Sorted by (typeName, name, targets): Concepts first, then Inheritance.
  CHECK(dump.find("(Concept \"animal\")") < dump.find("(Concept \"cat\")"));
  CHECK(dump.find("(Concept \"cat\")") < dump.find("(Inheritance"));
  // One line per atom.
  CHECK(std::count(dump.begin(), dump.end(), '\n') == 7);
}

TEST_CASE("deduplication and index correctness on random stores") {
  for (uint64_t seed : {11ull, 12ull, 13ull}) {
    GeneratorConfig cfg;
    cfg.seed = seed;
    cfg.atom_budget = seed == 13 ? 10000 : 1000;
    Store store = gen_store(cfg);
    Snapshot snap = store.snapshot();

    // No two live atoms share a structure line.
    std::set<std::string> structures;
    std::vector<AtomId> all = snap.all_atoms();
    for (AtomId id : all) {
      CHECK(structures.insert(atom_structure(snap, id)).second);
    }

    // Index equals the linear-scan filter for every type name present.
    std::set<std::string> type_names;
    for (AtomId id : all) type_names.insert(snap.resolve(id).type_name);
    for (const std::string& tn : type_names) {
      std::vector<AtomId> scanned;
      for (AtomId id : all) {
        if (snap.resolve(id).type_name == tn) scanned.push_back(id);
      }
      CHECK(snap.atoms_of_type(tn) == scanned);
    }

    // Referential integrity: every target of every link resolves.
    for (AtomId id : all) {
      for (AtomId t : snap.resolve(id).targets) CHECK(snap.contains(t));
    }
  }
}

TEST_CASE("annotations are versioned per snapshot") {
  Store store;
  AtomId cat = store.add_node("Concept", "cat");
  AtomId system = store.add_node("TypeSystem", "demo");
  AtomId texpr = store.add_node("Arity", "0");

  Snapshot before = store.snapshot();
  store.annotate(cat, system, texpr);
  CHECK(!before.annotation_for(cat, system).has_value());
  CHECK(store.snapshot().annotation_for(cat, system) == texpr);

  // Identical annotation is a no-op; stripping removes it.
  uint64_t v = store.version();
  store.annotate(cat, system, texpr);
  CHECK(store.version() == v);
  CHECK(store.strip_annotation(cat, system, texpr));
  CHECK(!store.snapshot().annotation_for(cat, system).has_value());
  CHECK(!store.strip_annotation(cat, system, texpr));
}

TEST_CASE("clone preserves structure and diverges after") {
  mgtest::Animals fx;
  Store copy = fx.store.clone();
  CHECK(canonical_dump(copy.snapshot()) == canonical_dump(fx.store.snapshot()));
  copy.add_node("Concept", "extra");
  CHECK(canonical_dump(copy.snapshot()) != canonical_dump(fx.store.snapshot()));
}

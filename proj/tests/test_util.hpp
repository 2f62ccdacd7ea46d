#pragma once

#include "mg/error.hpp"
#include "mg/store.hpp"

#include <optional>
#include <utility>

namespace mgtest {

template <typename F>
std::optional<mg::ErrorCode> thrown_code(F&& f) {
  try {
    std::forward<F>(f)();
  } catch (const mg::EngineError& e) {
    return e.code();
  }
  return std::nullopt;
}

// The standard inheritance fixture used across the matcher and rewrite tests.
struct Animals {
  mg::Store store;
  mg::AtomId cat, dog, animal, organism;
  mg::AtomId cat_animal, dog_animal, animal_organism;

  Animals() {
    cat = store.add_node("Concept", "cat");
    dog = store.add_node("Concept", "dog");
    animal = store.add_node("Concept", "animal");
    organism = store.add_node("Concept", "organism");
    cat_animal = store.add_link("Inheritance", {cat, animal});
    dog_animal = store.add_link("Inheritance", {dog, animal});
    animal_organism = store.add_link("Inheritance", {animal, organism});
  }
};

}  // namespace mgtest

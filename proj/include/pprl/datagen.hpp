#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "pprl/eval.hpp"
#include "pprl/record.hpp"

namespace pprl {

// Synthetic multi-party person data with controlled overlap and corruption.
//
// Value pools are rank-weighted (earlier entries more frequent) so that
// common names produce big blocks and rare names small ones, which is what
// real person data looks like. The surname pool carries explicit weights: a
// small head of very common surnames and a long near-uniform tail.
struct GenSpec {
  std::size_t parties = 3;
  std::size_t records_per_party = 1000;
  double overlap = 0.5;      // fraction of each party's records shared by all
  double corruption = 0.0;   // fraction of overlap entities that get variants
  std::size_t min_ops = 1;   // edit operations per corrupted value set
  std::size_t max_ops = 3;
  std::uint64_t seed = 1;

  // Pools; defaults are the built-in lexicons. surname_weights must align
  // with surnames when non-empty (empty means uniform).
  std::vector<std::string> given_names;
  std::vector<std::string> surnames;
  std::vector<double> surname_weights;
  std::vector<std::string> suburbs;
  std::vector<std::string> postcodes;

  void validate() const;
};

struct GeneratedData {
  std::vector<Database> parties;  // header: rid,given_name,surname,suburb,postcode
  GroundTruth truth;              // one tuple per overlap entity
};

// Deterministic under the seed: same spec, byte-identical output. Overlap
// entities appear at every party; a corrupted entity keeps the original at a
// non-empty proper subset of parties and gets an independently corrupted
// variant at the rest. Throws when the pools cannot supply enough distinct
// person tuples.
GeneratedData generate(const GenSpec& spec);

enum class EditOp { insert, erase, substitute, transpose };

// One random edit. Insertion draws from the alphabet; substitution never
// writes the character already there; transposition swaps a random unequal
// adjacent pair. Throws when the operation cannot apply (empty input, or no
// unequal adjacent pair to transpose).
std::string apply_edit(const std::string& value, EditOp op, std::mt19937_64& rng,
                       std::string_view alphabet);

// n_ops edits with uniformly drawn operations; inapplicable draws are
// redrawn. Never returns the input unchanged.
std::string corrupt_value(const std::string& value, std::size_t n_ops, std::mt19937_64& rng,
                          std::string_view alphabet);

// Built-in pools.
const std::vector<std::string>& builtin_given_names();
const std::vector<std::string>& builtin_surnames();
const std::vector<double>& builtin_surname_weights();
const std::vector<std::string>& builtin_suburbs();
const std::vector<std::string>& builtin_postcodes();

}  // namespace pprl

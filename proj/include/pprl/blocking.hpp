#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "pprl/record.hpp"

namespace pprl {

// American Soundex. Empty or fully non-alphabetic input maps to the sentinel
// "Z000" so such records still land in a (shared) block.
std::string soundex(const std::string& s);

// Blocking key: concatenated Soundex codes of the chosen attributes.
std::string blocking_key(const Record& rec, const std::vector<std::size_t>& attr_idx);

// BKV -> row indices into db.rows. std::map keeps keys sorted so iteration
// order is deterministic across parties.
using BlockIndex = std::map<std::string, std::vector<std::size_t>>;

BlockIndex build_blocks(const Database& db, const std::vector<std::size_t>& attr_idx);

// Sorted intersection of the key sets of all parties' block indexes.
std::vector<std::string> common_blocks(const std::vector<BlockIndex>& indexes);

}  // namespace pprl

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pprl {

// One party-local row: a record identifier plus QID attribute values.
struct Record {
  std::string rid;
  std::vector<std::string> values;  // aligned with Database::attributes
};

struct Database {
  std::vector<std::string> attributes;
  std::vector<Record> rows;

  std::size_t attribute_index(const std::string& name) const {
    for (std::size_t i = 0; i < attributes.size(); ++i)
      if (attributes[i] == name) return i;
    throw std::invalid_argument("Database: unknown attribute '" + name + "'");
  }

  std::vector<std::size_t> attribute_indices(const std::vector<std::string>& names) const {
    std::vector<std::size_t> out;
    out.reserve(names.size());
    for (const auto& n : names) out.push_back(attribute_index(n));
    return out;
  }
};

// CSV with a leading `rid` column followed by attribute columns. Values are
// written verbatim; the generator's lexicons contain no commas or quotes.
void write_database_csv(const Database& db, const std::string& path);
Database read_database_csv(const std::string& path);

}  // namespace pprl

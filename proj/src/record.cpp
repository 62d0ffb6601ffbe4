#include "pprl/record.hpp"

#include <fstream>
#include <sstream>

namespace pprl {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_database_csv(const Database& db, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "rid";
  for (const auto& a : db.attributes) os << ',' << a;
  os << '\n';
  for (const auto& r : db.rows) {
    if (r.values.size() != db.attributes.size())
      throw std::runtime_error("row arity mismatch for rid " + r.rid);
    os << r.rid;
    for (const auto& v : r.values) os << ',' << v;
    os << '\n';
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

Database read_database_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty csv: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_csv_line(line);
  if (header.empty() || header[0] != "rid")
    throw std::runtime_error("csv must start with rid column: " + path);

  Database db;
  db.attributes.assign(header.begin() + 1, header.end());
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw std::runtime_error("csv row arity mismatch in " + path + ": " + line);
    Record r;
    r.rid = fields[0];
    r.values.assign(fields.begin() + 1, fields.end());
    db.rows.push_back(std::move(r));
  }
  return db;
}

}  // namespace pprl

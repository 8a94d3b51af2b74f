#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "fairsample/data.hpp"
#include "fairsample/error.hpp"

namespace fairsample {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

// Splits one record; double quotes enclose fields that contain the delimiter.
std::vector<std::string> split_record(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == delimiter) {
      fields.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  fields.push_back(trim(current));
  return fields;
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double value = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::optional<long long> parse_integer(const std::string& s) {
  if (s.empty()) return std::nullopt;
  long long value = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec == std::errc() && ptr == end) return value;
  // Accept integral floats such as "3.0".
  if (auto d = parse_double(s); d && *d == std::floor(*d)) return static_cast<long long>(*d);
  return std::nullopt;
}

bool label_matches(const std::string& cell, const std::string& token) {
  if (cell == token) return true;
  auto a = parse_double(cell);
  auto b = parse_double(token);
  return a && b && *a == *b;
}

}  // namespace

LabelMap parse_label_map(const std::string& text) {
  LabelMap map;
  bool have_neg = false, have_pos = false;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = trim(std::string_view(text).substr(start, comma - start));
    const auto eq = item.find('=');
    require(eq != std::string::npos, "label map entry '" + item + "' is not key=value");
    const std::string key = trim(std::string_view(item).substr(0, eq));
    const std::string value = trim(std::string_view(item).substr(eq + 1));
    if (key == "neg") {
      map.negative = value;
      have_neg = true;
    } else if (key == "pos") {
      map.positive = value;
      have_pos = true;
    } else {
      throw ContractError("label map key must be 'neg' or 'pos', got '" + key + "'");
    }
    start = comma + 1;
  }
  require(have_neg && have_pos, "label map must name both neg and pos");
  require(map.negative != map.positive, "label map neg and pos must differ");
  return map;
}

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  require(!schema.label_column.empty(), "schema: label column required");
  require(!schema.group_column.empty(), "schema: group column required");
  require(!schema.feature_columns.empty(), "schema: at least one feature column required");

  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV file '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw ContractError(path + ": missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_record(line, schema.delimiter);
  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) column.emplace(header[i], i);
  auto index_of = [&](const std::string& name) {
    auto it = column.find(name);
    require(it != column.end(), path + ": column '" + name + "' not in header");
    return it->second;
  };
  const std::size_t label_idx = index_of(schema.label_column);
  const std::size_t group_idx = index_of(schema.group_column);
  std::vector<std::size_t> feature_idx;
  for (const auto& f : schema.feature_columns) feature_idx.push_back(index_of(f));
  std::optional<std::size_t> ts_idx;
  if (schema.timestamp_column) ts_idx = index_of(*schema.timestamp_column);

  std::vector<LabeledPoint> points;
  std::vector<std::int64_t> timestamps;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_record(line, schema.delimiter);
    const std::string where = path + ": row " + std::to_string(row);
    require(cells.size() == header.size(), where + ": expected " + std::to_string(header.size()) +
                                               " fields, got " + std::to_string(cells.size()));
    LabeledPoint p;
    p.x.reserve(feature_idx.size());
    for (std::size_t k = 0; k < feature_idx.size(); ++k) {
      auto v = parse_double(cells[feature_idx[k]]);
      require(v.has_value(), where + ": non-numeric feature '" + schema.feature_columns[k] +
                                 "' value '" + cells[feature_idx[k]] + "'");
      p.x.push_back(*v);
    }
    const auto& label = cells[label_idx];
    if (label_matches(label, schema.label_map.positive)) {
      p.y = 1;
    } else if (label_matches(label, schema.label_map.negative)) {
      p.y = -1;
    } else {
      throw ContractError(where + ": label '" + label + "' outside declared mapping");
    }
    auto g = parse_integer(cells[group_idx]);
    require(g.has_value(), where + ": group id '" + cells[group_idx] + "' is not an integer");
    require(*g >= 0, where + ": group id is negative");
    p.a = static_cast<int>(*g);
    if (ts_idx) {
      auto t = parse_integer(cells[*ts_idx]);
      require(t.has_value(), where + ": timestamp '" + cells[*ts_idx] + "' is not an integer");
      timestamps.push_back(*t);
    }
    points.push_back(std::move(p));
  }
  return Dataset(std::move(points), std::nullopt, std::move(timestamps));
}

}  // namespace fairsample

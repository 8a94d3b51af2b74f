#include "fairsample/emit.hpp"

#include <fstream>
#include <sstream>

#include "fairsample/error.hpp"

namespace fairsample {

OutputFormat parse_format(const std::string& name) {
  if (name == "json") return OutputFormat::Json;
  if (name == "csv") return OutputFormat::Csv;
  throw ContractError("unknown output format '" + name + "' (expected json or csv)");
}

nlohmann::json to_json(const UniformMixtureSpec& s) {
  return {{"kind", "uniform"}, {"alpha0", s.alpha0}, {"beta0", s.beta0}, {"t0", s.t0},       {"alpha1", s.alpha1},
          {"beta1", s.beta1},  {"t1", s.t1},         {"lambda_star", s.lambda_star}};
}

nlohmann::json to_json(const GaussianMixtureSpec& s) {
  return {{"kind", "gaussian"}, {"mean0", s.mean0}, {"var0", s.var0}, {"t0", s.t0},
          {"mean1", s.mean1},   {"var1", s.var1},   {"t1", s.t1},     {"lambda_star", s.lambda_star}};
}

nlohmann::json to_json(const analytic::GroundTruth& truth) {
  return std::visit([](const auto& s) { return to_json(s); }, truth);
}

namespace {

std::string csv_cell(const nlohmann::json& v) {
  std::string text;
  if (v.is_null()) return "";
  if (v.is_string()) {
    text = v.get<std::string>();
  } else {
    text = v.dump();
  }
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char ch : text) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + '"';
}

}  // namespace

std::string to_csv(const nlohmann::json& records) {
  require(records.is_array(), "CSV view needs an array of records");
  if (records.empty()) return "";
  std::vector<std::string> columns;
  for (const auto& rec : records) {
    require(rec.is_object(), "CSV records must be objects");
    for (const auto& [key, value] : rec.items()) {
      if (std::find(columns.begin(), columns.end(), key) == columns.end()) columns.push_back(key);
    }
  }
  std::ostringstream out;
  for (std::size_t k = 0; k < columns.size(); ++k) out << (k ? "," : "") << csv_cell(columns[k]);
  out << '\n';
  for (const auto& rec : records) {
    for (std::size_t k = 0; k < columns.size(); ++k) {
      out << (k ? "," : "");
      if (auto it = rec.find(columns[k]); it != rec.end()) out << csv_cell(*it);
    }
    out << '\n';
  }
  return out.str();
}

std::string render(const nlohmann::json& doc, OutputFormat format) {
  if (format == OutputFormat::Json) return doc.dump(2) + "\n";
  if (doc.is_array()) return to_csv(doc);
  require(doc.is_object() && doc.contains("records"), "result has no records to flatten into CSV");
  return to_csv(doc.at("records"));
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

void emit(const nlohmann::json& doc, OutputFormat format, const std::string& path) {
  write_file(path, render(doc, format));
}

}  // namespace fairsample

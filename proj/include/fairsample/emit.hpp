#pragma once

// Result serialization. Every result renders to one JSON document; the CSV
// view flattens the document's "records" array (or the document itself when it
// is an array) into one row per element.

#include <string>

#include "json.hpp"

#include "fairsample/analytic.hpp"

namespace fairsample {

enum class OutputFormat { Json, Csv };

OutputFormat parse_format(const std::string& name);  // "json" | "csv"

nlohmann::json to_json(const UniformMixtureSpec& spec);
nlohmann::json to_json(const GaussianMixtureSpec& spec);
nlohmann::json to_json(const analytic::GroundTruth& truth);

// Columns are the union of object keys in first-seen order; nested values are
// written as compact JSON. An empty array gives an empty document.
std::string to_csv(const nlohmann::json& records);

std::string render(const nlohmann::json& doc, OutputFormat format);

// Throws IoError if the file cannot be written.
void write_file(const std::string& path, const std::string& content);
void emit(const nlohmann::json& doc, OutputFormat format, const std::string& path);

}  // namespace fairsample

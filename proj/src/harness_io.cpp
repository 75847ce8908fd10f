// Copyright 2026 The Unistab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Configuration parsing and table emission.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "unistab/format.hpp"
#include "unistab/harness.hpp"

namespace unistab::harness {
namespace {

using nlohmann::json;

const char* kKnownKeys[] = {"problem", "n",       "trials", "delta",  "seed",       "solver",
                            "lambda",  "epsilon", "workers", "out",   "format",     "gamma_rule",
                            "instances"};

template <class T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

std::size_t get_count(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw ConfigError(std::string("config key '") + key + "' must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

void apply_config(ExperimentConfig& cfg, const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(std::begin(kKnownKeys), std::end(kKnownKeys), it.key()) == std::end(kKnownKeys)) {
      throw ConfigError("unknown config key '" + it.key() + "'");
    }
  }
  if (j.contains("problem")) cfg.problem = get_as<std::string>(j, "problem");
  if (j.contains("n")) {
    const json& v = j.at("n");
    if (!v.is_array()) throw ConfigError("config key 'n' must be an array of integers");
    std::vector<std::size_t> ns;
    for (const json& x : v) {
      if (!x.is_number_integer() || x.get<long long>() < 1) {
        throw ConfigError("config key 'n' must contain positive integers");
      }
      ns.push_back(x.get<std::size_t>());
    }
    cfg.n_list = std::move(ns);
  }
  if (j.contains("trials")) cfg.trials = get_count(j, "trials");
  if (j.contains("delta")) {
    const json& v = j.at("delta");
    if (!v.is_array()) throw ConfigError("config key 'delta' must be an array of numbers");
    std::vector<double> ds;
    for (const json& x : v) {
      if (!x.is_number()) throw ConfigError("config key 'delta' must contain numbers");
      ds.push_back(x.get<double>());
    }
    cfg.deltas = std::move(ds);
  }
  if (j.contains("seed")) cfg.seed = static_cast<std::uint64_t>(get_count(j, "seed"));
  if (j.contains("solver")) cfg.solver = get_as<std::string>(j, "solver");
  if (j.contains("lambda")) {
    if (j.at("lambda").is_null()) {
      cfg.lambda.reset();
    } else {
      cfg.lambda = get_as<double>(j, "lambda");
    }
  }
  if (j.contains("epsilon")) cfg.epsilon = get_as<double>(j, "epsilon");
  if (j.contains("workers")) cfg.workers = get_count(j, "workers");
  if (j.contains("out")) cfg.out = get_as<std::string>(j, "out");
  if (j.contains("format")) {
    try {
      cfg.format = parse_format(get_as<std::string>(j, "format"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (j.contains("gamma_rule")) cfg.gamma_rule = get_as<std::string>(j, "gamma_rule");
  if (j.contains("instances")) cfg.instances = get_count(j, "instances");
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid config JSON: ") + e.what());
  }
}

std::string format_cell(const Cell& cell, bool json_style) {
  return std::visit(
      [&](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::uint64_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, double>) {
          if (json_style && !std::isfinite(v)) return "null";
          return format_double(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          return json_style ? (v ? "true" : "false") : (v ? "1" : "0");
        } else {
          return json_style ? json(v).dump() : v;
        }
      },
      cell);
}

Cell parse_csv_cell(const std::string& text, ColumnType type, const std::string& column) {
  try {
    switch (type) {
      case ColumnType::kUInt: {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(text, &pos);
        if (pos != text.size()) break;
        return static_cast<std::uint64_t>(v);
      }
      case ColumnType::kReal: {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos != text.size()) break;
        return v;
      }
      case ColumnType::kBool:
        if (text == "1" || text == "true") return true;
        if (text == "0" || text == "false") return false;
        break;
      case ColumnType::kText:
        return text;
    }
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("cannot parse '" + text + "' for column " + column);
}

Cell parse_json_cell(const json& v, ColumnType type, const std::string& column) {
  switch (type) {
    case ColumnType::kUInt:
      if (v.is_number_unsigned()) return v.get<std::uint64_t>();
      break;
    case ColumnType::kReal:
      if (v.is_number()) return v.get<double>();
      if (v.is_null()) return std::nan("");
      break;
    case ColumnType::kBool:
      if (v.is_boolean()) return v.get<bool>();
      break;
    case ColumnType::kText:
      if (v.is_string()) return v.get<std::string>();
      break;
  }
  throw std::invalid_argument("bad JSON value for column " + column + ": " + v.dump());
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string_view to_string(OutputFormat format) {
  return format == OutputFormat::kJson ? "json" : "csv";
}

OutputFormat parse_format(std::string_view text) {
  if (text == "csv") return OutputFormat::kCsv;
  if (text == "json") return OutputFormat::kJson;
  throw std::invalid_argument("unknown format '" + std::string(text) + "' (expected csv or json)");
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  for (std::size_t n : n_list) {
    if (n < 1) throw ConfigError("every n must be at least 1");
  }
  for (double d : deltas) {
    if (!(d > 0.0 && d < 1.0)) throw ConfigError("every delta must lie in (0,1)");
  }
  if (lambda && !(*lambda >= 0.0 && std::isfinite(*lambda))) {
    throw ConfigError("lambda must be finite and nonnegative");
  }
  if (!(epsilon >= 0.0 && std::isfinite(epsilon))) {
    throw ConfigError("epsilon must be finite and nonnegative");
  }
}

std::string ExperimentConfig::to_json() const {
  json j = json::object();
  j["problem"] = problem;
  j["n"] = n_list;
  j["trials"] = trials;
  j["delta"] = deltas;
  j["seed"] = seed;
  j["solver"] = solver;
  j["lambda"] = lambda ? json(*lambda) : json(nullptr);
  j["epsilon"] = epsilon;
  j["workers"] = workers;
  j["out"] = out;
  j["format"] = std::string(harness::to_string(format));
  j["gamma_rule"] = gamma_rule;
  j["instances"] = instances;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(std::string_view text) {
  ExperimentConfig cfg;
  apply_config(cfg, parse_json(text));
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return from_json(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void ExperimentConfig::merge_json(std::string_view text) { apply_config(*this, parse_json(text)); }

std::size_t Table::column_index(std::string_view name) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].name == name) return c;
  }
  throw std::out_of_range("no column named '" + std::string(name) + "'");
}

double Table::real(std::size_t row, std::string_view column) const {
  const Cell& cell = rows.at(row).at(column_index(column));
  if (const double* d = std::get_if<double>(&cell)) return *d;
  if (const std::uint64_t* u = std::get_if<std::uint64_t>(&cell)) return static_cast<double>(*u);
  if (const bool* b = std::get_if<bool>(&cell)) return *b ? 1.0 : 0.0;
  throw std::invalid_argument("column '" + std::string(column) + "' is not numeric");
}

void write_csv(std::ostream& out, const Table& table) {
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    out << (c ? "," : "") << table.columns[c].name;
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_cell(row[c], false);
    out << '\n';
  }
}

void write_json(std::ostream& out, const Table& table) {
  out << '[';
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out << (r ? ",\n  {" : "\n  {");
    const auto& row = table.rows[r];
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "," : "") << json(table.columns[c].name).dump() << ':' << format_cell(row[c], true);
    }
    out << '}';
  }
  out << (table.rows.empty() ? "]\n" : "\n]\n");
}

std::string to_string(const Table& table, OutputFormat format) {
  std::ostringstream out;
  if (format == OutputFormat::kJson) {
    write_json(out, table);
  } else {
    write_csv(out, table);
  }
  return out.str();
}

void emit(const Table& table, OutputFormat format, const std::string& path) {
  const std::string text = to_string(table, format);
  if (path.empty()) {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw IoError("failed writing report to standard output");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing report to '" + path + "'");
}

Table parse_table(std::istream& in, OutputFormat format, const std::vector<Column>& schema) {
  Table table;
  table.columns = schema;
  if (format == OutputFormat::kCsv) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty CSV report");
    const std::vector<std::string> header = split_csv_line(line);
    if (header.size() != schema.size()) throw std::invalid_argument("CSV header does not match schema");
    for (std::size_t c = 0; c < schema.size(); ++c) {
      if (header[c] != schema[c].name) {
        throw std::invalid_argument("CSV column " + std::to_string(c) + " is '" + header[c] +
                                    "', expected '" + schema[c].name + "'");
      }
    }
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const std::vector<std::string> fields = split_csv_line(line);
      if (fields.size() != schema.size()) throw std::invalid_argument("CSV row has wrong arity");
      std::vector<Cell> row;
      for (std::size_t c = 0; c < schema.size(); ++c) {
        row.push_back(parse_csv_cell(fields[c], schema[c].type, schema[c].name));
      }
      table.rows.push_back(std::move(row));
    }
    return table;
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("invalid JSON report: ") + e.what());
  }
  if (!doc.is_array()) throw std::invalid_argument("JSON report must be an array");
  for (const json& obj : doc) {
    if (!obj.is_object() || obj.size() != schema.size()) {
      throw std::invalid_argument("JSON report row does not match schema");
    }
    std::vector<Cell> row;
    for (const Column& col : schema) {
      if (!obj.contains(col.name)) throw std::invalid_argument("JSON row lacks " + col.name);
      row.push_back(parse_json_cell(obj.at(col.name), col.type, col.name));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace unistab::harness

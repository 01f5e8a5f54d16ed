#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spiked/error.hpp"
#include "spiked/prior.hpp"

namespace spiked {

/// `rademacher` or `sparse:<rho>`.
inline Prior parse_prior_spec(const std::string& spec) {
  if (spec == "rademacher") return make_rademacher();
  const std::string prefix = "sparse:";
  if (spec.rfind(prefix, 0) == 0) {
    const std::string tail = spec.substr(prefix.size());
    double rho = 0.0;
    const auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), rho);
    if (ec != std::errc{} || ptr != tail.data() + tail.size()) throw DomainError("prior: bad rho in '" + spec + "'");
    return make_sparse_rademacher(rho);
  }
  throw DomainError("prior: unknown spec '" + spec + "' (expected rademacher or sparse:<rho>)");
}

/// {"label": str, "atoms": [[point, weight], ...]}
inline Prior prior_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("atoms") || !j["atoms"].is_array()) throw DomainError("prior: JSON needs an atoms array");
  std::vector<Atom> atoms;
  for (const auto& a : j["atoms"]) {
    if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
      throw DomainError("prior: each atom must be [point, weight]");
    atoms.push_back({a[0].get<double>(), a[1].get<double>()});
  }
  return Prior(std::move(atoms), j.value("label", std::string("custom")));
}

inline nlohmann::json prior_to_json(const Prior& prior) {
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& a : prior.atoms()) atoms.push_back({a.point, a.weight});
  return {{"label", prior.label()}, {"atoms", atoms}};
}

inline Prior load_prior_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("prior: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError("prior: " + path + ": " + e.what());
  }
  return prior_from_json(j);
}

/// Shortest decimal that round-trips, at most 17 significant digits.
inline std::string format_number(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

/// Quotes a text field when it holds a comma, quote or line break.
inline std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

/// Table of numbers or text, written as CSV with a leading `# seed=<seed>`
/// comment line or as JSON with the same content.
class CsvTable {
 public:
  using Cell = nlohmann::json;

  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add_row(const std::vector<double>& values) {
    std::vector<Cell> cells;
    for (double v : values) cells.emplace_back(v);
    add_cells(std::move(cells));
  }

  /// Each cell is a number or a string.
  void add_cells(std::vector<Cell> cells) {
    if (cells.size() != columns_.size()) throw DomainError("csv: row width differs from header");
    rows_.push_back(std::move(cells));
  }

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const noexcept { return rows_; }

  std::string to_csv(std::uint64_t seed) const {
    std::ostringstream out;
    out << "# seed=" << seed << '\n';
    for (std::size_t c = 0; c < columns_.size(); ++c) out << (c ? "," : "") << columns_[c];
    out << '\n';
    for (const auto& row : rows_) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) out << ',';
        if (row[c].is_number()) out << format_number(row[c].get<double>());
        else out << csv_field(row[c].get<std::string>());
      }
      out << '\n';
    }
    return out.str();
  }

  /// {"seed": ..., "columns": [...], "rows": [{column: cell}, ...]}.
  /// Non-finite numbers become null.
  nlohmann::ordered_json to_json(std::uint64_t seed) const {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : rows_) {
      nlohmann::ordered_json obj = nlohmann::ordered_json::object();
      for (std::size_t c = 0; c < row.size(); ++c) {
        const bool bad = row[c].is_number() && !std::isfinite(row[c].get<double>());
        obj[columns_[c]] = bad ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(row[c]);
      }
      rows.push_back(obj);
    }
    nlohmann::ordered_json out;
    out["seed"] = seed;
    out["columns"] = columns_;
    out["rows"] = rows;
    return out;
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

/// `a:b:step` inclusive of b up to rounding, or a comma list.
inline std::vector<double> parse_real_list(const std::string& text) {
  auto to_double = [&](const std::string& s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) throw DomainError("list: bad number '" + s + "' in '" + text + "'");
    return v;
  };
  std::vector<std::string> parts;
  const char sep = text.find(':') != std::string::npos ? ':' : ',';
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, sep);) parts.push_back(item);
  std::vector<double> out;
  if (sep == ':') {
    if (parts.size() != 3) throw DomainError("list: range must be start:stop:step, got '" + text + "'");
    const double a = to_double(parts[0]), b = to_double(parts[1]), step = to_double(parts[2]);
    if (!(step > 0.0) || b < a) throw DomainError("list: range needs step > 0 and stop >= start");
    const long count = static_cast<long>(std::floor((b - a) / step + 1e-9));
    // Rounded so 0.1:1:0.1 yields 0.3, not 0.30000000000000004.
    for (long i = 0; i <= count; ++i) out.push_back(std::round((a + i * step) * 1e12) / 1e12);
  } else {
    for (const auto& s : parts) out.push_back(to_double(s));
  }
  if (out.empty()) throw DomainError("list: empty");
  return out;
}

inline std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (double v : parse_real_list(text)) {
    if (v != std::floor(v)) throw DomainError("list: expected integers in '" + text + "'");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

}  // namespace spiked

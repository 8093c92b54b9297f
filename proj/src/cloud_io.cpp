#include "detcurve/cloud_io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "json.hpp"

namespace detcurve {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& text, std::size_t row) {
  double value = 0.0;
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("cloud: bad number '" + text + "' in row " + std::to_string(row));
  }
  return value;
}

// Maps column names to coordinate slots; returns the weight column or -1.
int parse_header(const std::vector<std::string>& names, std::vector<int>& coord_of_column) {
  int weight_column = -1;
  int dim = 0;
  coord_of_column.assign(names.size(), -1);
  for (std::size_t c = 0; c < names.size(); ++c) {
    const std::string& name = names[c];
    if (name == "weight") {
      weight_column = static_cast<int>(c);
    } else if (name.size() > 1 && name[0] == 'x') {
      const int slot = std::stoi(name.substr(1)) - 1;
      if (slot < 0) throw std::invalid_argument("cloud: bad column name " + name);
      coord_of_column[c] = slot;
      dim = std::max(dim, slot + 1);
    } else {
      throw std::invalid_argument("cloud: unknown column '" + name + "'");
    }
  }
  std::vector<bool> seen(static_cast<std::size_t>(dim), false);
  for (int slot : coord_of_column) {
    if (slot >= 0) seen[static_cast<std::size_t>(slot)] = true;
  }
  for (bool s : seen) {
    if (!s) throw std::invalid_argument("cloud: coordinate columns must be x1..xd");
  }
  if (dim == 0) throw std::invalid_argument("cloud: no coordinate columns");
  return weight_column;
}

PointMeasure assemble(const std::vector<std::vector<double>>& coords, const std::vector<double>& weights,
                      bool weighted) {
  if (coords.empty()) throw std::invalid_argument("cloud: no atoms");
  const auto d = static_cast<Index>(coords.front().size());
  const auto n = static_cast<Index>(coords.size());
  MatrixX<double> p(d, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) p(j, i) = coords[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  if (!weighted) return PointMeasure::uniform(std::move(p));
  return PointMeasure(std::move(p), Eigen::Map<const VectorX<double>>(weights.data(), n));
}

}  // namespace

PointMeasure read_cloud_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("cloud: empty CSV");
  std::vector<int> coord_of_column;
  const auto header = split_row(trim(line));
  const int weight_column = parse_header(header, coord_of_column);
  int dim = 0;
  for (int slot : coord_of_column) dim = std::max(dim, slot + 1);

  std::vector<std::vector<double>> coords;
  std::vector<double> weights;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split_row(line);
    if (cells.size() != header.size()) {
      throw std::invalid_argument("cloud: row " + std::to_string(row) + " has wrong column count");
    }
    std::vector<double> x(static_cast<std::size_t>(dim));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const double v = parse_number(cells[c], row);
      if (static_cast<int>(c) == weight_column) {
        weights.push_back(v);
      } else {
        x[static_cast<std::size_t>(coord_of_column[c])] = v;
      }
    }
    coords.push_back(std::move(x));
  }
  return assemble(coords, weights, weight_column >= 0);
}

PointMeasure read_cloud_json(std::istream& in) {
  const nlohmann::json doc = nlohmann::json::parse(in);
  if (!doc.is_array() || doc.empty()) throw std::invalid_argument("cloud: JSON must be a nonempty array");
  std::vector<std::string> names;
  for (const auto& [key, value] : doc.front().items()) names.push_back(key);
  std::vector<int> coord_of_column;
  const int weight_column = parse_header(names, coord_of_column);
  int dim = 0;
  for (int slot : coord_of_column) dim = std::max(dim, slot + 1);

  std::vector<std::vector<double>> coords;
  std::vector<double> weights;
  for (const auto& record : doc) {
    if (!record.is_object() || record.size() != names.size()) {
      throw std::invalid_argument("cloud: JSON records must share the same keys");
    }
    std::vector<double> x(static_cast<std::size_t>(dim));
    for (std::size_t c = 0; c < names.size(); ++c) {
      const double v = record.at(names[c]).get<double>();
      if (static_cast<int>(c) == weight_column) {
        weights.push_back(v);
      } else {
        x[static_cast<std::size_t>(coord_of_column[c])] = v;
      }
    }
    coords.push_back(std::move(x));
  }
  return assemble(coords, weights, weight_column >= 0);
}

void write_cloud_csv(std::ostream& out, const PointMeasure& mu) {
  for (Index j = 0; j < mu.dim(); ++j) out << 'x' << (j + 1) << ',';
  out << "weight\n";
  out << std::setprecision(17);
  for (Index i = 0; i < mu.size(); ++i) {
    for (Index j = 0; j < mu.dim(); ++j) out << mu.points()(j, i) << ',';
    out << mu.weight(i) << '\n';
  }
}

void write_cloud_json(std::ostream& out, const PointMeasure& mu) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (Index i = 0; i < mu.size(); ++i) {
    nlohmann::ordered_json record;
    for (Index j = 0; j < mu.dim(); ++j) record["x" + std::to_string(j + 1)] = mu.points()(j, i);
    record["weight"] = mu.weight(i);
    doc.push_back(std::move(record));
  }
  out << doc.dump(2) << '\n';
}

CloudFormat cloud_format_for(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos && path.substr(dot) == ".json") return CloudFormat::json;
  return CloudFormat::csv;
}

PointMeasure load_cloud(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return cloud_format_for(path) == CloudFormat::json ? read_cloud_json(in) : read_cloud_csv(in);
}

void save_cloud(const std::string& path, const PointMeasure& mu) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (cloud_format_for(path) == CloudFormat::json) {
    write_cloud_json(out, mu);
  } else {
    write_cloud_csv(out, mu);
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace detcurve

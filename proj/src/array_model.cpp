#include "exboot/array_model.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <istream>
#include <numeric>
#include <ostream>

#include "exboot/error.hpp"

namespace exboot {

MultiwayArray::MultiwayArray(std::vector<std::size_t> dims, std::size_t p,
                             std::vector<double> values)
    : dims_(std::move(dims)), p_(p), values_(std::move(values)) {
  require(!dims_.empty(), "multiway array needs at least one axis");
  require(p_ >= 1, "multiway array needs p >= 1");
  for (auto d : dims_) require(d >= 1, "cluster sizes must be positive");
  cells_ = std::accumulate(dims_.begin(), dims_.end(), std::size_t{1},
                           std::multiplies<>());
  require(values_.size() == cells_ * p_,
          "multiway array storage does not match dims * p");
}

std::size_t MultiwayArray::min_dim() const noexcept {
  return *std::min_element(dims_.begin(), dims_.end());
}

std::size_t MultiwayArray::max_dim() const noexcept {
  return *std::max_element(dims_.begin(), dims_.end());
}

std::size_t MultiwayArray::flat_index(std::span<const std::size_t> index) const {
  require(index.size() == dims_.size(), "index arity does not match array order");
  std::size_t flat = 0;
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    require(index[k] < dims_[k], "index out of range");
    flat = flat * dims_[k] + index[k];
  }
  return flat;
}

std::vector<std::size_t> MultiwayArray::multi_index(std::size_t flat) const {
  std::vector<std::size_t> index(dims_.size());
  for (std::size_t k = dims_.size(); k-- > 0;) {
    index[k] = flat % dims_[k];
    flat /= dims_[k];
  }
  return index;
}

DyadicArray::DyadicArray(std::size_t n, std::size_t p, std::vector<double> values,
                         bool symmetric)
    : n_(n), p_(p), symmetric_(symmetric), values_(std::move(values)) {
  require(p_ >= 1, "dyadic array needs p >= 1");
  require(values_.size() == n_ * n_ * p_, "dyadic storage does not match n*n*p");
  for (std::size_t i = 0; i < n_; ++i) {
    auto diag = values_.begin() + static_cast<std::ptrdiff_t>((i * n_ + i) * p_);
    std::fill(diag, diag + static_cast<std::ptrdiff_t>(p_), 0.0);
  }
  if (symmetric_) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j) {
        auto a = at(i, j);
        auto b = at(j, i);
        require(std::equal(a.begin(), a.end(), b.begin()),
                "symmetric flag set but X(i,j) != X(j,i)");
      }
  }
}

std::size_t EdgeList::add_id(const std::string& id) {
  auto [it, inserted] = index_.try_emplace(id, ids_.size());
  if (inserted) ids_.push_back(id);
  return it->second;
}

std::size_t EdgeList::index_of(const std::string& id) const {
  auto it = index_.find(id);
  require(it != index_.end(), "unknown unit id: " + id);
  return it->second;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    std::string token = line.substr(start, comma == std::string::npos
                                               ? std::string::npos
                                               : comma - start);
    const auto first = token.find_first_not_of(" \t\r");
    const auto last = token.find_last_not_of(" \t\r");
    out.push_back(first == std::string::npos ? std::string{}
                                             : token.substr(first, last - first + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_double(const std::string& token, double& value) {
  if (token.empty()) return false;
  char* end = nullptr;
  errno = 0;
  value = std::strtod(token.c_str(), &end);
  return end == token.c_str() + token.size() && errno != ERANGE;
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

bool parse_index(const std::string& token, std::size_t& index) {
  double v = 0.0;
  if (!parse_double(token, v) || v < 1.0 || v != static_cast<double>(static_cast<std::size_t>(v)))
    return false;
  index = static_cast<std::size_t>(v) - 1;
  return true;
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

MultiwayArray load_multiway_csv(std::istream& in, std::size_t order, std::size_t p) {
  require(order >= 1 && p >= 1, "K and p must be positive");
  const std::size_t width = order + p;
  struct Row {
    std::vector<std::size_t> index;
    std::vector<double> x;
  };
  std::vector<Row> rows;
  std::vector<std::size_t> dims(order, 0);
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    auto tokens = split_csv_line(line);
    double probe = 0.0;
    if (first && !parse_double(tokens.front(), probe)) {
      first = false;  // header row
      continue;
    }
    first = false;
    const std::string where = " at line " + std::to_string(line_no);
    if (tokens.size() != width)
      throw Error(ErrorCode::RaggedRow, "expected " + std::to_string(width) +
                                            " columns, got " +
                                            std::to_string(tokens.size()) + where);
    Row row{std::vector<std::size_t>(order), std::vector<double>(p)};
    for (std::size_t k = 0; k < order; ++k) {
      if (!parse_index(tokens[k], row.index[k]))
        throw Error(ErrorCode::NonNumeric, "bad index '" + tokens[k] + "'" + where);
      dims[k] = std::max(dims[k], row.index[k] + 1);
    }
    for (std::size_t j = 0; j < p; ++j)
      if (!parse_double(tokens[order + j], row.x[j]))
        throw Error(ErrorCode::NonNumeric,
                    "non-numeric value '" + tokens[order + j] + "'" + where);
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), "no data rows", ErrorCode::MissingCell);

  std::size_t cells = 1;
  for (auto d : dims) cells *= d;
  std::vector<double> values(cells * p, 0.0);
  std::vector<char> seen(cells, 0);
  // Flat layout identical to MultiwayArray::flat_index.
  for (const auto& row : rows) {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < order; ++k) flat = flat * dims[k] + row.index[k];
    if (seen[flat]) {
      std::string idx;
      for (auto i : row.index) idx += (idx.empty() ? "" : ",") + std::to_string(i + 1);
      throw Error(ErrorCode::DuplicateIndex, "duplicate multi-index (" + idx + ")");
    }
    seen[flat] = 1;
    std::copy(row.x.begin(), row.x.end(), values.begin() + static_cast<std::ptrdiff_t>(flat * p));
  }
  const auto missing = std::count(seen.begin(), seen.end(), 0);
  if (missing > 0)
    throw Error(ErrorCode::MissingCell,
                std::to_string(missing) + " cell(s) of the index grid are missing");
  return MultiwayArray(std::move(dims), p, std::move(values));
}

void write_multiway_csv(std::ostream& out, const MultiwayArray& array) {
  for (std::size_t flat = 0; flat < array.cells(); ++flat) {
    const auto index = array.multi_index(flat);
    std::string line;
    for (auto i : index) line += std::to_string(i + 1) + ",";
    const auto x = array.cell(flat);
    for (std::size_t j = 0; j < x.size(); ++j) {
      line += format_double(x[j]);
      if (j + 1 < x.size()) line += ',';
    }
    out << line << '\n';
  }
}

DyadicEdges load_dyadic_edges(std::istream& in, bool symmetrize) {
  EdgeList edges;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    auto tokens = split_csv_line(line);
    const std::string where = " at line " + std::to_string(line_no);
    if (tokens.size() != 3)
      throw Error(ErrorCode::RaggedRow, "edge rows need 3 columns" + where);
    double y = 0.0;
    if (!parse_double(tokens[2], y)) {
      if (first) {  // header row
        first = false;
        continue;
      }
      throw Error(ErrorCode::NonNumeric, "unparseable weight '" + tokens[2] + "'" + where);
    }
    first = false;
    if (tokens[0] == tokens[1])
      throw Error(ErrorCode::SelfLoop, "self-loop on unit '" + tokens[0] + "'" + where);
    const auto i = edges.add_id(tokens[0]);
    const auto j = edges.add_id(tokens[1]);
    edges.rows.push_back({i, j, y});
  }
  const std::size_t n = edges.units();
  std::vector<double> values(n * n, 0.0);
  for (const auto& e : edges.rows) values[e.i * n + e.j] += e.y;
  if (symmetrize) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double total = values[i * n + j] + values[j * n + i];
        values[i * n + j] = total;
        values[j * n + i] = total;
      }
  }
  return {DyadicArray(n, 1, std::move(values), symmetrize), std::move(edges)};
}

}  // namespace exboot

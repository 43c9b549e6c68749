#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace exboot {

/// Dense K-way array of p-vectors over the index grid [N_1] x ... x [N_K].
/// Cells are stored row-major (last axis fastest) and each cell holds p
/// contiguous doubles. Indices are 0-based.
class MultiwayArray {
 public:
  MultiwayArray(std::vector<std::size_t> dims, std::size_t p,
                std::vector<double> values);

  std::size_t order() const noexcept { return dims_.size(); }
  std::span<const std::size_t> dims() const noexcept { return dims_; }
  std::size_t dim(std::size_t axis) const { return dims_.at(axis); }
  std::size_t p() const noexcept { return p_; }
  std::size_t cells() const noexcept { return cells_; }
  /// n = min_k N_k, the rate-determining cluster count.
  std::size_t min_dim() const noexcept;
  std::size_t max_dim() const noexcept;

  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> cell(std::size_t flat) const {
    return {values_.data() + flat * p_, p_};
  }
  std::span<const double> at(std::span<const std::size_t> index) const {
    return cell(flat_index(index));
  }
  std::size_t flat_index(std::span<const std::size_t> index) const;
  /// Inverse of flat_index.
  std::vector<std::size_t> multi_index(std::size_t flat) const;

 private:
  std::vector<std::size_t> dims_;
  std::size_t p_;
  std::size_t cells_;
  std::vector<double> values_;
};

/// n x n array of p-vectors on ordered pairs (i, j), i != j. Diagonal slots
/// exist in storage but are always zero and never read by the engines.
class DyadicArray {
 public:
  /// `values` has n*n*p entries, pair (i, j) at offset (i*n + j)*p.
  /// Throws when `symmetric` is set but X_(i,j) != X_(j,i) for some pair.
  DyadicArray(std::size_t n, std::size_t p, std::vector<double> values,
              bool symmetric);

  std::size_t n() const noexcept { return n_; }
  std::size_t p() const noexcept { return p_; }
  bool symmetric() const noexcept { return symmetric_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> at(std::size_t i, std::size_t j) const {
    return {values_.data() + (i * n_ + j) * p_, p_};
  }

 private:
  std::size_t n_;
  std::size_t p_;
  bool symmetric_;
  std::vector<double> values_;
};

struct Edge {
  std::size_t i;
  std::size_t j;
  double y;
};

/// Edge rows after relabeling string ids onto 0..n-1 (1..n in files) in
/// order of first appearance.
class EdgeList {
 public:
  std::size_t add_id(const std::string& id);
  std::size_t index_of(const std::string& id) const;
  const std::string& id(std::size_t index) const { return ids_.at(index); }
  std::size_t units() const noexcept { return ids_.size(); }

  std::vector<Edge> rows;

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct DyadicEdges {
  DyadicArray array;
  EdgeList edges;
};

/// Rows are i_1,...,i_K,x^1,...,x^p with 1-based indices. Dims are the
/// per-axis maximum index; every cell must appear exactly once.
MultiwayArray load_multiway_csv(std::istream& in, std::size_t order, std::size_t p);

/// Writes the format read by load_multiway_csv, 17 significant digits.
void write_multiway_csv(std::ostream& out, const MultiwayArray& array);

/// Rows are id_i,id_j,y. Repeated directed rows accumulate. With
/// `symmetrize`, both ordered slots of a pair hold y_ij + y_ji. Pairs never
/// mentioned are zero.
DyadicEdges load_dyadic_edges(std::istream& in, bool symmetrize);

/// Splits a CSV line on commas and trims surrounding whitespace.
std::vector<std::string> split_csv_line(const std::string& line);

/// Strict full-token parse. Returns false on any trailing garbage.
bool parse_double(const std::string& token, double& value);

/// "%.17g": round-trip exact for doubles.
std::string format_double(double value);

}  // namespace exboot

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sresn::esn {

struct Triplet {
  std::uint32_t row;
  std::uint32_t col;
  double value;
};

// Compressed sparse row matrix. Entries are kept sorted by (row, col).
class SparseMatrix {
 public:
  SparseMatrix() = default;
  // Throws ConfigError on out-of-range or duplicate entries.
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> entries);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
  std::span<const std::uint32_t> col_index() const noexcept { return col_index_; }
  std::span<const double> values() const noexcept { return values_; }

  // y = A x
  void multiply(std::span<const double> x, std::span<double> y) const noexcept;
  // 0 for entries not stored.
  double coeff(std::size_t row, std::size_t col) const noexcept;
  void scale(double factor) noexcept;

  std::vector<Triplet> triplets() const;
  Eigen::MatrixXd to_dense() const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::uint32_t> col_index_;
  std::vector<double> values_;
};

// Largest |eigenvalue| of a square sparse matrix. The matrix is split into
// strongly connected components; each nontrivial component block is solved
// densely (real Schur). Throws NumericalError if the eigensolver fails.
double spectral_radius(const SparseMatrix& a);

}  // namespace sresn::esn

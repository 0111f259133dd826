#include "sresn/sparse.hpp"

#include <algorithm>
#include <string>

#include "sresn/error.hpp"

namespace sresn::esn {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> entries)
    : rows_(rows), cols_(cols) {
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  row_ptr_.assign(rows + 1, 0);
  col_index_.reserve(entries.size());
  values_.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Triplet& e = entries[k];
    if (e.row >= rows || e.col >= cols) {
      throw ConfigError("SparseMatrix: entry (" + std::to_string(e.row) + ", " +
                        std::to_string(e.col) + ") out of range");
    }
    if (k > 0 && entries[k - 1].row == e.row && entries[k - 1].col == e.col) {
      throw ConfigError("SparseMatrix: duplicate entry (" + std::to_string(e.row) + ", " +
                        std::to_string(e.col) + ")");
    }
    ++row_ptr_[e.row + 1];
    col_index_.push_back(e.col);
    values_.push_back(e.value);
  }
  for (std::size_t r = 0; r < rows; ++r) row_ptr_[r + 1] += row_ptr_[r];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const noexcept {
  for (std::size_t r = 0; r < rows_; ++r) {
    double acc = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += values_[k] * x[col_index_[k]];
    y[r] = acc;
  }
}

double SparseMatrix::coeff(std::size_t row, std::size_t col) const noexcept {
  const auto first = col_index_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row]);
  const auto last = col_index_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row + 1]);
  const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(col));
  if (it == last || *it != col) return 0.0;
  return values_[static_cast<std::size_t>(it - col_index_.begin())];
}

void SparseMatrix::scale(double factor) noexcept {
  for (double& v : values_) v *= factor;
}

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      out.push_back({static_cast<std::uint32_t>(r), col_index_[k], values_[k]});
    }
  }
  return out;
}

Eigen::MatrixXd SparseMatrix::to_dense() const {
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows_),
                                                static_cast<Eigen::Index>(cols_));
  for (const Triplet& t : triplets()) dense(t.row, t.col) = t.value;
  return dense;
}

}  // namespace sresn::esn

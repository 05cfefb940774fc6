#include "sparse.hpp"

#include <algorithm>

namespace elsim::detail {

CsrMatrix::CsrMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> entries)
    : rows_(rows), cols_(cols), row_start_(rows + 1, 0) {
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  // merge duplicates
  std::vector<Triplet> merged;
  merged.reserve(entries.size());
  for (const auto& t : entries) {
    if (!merged.empty() && merged.back().row == t.row && merged.back().col == t.col)
      merged.back().value += t.value;
    else
      merged.push_back(t);
  }
  col_.reserve(merged.size());
  val_.reserve(merged.size());
  for (const auto& t : merged) {
    ++row_start_[t.row + 1];
    col_.push_back(t.col);
    val_.push_back(t.value);
  }
  for (std::size_t r = 0; r < rows_; ++r) row_start_[r + 1] += row_start_[r];
}

void CsrMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const {
  y.assign(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) s += val_[k] * x[col_[k]];
    y[r] = s;
  }
}

void CsrMatrix::multiply_transpose(const std::vector<double>& x, std::vector<double>& y) const {
  y.assign(cols_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) y[col_[k]] += val_[k] * x[r];
}

}  // namespace elsim::detail

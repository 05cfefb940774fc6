#pragma once

// Minimal CSR matrix for the wall-bounded finite-difference solves.

#include <cstddef>
#include <vector>

namespace elsim::detail {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

class CsrMatrix {
 public:
  CsrMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> entries);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  /// y = A x
  void multiply(const std::vector<double>& x, std::vector<double>& y) const;
  /// y = A^T x
  void multiply_transpose(const std::vector<double>& x, std::vector<double>& y) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::size_t> row_start_;
  std::vector<std::size_t> col_;
  std::vector<double> val_;
};

}  // namespace elsim::detail

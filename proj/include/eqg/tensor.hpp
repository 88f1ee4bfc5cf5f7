#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace eqg {

/// Dense row-major matrix of doubles. The only tensor shape the models here need.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0) {}
  Tensor(int r, int c, std::vector<double> data) : rows(r), cols(c), v(std::move(data)) {
    if (v.size() != static_cast<size_t>(r) * c)
      throw std::invalid_argument("Tensor: data length does not match shape");
  }

  double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
  size_t size() const { return v.size(); }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
  std::string shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
  }
};

/// CSR sparse matrix. Used only for the normalized adjacency, which is
/// constant throughout training.
struct SparseCsr {
  int rows = 0;
  int cols = 0;
  std::vector<int> ptr;   // rows+1
  std::vector<int> idx;   // column indices, sorted within a row
  std::vector<double> val;

  SparseCsr() = default;
  SparseCsr(int r, int c) : rows(r), cols(c), ptr(r + 1, 0) {}

  double entry(int r, int c) const {
    for (int k = ptr[r]; k < ptr[r + 1]; ++k)
      if (idx[k] == c) return val[k];
    return 0.0;
  }
};

void check_same_shape(const Tensor& a, const Tensor& b, const char* op);

// y = a * b
Tensor matmul(const Tensor& a, const Tensor& b);
// y = a^T * b
Tensor matmul_tn(const Tensor& a, const Tensor& b);
// y = a * b^T
Tensor matmul_nt(const Tensor& a, const Tensor& b);
// y = s * x  (s sparse)
Tensor spmm(const SparseCsr& s, const Tensor& x);
// y = s^T * x; valid because our adjacency is symmetric, but implemented generally
Tensor spmm_t(const SparseCsr& s, const Tensor& x);

bool all_finite(const Tensor& t);

}  // namespace eqg

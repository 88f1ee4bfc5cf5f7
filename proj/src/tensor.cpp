#include "eqg/tensor.hpp"

#include <cmath>

namespace eqg {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_str() +
                                " vs " + b.shape_str());
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols != b.rows)
    throw std::invalid_argument("matmul: shape mismatch " + a.shape_str() + " vs " +
                                b.shape_str());
  Tensor y(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    const double* ai = &a.v[static_cast<size_t>(i) * a.cols];
    double* yi = &y.v[static_cast<size_t>(i) * b.cols];
    for (int k = 0; k < a.cols; ++k) {
      const double aik = ai[k];
      if (aik == 0.0) continue;
      const double* bk = &b.v[static_cast<size_t>(k) * b.cols];
      for (int j = 0; j < b.cols; ++j) yi[j] += aik * bk[j];
    }
  }
  return y;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  if (a.rows != b.rows)
    throw std::invalid_argument("matmul_tn: shape mismatch " + a.shape_str() + " vs " +
                                b.shape_str());
  Tensor y(a.cols, b.cols);
  for (int k = 0; k < a.rows; ++k) {
    const double* ak = &a.v[static_cast<size_t>(k) * a.cols];
    const double* bk = &b.v[static_cast<size_t>(k) * b.cols];
    for (int i = 0; i < a.cols; ++i) {
      const double aki = ak[i];
      if (aki == 0.0) continue;
      double* yi = &y.v[static_cast<size_t>(i) * b.cols];
      for (int j = 0; j < b.cols; ++j) yi[j] += aki * bk[j];
    }
  }
  return y;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.cols != b.cols)
    throw std::invalid_argument("matmul_nt: shape mismatch " + a.shape_str() + " vs " +
                                b.shape_str());
  Tensor y(a.rows, b.rows);
  for (int i = 0; i < a.rows; ++i) {
    const double* ai = &a.v[static_cast<size_t>(i) * a.cols];
    for (int j = 0; j < b.rows; ++j) {
      const double* bj = &b.v[static_cast<size_t>(j) * b.cols];
      double s = 0.0;
      for (int k = 0; k < a.cols; ++k) s += ai[k] * bj[k];
      y.at(i, j) = s;
    }
  }
  return y;
}

Tensor spmm(const SparseCsr& s, const Tensor& x) {
  if (s.cols != x.rows)
    throw std::invalid_argument("spmm: shape mismatch sparse " + std::to_string(s.rows) +
                                "x" + std::to_string(s.cols) + " vs " + x.shape_str());
  Tensor y(s.rows, x.cols);
  for (int i = 0; i < s.rows; ++i) {
    double* yi = &y.v[static_cast<size_t>(i) * x.cols];
    for (int k = s.ptr[i]; k < s.ptr[i + 1]; ++k) {
      const double w = s.val[k];
      const double* xr = &x.v[static_cast<size_t>(s.idx[k]) * x.cols];
      for (int j = 0; j < x.cols; ++j) yi[j] += w * xr[j];
    }
  }
  return y;
}

Tensor spmm_t(const SparseCsr& s, const Tensor& x) {
  if (s.rows != x.rows)
    throw std::invalid_argument("spmm_t: shape mismatch");
  Tensor y(s.cols, x.cols);
  for (int i = 0; i < s.rows; ++i) {
    const double* xi = &x.v[static_cast<size_t>(i) * x.cols];
    for (int k = s.ptr[i]; k < s.ptr[i + 1]; ++k) {
      const double w = s.val[k];
      double* yr = &y.v[static_cast<size_t>(s.idx[k]) * x.cols];
      for (int j = 0; j < x.cols; ++j) yr[j] += w * xi[j];
    }
  }
  return y;
}

bool all_finite(const Tensor& t) {
  for (double x : t.v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace eqg

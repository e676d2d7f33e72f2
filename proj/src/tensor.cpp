#include "segtron/tensor.hpp"

#include <cmath>

#include "segtron/errors.hpp"

namespace segtron {

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

namespace {

[[noreturn]] void shape_error(const char* op) {
  throw UsageError(std::string("tensor shape mismatch in ") + op);
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) shape_error("matmul");
  Tensor out(a.rows(), b.cols());
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b.row(p);
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) shape_error("matmul_nt");
  Tensor out(a.rows(), b.rows());
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = b.row(j);
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      orow[j] = acc;
    }
  }
  return out;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) shape_error("matmul_tn");
  Tensor out(a.cols(), b.cols());
  const std::size_t m = a.cols(), k = a.rows(), n = b.cols();
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a.row(p);
    const double* brow = b.row(p);
    for (std::size_t i = 0; i < m; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* orow = out.row(i);
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

void add_inplace(Tensor& dst, const Tensor& src) {
  if (!dst.same_shape(src)) shape_error("add_inplace");
  double* d = dst.data();
  const double* s = src.data();
  for (std::size_t i = 0; i < dst.size(); ++i) d[i] += s[i];
}

void axpy_inplace(Tensor& dst, double alpha, const Tensor& src) {
  if (!dst.same_shape(src)) shape_error("axpy_inplace");
  double* d = dst.data();
  const double* s = src.data();
  for (std::size_t i = 0; i < dst.size(); ++i) d[i] += alpha * s[i];
}

void scale_inplace(Tensor& t, double alpha) {
  double* d = t.data();
  for (std::size_t i = 0; i < t.size(); ++i) d[i] *= alpha;
}

Tensor add_row_broadcast(const Tensor& m, const Tensor& row) {
  if (row.rows() != 1 || row.cols() != m.cols()) shape_error("add_row_broadcast");
  Tensor out = m;
  const double* r = row.data();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double* orow = out.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) orow[j] += r[j];
  }
  return out;
}

Tensor column_sums(const Tensor& m) {
  Tensor out(1, m.cols());
  double* o = out.data();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* r = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) o[j] += r[j];
  }
  return out;
}

}  // namespace segtron

#pragma once

#include <cstddef>
#include <vector>

namespace segtron {

// Dense row-major matrix of 64-bit reals. Vectors are 1xN.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double* row(std::size_t r) { return data_.data() + r * cols_; }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  static Tensor zeros_like(const Tensor& t) { return Tensor(t.rows_, t.cols_); }

  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

// out = a . b              (m x k) (k x n)
Tensor matmul(const Tensor& a, const Tensor& b);
// out = a . b^T            (m x k) (n x k)
Tensor matmul_nt(const Tensor& a, const Tensor& b);
// out = a^T . b            (k x m) (k x n)
Tensor matmul_tn(const Tensor& a, const Tensor& b);

void add_inplace(Tensor& dst, const Tensor& src);          // dst += src
void axpy_inplace(Tensor& dst, double alpha, const Tensor& src);  // dst += alpha*src
void scale_inplace(Tensor& t, double alpha);
Tensor add_row_broadcast(const Tensor& m, const Tensor& row);  // each row of m + row
Tensor column_sums(const Tensor& m);                           // 1 x cols

}  // namespace segtron

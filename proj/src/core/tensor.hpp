#pragma once

#include <cstdint>
#include <vector>

namespace hdmann {

// Dense row-major tensor of doubles. Shapes used here are [B,C,H,W] for
// feature maps, [R,C] for matrices, [N] for vectors and [1] for scalars.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s);

  static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
  static Tensor scalar(double x);
  static Tensor row_matrix(const std::vector<std::vector<double>>& rows);

  int64_t size() const { return static_cast<int64_t>(data.size()); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }
  int rank() const { return static_cast<int>(shape.size()); }
  double* ptr() { return data.data(); }
  const double* ptr() const { return data.data(); }
  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

int64_t shape_size(const std::vector<int>& shape);

// Serial/#threads control for the compute kernels (0 = library default).
void set_compute_threads(int n);
int compute_threads();

// C = alpha * op(A) * op(B) + beta * C, row-major. Thin wrapper over BLAS.
void gemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha, const double* a, int lda,
          const double* b, int ldb, double beta, double* c, int ldc);

// --- CNN kernels (valid convolutions, no padding) -------------------------

// x:[B,C,H,W] w:[OC,C,KH,KW] b:[OC] -> y:[B,OC,OH,OW]
void conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, Tensor& y);
void conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& gy, Tensor& gx, Tensor& gw,
                     Tensor& gb);

void relu_forward(const Tensor& x, Tensor& y);
void relu_backward(const Tensor& x, const Tensor& gy, Tensor& gx);

// 2x2 stride-2 max pool; odd trailing row/column is dropped.
void maxpool2_forward(const Tensor& x, Tensor& y, std::vector<int>& argmax);
void maxpool2_backward(const std::vector<int>& argmax, const Tensor& gy, Tensor& gx);

// x:[B,F] w:[F,U] b:[U] -> y:[B,U]
void dense_forward(const Tensor& x, const Tensor& w, const Tensor& b, Tensor& y);
void dense_backward(const Tensor& x, const Tensor& w, const Tensor& gy, Tensor& gx, Tensor& gw,
                    Tensor& gb);

}  // namespace hdmann

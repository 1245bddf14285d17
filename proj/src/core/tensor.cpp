#include "core/tensor.hpp"

#include <cblas.h>
#include <omp.h>

#include <algorithm>
#include <stdexcept>

#include "core/common.hpp"

extern "C" void openblas_set_num_threads(int);

namespace hdmann {

int64_t shape_size(const std::vector<int>& shape) {
  int64_t n = 1;
  for (int s : shape) n *= s;
  return n;
}

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)) {
  data.assign(static_cast<size_t>(shape_size(shape)), 0.0);
}

Tensor Tensor::scalar(double x) {
  Tensor t({1});
  t.data[0] = x;
  return t;
}

Tensor Tensor::row_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ValidationError("row_matrix: empty");
  Tensor t({static_cast<int>(rows.size()), static_cast<int>(rows[0].size())});
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw ValidationError("row_matrix: ragged rows");
    std::copy(rows[i].begin(), rows[i].end(), t.data.begin() + static_cast<int64_t>(i) * t.dim(1));
  }
  return t;
}

namespace {
// BLAS is pinned to one thread; parallelism lives in the batch loops so the
// result does not depend on the BLAS build's threading.
struct BlasInit {
  BlasInit() { openblas_set_num_threads(1); }
};
const BlasInit blas_init;

int g_threads = 0;
}  // namespace

void set_compute_threads(int n) {
  g_threads = n;
  if (n > 0) omp_set_num_threads(n);
}

int compute_threads() { return g_threads; }

void gemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha, const double* a, int lda,
          const double* b, int ldb, double beta, double* c, int ldc) {
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

namespace {

// col buffer layout: [C*KH*KW, OH*OW]
void im2col(const double* x, int c, int h, int w, int kh, int kw, double* col) {
  int oh = h - kh + 1, ow = w - kw + 1;
  for (int ch = 0; ch < c; ++ch) {
    for (int ky = 0; ky < kh; ++ky) {
      for (int kx = 0; kx < kw; ++kx) {
        double* dst = col + (static_cast<int64_t>(ch) * kh * kw + ky * kw + kx) *
                                (static_cast<int64_t>(oh) * ow);
        const double* src = x + static_cast<int64_t>(ch) * h * w;
        for (int oy = 0; oy < oh; ++oy) {
          const double* row = src + static_cast<int64_t>(oy + ky) * w + kx;
          for (int ox = 0; ox < ow; ++ox) dst[oy * ow + ox] = row[ox];
        }
      }
    }
  }
}

void col2im_accumulate(const double* col, int c, int h, int w, int kh, int kw, double* x) {
  int oh = h - kh + 1, ow = w - kw + 1;
  for (int ch = 0; ch < c; ++ch) {
    for (int ky = 0; ky < kh; ++ky) {
      for (int kx = 0; kx < kw; ++kx) {
        const double* src = col + (static_cast<int64_t>(ch) * kh * kw + ky * kw + kx) *
                                      (static_cast<int64_t>(oh) * ow);
        double* dst = x + static_cast<int64_t>(ch) * h * w;
        for (int oy = 0; oy < oh; ++oy) {
          double* row = dst + static_cast<int64_t>(oy + ky) * w + kx;
          for (int ox = 0; ox < ow; ++ox) row[ox] += src[oy * ow + ox];
        }
      }
    }
  }
}

}  // namespace

void conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, Tensor& y) {
  int batch = x.dim(0), c = x.dim(1), h = x.dim(2), wd = x.dim(3);
  int oc = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  if (w.dim(1) != c) throw ValidationError("conv2d: channel mismatch");
  if (kh > h || kw > wd) throw ValidationError("conv2d: kernel larger than input");
  int oh = h - kh + 1, ow = wd - kw + 1;
  y = Tensor({batch, oc, oh, ow});
  int64_t ck2 = static_cast<int64_t>(c) * kh * kw;
  int64_t n = static_cast<int64_t>(oh) * ow;
#pragma omp parallel
  {
    std::vector<double> col(static_cast<size_t>(ck2 * n));
#pragma omp for schedule(static)
    for (int bi = 0; bi < batch; ++bi) {
      im2col(x.ptr() + static_cast<int64_t>(bi) * c * h * wd, c, h, wd, kh, kw, col.data());
      double* out = y.ptr() + static_cast<int64_t>(bi) * oc * n;
      gemm(false, false, oc, static_cast<int>(n), static_cast<int>(ck2), 1.0, w.ptr(),
           static_cast<int>(ck2), col.data(), static_cast<int>(n), 0.0, out, static_cast<int>(n));
      for (int f = 0; f < oc; ++f) {
        double bias = b.data[static_cast<size_t>(f)];
        double* row = out + static_cast<int64_t>(f) * n;
        for (int64_t i = 0; i < n; ++i) row[i] += bias;
      }
    }
  }
}

void conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& gy, Tensor& gx, Tensor& gw,
                     Tensor& gb) {
  int batch = x.dim(0), c = x.dim(1), h = x.dim(2), wd = x.dim(3);
  int oc = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  int oh = h - kh + 1, ow = wd - kw + 1;
  int64_t ck2 = static_cast<int64_t>(c) * kh * kw;
  int64_t n = static_cast<int64_t>(oh) * ow;
  gx = Tensor({batch, c, h, wd});
  gw = Tensor(w.shape);
  gb = Tensor({oc});

  // dW accumulates serially across the batch so results do not depend on the
  // thread count.
  std::vector<double> col(static_cast<size_t>(ck2 * n));
  for (int bi = 0; bi < batch; ++bi) {
    im2col(x.ptr() + static_cast<int64_t>(bi) * c * h * wd, c, h, wd, kh, kw, col.data());
    const double* g = gy.ptr() + static_cast<int64_t>(bi) * oc * n;
    gemm(false, true, oc, static_cast<int>(ck2), static_cast<int>(n), 1.0, g, static_cast<int>(n),
         col.data(), static_cast<int>(n), 1.0, gw.ptr(), static_cast<int>(ck2));
    for (int f = 0; f < oc; ++f) {
      const double* row = g + static_cast<int64_t>(f) * n;
      double s = 0.0;
      for (int64_t i = 0; i < n; ++i) s += row[i];
      gb.data[static_cast<size_t>(f)] += s;
    }
  }

#pragma omp parallel
  {
    std::vector<double> dcol(static_cast<size_t>(ck2 * n));
#pragma omp for schedule(static)
    for (int bi = 0; bi < batch; ++bi) {
      const double* g = gy.ptr() + static_cast<int64_t>(bi) * oc * n;
      gemm(true, false, static_cast<int>(ck2), static_cast<int>(n), oc, 1.0, w.ptr(),
           static_cast<int>(ck2), g, static_cast<int>(n), 0.0, dcol.data(), static_cast<int>(n));
      col2im_accumulate(dcol.data(), c, h, wd, kh, kw,
                        gx.ptr() + static_cast<int64_t>(bi) * c * h * wd);
    }
  }
}

void relu_forward(const Tensor& x, Tensor& y) {
  y = Tensor(x.shape);
  for (size_t i = 0; i < x.data.size(); ++i) y.data[i] = x.data[i] > 0.0 ? x.data[i] : 0.0;
}

void relu_backward(const Tensor& x, const Tensor& gy, Tensor& gx) {
  gx = Tensor(x.shape);
  for (size_t i = 0; i < x.data.size(); ++i) gx.data[i] = x.data[i] > 0.0 ? gy.data[i] : 0.0;
}

void maxpool2_forward(const Tensor& x, Tensor& y, std::vector<int>& argmax) {
  int batch = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  int oh = h / 2, ow = w / 2;
  y = Tensor({batch, c, oh, ow});
  argmax.assign(y.data.size(), 0);
  for (int bi = 0; bi < batch; ++bi) {
    for (int ch = 0; ch < c; ++ch) {
      const double* src = x.ptr() + (static_cast<int64_t>(bi) * c + ch) * h * w;
      double* dst = y.ptr() + (static_cast<int64_t>(bi) * c + ch) * oh * ow;
      int* am = argmax.data() + (static_cast<int64_t>(bi) * c + ch) * oh * ow;
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          int base = (2 * oy) * w + 2 * ox;
          int cand[4] = {base, base + 1, base + w, base + w + 1};
          int best = cand[0];
          for (int k = 1; k < 4; ++k)
            if (src[cand[k]] > src[best]) best = cand[k];
          dst[oy * ow + ox] = src[best];
          am[oy * ow + ox] = static_cast<int>((static_cast<int64_t>(bi) * c + ch) * h * w + best);
        }
      }
    }
  }
}

void maxpool2_backward(const std::vector<int>& argmax, const Tensor& gy, Tensor& gx) {
  for (size_t i = 0; i < gy.data.size(); ++i)
    gx.data[static_cast<size_t>(argmax[i])] += gy.data[i];
}

void dense_forward(const Tensor& x, const Tensor& w, const Tensor& b, Tensor& y) {
  int batch = x.dim(0), f = x.dim(1), u = w.dim(1);
  if (w.dim(0) != f) throw ValidationError("dense: feature mismatch");
  y = Tensor({batch, u});
  gemm(false, false, batch, u, f, 1.0, x.ptr(), f, w.ptr(), u, 0.0, y.ptr(), u);
  for (int bi = 0; bi < batch; ++bi) {
    double* row = y.ptr() + static_cast<int64_t>(bi) * u;
    for (int j = 0; j < u; ++j) row[j] += b.data[static_cast<size_t>(j)];
  }
}

void dense_backward(const Tensor& x, const Tensor& w, const Tensor& gy, Tensor& gx, Tensor& gw,
                    Tensor& gb) {
  int batch = x.dim(0), f = x.dim(1), u = w.dim(1);
  gx = Tensor({batch, f});
  gw = Tensor({f, u});
  gb = Tensor({u});
  gemm(true, false, f, u, batch, 1.0, x.ptr(), f, gy.ptr(), u, 0.0, gw.ptr(), u);
  gemm(false, true, batch, f, u, 1.0, gy.ptr(), u, w.ptr(), u, 0.0, gx.ptr(), f);
  for (int bi = 0; bi < batch; ++bi) {
    const double* row = gy.ptr() + static_cast<int64_t>(bi) * u;
    for (int j = 0; j < u; ++j) gb.data[static_cast<size_t>(j)] += row[j];
  }
}

}  // namespace hdmann

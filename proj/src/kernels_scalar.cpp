#include "slfrac/kernels.hpp"

namespace slfrac::kernels {

namespace {

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void xpay(const double* x, double a, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + a * y[i];
}

void spmv(std::size_t rows, const int* row_ptr, const int* col, const double* val, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += val[k] * x[col[k]];
    y[r] = s;
  }
}

void scale(const double* d, const double* r, double* z, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) z[i] = d[i] * r[i];
}

}  // namespace

const Table& scalar_table() {
  static const Table t{Isa::scalar, dot, axpy, xpay, spmv, scale};
  return t;
}

}  // namespace slfrac::kernels

#pragma once

#include <cstddef>

namespace slfrac::kernels {

enum class Isa { scalar, avx2 };

const char* name(Isa isa);

/// Dense vector and CSR kernels used by the conjugate-gradient solver.
struct Table {
  Isa isa;
  double (*dot)(const double* x, const double* y, std::size_t n);
  /// y += a x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  /// y = x + a y
  void (*xpay)(const double* x, double a, double* y, std::size_t n);
  /// y = A x for a CSR matrix with `rows` rows
  void (*spmv)(std::size_t rows, const int* row_ptr, const int* col, const double* val, const double* x, double* y);
  /// z = d .* r
  void (*scale)(const double* d, const double* r, double* z, std::size_t n);
};

bool supported(Isa isa);

/// Table for a given instruction set; throws InvalidInput when the CPU lacks it.
const Table& select(Isa isa);

/// Best table for the running CPU, chosen once.
const Table& active();

const Table& scalar_table();
const Table& avx2_table();

}  // namespace slfrac::kernels

#pragma once

#include <cstddef>
#include <vector>

#include "slfrac/kernels.hpp"
#include "slfrac/mesh.hpp"

namespace slfrac {

/// Square matrix in compressed sparse row form with sorted column indices.
struct CsrMatrix {
  std::size_t n = 0;
  std::vector<int> row_ptr;
  std::vector<int> col;
  std::vector<double> val;

  /// Index of entry (i, j) in `val`, or -1 when outside the pattern.
  int find(int i, int j) const;
  double at(int i, int j) const;
  /// Adds to an entry of the pattern; throws InvalidInput outside it.
  void add(int i, int j, double a);
  void multiply(const std::vector<double>& x, std::vector<double>& y) const;
  std::vector<double> diagonal() const;
  bool is_symmetric(double tol) const;
};

/// Vertex-adjacency pattern of a P1 mesh (diagonal included), zero values.
CsrMatrix pattern_from_mesh(const Mesh& mesh);

/// Pattern and values from a dense row-major matrix; entries equal to zero are
/// dropped except on the diagonal.
CsrMatrix csr_from_dense(const std::vector<double>& dense, std::size_t n);

struct CgStats {
  int iterations = 0;
  double rel_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients.  Stops when
/// ||b - A x|| <= tol ||b||.  `max_iter` <= 0 means 10 n.  Throws
/// SingularSystem on a nonpositive curvature or diagonal and ConvergenceError
/// (with the residual history) when the iteration cap is reached.
std::vector<double> pcg(const CsrMatrix& a, const std::vector<double>& b, double tol, int max_iter = 0,
                        const std::vector<double>* x0 = nullptr, CgStats* stats = nullptr,
                        const kernels::Table& k = kernels::active());

}  // namespace slfrac

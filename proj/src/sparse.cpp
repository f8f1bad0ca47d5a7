#include "slfrac/sparse.hpp"

#include <algorithm>
#include <cmath>

#include "slfrac/error.hpp"

namespace slfrac {

int CsrMatrix::find(int i, int j) const {
  const auto first = col.begin() + row_ptr[static_cast<std::size_t>(i)];
  const auto last = col.begin() + row_ptr[static_cast<std::size_t>(i) + 1];
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return -1;
  return static_cast<int>(it - col.begin());
}

double CsrMatrix::at(int i, int j) const {
  const int k = find(i, j);
  return k < 0 ? 0.0 : val[static_cast<std::size_t>(k)];
}

void CsrMatrix::add(int i, int j, double a) {
  const int k = find(i, j);
  if (k < 0) throw InvalidInput("CsrMatrix::add: entry outside the sparsity pattern");
  val[static_cast<std::size_t>(k)] += a;
}

void CsrMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const {
  y.resize(n);
  kernels::active().spmv(n, row_ptr.data(), col.data(), val.data(), x.data(), y.data());
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) d[i] = at(static_cast<int>(i), static_cast<int>(i));
  return d;
}

bool CsrMatrix::is_symmetric(double tol) const {
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      const double a = val[static_cast<std::size_t>(k)];
      const double b = at(col[static_cast<std::size_t>(k)], static_cast<int>(i));
      if (std::abs(a - b) > tol * std::max({1.0, std::abs(a), std::abs(b)})) return false;
    }
  }
  return true;
}

CsrMatrix pattern_from_mesh(const Mesh& mesh) {
  const std::size_t n = mesh.num_vertices();
  std::vector<std::vector<int>> adj(n);
  for (std::size_t i = 0; i < n; ++i) adj[i].push_back(static_cast<int>(i));
  for (const Edge& e : mesh.edges()) {
    adj[static_cast<std::size_t>(e.v[0])].push_back(e.v[1]);
    adj[static_cast<std::size_t>(e.v[1])].push_back(e.v[0]);
  }
  CsrMatrix a;
  a.n = n;
  a.row_ptr.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(adj[i].begin(), adj[i].end());
    a.row_ptr[i + 1] = a.row_ptr[i] + static_cast<int>(adj[i].size());
  }
  a.col.reserve(static_cast<std::size_t>(a.row_ptr[n]));
  for (const auto& row : adj) a.col.insert(a.col.end(), row.begin(), row.end());
  a.val.assign(a.col.size(), 0.0);
  return a;
}

CsrMatrix csr_from_dense(const std::vector<double>& dense, std::size_t n) {
  if (dense.size() != n * n) throw InvalidInput("csr_from_dense: size mismatch");
  CsrMatrix a;
  a.n = n;
  a.row_ptr.push_back(0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double x = dense[i * n + j];
      if (x != 0.0 || i == j) {
        a.col.push_back(static_cast<int>(j));
        a.val.push_back(x);
      }
    }
    a.row_ptr.push_back(static_cast<int>(a.col.size()));
  }
  return a;
}

std::vector<double> pcg(const CsrMatrix& a, const std::vector<double>& b, double tol, int max_iter,
                        const std::vector<double>* x0, CgStats* stats, const kernels::Table& k) {
  const std::size_t n = a.n;
  if (b.size() != n) throw InvalidInput("pcg: right-hand side size mismatch");
  if (max_iter <= 0) max_iter = static_cast<int>(std::max<std::size_t>(10 * n, 10));

  std::vector<double> inv_diag = a.diagonal();
  for (double& d : inv_diag) {
    if (!(d > 0.0)) throw SingularSystem("pcg: nonpositive diagonal entry");
    d = 1.0 / d;
  }

  std::vector<double> x = x0 ? *x0 : std::vector<double>(n, 0.0);
  if (x.size() != n) throw InvalidInput("pcg: initial guess size mismatch");
  const double bnorm = std::sqrt(k.dot(b.data(), b.data(), n));
  if (bnorm == 0.0) {
    if (stats) *stats = {0, 0.0};
    return std::vector<double>(n, 0.0);
  }

  std::vector<double> r(n), z(n), p(n), q(n);
  k.spmv(n, a.row_ptr.data(), a.col.data(), a.val.data(), x.data(), q.data());
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
  double rnorm = std::sqrt(k.dot(r.data(), r.data(), n));
  std::vector<double> history{rnorm / bnorm};
  if (rnorm <= tol * bnorm) {
    if (stats) *stats = {0, rnorm / bnorm};
    return x;
  }
  k.scale(inv_diag.data(), r.data(), z.data(), n);
  p = z;
  double rz = k.dot(r.data(), z.data(), n);
  for (int it = 1; it <= max_iter; ++it) {
    k.spmv(n, a.row_ptr.data(), a.col.data(), a.val.data(), p.data(), q.data());
    const double pq = k.dot(p.data(), q.data(), n);
    if (!(pq > 0.0)) throw SingularSystem("pcg: matrix is not positive definite");
    const double step = rz / pq;
    k.axpy(step, p.data(), x.data(), n);
    k.axpy(-step, q.data(), r.data(), n);
    rnorm = std::sqrt(k.dot(r.data(), r.data(), n));
    history.push_back(rnorm / bnorm);
    if (rnorm <= tol * bnorm) {
      if (stats) *stats = {it, rnorm / bnorm};
      return x;
    }
    k.scale(inv_diag.data(), r.data(), z.data(), n);
    const double rz_new = k.dot(r.data(), z.data(), n);
    k.xpay(z.data(), rz_new / rz, p.data(), n);
    rz = rz_new;
  }
  throw ConvergenceError("pcg: iteration cap reached", std::move(history));
}

}  // namespace slfrac

#pragma once

// Dense real linear algebra primitives: Kronecker operations, eigenvalues,
// matrix exponential, and factorizations. Everything is desk-scale (n <= 9),
// so all routines are dense and allocation-friendly.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace peakgain {

class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), entries_(rows * cols, 0.0) {
    if (rows == 0 || cols == 0) {
      throw std::invalid_argument("Matrix: dimensions must be positive");
    }
  }

  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    if (rows_ == 0) throw std::invalid_argument("Matrix: empty row list");
    cols_ = rows.begin()->size();
    if (cols_ == 0) throw std::invalid_argument("Matrix: empty column list");
    entries_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) {
        throw std::invalid_argument("Matrix: ragged row lengths");
      }
      for (double v : r) entries_.push_back(v);
    }
    require_finite();
  }

  static Matrix zeros(std::size_t rows, std::size_t cols) {
    return Matrix(rows, cols);
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix diagonal(const std::vector<double>& d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  static Matrix column(const std::vector<double>& v) {
    Matrix m(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
    return m;
  }

  static Matrix row(const std::vector<double>& v) {
    Matrix m(1, v.size());
    for (std::size_t j = 0; j < v.size(); ++j) m(0, j) = v[j];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) {
    return entries_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_[i * cols_ + j];
  }

  const std::vector<double>& entries() const { return entries_; }
  std::vector<double>& entries() { return entries_; }

  void require_finite() const {
    for (double v : entries_) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("Matrix: non-finite entry");
      }
    }
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Matrix& operator+=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] += o.entries_[k];
    return *this;
  }

  Matrix& operator-=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] -= o.entries_[k];
    return *this;
  }

  Matrix& operator*=(double s) {
    for (double& v : entries_) v *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) {
      throw std::invalid_argument("Matrix multiply: inner dimension mismatch");
    }
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    }
    return c;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : entries_) m = std::max(m, std::abs(v));
    return m;
  }

  double norm_fro() const {
    double s = 0.0;
    for (double v : entries_) s += v * v;
    return std::sqrt(s);
  }

  // Induced 1-norm (maximum absolute column sum).
  double norm_1() const {
    double m = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
      m = std::max(m, s);
    }
    return m;
  }

 private:
  void check_same_shape(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) {
      throw std::invalid_argument("Matrix: shape mismatch");
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

inline double dot(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("dot: shape mismatch");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < a.entries().size(); ++k) {
    s += a.entries()[k] * b.entries()[k];
  }
  return s;
}

inline Matrix symmetrize(const Matrix& a) {
  Matrix s(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

struct Spectrum {
  std::vector<std::complex<double>> eigenvalues;
  double max_real_part = -std::numeric_limits<double>::infinity();
};

// ---------------------------------------------------------------------------
// Kronecker operations
// ---------------------------------------------------------------------------

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double aij = a(i, j);
      if (aij == 0.0) continue;
      for (std::size_t p = 0; p < b.rows(); ++p)
        for (std::size_t q = 0; q < b.cols(); ++q)
          c(i * b.rows() + p, j * b.cols() + q) = aij * b(p, q);
    }
  return c;
}

inline Matrix kron_power(const Matrix& a, std::size_t d) {
  Matrix r = Matrix::identity(1);
  for (std::size_t k = 0; k < d; ++k) r = kron(a, r);
  return r;
}

// d-fold Kronecker sum. Identity factors are sized by the row dimension, which
// is the sanctioned convention for the only non-square use (column vectors).
inline Matrix kron_sum(const Matrix& a, std::size_t d) {
  if (d < 1) throw std::invalid_argument("kron_sum: d must be >= 1");
  const std::size_t n = a.rows();
  const Matrix in = Matrix::identity(n);
  Matrix sum =
      Matrix::zeros(static_cast<std::size_t>(std::pow(double(n), double(d))),
                    a.cols() * static_cast<std::size_t>(
                                   std::pow(double(n), double(d - 1))));
  for (std::size_t k = 1; k <= d; ++k) {
    Matrix term = kron_power(in, k - 1);
    term = kron(term, a);
    term = kron(term, kron_power(in, d - k));
    sum += term;
  }
  return sum;
}

// ---------------------------------------------------------------------------
// General eigenvalues: Hessenberg reduction followed by shifted QR iteration
// in complex arithmetic with Wilkinson shifts and deflation.
// ---------------------------------------------------------------------------

namespace detail {

using cd = std::complex<double>;

inline std::vector<cd> to_complex(const Matrix& a) {
  std::vector<cd> h(a.rows() * a.cols());
  for (std::size_t k = 0; k < h.size(); ++k) h[k] = a.entries()[k];
  return h;
}

// In-place Householder reduction of a dense complex matrix to upper
// Hessenberg form (similarity transform; eigenvalues preserved).
inline void hessenberg(std::vector<cd>& h, std::size_t n) {
  auto at = [&](std::size_t i, std::size_t j) -> cd& { return h[i * n + j]; };
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double colnorm = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) colnorm += std::norm(at(i, k));
    colnorm = std::sqrt(colnorm);
    if (colnorm <= 0.0) continue;
    cd x0 = at(k + 1, k);
    cd alpha = (std::abs(x0) > 0.0) ? -(x0 / std::abs(x0)) * colnorm
                                    : cd(-colnorm, 0.0);
    std::vector<cd> v(n, cd(0.0));
    v[k + 1] = x0 - alpha;
    for (std::size_t i = k + 2; i < n; ++i) v[i] = at(i, k);
    double vnorm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vnorm2 += std::norm(v[i]);
    if (vnorm2 <= 0.0) continue;
    // Apply H = I - 2 v v^* / (v^* v) from the left and the right.
    for (std::size_t j = 0; j < n; ++j) {
      cd s(0.0);
      for (std::size_t i = k + 1; i < n; ++i) s += std::conj(v[i]) * at(i, j);
      s *= 2.0 / vnorm2;
      for (std::size_t i = k + 1; i < n; ++i) at(i, j) -= s * v[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      cd s(0.0);
      for (std::size_t j = k + 1; j < n; ++j) s += at(i, j) * v[j];
      s *= 2.0 / vnorm2;
      for (std::size_t j = k + 1; j < n; ++j) at(i, j) -= s * std::conj(v[j]);
    }
  }
}

}  // namespace detail

inline Spectrum eigenvalues(const Matrix& a) {
  using detail::cd;
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("eigenvalues: matrix must be square");
  }
  const std::size_t n = a.rows();
  Spectrum spec;
  if (n == 1) {
    spec.eigenvalues = {cd(a(0, 0), 0.0)};
    spec.max_real_part = a(0, 0);
    return spec;
  }

  std::vector<cd> h = detail::to_complex(a);
  detail::hessenberg(h, n);
  auto at = [&](std::size_t i, std::size_t j) -> cd& { return h[i * n + j]; };

  const double eps = std::numeric_limits<double>::epsilon();
  const double scale = std::max(1.0, a.max_abs());
  std::vector<cd> eigs;
  eigs.reserve(n);

  std::size_t hi = n;  // active block is rows/cols [0, hi)
  std::size_t iterations = 0;
  const std::size_t iteration_cap = 100 * n;
  std::size_t stagnation = 0;

  while (hi > 0) {
    if (hi == 1) {
      eigs.push_back(at(0, 0));
      hi = 0;
      continue;
    }
    // Deflate converged trailing eigenvalue.
    const double sub = std::abs(at(hi - 1, hi - 2));
    const double local =
        std::abs(at(hi - 1, hi - 1)) + std::abs(at(hi - 2, hi - 2));
    if (sub <= eps * std::max(local, scale)) {
      eigs.push_back(at(hi - 1, hi - 1));
      hi -= 1;
      stagnation = 0;
      continue;
    }
    if (++iterations > iteration_cap) {
      throw std::runtime_error(
          "eigenvalues: QR iteration failed to converge for dimension " +
          std::to_string(n));
    }

    // Find the start of the active unreduced block.
    std::size_t lo = hi - 1;
    while (lo > 0) {
      const double s = std::abs(at(lo, lo - 1));
      const double d = std::abs(at(lo, lo)) + std::abs(at(lo - 1, lo - 1));
      if (s <= eps * std::max(d, scale)) {
        at(lo, lo - 1) = 0.0;
        break;
      }
      --lo;
    }

    // Wilkinson shift from the trailing 2x2 of the active block; an
    // exceptional shift is injected periodically to break symmetry stalls.
    cd shift;
    if (stagnation > 0 && stagnation % 12 == 0) {
      shift = at(hi - 1, hi - 1) +
              cd(1.5 * std::abs(at(hi - 1, hi - 2)), 0.75 * sub);
    } else {
      const cd a11 = at(hi - 2, hi - 2), a12 = at(hi - 2, hi - 1);
      const cd a21 = at(hi - 1, hi - 2), a22 = at(hi - 1, hi - 1);
      const cd tr = a11 + a22;
      const cd det = a11 * a22 - a12 * a21;
      const cd disc = std::sqrt(tr * tr - 4.0 * det);
      const cd l1 = 0.5 * (tr + disc), l2 = 0.5 * (tr - disc);
      shift = (std::abs(l1 - a22) < std::abs(l2 - a22)) ? l1 : l2;
    }
    ++stagnation;

    // Explicit shifted QR step on the active Hessenberg block [lo, hi) via
    // Givens rotations: Q^* (H - sI) = R, then H <- R Q + sI.
    for (std::size_t i = lo; i < hi; ++i) at(i, i) -= shift;
    std::vector<cd> cs(hi), sn(hi);
    for (std::size_t k = lo; k + 1 < hi; ++k) {
      const cd f = at(k, k), g = at(k + 1, k);
      const double r = std::sqrt(std::norm(f) + std::norm(g));
      if (r <= 0.0) {
        cs[k] = 1.0;
        sn[k] = 0.0;
        continue;
      }
      cs[k] = f / r;
      sn[k] = g / r;
      for (std::size_t j = k; j < hi; ++j) {
        const cd t1 = at(k, j), t2 = at(k + 1, j);
        at(k, j) = std::conj(cs[k]) * t1 + std::conj(sn[k]) * t2;
        at(k + 1, j) = -sn[k] * t1 + cs[k] * t2;
      }
    }
    for (std::size_t k = lo; k + 1 < hi; ++k) {
      for (std::size_t i = lo; i <= std::min(k + 1, hi - 1); ++i) {
        const cd t1 = at(i, k), t2 = at(i, k + 1);
        at(i, k) = t1 * cs[k] + t2 * sn[k];
        at(i, k + 1) = -t1 * std::conj(sn[k]) + t2 * std::conj(cs[k]);
      }
    }
    for (std::size_t i = lo; i < hi; ++i) at(i, i) += shift;
  }

  // Input is real, so eigenvalues come in conjugate pairs: collapse the tiny
  // imaginary leftovers of genuinely real eigenvalues.
  for (auto& e : eigs) {
    if (std::abs(e.imag()) <= 1e3 * eps * std::max(1.0, std::abs(e))) {
      e = cd(e.real(), 0.0);
    }
  }
  spec.eigenvalues = std::move(eigs);
  for (const auto& e : spec.eigenvalues) {
    spec.max_real_part = std::max(spec.max_real_part, e.real());
  }
  return spec;
}

// ---------------------------------------------------------------------------
// LU solve with partial pivoting (general square systems; used by expm).
// ---------------------------------------------------------------------------

inline Matrix solve_lu(Matrix a, Matrix rhs) {
  if (a.rows() != a.cols() || a.rows() != rhs.rows()) {
    throw std::invalid_argument("solve_lu: dimension mismatch");
  }
  const std::size_t n = a.rows();
  std::vector<std::size_t> piv(n);
  for (std::size_t i = 0; i < n; ++i) piv[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pk = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > std::abs(a(pk, k))) pk = i;
    }
    if (a(pk, k) == 0.0) throw std::runtime_error("solve_lu: singular matrix");
    if (pk != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(pk, j));
      for (std::size_t j = 0; j < rhs.cols(); ++j)
        std::swap(rhs(k, j), rhs(pk, j));
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = a(i, k) / a(k, k);
      a(i, k) = m;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= m * a(k, j);
      for (std::size_t j = 0; j < rhs.cols(); ++j) rhs(i, j) -= m * rhs(k, j);
    }
  }
  for (std::size_t jc = 0; jc < rhs.cols(); ++jc) {
    for (std::size_t ii = n; ii-- > 0;) {
      double s = rhs(ii, jc);
      for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * rhs(j, jc);
      rhs(ii, jc) = s / a(ii, ii);
    }
  }
  return rhs;
}

// ---------------------------------------------------------------------------
// Matrix exponential: scaling and squaring with diagonal Pade approximants
// (orders 3/5/7/9/13 selected by the 1-norm, order 13 after scaling).
// ---------------------------------------------------------------------------

namespace detail {

inline Matrix pade_expm(const Matrix& a, const std::vector<double>& b) {
  const std::size_t n = a.rows();
  const Matrix ident = Matrix::identity(n);
  const Matrix a2 = a * a;
  std::vector<Matrix> even;  // I, A^2, A^4, ...
  even.push_back(ident);
  even.push_back(a2);
  const std::size_t m = b.size() - 1;  // Pade order
  for (std::size_t k = 4; k <= m; k += 2) even.push_back(even.back() * a2);
  Matrix u = Matrix::zeros(n, n);
  Matrix v = Matrix::zeros(n, n);
  for (std::size_t k = 0; k <= m; ++k) {
    if (k % 2 == 1) {
      u += even[(k - 1) / 2] * b[k];
    } else {
      v += even[k / 2] * b[k];
    }
  }
  u = a * u;
  return solve_lu(v - u, v + u);
}

inline Matrix pade13_expm(const Matrix& a) {
  static const std::vector<double> b = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
      1187353796428800.0,  129060195264000.0,   10559470521600.0,
      670442572800.0,      33522128640.0,       1323241920.0,
      40840800.0,          960960.0,            16380.0,
      182.0,               1.0};
  const std::size_t n = a.rows();
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a2 * a4;
  Matrix u = a6 * (a6 * b[13] + a4 * b[11] + a2 * b[9]) + a6 * b[7] +
             a4 * b[5] + a2 * b[3] + Matrix::identity(n) * b[1];
  u = a * u;
  Matrix v = a6 * (a6 * b[12] + a4 * b[10] + a2 * b[8]) + a6 * b[6] +
             a4 * b[4] + a2 * b[2] + Matrix::identity(n) * b[0];
  return solve_lu(v - u, v + u);
}

}  // namespace detail

inline Matrix expm(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("expm: matrix must be square");
  }
  a.require_finite();
  const double nrm = a.norm_1();
  if (nrm <= 1.495585217958292e-2) {
    return detail::pade_expm(a, {120.0, 60.0, 12.0, 1.0});
  }
  if (nrm <= 2.539398330063230e-1) {
    return detail::pade_expm(a, {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0});
  }
  if (nrm <= 9.504178996162932e-1) {
    return detail::pade_expm(
        a, {17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0,
            1.0});
  }
  if (nrm <= 2.097847961257068) {
    return detail::pade_expm(
        a, {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
            2162160.0, 110880.0, 3960.0, 90.0, 1.0});
  }
  const double theta13 = 5.371920351148152;
  int s = 0;
  Matrix scaled = a;
  if (nrm > theta13) {
    s = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
    scaled *= std::ldexp(1.0, -s);
  }
  Matrix e = detail::pade13_expm(scaled);
  for (int k = 0; k < s; ++k) e = e * e;
  return e;
}

// ---------------------------------------------------------------------------
// Cholesky factorization and SPD solves
// ---------------------------------------------------------------------------

struct CholeskyResult {
  bool success = false;
  Matrix l;                      // lower-triangular factor when success
  std::size_t failing_pivot = 0;  // 1-based index of the first bad pivot
};

inline CholeskyResult cholesky(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("cholesky: matrix must be square");
  }
  const double scale = a.max_abs();
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - a(j, i)) > 1e-10 * std::max(1.0, scale)) {
        throw std::invalid_argument("cholesky: input is not symmetric");
      }
  const Matrix s = symmetrize(a);
  const std::size_t n = s.rows();
  CholeskyResult res;
  res.l = Matrix::zeros(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = s(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= res.l(j, k) * res.l(j, k);
    if (d <= 0.0 || !std::isfinite(d)) {
      res.success = false;
      res.failing_pivot = j + 1;
      return res;
    }
    res.l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= res.l(i, k) * res.l(j, k);
      res.l(i, j) = v / res.l(j, j);
    }
  }
  res.success = true;
  return res;
}

class NotPositiveDefinite : public std::runtime_error {
 public:
  explicit NotPositiveDefinite(std::size_t pivot)
      : std::runtime_error("matrix not positive definite (pivot " +
                           std::to_string(pivot) + ")"),
        pivot_(pivot) {}
  std::size_t pivot() const { return pivot_; }

 private:
  std::size_t pivot_;
};

inline Matrix forward_substitute(const Matrix& l, Matrix rhs) {
  const std::size_t n = l.rows();
  for (std::size_t jc = 0; jc < rhs.cols(); ++jc) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = rhs(i, jc);
      for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * rhs(k, jc);
      rhs(i, jc) = s / l(i, i);
    }
  }
  return rhs;
}

inline Matrix backward_substitute_transposed(const Matrix& l, Matrix rhs) {
  const std::size_t n = l.rows();
  for (std::size_t jc = 0; jc < rhs.cols(); ++jc) {
    for (std::size_t ii = n; ii-- > 0;) {
      double s = rhs(ii, jc);
      for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * rhs(k, jc);
      rhs(ii, jc) = s / l(ii, ii);
    }
  }
  return rhs;
}

inline Matrix solve_spd(const Matrix& a, const Matrix& rhs) {
  CholeskyResult ch = cholesky(a);
  if (!ch.success) throw NotPositiveDefinite(ch.failing_pivot);
  return backward_substitute_transposed(ch.l, forward_substitute(ch.l, rhs));
}

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition via cyclic Jacobi rotations. Returns ascending
// eigenvalues and the orthogonal matrix of column eigenvectors.
// ---------------------------------------------------------------------------

struct SymmetricEig {
  std::vector<double> values;  // ascending
  Matrix vectors;              // columns are eigenvectors
};

inline SymmetricEig sym_eig(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("sym_eig: matrix must be square");
  }
  const std::size_t n = a.rows();
  Matrix s = symmetrize(a);
  Matrix v = Matrix::identity(n);
  const double fro = std::max(s.norm_fro(), 1e-300);
  for (std::size_t sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += 2.0 * s(i, j) * s(i, j);
    if (std::sqrt(off) <= 1e-15 * fro) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = s(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (s(q, q) - s(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double skp = s(k, p), skq = s(k, q);
          s(k, p) = c * skp - sn * skq;
          s(k, q) = sn * skp + c * skq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double spk = s(p, k), sqk = s(q, k);
          s(p, k) = c * spk - sn * sqk;
          s(q, k) = sn * spk + c * sqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }
  SymmetricEig out;
  out.values.resize(n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return s(x, x) < s(y, y); });
  out.vectors = Matrix::zeros(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = s(order[c], order[c]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = v(r, order[c]);
  }
  return out;
}

inline double min_eigenvalue(const Matrix& a) { return sym_eig(a).values.front(); }

}  // namespace peakgain

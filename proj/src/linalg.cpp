#include "fhn/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace fhn {

IVec IVec::operator+(const IVec& o) const {
  IVec r(dim());
  for (std::size_t i = 0; i < dim(); ++i) r[i] = e_[i] + o[i];
  return r;
}

IVec IVec::operator-(const IVec& o) const {
  IVec r(dim());
  for (std::size_t i = 0; i < dim(); ++i) r[i] = e_[i] - o[i];
  return r;
}

IVec IVec::operator-() const {
  IVec r(dim());
  for (std::size_t i = 0; i < dim(); ++i) r[i] = -e_[i];
  return r;
}

IVec IVec::operator*(const Interval& s) const {
  IVec r(dim());
  for (std::size_t i = 0; i < dim(); ++i) r[i] = e_[i] * s;
  return r;
}

IVec& IVec::operator+=(const IVec& o) { return *this = *this + o; }

double IVec::max_width() const {
  double w = 0.0;
  for (const auto& x : e_) w = std::max(w, x.width());
  return w;
}

double IVec::mag() const {
  double m = 0.0;
  for (const auto& x : e_) m = std::max(m, x.mag());
  return m;
}

IVec IVec::mid() const {
  IVec r(dim());
  for (std::size_t i = 0; i < dim(); ++i) r[i] = Interval(e_[i].mid());
  return r;
}

bool IVec::contains(const IVec& o) const {
  for (std::size_t i = 0; i < dim(); ++i)
    if (!e_[i].contains(o[i])) return false;
  return true;
}

bool IVec::strict_subset_of(const IVec& o) const {
  for (std::size_t i = 0; i < dim(); ++i)
    if (!e_[i].strict_subset_of(o[i])) return false;
  return true;
}

bool IVec::disjoint_from(const IVec& o) const {
  for (std::size_t i = 0; i < dim(); ++i)
    if (e_[i].disjoint_from(o[i])) return true;
  return false;
}

bool IVec::is_finite() const {
  for (const auto& x : e_)
    if (!x.is_finite()) return false;
  return true;
}

IVec hull(const IVec& a, const IVec& b) {
  IVec r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r[i] = hull(a[i], b[i]);
  return r;
}

Interval dot(const IVec& a, const IVec& b) {
  Interval s(0.0);
  for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

IMat IMat::identity(std::size_t n) {
  IMat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = Interval(1.0);
  return m;
}

IMat IMat::point(std::size_t rows, std::size_t cols, const std::vector<double>& rowmajor) {
  IMat m(rows, cols);
  for (std::size_t i = 0; i < rows * cols; ++i) m.e_[i] = Interval(rowmajor[i]);
  return m;
}

IMat IMat::operator+(const IMat& o) const {
  IMat r(rows_, cols_);
  for (std::size_t i = 0; i < e_.size(); ++i) r.e_[i] = e_[i] + o.e_[i];
  return r;
}

IMat IMat::operator-(const IMat& o) const {
  IMat r(rows_, cols_);
  for (std::size_t i = 0; i < e_.size(); ++i) r.e_[i] = e_[i] - o.e_[i];
  return r;
}

IMat IMat::operator*(const IMat& o) const {
  IMat r(rows_, o.cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = 0; k < cols_; ++k) {
      const Interval& a = (*this)(i, k);
      if (a.lo() == 0.0 && a.hi() == 0.0) continue;
      for (std::size_t j = 0; j < o.cols_; ++j) r(i, j) += a * o(k, j);
    }
  return r;
}

IVec IMat::operator*(const IVec& v) const {
  IVec r(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    Interval s(0.0);
    for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * v[j];
    r[i] = s;
  }
  return r;
}

IMat IMat::operator*(const Interval& s) const {
  IMat r(rows_, cols_);
  for (std::size_t i = 0; i < e_.size(); ++i) r.e_[i] = e_[i] * s;
  return r;
}

IMat IMat::transpose() const {
  IMat r(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
  return r;
}

IMat IMat::mid() const {
  IMat r(rows_, cols_);
  for (std::size_t i = 0; i < e_.size(); ++i) r.e_[i] = Interval(e_[i].mid());
  return r;
}

double IMat::max_width() const {
  double w = 0.0;
  for (const auto& x : e_) w = std::max(w, x.width());
  return w;
}

bool IMat::is_finite() const {
  for (const auto& x : e_)
    if (!x.is_finite()) return false;
  return true;
}

IMat hull(const IMat& a, const IMat& b) {
  IMat r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = hull(a(i, j), b(i, j));
  return r;
}

IVec gauss_solve_enclose(const IMat& A, const IVec& b) {
  const std::size_t n = A.rows();
  if (A.cols() != n || b.dim() != n) throw std::invalid_argument("gauss_solve_enclose: shape mismatch");
  IMat M = A;
  IVec rhs = b;
  std::vector<std::size_t> rowperm(n);
  for (std::size_t i = 0; i < n; ++i) rowperm[i] = i;

  for (std::size_t col = 0; col < n; ++col) {
    // mignitude pivoting: the pivot row must exclude zero decisively
    std::size_t best = col;
    double best_mig = -1.0;
    for (std::size_t r = col; r < n; ++r) {
      double m = M(rowperm[r], col).mig();
      if (m > best_mig) {
        best_mig = m;
        best = r;
      }
    }
    if (best_mig <= 0.0) throw SingularEnclosure();
    std::swap(rowperm[col], rowperm[best]);
    const std::size_t p = rowperm[col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const std::size_t q = rowperm[r];
      const Interval& head = M(q, col);
      if (head.lo() == 0.0 && head.hi() == 0.0) continue;
      Interval factor = head / M(p, col);
      M(q, col) = Interval(0.0);
      for (std::size_t c = col + 1; c < n; ++c) {
        const Interval& pc = M(p, c);
        if (pc.lo() == 0.0 && pc.hi() == 0.0) continue;
        M(q, c) -= factor * pc;
      }
      rhs[q] -= factor * rhs[p];
    }
  }

  IVec x(n);
  for (std::size_t i = n; i-- > 0;) {
    const std::size_t p = rowperm[i];
    Interval s = rhs[p];
    for (std::size_t c = i + 1; c < n; ++c) s -= M(p, c) * x[c];
    x[i] = s / M(p, i);
  }
  return x;
}

IMat inverse_enclose(const IMat& A) {
  const std::size_t n = A.rows();
  IMat inv(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    IVec e(n);
    e[j] = Interval(1.0);
    IVec col = gauss_solve_enclose(A, e);
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  return inv;
}

Interval subinterval(const Interval& x, int i, int n) {
  auto split_point = [&](int k) -> double {
    if (k <= 0) return x.lo();
    if (k >= n) return x.hi();
    double t = static_cast<double>(k) / static_cast<double>(n);
    double s = x.lo() + t * (x.hi() - x.lo());
    return std::min(std::max(s, x.lo()), x.hi());
  };
  return Interval(split_point(i), split_point(i + 1));
}

std::vector<IVec> subdivide(const IVec& box, const std::vector<int>& parts_per_dim) {
  if (parts_per_dim.size() != box.dim()) throw std::invalid_argument("subdivide: parts/dim mismatch");
  std::size_t total = 1;
  for (int p : parts_per_dim) {
    if (p < 1) throw std::invalid_argument("subdivide: parts must be positive");
    total *= static_cast<std::size_t>(p);
  }
  std::vector<IVec> cells;
  cells.reserve(total);
  std::vector<int> idx(box.dim(), 0);
  for (std::size_t c = 0; c < total; ++c) {
    IVec cell(box.dim());
    for (std::size_t d = 0; d < box.dim(); ++d) cell[d] = subinterval(box[d], idx[d], parts_per_dim[d]);
    cells.push_back(cell);
    for (std::size_t d = 0; d < box.dim(); ++d) {
      if (++idx[d] < parts_per_dim[d]) break;
      idx[d] = 0;
    }
  }
  return cells;
}

}  // namespace fhn

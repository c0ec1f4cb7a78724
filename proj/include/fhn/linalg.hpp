/* -----------------------------------------------------------
 * Interval vectors, interval matrices and the interval linear
 * algebra every verification routine relies on: matrix/vector
 * products, Gaussian elimination with mignitude pivoting and
 * box subdivision.
 * ----------------------------------------------------------- */

#pragma once

#include <vector>
#include <array>
#include <cstddef>
#include <initializer_list>

#include "fhn/interval.hpp"
#include "fhn/errors.hpp"

namespace fhn {

class IVec {
 public:
  IVec() = default;
  explicit IVec(std::size_t dim) : e_(dim) {}
  IVec(std::initializer_list<Interval> init) : e_(init) {}
  static IVec point(const std::vector<double>& p) {
    IVec v(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) v[i] = Interval(p[i]);
    return v;
  }

  std::size_t dim() const { return e_.size(); }
  Interval& operator[](std::size_t i) { return e_[i]; }
  const Interval& operator[](std::size_t i) const { return e_[i]; }

  IVec operator+(const IVec& o) const;
  IVec operator-(const IVec& o) const;
  IVec operator-() const;
  IVec operator*(const Interval& s) const;
  IVec& operator+=(const IVec& o);

  double max_width() const;
  // magnitude in the max norm
  double mag() const;
  IVec mid() const;
  bool contains(const IVec& o) const;
  bool strict_subset_of(const IVec& o) const;
  bool disjoint_from(const IVec& o) const;
  bool is_finite() const;

  friend IVec hull(const IVec& a, const IVec& b);
  friend Interval dot(const IVec& a, const IVec& b);

 private:
  std::vector<Interval> e_;
};

class IMat {
 public:
  IMat() : rows_(0), cols_(0) {}
  IMat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), e_(rows * cols) {}
  static IMat identity(std::size_t n);
  static IMat point(std::size_t rows, std::size_t cols, const std::vector<double>& rowmajor);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Interval& operator()(std::size_t r, std::size_t c) { return e_[r * cols_ + c]; }
  const Interval& operator()(std::size_t r, std::size_t c) const { return e_[r * cols_ + c]; }

  IMat operator+(const IMat& o) const;
  IMat operator-(const IMat& o) const;
  IMat operator*(const IMat& o) const;
  IVec operator*(const IVec& v) const;
  IMat operator*(const Interval& s) const;
  IMat transpose() const;
  IMat mid() const;
  double max_width() const;
  bool is_finite() const;

  friend IMat hull(const IMat& a, const IMat& b);

 private:
  std::size_t rows_, cols_;
  std::vector<Interval> e_;
};

// Encloses the united solution set {x : Ax = b, A in [A], b in [b]} by
// interval Gaussian elimination with mignitude pivoting.  Rows whose pivot
// column entry is exactly zero are skipped, so block-sparse systems keep
// their structure at no extra cost.
IVec gauss_solve_enclose(const IMat& A, const IVec& b);

// Enclosure of the inverse, column by column.
IMat inverse_enclose(const IMat& A);

// Splits a box into prod(parts) cells; cells share exact split points, so
// their union covers the input box without gaps.
std::vector<IVec> subdivide(const IVec& box, const std::vector<int>& parts_per_dim);

// 1D helper used by face grids: the i-th of n pieces of [x.lo, x.hi].
Interval subinterval(const Interval& x, int i, int n);

}  // namespace fhn

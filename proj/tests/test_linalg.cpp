#include "doctest.h"

#include <array>
#include <cmath>
#include <random>

#include "fhn/linalg.hpp"

using fhn::IMat;
using fhn::Interval;
using fhn::IVec;

namespace {

// independent nonrigorous LU solve used as the oracle
std::array<double, 3> lu_solve3(std::array<std::array<double, 3>, 3> a, std::array<double, 3> b) {
  for (int c = 0; c < 3; ++c) {
    int p = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    std::swap(a[c], a[p]);
    std::swap(b[c], b[p]);
    for (int r = c + 1; r < 3; ++r) {
      double f = a[r][c] / a[c][c];
      for (int k = c; k < 3; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::array<double, 3> x{};
  for (int i = 2; i >= 0; --i) {
    double s = b[i];
    for (int k = i + 1; k < 3; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

}  // namespace

TEST_CASE("gauss on the identity") {
  IMat A = IMat::identity(2);
  IVec b{Interval(1.0), Interval(2.0)};
  IVec x = fhn::gauss_solve_enclose(A, b);
  CHECK(x[0].contains(1.0));
  CHECK(x[1].contains(2.0));
  CHECK(x.max_width() <= 4 * std::ldexp(1.0, -52));
}

TEST_CASE("gauss on a diagonal system") {
  IMat A = IMat::point(2, 2, {2.0, 0.0, 0.0, 4.0});
  IVec b{Interval(2.0), Interval(4.0)};
  IVec x = fhn::gauss_solve_enclose(A, b);
  CHECK(x[0].contains(1.0));
  CHECK(x[1].contains(1.0));
}

TEST_CASE("gauss encloses the LU oracle on random well-conditioned systems") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::array<std::array<double, 3>, 3> a{};
    std::array<double, 3> b{};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) a[i][j] = d(rng) + (i == j ? 4.0 : 0.0);
      b[i] = d(rng);
    }
    IMat A(3, 3);
    IVec rhs(3);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) A(i, j) = Interval(a[i][j]);
      rhs[i] = Interval(b[i]);
    }
    auto oracle = lu_solve3(a, b);
    IVec x = fhn::gauss_solve_enclose(A, rhs);
    for (int i = 0; i < 3; ++i) {
      CHECK(x[i].inflated(1e-16 + 1e-12 * std::abs(oracle[i])).contains(oracle[i]));
    }
  }
}

TEST_CASE("singular enclosure is detected") {
  IMat A = IMat::point(2, 2, {1.0, 1.0, 1.0, 1.0});
  IVec b{Interval(1.0), Interval(1.0)};
  CHECK_THROWS_AS(fhn::gauss_solve_enclose(A, b), fhn::SingularEnclosure);

  IMat B(2, 2);
  B(0, 0) = Interval(-1.0, 1.0);
  B(0, 1) = Interval(0.0);
  B(1, 0) = Interval(0.0);
  B(1, 1) = Interval(-1.0, 1.0);
  CHECK_THROWS_AS(fhn::gauss_solve_enclose(B, b), fhn::SingularEnclosure);
}

TEST_CASE("inverse enclosure of a rotation-ish matrix") {
  IMat A = IMat::point(2, 2, {0.8, -0.6, 0.6, 0.8});
  IMat inv = fhn::inverse_enclose(A);
  IMat prod = A * inv;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(prod(i, j).contains(i == j ? 1.0 : 0.0));
}

TEST_CASE("subdivide splits and covers") {
  IVec box{Interval(0.0, 1.0)};
  auto cells = fhn::subdivide(box, {2});
  REQUIRE(cells.size() == 2);
  CHECK(cells[0][0].lo() == 0.0);
  CHECK(cells[0][0].hi() == cells[1][0].lo());  // shared face, no gap
  CHECK(cells[1][0].hi() == 1.0);

  IVec sq{Interval(0.0, 1.0), Interval(0.0, 1.0)};
  CHECK(fhn::subdivide(sq, {20, 20}).size() == 400);

  auto idcells = fhn::subdivide(sq, {1, 1});
  REQUIRE(idcells.size() == 1);
  CHECK(idcells[0][0] == sq[0]);
  CHECK(idcells[0][1] == sq[1]);
}

TEST_CASE("subdivided union covers the box exactly at faces") {
  IVec box{Interval(-0.3, 0.7), Interval(2.0, 2.5)};
  auto cells = fhn::subdivide(box, {7, 3});
  REQUIRE(cells.size() == 21);
  // walk the first dimension at fixed second index and verify the chain
  for (int j = 0; j < 3; ++j) {
    double prev = box[0].lo();
    for (int i = 0; i < 7; ++i) {
      const IVec& c = cells[static_cast<std::size_t>(j * 7 + i)];
      CHECK(c[0].lo() == prev);
      prev = c[0].hi();
    }
    CHECK(prev == box[0].hi());
  }
}

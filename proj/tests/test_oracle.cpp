#include "doctest.h"

#include <cmath>

#include "fhn/oracle.hpp"

using namespace fhn::oracle;

TEST_CASE("rk45 reproduces the scalar exponential") {
  Rhs rhs = [](const std::vector<double>& x, std::vector<double>& out) { out[0] = x[0]; };
  for (double tol : {1e-8, 1e-10, 1e-12}) {
    auto tr = rk45(rhs, {1.0}, 1.0, tol);
    CHECK(std::abs(tr.x.back()[0] - std::exp(1.0)) < 10 * tol * std::exp(1.0) + 1e-14);
  }
}

TEST_CASE("harmonic oscillator energy drift stays bounded") {
  Rhs rhs = [](const std::vector<double>& x, std::vector<double>& out) {
    out[0] = x[1];
    out[1] = -x[0];
  };
  const double tol = 1e-10;
  auto tr = rk45(rhs, {1.0, 0.0}, 100.0, tol);
  double e = tr.x.back()[0] * tr.x.back()[0] + tr.x.back()[1] * tr.x.back()[1];
  CHECK(std::abs(e - 1.0) < 1e3 * tol);
}

TEST_CASE("fhn with eps=0 keeps w frozen") {
  DParams p{0.61, 0.0};
  auto tr = rk_orbit({0.3, 0.1, 0.123456}, p, 3.0, 1e-10);
  CHECK(tr.x.back()[2] == 0.123456);
}

TEST_CASE("flow_to_plane finds the harmonic return") {
  Rhs rhs = [](const std::vector<double>& x, std::vector<double>& out) {
    out[0] = x[1];
    out[1] = -x[0];
  };
  // full return to {v = 0, crossing upward in g = -v}
  auto c = flow_to_plane(rhs, {1.0, 0.0}, {0.0, 0.0}, {0.0, -1.0}, 1e-12, 10.0);
  CHECK(std::abs(c.t - 2 * 3.14159265358979312) < 1e-9);
  CHECK(std::abs(c.x[0] - 1.0) < 1e-9);
}

TEST_CASE("fast equilibria and eigenpairs match the corner data") {
  double dl = fast_equilibrium(0.025044220, Branch::lower);
  CHECK(std::abs(dl - (-0.10841296)) < 1e-6);
  double ur = fast_equilibrium(0.098807631, Branch::upper);
  CHECK(std::abs(ur - 0.84174629) < 1e-6);
  EigPair e = fast_eigpair(dl, 0.61);
  CHECK(std::abs(e.lambda_u - 0.34113340) < 1e-6);
  CHECK(std::abs(e.lambda_s - (-0.21913340)) < 1e-6);
}

TEST_CASE("periodic skeleton shooting reproduces the jump levels") {
  SingularSkeleton s = shoot_skeleton_periodic(0.61);
  CHECK(std::abs(s.w_star - 0.025044220) < 1e-6);
  CHECK(std::abs(s.w_upper - 0.098807631) < 1e-6);
  CHECK(std::abs(s.gamma_dl[0] - (-0.10841296)) < 1e-6);
  CHECK(std::abs(s.gamma_ul[0] - 0.97034558) < 1e-6);
  CHECK(std::abs(s.gamma_ur[0] - 0.84174629) < 1e-6);
  CHECK(std::abs(s.gamma_dr[0] - (-0.23701225)) < 1e-6);
  // cubic residual at every corner
  for (auto& g : {s.gamma_dl, s.gamma_ul, s.gamma_ur, s.gamma_dr})
    CHECK(std::abs(cubic(g[0]) - g[2]) < 1e-10);
}

TEST_CASE("homoclinic skeleton shooting finds thetaC") {
  SingularSkeleton s = shoot_skeleton_homoclinic();
  CHECK(std::abs(s.theta_c - 1.26491106) < 1e-6);
  CHECK(std::abs(s.w_upper - 0.12385185) < 1e-6);
  CHECK(std::abs(s.gamma_ur[0] - 0.73333334) < 1e-6);
  CHECK(std::abs(s.gamma_dr[0] - (-0.26666667)) < 1e-6);
  EigPair eul = fast_eigpair(1.0, s.theta_c);
  CHECK(std::abs(eul.lambda_u - 0.56920998) < 1e-6);
  CHECK(std::abs(eul.lambda_s - (-0.31622777)) < 1e-6);
}

TEST_CASE("seed orbit refines to small residual at eps = 0.001") {
  OrbitGuess g = seed_periodic_orbit(0.001, 0.61, 212);
  g = resample(g, 212);
  double res = refine_orbit(g, 50);
  CHECK(res <= 1e-10);
  CHECK(g.size() == 212);
  double period = 0.0;
  for (double t : g.flight_times) period += t;
  CHECK(period > 283.0);
  CHECK(period < 293.0);
  // frames are in-plane units
  for (std::size_t i = 0; i < g.size(); ++i) {
    double du = 0, ds = 0;
    for (int d = 0; d < 3; ++d) {
      du += g.exit_dirs[i][d] * g.normals[i][d];
      ds += g.entry_dirs[i][d] * g.normals[i][d];
    }
    CHECK(std::abs(du) < 1e-9);
    CHECK(std::abs(ds) < 1e-9);
  }
}

TEST_CASE("already-exact fixed point needs no correction") {
  // circle anchors of the harmonic oscillator embedded as fhn? not available;
  // instead check that refining twice keeps the residual at the noise floor
  OrbitGuess g = seed_periodic_orbit(2e-4, 0.61, 64);
  double r1 = refine_orbit(g, 30);
  double r2 = refine_orbit(g, 2);
  CHECK(r2 <= std::max(1e-10, 10 * r1));
}

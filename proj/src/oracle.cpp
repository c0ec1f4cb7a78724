#include "fhn/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <cstdio>

namespace fhn::oracle {

double cubic(double u) { return u * (u - 0.1) * (1.0 - u); }
double cubic_du(double u) { return -3.0 * u * u + 2.2 * u - 0.1; }

Vec3 fhn_rhs(const Vec3& x, const DParams& p) {
  return {x[1], 0.2 * (p.theta * x[1] - cubic(x[0]) + x[2]), (p.eps / p.theta) * (x[0] - x[2])};
}

Vec2 fast_rhs(const Vec2& uv, double w, double theta) {
  return {uv[1], 0.2 * (theta * uv[1] - cubic(uv[0]) + w)};
}

namespace {

// Dormand-Prince 5(4) tableau
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176,
                 A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784, B6 = 11.0 / 84;
constexpr double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200,
                 E6 = 22.0 / 525, E7 = -1.0 / 40;

struct Dp45 {
  const Rhs& rhs;
  std::vector<double> k1, k2, k3, k4, k5, k6, k7, tmp;

  explicit Dp45(const Rhs& r, std::size_t n)
      : rhs(r), k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n) {}

  // one trial step; returns the error estimate (max norm, relative to scale)
  double step(const std::vector<double>& x, double h, std::vector<double>& out, double tol) {
    const std::size_t n = x.size();
    rhs(x, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * A21 * k1[i];
    rhs(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * (A31 * k1[i] + A32 * k2[i]);
    rhs(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    rhs(tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = x[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    rhs(tmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = x[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    rhs(tmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      out[i] = x[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
    rhs(out, k7);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
      double sc = tol * (1.0 + std::max(std::abs(x[i]), std::abs(out[i])));
      err = std::max(err, std::abs(e) / sc);
      if (!std::isfinite(out[i])) err = std::numeric_limits<double>::infinity();
    }
    return std::isfinite(err) ? err : std::numeric_limits<double>::infinity();
  }
};

constexpr double kMinStep = 1e-14;

}  // namespace

Trajectory rk45(const Rhs& rhs, std::vector<double> x0, double t_end, double tol, bool store_dense) {
  Trajectory tr;
  tr.t.push_back(0.0);
  tr.x.push_back(x0);
  Dp45 core(rhs, x0.size());
  std::vector<double> xn(x0.size());
  double t = 0.0, h = std::min(1e-3, t_end);
  while (t < t_end) {
    h = std::min(h, t_end - t);
    double err = core.step(x0, h, xn, tol);
    if (err <= 1.0) {
      t += h;
      x0 = xn;
      if (store_dense) {
        tr.t.push_back(t);
        tr.x.push_back(x0);
      }
      h *= std::min(5.0, 0.9 * std::pow(std::max(err, 1e-10), -0.2));
    } else {
      h *= std::max(0.1, 0.9 * std::pow(err, -0.2));
      if (h < kMinStep) throw StepUnderflow();
    }
  }
  if (!store_dense) {
    tr.t.push_back(t);
    tr.x.push_back(x0);
  }
  return tr;
}

Trajectory rk_orbit(const Vec3& x0, const DParams& p, double t_end, double tol, bool store_dense) {
  Rhs rhs = [p](const std::vector<double>& x, std::vector<double>& out) {
    Vec3 r = fhn_rhs({x[0], x[1], x[2]}, p);
    out[0] = r[0];
    out[1] = r[1];
    out[2] = r[2];
  };
  return rk45(rhs, {x0[0], x0[1], x0[2]}, t_end, tol, store_dense);
}

CrossingD flow_to_plane(const Rhs& rhs, std::vector<double> x0, const std::vector<double>& origin,
                        const std::vector<double>& normal, double tol, double max_time, Trajectory* dense) {
  auto g = [&](const std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += normal[i] * (x[i] - origin[i]);
    return s;
  };
  Dp45 core(rhs, x0.size());
  std::vector<double> xn(x0.size());
  double t = 0.0, h = 1e-3;
  bool armed = g(x0) < 0.0;
  if (dense) {
    dense->t.push_back(0.0);
    dense->x.push_back(x0);
  }
  while (t < max_time) {
    double err = core.step(x0, h, xn, tol);
    if (err > 1.0) {
      h *= std::max(0.1, 0.9 * std::pow(err, -0.2));
      if (h < kMinStep) throw StepUnderflow();
      continue;
    }
    double g0 = g(x0), g1 = g(xn);
    if (armed && g0 < 0.0 && g1 >= 0.0) {
      // bisect the step until the crossing is pinned down
      double lo = 0.0, hi = h;
      std::vector<double> xm(x0.size());
      for (int it = 0; it < 60 && (hi - lo) > 1e-15 * (1.0 + t); ++it) {
        double mid = 0.5 * (lo + hi);
        core.step(x0, mid, xm, tol);
        if (g(xm) >= 0.0)
          hi = mid;
        else
          lo = mid;
      }
      core.step(x0, hi, xm, tol);
      if (dense) {
        dense->t.push_back(t + hi);
        dense->x.push_back(xm);
      }
      return {xm, t + hi};
    }
    if (!armed && g1 < 0.0) armed = true;
    t += h;
    x0 = xn;
    if (dense) {
      dense->t.push_back(t);
      dense->x.push_back(x0);
    }
    h *= std::min(5.0, 0.9 * std::pow(std::max(err, 1e-10), -0.2));
  }
  throw NoCrossing("float trajectory did not reach the plane");
}

// fold points of the cubic: roots of cubic_du
static constexpr double kFoldLowerU = (2.2 - 1.9078784028338912) / 6.0;
static constexpr double kFoldUpperU = (2.2 + 1.9078784028338912) / 6.0;

double slow_manifold_fold_w() { return cubic(kFoldUpperU); }

double fast_equilibrium(double w, Branch branch) {
  double u = branch == Branch::lower ? -0.2 : 0.95;
  for (int it = 0; it < 200; ++it) {
    double f = cubic(u) - w;
    double df = cubic_du(u);
    double step = f / df;
    u -= step;
    if (std::abs(step) < 1e-15) break;
  }
  if (std::abs(cubic(u) - w) > 1e-10) throw NoSignChange("fast equilibrium Newton failed");
  // the root must lie on the requested outer branch, not past a fold
  if (branch == Branch::lower && u >= kFoldLowerU) throw NoSignChange("no lower-branch equilibrium at this w");
  if (branch == Branch::upper && u <= kFoldUpperU) throw NoSignChange("no upper-branch equilibrium at this w");
  return u;
}

EigPair fast_eigpair(double u, double theta) {
  // fast linearization [[0,1],[0.2*(-cubic_du), 0.2*theta]]
  double tr = 0.2 * theta;
  double det = 0.2 * cubic_du(u);  // = -(entry 2,1): char poly l^2 - tr*l + det... see below
  // char poly: l^2 - tr l + 0.2*cubic_du(u) ... eigenvalues
  double disc = tr * tr - 4.0 * det;
  if (disc <= 0.0) throw NoSignChange("fast equilibrium is not a saddle");
  double s = std::sqrt(disc);
  return {0.5 * (tr + s), 0.5 * (tr - s)};
}

namespace {

// Signed separation between the unstable-manifold shot and the target saddle:
// an overshoot passes the plane u = u_target with velocity left over (gap =
// |v| there), an undershoot turns around (v = 0) short of the target
// (gap = -(distance left)).  Continuous through zero when the heteroclinic
// connection forms.
double shot_gap(double u_eq, double u_target, double w, double theta, int dir) {
  EigPair e = fast_eigpair(u_eq, theta);
  const double delta = 1e-7;
  std::vector<double> x{u_eq + dir * delta, dir * delta * e.lambda_u};
  Rhs rhs = [w, theta](const std::vector<double>& y, std::vector<double>& out) {
    Vec2 r = fast_rhs({y[0], y[1]}, w, theta);
    out[0] = r[0];
    out[1] = r[1];
  };
  Dp45 core(rhs, 2);
  std::vector<double> xn(2);
  double t = 0.0, h = 1e-3;
  const double tol = 1e-12;
  while (t < 500.0) {
    double err = core.step(x, h, xn, tol);
    if (err > 1.0) {
      h *= std::max(0.1, 0.9 * std::pow(err, -0.2));
      if (h < kMinStep) throw StepUnderflow();
      continue;
    }
    auto reached = [&](const std::vector<double>& y) { return dir > 0 ? y[0] >= u_target : y[0] <= u_target; };
    auto turned = [&](const std::vector<double>& y) { return dir > 0 ? y[1] <= 0.0 : y[1] >= 0.0; };
    if (reached(xn) || turned(xn)) {
      // bisect to the first event inside this step
      double lo = 0.0, hi = h;
      std::vector<double> xm(2);
      for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        core.step(x, mid, xm, tol);
        if (reached(xm) || turned(xm))
          hi = mid;
        else
          lo = mid;
      }
      core.step(x, hi, xm, tol);
      if (reached(xm)) return std::abs(xm[1]);
      return -std::abs(xm[0] - u_target);
    }
    t += h;
    x = xn;
    h *= std::min(5.0, 0.9 * std::pow(std::max(err, 1e-10), -0.2));
  }
  throw NoCrossing("fast shot reached neither event");
}

// gap of the jump between branches at slow level w
double jump_gap(double w, double theta, Branch from) {
  if (from == Branch::lower) {
    double u_eq = fast_equilibrium(w, Branch::lower);
    double u_target = fast_equilibrium(w, Branch::upper);
    return shot_gap(u_eq, u_target, w, theta, +1);
  }
  double u_eq = fast_equilibrium(w, Branch::upper);
  double u_target = fast_equilibrium(w, Branch::lower);
  return shot_gap(u_eq, u_target, w, theta, -1);
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) throw NoSignChange();
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// scans with the given step until the function changes sign, then bisects
double scan_and_bisect(const std::function<double(double)>& f, double lo, double hi, double step,
                       double tol) {
  double prev = lo, fprev = f(lo);
  for (double v = lo + step; v <= hi + 0.5 * step; v += step) {
    double fv;
    try {
      fv = f(v);
    } catch (const NoCrossing&) {
      prev = v;
      fprev = std::nan("");
      continue;
    }
    if (!std::isnan(fprev) && (fv < 0.0) != (fprev < 0.0)) return bisect(f, prev, v, tol);
    prev = v;
    fprev = fv;
  }
  throw NoSignChange("scan found no sign change");
}

}  // namespace

SingularSkeleton shoot_skeleton_periodic(double theta) {
  SingularSkeleton s;
  const double w_cap = 0.995 * slow_manifold_fold_w();
  auto gap_up = [&](double w) { return jump_gap(w, theta, Branch::lower); };
  auto gap_down = [&](double w) { return jump_gap(w, theta, Branch::upper); };
  s.w_star = scan_and_bisect(gap_up, 0.005, 0.08, 0.01, 1e-8);
  s.w_upper = scan_and_bisect(gap_down, 0.06, w_cap, 0.005, 1e-8);
  double dl = fast_equilibrium(s.w_star, Branch::lower);
  double ul = fast_equilibrium(s.w_star, Branch::upper);
  double ur = fast_equilibrium(s.w_upper, Branch::upper);
  double dr = fast_equilibrium(s.w_upper, Branch::lower);
  s.gamma_dl = {dl, 0.0, s.w_star};
  s.gamma_ul = {ul, 0.0, s.w_star};
  s.gamma_ur = {ur, 0.0, s.w_upper};
  s.gamma_dr = {dr, 0.0, s.w_upper};
  s.eig_dl = fast_eigpair(dl, theta);
  s.eig_ul = fast_eigpair(ul, theta);
  s.eig_ur = fast_eigpair(ur, theta);
  s.eig_dr = fast_eigpair(dr, theta);
  return s;
}

SingularSkeleton shoot_skeleton_homoclinic() {
  auto gap_theta = [&](double th) { return jump_gap(0.0, th, Branch::lower); };
  double theta_c = scan_and_bisect(gap_theta, 1.05, 1.45, 0.01, 1e-8);
  SingularSkeleton s;
  s.theta_c = theta_c;
  s.w_star = 0.0;
  const double w_cap = 0.995 * slow_manifold_fold_w();
  auto gap_down = [&](double w) { return jump_gap(w, theta_c, Branch::upper); };
  s.w_upper = scan_and_bisect(gap_down, 0.08, w_cap, 0.002, 1e-8);
  double ur = fast_equilibrium(s.w_upper, Branch::upper);
  double dr = fast_equilibrium(s.w_upper, Branch::lower);
  s.gamma_dl = {0.0, 0.0, 0.0};
  s.gamma_ul = {1.0, 0.0, 0.0};
  s.gamma_ur = {ur, 0.0, s.w_upper};
  s.gamma_dr = {dr, 0.0, s.w_upper};
  s.eig_dl = fast_eigpair(0.0, theta_c);
  s.eig_ul = fast_eigpair(1.0, theta_c);
  s.eig_ur = fast_eigpair(ur, theta_c);
  s.eig_dr = fast_eigpair(dr, theta_c);
  return s;
}


namespace {

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// multiple shooting refinement

namespace {

struct PlaneBasis {
  Vec3 e1, e2;
};

Vec3 vnorm(const Vec3& v) {
  double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  return {v[0] / n, v[1] / n, v[2] / n};
}

Vec3 vcross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

PlaneBasis basis_of_plane(const Vec3& n) {
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(n[i]) < std::abs(n[k])) k = i;
  Vec3 ax{0, 0, 0};
  ax[k] = 1.0;
  Vec3 e1 = vnorm(vcross(n, ax));
  Vec3 e2 = vnorm(vcross(n, e1));
  return {e1, e2};
}

struct SectionMapD {
  // maps 2D coordinates on section i to 2D coordinates on section j
  const OrbitGuess& g;
  std::size_t i, j;
  const PlaneBasis& bi;
  const PlaneBasis& bj;
  double* flight = nullptr;

  Vec2 operator()(const Vec2& c) const {
    Vec3 x{g.points[i][0] + c[0] * bi.e1[0] + c[1] * bi.e2[0],
           g.points[i][1] + c[0] * bi.e1[1] + c[1] * bi.e2[1],
           g.points[i][2] + c[0] * bi.e1[2] + c[1] * bi.e2[2]};
    DParams p{g.theta, g.eps};
    Rhs rhs = [p](const std::vector<double>& y, std::vector<double>& out) {
      Vec3 r = fhn_rhs({y[0], y[1], y[2]}, p);
      out[0] = r[0];
      out[1] = r[1];
      out[2] = r[2];
    };
    CrossingD cr = flow_to_plane(rhs, {x[0], x[1], x[2]},
                                 {g.points[j][0], g.points[j][1], g.points[j][2]},
                                 {g.normals[j][0], g.normals[j][1], g.normals[j][2]}, 1e-12, 1e4);
    if (flight) *flight = cr.t;
    Vec3 d{cr.x[0] - g.points[j][0], cr.x[1] - g.points[j][1], cr.x[2] - g.points[j][2]};
    return {d[0] * bj.e1[0] + d[1] * bj.e1[1] + d[2] * bj.e1[2],
            d[0] * bj.e2[0] + d[1] * bj.e2[1] + d[2] * bj.e2[2]};
  }
};

void rebuild_normals(OrbitGuess& g) {
  const std::size_t k = g.size();
  g.normals.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const Vec3& a = g.points[i];
    const Vec3& b = g.points[(i + 1) % k];
    g.normals[i] = vnorm({b[0] - a[0], b[1] - a[1], b[2] - a[2]});
  }
}

}  // namespace

namespace {

// residual of the multiple-shooting system at the given anchors; throws when
// any segment map fails
Eigen::VectorXd shooting_residual(const OrbitGuess& g, const std::vector<PlaneBasis>& basis,
                                  std::vector<double>* flights) {
  const std::size_t k = g.size();
  Eigen::VectorXd F(2 * k);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = (i + 1) % k;
    double t = 0.0;
    SectionMapD pm{g, i, j, basis[i], basis[j], &t};
    try {
      Vec2 v0 = pm({0.0, 0.0});
      F(2 * i) = v0[0];
      F(2 * i + 1) = v0[1];
    } catch (const std::exception& e) {
      throw MapFailure("segment map " + std::to_string(i) + " from (" + fmt17(g.points[i][0]) +
                       ", " + fmt17(g.points[i][1]) + ", " + fmt17(g.points[i][2]) +
                       ") failed: " + e.what());
    }
    if (flights) (*flights)[i] = t;
  }
  return F;
}

}  // namespace

double refine_orbit(OrbitGuess& g, int iters, double target_residual) {
  const std::size_t k = g.size();
  if (k < 3) throw std::invalid_argument("refine_orbit: need at least 3 anchors");
  rebuild_normals(g);
  std::vector<PlaneBasis> basis(k);
  for (std::size_t i = 0; i < k; ++i) basis[i] = basis_of_plane(g.normals[i]);
  g.flight_times.assign(k, 0.0);

  std::vector<Eigen::Matrix2d> derivs(k);
  double residual = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < iters; ++iter) {
    Eigen::VectorXd F = shooting_residual(g, basis, &g.flight_times);
    residual = F.lpNorm<Eigen::Infinity>();
    if (residual < target_residual) break;

    // FD derivatives of every section map
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t j = (i + 1) % k;
      const double h = 1e-7;
      SectionMapD pm_nt{g, i, j, basis[i], basis[j], nullptr};
      try {
        for (int c = 0; c < 2; ++c) {
          Vec2 ep{0.0, 0.0}, em{0.0, 0.0};
          ep[c] = h;
          em[c] = -h;
          Vec2 vp = pm_nt(ep), vm = pm_nt(em);
          derivs[i](0, c) = (vp[0] - vm[0]) / (2 * h);
          derivs[i](1, c) = (vp[1] - vm[1]) / (2 * h);
        }
      } catch (const std::exception& e) {
        throw MapFailure("derivative of segment map " + std::to_string(i) + " at (" +
                         fmt17(g.points[i][0]) + ", " + fmt17(g.points[i][1]) + ", " +
                         fmt17(g.points[i][2]) + ") failed: " + e.what());
      }
    }

    // cyclic block system: DP_i dx_i - dx_{i+1} = -F_i
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * k, 2 * k);
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t j = (i + 1) % k;
      J.block<2, 2>(2 * i, 2 * i) = derivs[i];
      J.block<2, 2>(2 * i, 2 * j) -= Eigen::Matrix2d::Identity();
    }
    Eigen::VectorXd dx = J.partialPivLu().solve(-F);
    if (!dx.allFinite()) throw NewtonDiverged("linear solve failed");

    // backtracking: accept the largest damping factor whose trial anchors
    // still produce finite maps and do not grow the residual wildly
    std::vector<Vec3> saved = g.points;
    double lambda = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 8 && !accepted; ++bt, lambda *= 0.5) {
      for (std::size_t i = 0; i < k; ++i)
        for (int d = 0; d < 3; ++d)
          g.points[i][d] = saved[i][d] + lambda * (dx(2 * i) * basis[i].e1[d] + dx(2 * i + 1) * basis[i].e2[d]);
      rebuild_normals(g);
      std::vector<PlaneBasis> nb(k);
      for (std::size_t i = 0; i < k; ++i) nb[i] = basis_of_plane(g.normals[i]);
      try {
        Eigen::VectorXd Ft = shooting_residual(g, nb, nullptr);
        if (Ft.allFinite() && (Ft.lpNorm<Eigen::Infinity>() < residual * (1.0 - 0.25 * lambda) ||
                               Ft.lpNorm<Eigen::Infinity>() < target_residual)) {
          basis = std::move(nb);
          accepted = true;
        }
      } catch (const std::exception&) {
        // trial state broke a segment map; damp harder
      }
    }
    if (!accepted) {
      g.points = saved;
      rebuild_normals(g);
      break;
    }
  }
  residual = shooting_residual(g, basis, &g.flight_times).lpNorm<Eigen::Infinity>();
  if (!(residual < 1e-5)) throw NewtonDiverged("multiple shooting residual stayed large");

  // final FD derivatives at the converged anchors feed the frame sweeps
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = (i + 1) % k;
    const double h = 1e-7;
    SectionMapD pm_nt{g, i, j, basis[i], basis[j], nullptr};
    for (int c = 0; c < 2; ++c) {
      Vec2 ep{0.0, 0.0}, em{0.0, 0.0};
      ep[c] = h;
      em[c] = -h;
      Vec2 vp = pm_nt(ep), vm = pm_nt(em);
      derivs[i](0, c) = (vp[0] - vm[0]) / (2 * h);
      derivs[i](1, c) = (vp[1] - vm[1]) / (2 * h);
    }
  }

  // stabilized exit/entry frames: power sweeps of the section-map derivatives
  std::vector<Eigen::Vector2d> vu(k, Eigen::Vector2d(1.0, 0.0));
  std::vector<Eigen::Vector2d> vs(k, Eigen::Vector2d(0.0, 1.0));
  for (int sweep = 0; sweep < 400; ++sweep) {
    double change = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t j = (i + 1) % k;
      Eigen::Vector2d w = (derivs[i] * vu[i]).normalized();
      if (w.dot(vu[j]) < 0) w = -w;
      change = std::max(change, (w - vu[j]).norm());
      vu[j] = w;
    }
    for (std::size_t ii = k; ii-- > 0;) {
      std::size_t j = (ii + 1) % k;
      Eigen::Vector2d w = derivs[ii].partialPivLu().solve(vs[j]).normalized();
      if (w.dot(vs[ii]) < 0) w = -w;
      change = std::max(change, (w - vs[ii]).norm());
      vs[ii] = w;
    }
    if (change < 1e-8) break;
  }
  g.exit_dirs.resize(k);
  g.entry_dirs.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (int d = 0; d < 3; ++d) {
      g.exit_dirs[i][d] = vu[i](0) * basis[i].e1[d] + vu[i](1) * basis[i].e2[d];
      g.entry_dirs[i][d] = vs[i](0) * basis[i].e1[d] + vs[i](1) * basis[i].e2[d];
    }
    g.exit_dirs[i] = vnorm(g.exit_dirs[i]);
    g.entry_dirs[i] = vnorm(g.entry_dirs[i]);
  }
  return residual;
}

OrbitGuess resample(const OrbitGuess& g, std::size_t n_target) {
  const std::size_t k = g.size();
  // piecewise dense trajectory between consecutive anchors
  std::vector<double> ts;
  std::vector<Vec3> xs;
  DParams p{g.theta, g.eps};
  double t0 = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = (i + 1) % k;
    Rhs rhs = [p](const std::vector<double>& y, std::vector<double>& out) {
      Vec3 r = fhn_rhs({y[0], y[1], y[2]}, p);
      out[0] = r[0];
      out[1] = r[1];
      out[2] = r[2];
    };
    Trajectory dense;
    flow_to_plane(rhs, {g.points[i][0], g.points[i][1], g.points[i][2]},
                  {g.points[j][0], g.points[j][1], g.points[j][2]},
                  {g.normals[j][0], g.normals[j][1], g.normals[j][2]}, 1e-12, 1e4, &dense);
    for (std::size_t m = 0; m + 1 < dense.t.size(); ++m) {
      ts.push_back(t0 + dense.t[m]);
      xs.push_back({dense.x[m][0], dense.x[m][1], dense.x[m][2]});
    }
    t0 += dense.t.back();
  }
  const double period = t0;
  OrbitGuess out;
  out.eps = g.eps;
  out.theta = g.theta;
  std::size_t cursor = 0;
  for (std::size_t a = 0; a < n_target; ++a) {
    double mark = period * static_cast<double>(a) / static_cast<double>(n_target);
    while (cursor + 1 < ts.size() && ts[cursor + 1] <= mark) ++cursor;
    out.points.push_back(xs[cursor]);
  }
  rebuild_normals(out);
  return out;
}

OrbitGuess assemble_periodic_seed(double eps, double theta, std::size_t n_anchors) {
  SingularSkeleton s = shoot_skeleton_periodic(theta);
  const DParams p{theta, eps};

  // first-order slow manifold point: v = L'(w) w', u = L(w + theta v);
  // critical-manifold points alone are O(eps) off and the normal instability
  // would throw trajectories off between sections
  auto slow_point = [&](Branch br, double w) -> Vec3 {
    double lam = fast_equilibrium(w, br);
    double dp = cubic_du(lam);
    double v = (eps / theta) * (lam - w) / dp;
    double u = lam + theta * v / dp;
    return {u, v, w};
  };
  auto drift_rate = [&](Branch br, double w) { return (eps / theta) * (fast_equilibrium(w, br) - w); };

  struct Piece {
    std::vector<double> t;
    std::vector<Vec3> x;
  };
  std::vector<Piece> pieces;

  const double bias = 1e-4;
  const double cut_dist = 0.06;
  Rhs rhs = [&p](const std::vector<double>& y, std::vector<double>& out) {
    Vec3 r = fhn_rhs({y[0], y[1], y[2]}, p);
    out[0] = r[0];
    out[1] = r[1];
    out[2] = r[2];
  };
  auto launch_point = [&](Branch from, double w_launch, int dir) -> Vec3 {
    Vec3 x0 = slow_point(from, w_launch);
    EigPair e = fast_eigpair(fast_equilibrium(w_launch, from), theta);
    double en = std::sqrt(1.0 + e.lambda_u * e.lambda_u);
    x0[0] += dir * bias / en;
    x0[1] += dir * bias * e.lambda_u / en;
    return x0;
  };

  // Branch reference usable even when a lingering trajectory drifts past the
  // fold where the saddle vanishes: the reference freezes at the last valid w.
  auto eq_clamped = [&](double w, Branch br) {
    if (br == Branch::upper) w = std::min(w, 0.9995 * slow_manifold_fold_w());
    else w = std::max(w, -0.0020);
    return fast_equilibrium(w, br);
  };

  // The slow drift during the escape phase shifts the effective jump level,
  // so the launch w is located by bisection on whether the full-eps
  // trajectory reaches a plane short of the far branch or turns back.
  auto fast_piece = [&](double w_jump, Branch from, Branch to, int dir) {
    // dichotomy around the moving target saddle: the shot either escapes past
    // it or turns back under it; the marginal trajectory is the orbit's jump
    // fiber and glues onto the slow manifold
    const double zone = 0.02;
    auto classify = [&](double w_launch, Trajectory* dense) -> int {
      Vec3 x0 = launch_point(from, w_launch, dir);
      Dp45 core(rhs, 3);
      std::vector<double> x{x0[0], x0[1], x0[2]}, xn(3);
      double t = 0.0, h = 1e-3, t_cut = 0.0;
      if (dense) {
        dense->t.push_back(0.0);
        dense->x.push_back(x);
      }
      while (t < 4e3) {
        double err = core.step(x, h, xn, 1e-12);
        if (err > 1.0) {
          h *= std::max(0.1, 0.9 * std::pow(err, -0.2));
          if (h < kMinStep) throw StepUnderflow();
          continue;
        }
        t += h;
        x = xn;
        double sep = dir * (x[0] - eq_clamped(x[2], to));
        if (dense) {
          dense->t.push_back(t);
          dense->x.push_back(x);
          // keep the marginal trajectory through the settle window: it stays
          // glued to the orbit far longer than its bisection precision decays
          if (t_cut == 0.0 && sep >= -cut_dist) {
            EigPair ea = fast_eigpair(eq_clamped(x[2], to), theta);
            t_cut = t + std::log(cut_dist / (0.3 * eps)) / std::abs(ea.lambda_s);
          }
          if (t_cut > 0.0 && t >= t_cut) return +1;
        } else {
          if (sep >= zone) return +1;                            // escaped past the saddle
          if (dir * x[1] <= 0.0 && sep <= -zone) return -1;      // turned back under it
        }
        h *= std::min(5.0, 0.9 * std::pow(std::max(err, 1e-10), -0.2));
      }
      throw NoCrossing("jump classification ran out of time");
    };
    double lo = from == Branch::lower ? std::max(0.004, w_jump - 0.02) : w_jump - 0.06;
    double hi = from == Branch::upper ? std::min(0.999 * slow_manifold_fold_w(), w_jump + 0.02)
                                      : w_jump + 0.03;
    // on the lower branch w drifts down during the escape, so reaching needs a
    // higher launch w; on the upper branch the roles flip
    int reach_side = from == Branch::lower ? +1 : -1;
    // the bisection keeps the reach side at hi when reach_side > 0, at lo
    // otherwise
    if (classify(w_jump, nullptr) == +1) (reach_side > 0 ? hi : lo) = w_jump;
    else (reach_side > 0 ? lo : hi) = w_jump;
    for (int it = 0; it < 60 && hi - lo > 1e-14; ++it) {
      double mid = 0.5 * (lo + hi);
      int c = classify(mid, nullptr);
      if ((c == +1) == (reach_side > 0))
        hi = mid;
      else
        lo = mid;
    }
    double w_launch = reach_side > 0 ? hi : lo;
    if (classify(w_launch, nullptr) != +1) {
      w_launch = reach_side > 0 ? hi + 1e-12 : lo - 1e-12;
      if (classify(w_launch, nullptr) != +1) throw NoSignChange("jump launch bisection failed");
    }
    Piece pc;
    Trajectory dense;
    classify(w_launch, &dense);
    for (std::size_t i = 0; i < dense.t.size(); ++i) {
      pc.t.push_back(dense.t[i]);
      pc.x.push_back({dense.x[i][0], dense.x[i][1], dense.x[i][2]});
    }
    pieces.push_back(std::move(pc));
    return std::pair<double, double>{w_launch, pieces.back().x.back()[2]};
  };

  auto slow_piece = [&](Branch br, double w_from, double w_to) {
    Piece pc;
    const int m = 4000;
    double t = 0.0;
    for (int i = 0; i <= m; ++i) {
      double w = w_from + (w_to - w_from) * i / m;
      pc.t.push_back(t);
      pc.x.push_back(slow_point(br, w));
      if (i < m) {
        double w2 = w_from + (w_to - w_from) * (i + 1) / m;
        t += (w2 - w) * 0.5 * (1.0 / drift_rate(br, w) + 1.0 / drift_rate(br, w2));
      }
    }
    pieces.push_back(std::move(pc));
  };

  // assemble the loop: jumps first (their launch levels feed the arcs)
  auto [w_launch_up, w_cut_up] = fast_piece(s.w_star, Branch::lower, Branch::upper, +1);
  std::vector<Piece> jump_up = {pieces.back()};
  pieces.clear();
  auto [w_launch_down, w_cut_down] = fast_piece(s.w_upper, Branch::upper, Branch::lower, -1);
  std::vector<Piece> jump_down = {pieces.back()};
  pieces.clear();

  pieces.push_back(jump_up[0]);
  slow_piece(Branch::upper, w_cut_up, w_launch_down);
  pieces.push_back(jump_down[0]);
  slow_piece(Branch::lower, w_cut_down, w_launch_up);

  double period = 0.0;
  for (const auto& pc : pieces) period += pc.t.back();

  OrbitGuess g;
  g.eps = eps;
  g.theta = theta;
  // per-segment flight times must stay short against the normal instability
  // of the slow manifold, so the anchor count scales with the period
  std::size_t count = std::max<std::size_t>(n_anchors, static_cast<std::size_t>(period / 6.0) + 1);
  std::size_t piece_idx = 0, pos = 0;
  double offset = 0.0;
  for (std::size_t a = 0; a < count; ++a) {
    double mark = period * static_cast<double>(a) / static_cast<double>(count);
    while (piece_idx < pieces.size() && mark > offset + pieces[piece_idx].t.back()) {
      offset += pieces[piece_idx].t.back();
      ++piece_idx;
      pos = 0;
    }
    const Piece& pc = pieces[std::min(piece_idx, pieces.size() - 1)];
    double local = mark - offset;
    while (pos + 1 < pc.t.size() && pc.t[pos + 1] <= local) ++pos;
    g.points.push_back(pc.x[pos]);
  }
  rebuild_normals(g);
  return g;
}

OrbitGuess seed_periodic_orbit(double eps, double theta, std::size_t n_anchors) {
  OrbitGuess g = assemble_periodic_seed(eps, theta, n_anchors);
  refine_orbit(g, 80);
  double period = 0.0;
  for (double t : g.flight_times) period += t;
  std::size_t target = std::max(n_anchors, static_cast<std::size_t>(period / 6.0) + 1);
  if (g.size() != target) {
    g = resample(g, target);
    refine_orbit(g, 80);
  }
  return g;
}

std::string trajectory_csv(const Trajectory& tr) {
  std::ostringstream os;
  os.precision(17);
  os << "t";
  for (std::size_t d = 0; d < tr.x.front().size(); ++d) os << ",x" << d;
  os << "\n";
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    os << tr.t[i];
    for (double v : tr.x[i]) os << "," << v;
    os << "\n";
  }
  return os.str();
}

}  // namespace fhn::oracle

/* -----------------------------------------------------------
 * Nonrigorous floating-point machinery: adaptive Runge-Kutta
 * orbits, shooting for the singular skeleton, and multiple
 * shooting Newton refinement of periodic orbit guesses.
 * Everything here only produces ansaetze; no result is trusted
 * by the rigorous checks.
 * ----------------------------------------------------------- */

#pragma once

#include <array>
#include <functional>
#include <vector>

#include "fhn/errors.hpp"

namespace fhn::oracle {

using Vec3 = std::array<double, 3>;
using Vec2 = std::array<double, 2>;

struct DParams {
  double theta = 0.61;
  double eps = 0.0;
};

Vec3 fhn_rhs(const Vec3& x, const DParams& p);
Vec2 fast_rhs(const Vec2& uv, double w, double theta);
// cubic u(u-a)(1-u) and its derivative
double cubic(double u);
double cubic_du(double u);

struct Trajectory {
  std::vector<double> t;
  std::vector<std::vector<double>> x;
};

using Rhs = std::function<void(const std::vector<double>&, std::vector<double>&)>;

// Dormand-Prince 5(4) with PI step control; throws StepUnderflow when the
// step collapses (expected close to the slow manifold for tiny eps).
Trajectory rk45(const Rhs& rhs, std::vector<double> x0, double t_end, double tol,
                bool store_dense = false);

Trajectory rk_orbit(const Vec3& x0, const DParams& p, double t_end, double tol,
                    bool store_dense = false);

// Integrates from x0 until the plane <n, x - origin> = 0 is crossed in the
// increasing direction; returns the crossing point and time.
struct CrossingD {
  std::vector<double> x;
  double t = 0.0;
};
CrossingD flow_to_plane(const Rhs& rhs, std::vector<double> x0, const std::vector<double>& origin,
                        const std::vector<double>& normal, double tol, double max_time,
                        Trajectory* dense = nullptr);

enum class Branch { lower, upper };

// root of cubic(u) = w on the chosen outer branch of the slow manifold
double fast_equilibrium(double w, Branch branch);

struct EigPair {
  double lambda_u, lambda_s;  // eigenvalues of the fast linearization
  // eigenvectors are (1, lambda); columns of P
};
EigPair fast_eigpair(double u, double theta);

struct SingularSkeleton {
  Vec3 gamma_dl, gamma_ul, gamma_ur, gamma_dr;
  double w_star = 0.0;   // level of the jump between the lower-left corners
  double w_upper = 0.0;  // level of the return jump
  double theta_c = 0.0;  // only set in homoclinic mode
  EigPair eig_dl, eig_ul, eig_ur, eig_dr;
};

// mode periodic: theta fixed, both jump levels found by bisection on w;
// mode homoclinic: w = 0 fixed, theta found by bisection, then the return
// level by bisection on w.
SingularSkeleton shoot_skeleton_periodic(double theta);
SingularSkeleton shoot_skeleton_homoclinic();

struct OrbitGuess {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;      // unit normal per section (difference of anchors)
  std::vector<Vec3> exit_dirs;    // in-plane unit exit direction per section
  std::vector<Vec3> entry_dirs;   // in-plane unit entry direction per section
  std::vector<double> flight_times;
  double eps = 0.0;
  double theta = 0.61;

  std::size_t size() const { return points.size(); }
};

// Newton on the cyclic multiple-shooting system; rebuilds normals first,
// refines anchors, then rebuilds the stabilized exit/entry frames.
// Returns the final max-norm residual.
double refine_orbit(OrbitGuess& guess, int iters, double target_residual = 1e-10);

// respace anchors so that inter-section flight times equal period/n_target
OrbitGuess resample(const OrbitGuess& guess, std::size_t n_target);

// Anchors assembled along the matched singular loop (jump fibers located by
// bisection on the full flow, stable-fiber settle tails, first-order slow
// manifold arcs) without any refinement.
OrbitGuess assemble_periodic_seed(double eps, double theta, std::size_t n_anchors);

// built-in replacement for an externally precomputed seed: assembled anchors
// plus multiple-shooting refinement and resampling
OrbitGuess seed_periodic_orbit(double eps, double theta, std::size_t n_anchors);

// CSV dump used by the oracle CLI subcommand
std::string trajectory_csv(const Trajectory& tr);

}  // namespace fhn::oracle

/* -----------------------------------------------------------
 * The FitzHugh-Nagumo traveling wave field
 *
 *   u' = v
 *   v' = gamma (theta v - u(u-a)(1-u) + w)
 *   w' = (eps/theta)(u - w)
 *
 * with a = 1/10, gamma = 1/5, together with its fast subsystem,
 * Jacobians and the Taylor-coefficient recurrences shared by all
 * polynomial test fields of dimension <= 4.
 * ----------------------------------------------------------- */

#pragma once

#include <memory>
#include <vector>

#include "fhn/linalg.hpp"

namespace fhn {

struct FhnParams {
  Interval theta{0.61};
  Interval eps{0.0};

  FhnParams() = default;
  FhnParams(const Interval& theta_, const Interval& eps_) : theta(theta_), eps(eps_) {}

  static Interval a() { return rational(1.0, 10.0); }
  static Interval gamma() { return rational(1.0, 5.0); }
};

// A vector field presented through its Taylor-series interface: given the
// coefficients x[0..k] of a curve x(t), rhs_coeff computes the k-th
// coefficient of F(x(t)) and df_coeff the k-th coefficient of DF(x(t)).
// The flow recurrence x_{k+1} = rhs_coeff(x, k)/(k+1) then yields
// enclosures of the flow derivatives of any order.
class Field {
 public:
  virtual ~Field() = default;
  virtual std::size_t dim() const = 0;
  virtual IVec rhs(const IVec& x) const = 0;
  virtual IMat jacobian(const IVec& x) const = 0;
  virtual IVec rhs_coeff(const std::vector<IVec>& x, std::size_t k) const = 0;
  virtual IMat df_coeff(const std::vector<IVec>& x, std::size_t k) const = 0;
};

class FhnField : public Field {
 public:
  explicit FhnField(const FhnParams& p);
  std::size_t dim() const override { return 3; }
  IVec rhs(const IVec& x) const override;
  IMat jacobian(const IVec& x) const override;
  IVec rhs_coeff(const std::vector<IVec>& x, std::size_t k) const override;
  IMat df_coeff(const std::vector<IVec>& x, std::size_t k) const override;
  const FhnParams& params() const { return p_; }

 private:
  FhnParams p_;
  Interval ia_, igamma_, gamma_theta_, eps_over_theta_, c2_;  // c2 = gamma*(1+a)
};

// F(x) = A x; covers the scalar exponential, the harmonic oscillator and
// decoupled saddle test systems through the same recurrence engine.
class LinearField : public Field {
 public:
  explicit LinearField(const IMat& A) : A_(A) {}
  std::size_t dim() const override { return A_.rows(); }
  IVec rhs(const IVec& x) const override { return A_ * x; }
  IMat jacobian(const IVec&) const override { return A_; }
  IVec rhs_coeff(const std::vector<IVec>& x, std::size_t k) const override { return A_ * x[k]; }
  IMat df_coeff(const std::vector<IVec>&, std::size_t k) const override {
    return k == 0 ? A_ : IMat(A_.rows(), A_.cols());
  }

 private:
  IMat A_;
};

// Runs the same field with the sign flipped; backward-time integration and
// backcovering checks go through this wrapper.
class NegatedField : public Field {
 public:
  explicit NegatedField(const Field& f) : f_(f) {}
  std::size_t dim() const override { return f_.dim(); }
  IVec rhs(const IVec& x) const override { return -f_.rhs(x); }
  IMat jacobian(const IVec& x) const override { return f_.jacobian(x) * Interval(-1.0); }
  IVec rhs_coeff(const std::vector<IVec>& x, std::size_t k) const override { return -f_.rhs_coeff(x, k); }
  IMat df_coeff(const std::vector<IVec>& x, std::size_t k) const override {
    return f_.df_coeff(x, k) * Interval(-1.0);
  }

 private:
  const Field& f_;
};

// The cubic u(u-a)(1-u) evaluated in factored form.
Interval fhn_cubic(const Interval& u);

IVec fhn_eval(const IVec& x, const FhnParams& p);
IMat fhn_jacobian(const IVec& x, const FhnParams& p);
// Row 3 of the Jacobian with eps divided out: (1/theta, 0, -1/theta).
IVec fhn_jacobian_factored_row3(const FhnParams& p);

// Fast subsystem (u', v') = (v, gamma(theta v - u(u-a)(1-u) + w)).
IVec fast_eval(const Interval& u, const Interval& v, const Interval& w, const Interval& theta);

// coefficient k encloses (1/k!) d^k phi/dt^k (0, x) for all x in x0
std::vector<IVec> taylor_coeffs(const Field& f, const IVec& x0, std::size_t order);

}  // namespace fhn

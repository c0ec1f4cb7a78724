#include "fhn/system.hpp"

namespace fhn {

namespace {

// k-th coefficient of the product of two Taylor series
Interval conv(const std::vector<Interval>& a, const std::vector<Interval>& b, std::size_t k) {
  Interval s(0.0);
  for (std::size_t j = 0; j <= k; ++j) s += a[j] * b[k - j];
  return s;
}

}  // namespace

Interval fhn_cubic(const Interval& u) { return u * (u - FhnParams::a()) * (Interval(1.0) - u); }

IVec fhn_eval(const IVec& x, const FhnParams& p) {
  const Interval& u = x[0];
  const Interval& v = x[1];
  const Interval& w = x[2];
  IVec r(3);
  r[0] = v;
  r[1] = FhnParams::gamma() * (p.theta * v - fhn_cubic(u) + w);
  r[2] = (p.eps / p.theta) * (u - w);
  return r;
}

IMat fhn_jacobian(const IVec& x, const FhnParams& p) {
  const Interval& u = x[0];
  const Interval g = FhnParams::gamma();
  const Interval a = FhnParams::a();
  IMat J(3, 3);
  J(0, 1) = Interval(1.0);
  // d/du of -u(u-a)(1-u) = 3u^2 - 2(1+a)u + a
  J(1, 0) = g * (Interval(3.0) * u.sqr() - Interval(2.0) * (Interval(1.0) + a) * u + a);
  J(1, 1) = g * p.theta;
  J(1, 2) = g;
  const Interval eot = p.eps / p.theta;
  J(2, 0) = eot;
  J(2, 2) = -eot;
  return J;
}

IVec fhn_jacobian_factored_row3(const FhnParams& p) {
  IVec r(3);
  r[0] = Interval(1.0) / p.theta;
  r[2] = -r[0];
  return r;
}

IVec fast_eval(const Interval& u, const Interval& v, const Interval& w, const Interval& theta) {
  IVec r(2);
  r[0] = v;
  r[1] = FhnParams::gamma() * (theta * v - fhn_cubic(u) + w);
  return r;
}

FhnField::FhnField(const FhnParams& p) : p_(p) {
  ia_ = FhnParams::a();
  igamma_ = FhnParams::gamma();
  gamma_theta_ = igamma_ * p_.theta;
  eps_over_theta_ = p_.eps / p_.theta;
  c2_ = igamma_ * (Interval(1.0) + ia_);
}

IVec FhnField::rhs(const IVec& x) const { return fhn_eval(x, p_); }

IMat FhnField::jacobian(const IVec& x) const { return fhn_jacobian(x, p_); }

IVec FhnField::rhs_coeff(const std::vector<IVec>& x, std::size_t k) const {
  // expanded form: v' = gamma*theta*v + gamma*w + gamma*u^3 - gamma(1+a)u^2 + gamma*a*u
  std::vector<Interval> u(k + 1);
  for (std::size_t j = 0; j <= k; ++j) u[j] = x[j][0];
  std::vector<Interval> u2(k + 1);
  for (std::size_t j = 0; j <= k; ++j) u2[j] = conv(u, u, j);
  Interval u3_k = conv(u2, u, k);

  IVec r(3);
  r[0] = x[k][1];
  r[1] = gamma_theta_ * x[k][1] + igamma_ * x[k][2] + igamma_ * u3_k - c2_ * u2[k] + igamma_ * ia_ * u[k];
  r[2] = eps_over_theta_ * (x[k][0] - x[k][2]);
  return r;
}

IMat FhnField::df_coeff(const std::vector<IVec>& x, std::size_t k) const {
  IMat J(3, 3);
  // only the (1,0) entry is non-constant: gamma*(3u^2 - 2(1+a)u + a)
  std::vector<Interval> u(k + 1);
  for (std::size_t j = 0; j <= k; ++j) u[j] = x[j][0];
  Interval u2_k = conv(u, u, k);
  J(1, 0) = Interval(3.0) * igamma_ * u2_k - Interval(2.0) * c2_ * u[k];
  if (k == 0) {
    J(0, 1) = Interval(1.0);
    J(1, 0) += igamma_ * ia_;
    J(1, 1) = gamma_theta_;
    J(1, 2) = igamma_;
    J(2, 0) = eps_over_theta_;
    J(2, 2) = -eps_over_theta_;
  }
  return J;
}

std::vector<IVec> taylor_coeffs(const Field& f, const IVec& x0, std::size_t order) {
  std::vector<IVec> c;
  c.reserve(order + 1);
  c.push_back(x0);
  for (std::size_t k = 0; k < order; ++k) {
    IVec fk = f.rhs_coeff(c, k);
    c.push_back(fk * rational(1.0, static_cast<double>(k + 1)));
  }
  return c;
}

}  // namespace fhn

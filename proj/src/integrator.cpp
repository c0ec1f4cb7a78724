#include "fhn/integrator.hpp"

#include <algorithm>
#include <cmath>

namespace fhn {

FlowSet FlowSet::from_box(const IVec& box) {
  FlowSet s;
  s.base = box.mid();
  s.frame = IMat::identity(box.dim());
  s.r0 = box - s.base;
  s.tail = IVec(box.dim());
  return s;
}

IVec FlowSet::hull() const { return base + frame * r0 + tail; }

Integrator::Integrator(const Field& f, IntegratorOptions opt) : f_(f), opt_(opt) {}

IVec Integrator::rough_enclosure(const IVec& x0, double h) const {
  const Interval span(0.0, h);
  IVec z = hull(x0, x0 + f_.rhs(x0) * Interval(h));
  for (int it = 0; it < opt_.max_inflation_iters; ++it) {
    // inflate the Picard image around its midpoint, then re-test inclusion
    IVec cand(z.dim());
    for (std::size_t i = 0; i < z.dim(); ++i) {
      Interval c = z[i] - Interval(z[i].mid());
      cand[i] = (Interval(z[i].mid()) + c * Interval(opt_.inflation_factor)).inflated(opt_.inflation_pad);
    }
    IVec y = x0 + f_.rhs(cand) * span;
    if (y.strict_subset_of(cand)) return cand;
    z = hull(x0, y);
    if (!z.is_finite()) break;
  }
  throw NoEnclosure();
}

// Lagrange remainder: coefficient r+1 of the flow series over the rough set,
// scaled by h^{r+1}.
IVec Integrator::remainder(const IVec& rough, double h) const {
  auto cz = taylor_coeffs(f_, rough, opt_.order + 1);
  Interval hp(1.0);
  for (std::size_t k = 0; k <= opt_.order; ++k) hp *= Interval(h);  // h^{order+1}
  return cz[opt_.order + 1] * hp;
}

// rough enclosure W for the variational flow with V(0) = I over one step
IMat Integrator::var_rough(const IVec& rough, double h) const {
  const std::size_t n = f_.dim();
  IMat DfZ = f_.jacobian(rough);
  IMat W = IMat::identity(n);
  const Interval span(0.0, h);
  for (int it = 0; it < opt_.max_inflation_iters; ++it) {
    IMat cand(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        Interval c = W(i, j) - Interval(W(i, j).mid());
        cand(i, j) = (Interval(W(i, j).mid()) + c * Interval(opt_.inflation_factor)).inflated(opt_.inflation_pad);
      }
    IMat y = IMat::identity(n) + (DfZ * cand) * span;
    bool inside = true;
    for (std::size_t i = 0; i < n && inside; ++i)
      for (std::size_t j = 0; j < n && inside; ++j) inside = y(i, j).strict_subset_of(cand(i, j));
    if (inside) return cand;
    W = hull(IMat::identity(n), y);
    if (!W.is_finite()) break;
  }
  throw NoEnclosure("variational rough enclosure did not validate");
}

IMat Integrator::step_derivative(const IVec& hull_box, const IVec& rough, double h) const {
  const std::size_t n = f_.dim();
  const std::size_t r = opt_.order;
  auto xs = taylor_coeffs(f_, hull_box, r);
  // variational recurrence V_{k+1} = (sum_j DF_j V_{k-j}) / (k+1), V_0 = I
  std::vector<IMat> V;
  V.reserve(r + 1);
  V.push_back(IMat::identity(n));
  std::vector<IMat> DF;
  DF.reserve(r + 1);
  for (std::size_t k = 0; k < r; ++k) {
    DF.push_back(f_.df_coeff(xs, k));
    IMat s(n, n);
    for (std::size_t j = 0; j <= k; ++j) s = s + DF[j] * V[k - j];
    V.push_back(s * rational(1.0, static_cast<double>(k + 1)));
  }
  // Lagrange remainder for the variational series over the rough sets
  auto zs = taylor_coeffs(f_, rough, r);
  IMat Wz = var_rough(rough, h);
  std::vector<IMat> VZ;
  VZ.reserve(r + 1);
  VZ.push_back(Wz);
  std::vector<IMat> DFZ;
  DFZ.reserve(r + 1);
  for (std::size_t k = 0; k < r; ++k) {
    DFZ.push_back(f_.df_coeff(zs, k));
    IMat s(n, n);
    for (std::size_t j = 0; j <= k; ++j) s = s + DFZ[j] * VZ[k - j];
    VZ.push_back(s * rational(1.0, static_cast<double>(k + 1)));
  }
  DFZ.push_back(f_.df_coeff(zs, r));
  IMat srem(n, n);
  for (std::size_t j = 0; j <= r; ++j) srem = srem + DFZ[j] * VZ[r - j];
  IMat Vrem = srem * rational(1.0, static_cast<double>(r + 1));

  // Horner evaluation of the series plus the remainder term
  const Interval ih(h);
  IMat J = Vrem;
  for (std::size_t k = r; k-- > 0;) J = V[k + 1] + J * ih;
  return V[0] + J * ih;
}

StepResult Integrator::c0_step(const FlowSet& s, double h) const {
  auto [res, J] = c1_step_internal_(s, h);
  (void)J;
  return res;
}

std::pair<StepResult, IMat> Integrator::c1_step(const FlowSet& s, const IMat& V, double h) const {
  auto [res, J] = c1_step_internal_(s, h);
  return {res, J * V};
}

std::pair<StepResult, IMat> Integrator::c1_step_internal_(const FlowSet& s, double h) const {
  const std::size_t r = opt_.order;
  IVec hull_box = s.hull();
  IVec rough = rough_enclosure(hull_box, h);

  // center trajectory: Taylor series at the (thin) base plus remainder over
  // a rough set of the base alone
  IVec rough_base = rough_enclosure(s.base, h);
  auto cs = taylor_coeffs(f_, s.base, r);
  IVec rem = remainder(rough_base, h);
  const Interval ih(h);
  IVec v = cs[r];
  for (std::size_t k = r; k-- > 0;) v = cs[k] + v * ih;
  v += rem;

  IMat J = step_derivative(hull_box, rough, h);

  // doubleton update: new set = mid(v) + Q ((Q^-1 J C) r0) + (J tail + (v - mid(v)))
  IMat A = J * s.frame;
  IMat Q = orthonormal_frame(A.mid());
  IMat Qinv = inverse_enclose(Q);
  FlowSet next;
  next.base = v.mid();
  next.frame = Q;
  next.r0 = (Qinv * A) * s.r0;
  next.tail = J * s.tail + (v - next.base);

  StepResult res;
  res.next = std::move(next);
  res.step = h;
  res.rough = rough;
  return {res, J};
}

double Integrator::suggest_step(const FlowSet& s, double h_cap) const {
  const std::size_t r = opt_.order;
  auto cs = taylor_coeffs(f_, s.base, r);
  double target = opt_.tolerance * (1.0 + s.base.mag());
  double mag = cs[r].mag();
  double h = h_cap;
  if (mag > 0.0) h = std::pow(target / mag, 1.0 / static_cast<double>(r));
  h = std::min(h, h_cap);
  h = std::min(h, opt_.h_max);
  return std::max(h, opt_.h_min);
}

StepResult Integrator::step_auto(const FlowSet& s, double h_cap) const {
  double h = suggest_step(s, h_cap);
  for (;;) {
    try {
      return c0_step(s, h);
    } catch (const NoEnclosure&) {
      h *= 0.5;
      if (h < opt_.h_min) throw;
    }
  }
}

std::pair<StepResult, IMat> Integrator::step_auto_c1(const FlowSet& s, const IMat& V, double h_cap) const {
  double h = suggest_step(s, h_cap);
  for (;;) {
    try {
      return c1_step(s, V, h);
    } catch (const NoEnclosure&) {
      h *= 0.5;
      if (h < opt_.h_min) throw;
    }
  }
}

FlowSet Integrator::flow_to(const FlowSet& s, double T) const {
  // Steps are quantized to a dyadic grid so the accumulated time is exact
  // and the final step lands on T without any time slack.
  const double q = std::ldexp(1.0, -45);
  FlowSet cur = s;
  double t = 0.0;
  while (t < T) {
    double rem = T - t;  // exact: both are multiples of q below 2^8
    double h = suggest_step(cur, rem);
    h = std::floor(h / q) * q;
    if (h <= 0.0 || h > rem) h = std::min(q * std::max(1.0, std::floor(rem / q)), rem);
    if (rem <= 256.0 * q) h = rem;
    for (;;) {
      try {
        cur = c0_step(cur, h).next;
        t += h;
        break;
      } catch (const NoEnclosure&) {
        if (h <= q) throw;
        h = std::max(q, std::floor(h * 0.5 / q) * q);
      }
    }
  }
  return cur;
}

IMat orthonormal_frame(const IMat& m) {
  const std::size_t n = m.rows();
  // column lengths decide the orthogonalization order
  std::vector<std::vector<double>> col(n, std::vector<double>(n));
  std::vector<double> len(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      col[j][i] = m(i, j).mid();
      len[j] += col[j][i] * col[j][i];
    }
  }
  std::vector<std::size_t> order(n);
  for (std::size_t j = 0; j < n; ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return len[a] > len[b]; });

  std::vector<std::vector<double>> q;
  for (std::size_t jj = 0; jj < n; ++jj) {
    std::vector<double> v = col[order[jj]];
    for (const auto& u : q) {
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i) d += v[i] * u[i];
      for (std::size_t i = 0; i < n; ++i) v[i] -= d * u[i];
    }
    double nv = 0.0;
    for (double x : v) nv += x * x;
    nv = std::sqrt(nv);
    if (nv < 1e-150) {
      // degenerate column: fall back to a unit vector not yet spanned
      v.assign(n, 0.0);
      v[jj] = 1.0;
      for (const auto& u : q) {
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) d += v[i] * u[i];
        for (std::size_t i = 0; i < n; ++i) v[i] -= d * u[i];
      }
      nv = 0.0;
      for (double x : v) nv += x * x;
      nv = std::sqrt(nv);
    }
    for (double& x : v) x /= nv;
    q.push_back(v);
  }
  // undo the ordering so column j of the result corresponds to column j of m
  IMat Q(n, n);
  for (std::size_t jj = 0; jj < n; ++jj)
    for (std::size_t i = 0; i < n; ++i) Q(i, order[jj]) = Interval(q[jj][i]);
  return Q;
}

}  // namespace fhn

/* -----------------------------------------------------------
 * Rigorous Taylor integrator with a Lohner doubleton
 * representation
 *
 *   set = base + frame * r0 + tail
 *
 * evolved in a QR-orthonormalized frame to suppress wrapping.
 * ----------------------------------------------------------- */

#pragma once

#include <utility>

#include "fhn/system.hpp"

namespace fhn {

struct FlowSet {
  IVec base;   // point-like center
  IMat frame;  // point matrix C
  IVec r0;     // box carried in frame coordinates
  IVec tail;   // accumulated local errors, plain box

  static FlowSet from_box(const IVec& box);
  IVec hull() const;
  std::size_t dim() const { return base.dim(); }
};

struct StepResult {
  FlowSet next;
  double step = 0.0;
  IVec rough;  // a-priori enclosure of the flow over [0, step]
};

struct IntegratorOptions {
  std::size_t order = 12;
  double tolerance = 1e-16;    // target size of the last Taylor term
  double h_max = 0.5;
  double h_min = 1e-13;
  int max_inflation_iters = 30;
  double inflation_factor = 1.2;
  double inflation_pad = 1e-20;
};

class Integrator {
 public:
  explicit Integrator(const Field& f, IntegratorOptions opt = {});

  const IntegratorOptions& options() const { return opt_; }
  const Field& field() const { return f_; }

  // [Z] with x0 + [0,h] F([Z]) inside int [Z]; throws NoEnclosure.
  IVec rough_enclosure(const IVec& x0, double h) const;

  StepResult c0_step(const FlowSet& s, double h) const;
  // also returns the enclosure of D phi(h, .) V over the set
  std::pair<StepResult, IMat> c1_step(const FlowSet& s, const IMat& V, double h) const;

  double suggest_step(const FlowSet& s, double h_cap) const;

  // adaptive step: suggests h, halves while the rough enclosure fails
  StepResult step_auto(const FlowSet& s, double h_cap) const;
  std::pair<StepResult, IMat> step_auto_c1(const FlowSet& s, const IMat& V, double h_cap) const;

  // convenience: flow the set for exactly time T
  FlowSet flow_to(const FlowSet& s, double T) const;

  // one-step derivative enclosure over the hull of s (monodromy of the step)
  IMat step_derivative(const IVec& hull, const IVec& rough, double h) const;

 private:
  IVec remainder(const IVec& rough, double h) const;
  IMat var_rough(const IVec& rough, double h) const;
  std::pair<StepResult, IMat> c1_step_internal_(const FlowSet& s, double h) const;

  const Field& f_;
  IntegratorOptions opt_;
};

// Plain double QR orthonormalization used for the evolving frame; rigor
// does not depend on the quality of this factor.
IMat orthonormal_frame(const IMat& m);

}  // namespace fhn

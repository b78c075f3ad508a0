// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>

#include "qot/bimodule.hpp"

namespace qot {

// Representing function f of an operator mean: operator monotone on (0,inf)
// with f(1) = 1, inducing m_f(s,t) = f(s/t) t with its continuous extension
// to the boundary of the positive quadrant.
class RepresentingFunction {
 public:
  enum class Kind { logarithmic, arithmetic, geometric, harmonic, power_mean, custom };

  static RepresentingFunction logarithmic();
  static RepresentingFunction arithmetic();
  static RepresentingFunction geometric();
  static RepresentingFunction harmonic();
  static RepresentingFunction power_mean(double alpha);  // alpha in [-1,1], != 0
  // Sampled table (s_i, f_i) interpolated monotonically in log s; approximate.
  static RepresentingFunction custom_table(std::vector<double> s, std::vector<double> f,
                                           bool symmetric);
  static RepresentingFunction by_name(const std::string& name, double alpha = 0.5);

  Kind kind() const { return kind_; }
  bool symmetric() const { return symmetric_; }
  const std::string& name() const { return name_; }
  double alpha() const { return alpha_; }

  double f(double s) const;           // on (0, inf)
  double mean(double s, double t) const;  // continuous extension to [0,inf)^2

  // f(1) = 1, mean monotonicity on a grid, symmetry identity when flagged,
  // geometric <= m_f <= arithmetic for symmetric f.
  void validate(const Tolerances& tol = default_tol()) const;

 private:
  Kind kind_ = Kind::logarithmic;
  bool symmetric_ = true;
  std::string name_ = "log";
  double alpha_ = 0.0;
  std::vector<double> table_s_, table_f_;  // custom
};

// M^theta_{x,y} = ((L_x (x) R_y)(m_f))^theta for positive x, y.
Superoperator mult_operator(const BimoduleStructure& bm, const Element& x, const Element& y,
                            const RepresentingFunction& f, double theta,
                            const Tolerances& tol = default_tol());

// D^theta_{x,y} = M^{-theta}_{x,y} for strictly positive x, y.
Superoperator div_operator(const BimoduleStructure& bm, const Element& x, const Element& y,
                           const RepresentingFunction& f, double theta,
                           const Tolerances& tol = default_tol());

struct QuasiEntropyResult {
  double value = 0.0;
  bool infinite = false;  // divergence verdict
  bool converged = false;
  std::vector<std::pair<double, double>> epsilon_trace;  // (eps, value), eps decreasing

  double value_or_inf() const { return infinite ? std::numeric_limits<double>::infinity() : value; }
};

// I^{f,theta}(mu, eta, w) = sup_{eps>0} <D^theta_{mu+eps, eta+eps}(w), w>_omega,
// evaluated along a decreasing geometric schedule.
QuasiEntropyResult quasi_entropy(const BimoduleStructure& bm, const Density& mu,
                                 const Density& eta, const Element& w,
                                 const RepresentingFunction& f, double theta,
                                 const EpsSchedule& schedule = EpsSchedule(),
                                 const Tolerances& tol = default_tol());

// Variant on subnormalized/raw positive elements in the first two slots.
QuasiEntropyResult quasi_entropy_positive(const BimoduleStructure& bm, const Element& mu,
                                          const Element& eta, const Element& w,
                                          const RepresentingFunction& f, double theta,
                                          const EpsSchedule& schedule = EpsSchedule(),
                                          const Tolerances& tol = default_tol());

// Compressed evaluation <D^theta_{mu,eta,p}(w), w>_omega for inputs strictly
// positive within pAp and w supported in phi(p) B psi(p); no eps schedule.
double compressed_quasi_entropy(const BimoduleStructure& bm, const Element& mu,
                                const Element& eta, const Element& w, const Element& p,
                                const RepresentingFunction& f, double theta,
                                const Tolerances& tol = default_tol());

// D^theta_{x,y,p} as an ambient superoperator (valid on the compressed subspace).
Superoperator compressed_div_operator(const BimoduleStructure& bm, const Element& x,
                                      const Element& y, const Element& p,
                                      const RepresentingFunction& f, double theta,
                                      const Tolerances& tol = default_tol());
Superoperator compressed_mult_operator(const BimoduleStructure& bm, const Element& x,
                                       const Element& y, const Element& p,
                                       const RepresentingFunction& f, double theta,
                                       const Tolerances& tol = default_tol());

}  // namespace qot

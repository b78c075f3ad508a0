// SPDX-License-Identifier: Apache-2.0
#include "qot/quasientropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qot {

namespace {

double mean_log(double s, double t) {
  if (s <= 0.0 || t <= 0.0) return 0.0;
  double z = (s - t) / (s + t);
  // series in z = (s-t)/(s+t) near the diagonal: m = (s+t)/2 (1 - z^2/3 - 4z^4/45)
  if (std::abs(z) < 1e-4)
    return 0.5 * (s + t) * (1.0 - z * z / 3.0 - 4.0 * z * z * z * z / 45.0);
  return (s - t) / (std::log(s) - std::log(t));
}

double mean_power(double s, double t, double alpha) {
  // ((s^a + t^a)/2)^(1/a); boundary by continuity
  if (s <= 0.0 && t <= 0.0) return 0.0;
  if (alpha > 0.0) {
    double sa = s > 0.0 ? std::pow(s, alpha) : 0.0;
    double ta = t > 0.0 ? std::pow(t, alpha) : 0.0;
    return std::pow(0.5 * (sa + ta), 1.0 / alpha);
  }
  // alpha < 0: vanishes when either argument vanishes
  if (s <= 0.0 || t <= 0.0) return 0.0;
  return std::pow(0.5 * (std::pow(s, alpha) + std::pow(t, alpha)), 1.0 / alpha);
}

}  // namespace

RepresentingFunction RepresentingFunction::logarithmic() {
  RepresentingFunction r;
  r.kind_ = Kind::logarithmic;
  r.symmetric_ = true;
  r.name_ = "log";
  return r;
}

RepresentingFunction RepresentingFunction::arithmetic() {
  RepresentingFunction r;
  r.kind_ = Kind::arithmetic;
  r.symmetric_ = true;
  r.name_ = "arithmetic";
  return r;
}

RepresentingFunction RepresentingFunction::geometric() {
  RepresentingFunction r;
  r.kind_ = Kind::geometric;
  r.symmetric_ = true;
  r.name_ = "geometric";
  return r;
}

RepresentingFunction RepresentingFunction::harmonic() {
  RepresentingFunction r;
  r.kind_ = Kind::harmonic;
  r.symmetric_ = true;
  r.name_ = "harmonic";
  return r;
}

RepresentingFunction RepresentingFunction::power_mean(double alpha) {
  require(alpha >= -1.0 && alpha <= 1.0 && alpha != 0.0, ErrorCode::config,
          "power mean exponent must lie in [-1,1] and be nonzero");
  RepresentingFunction r;
  r.kind_ = Kind::power_mean;
  r.symmetric_ = true;
  r.name_ = "power(" + std::to_string(alpha) + ")";
  r.alpha_ = alpha;
  return r;
}

RepresentingFunction RepresentingFunction::custom_table(std::vector<double> s,
                                                        std::vector<double> f, bool symmetric) {
  require(s.size() == f.size() && s.size() >= 2, ErrorCode::config, "bad custom table");
  for (size_t i = 0; i < s.size(); ++i)
    require(s[i] > 0.0 && f[i] > 0.0 && (i == 0 || s[i] > s[i - 1]), ErrorCode::config,
            "custom table must be positive with increasing s");
  RepresentingFunction r;
  r.kind_ = Kind::custom;
  r.symmetric_ = symmetric;
  r.name_ = "custom";
  r.table_s_ = std::move(s);
  r.table_f_ = std::move(f);
  return r;
}

RepresentingFunction RepresentingFunction::by_name(const std::string& name, double alpha) {
  if (name == "log" || name == "logarithmic") return logarithmic();
  if (name == "arithmetic") return arithmetic();
  if (name == "geometric") return geometric();
  if (name == "harmonic") return harmonic();
  if (name == "power" || name == "power_mean") return power_mean(alpha);
  fail(ErrorCode::config, "unknown representing function: " + name);
}

double RepresentingFunction::f(double s) const {
  require(s > 0.0, ErrorCode::domain, "representing function evaluated outside (0,inf)");
  switch (kind_) {
    case Kind::logarithmic:
      return mean_log(s, 1.0);
    case Kind::arithmetic:
      return 0.5 * (s + 1.0);
    case Kind::geometric:
      return std::sqrt(s);
    case Kind::harmonic:
      return 2.0 * s / (s + 1.0);
    case Kind::power_mean:
      return mean_power(s, 1.0, alpha_);
    case Kind::custom: {
      // monotone linear interpolation in log s, clamped at the ends
      double ls = std::log(s);
      if (ls <= std::log(table_s_.front())) return table_f_.front();
      if (ls >= std::log(table_s_.back())) return table_f_.back();
      for (size_t i = 1; i < table_s_.size(); ++i) {
        double l0 = std::log(table_s_[i - 1]), l1 = std::log(table_s_[i]);
        if (ls <= l1) {
          double t = (ls - l0) / (l1 - l0);
          return (1.0 - t) * table_f_[i - 1] + t * table_f_[i];
        }
      }
      return table_f_.back();
    }
  }
  return 0.0;
}

double RepresentingFunction::mean(double s, double t) const {
  s = std::max(s, 0.0);
  t = std::max(t, 0.0);
  switch (kind_) {
    case Kind::logarithmic:
      return mean_log(s, t);
    case Kind::arithmetic:
      return 0.5 * (s + t);
    case Kind::geometric:
      return std::sqrt(s * t);
    case Kind::harmonic:
      return (s + t) > 0.0 ? 2.0 * s * t / (s + t) : 0.0;
    case Kind::power_mean:
      return mean_power(s, t, alpha_);
    case Kind::custom: {
      if (t > 0.0) return f(s > 0.0 ? s / t : std::numeric_limits<double>::min()) * t;
      if (s > 0.0) {
        if (symmetric_) return mean(t, s);
        // numeric limit along t -> 0 (documented as approximate)
        double tiny = 1e-12 * s;
        return f(s / tiny) * tiny;
      }
      return 0.0;
    }
  }
  return 0.0;
}

void RepresentingFunction::validate(const Tolerances& tol) const {
  require(std::abs(f(1.0) - 1.0) <= tol.structure, ErrorCode::domain, "f(1) != 1");
  std::vector<double> grid = {1e-3, 1e-2, 0.1, 0.3, 0.7, 1.0, 1.5, 3.0, 10.0, 100.0};
  for (double s0 : grid)
    for (double t0 : grid)
      for (double s1 : grid)
        for (double t1 : grid) {
          if (s0 <= s1 && t0 <= t1)
            require(mean(s0, t0) <= mean(s1, t1) + tol.structure * (1.0 + mean(s1, t1)),
                    ErrorCode::domain, "mean is not monotone");
        }
  if (symmetric_) {
    for (double s : grid) {
      require(std::abs(f(s) - f(1.0 / s) * s) <= tol.structure * (1.0 + f(s)), ErrorCode::domain,
              "symmetry identity f(s) = f(1/s) s fails");
      for (double t : grid) {
        // harmonic <= m_f <= arithmetic: the extremal symmetric operator means
        double m = mean(s, t);
        double har = 2.0 * s * t / (s + t), ari = 0.5 * (s + t);
        require(m >= har - tol.structure * (1.0 + har) && m <= ari + tol.structure * (1.0 + ari),
                ErrorCode::domain, "symmetric mean escapes the harmonic/arithmetic envelope");
      }
    }
  }
}

Superoperator mult_operator(const BimoduleStructure& bm, const Element& x, const Element& y,
                            const RepresentingFunction& f, double theta, const Tolerances& tol) {
  require(theta > 0.0 && theta <= 1.0, ErrorCode::domain, "theta must lie in (0,1]");
  Superoperator m = joint_calculus(
      bm, x, y, [&f](double s, double t) { return f.mean(s, t); }, tol);
  if (theta == 1.0) return m;
  return m.power(theta, tol);
}

Superoperator div_operator(const BimoduleStructure& bm, const Element& x, const Element& y,
                           const RepresentingFunction& f, double theta, const Tolerances& tol) {
  require(theta > 0.0 && theta <= 1.0, ErrorCode::domain, "theta must lie in (0,1]");
  double sx = x.min_eigenvalue(tol.self_adjoint * 1e2);
  double sy = y.min_eigenvalue(tol.self_adjoint * 1e2);
  require(sx > tol.strict_positivity * std::max(1.0, x.norm_op()) &&
              sy > tol.strict_positivity * std::max(1.0, y.norm_op()),
          ErrorCode::domain, "div_operator requires strictly positive arguments");
  Superoperator m = joint_calculus(
      bm, x, y, [&f](double s, double t) { return f.mean(s, t); }, tol);
  return m.power(-theta, tol);
}

QuasiEntropyResult quasi_entropy_positive(const BimoduleStructure& bm, const Element& mu,
                                          const Element& eta, const Element& w,
                                          const RepresentingFunction& f, double theta,
                                          const EpsSchedule& schedule, const Tolerances& tol) {
  require(theta > 0.0 && theta <= 1.0, ErrorCode::domain, "theta must lie in (0,1]");
  QuasiEntropyResult res;
  double wn2 = w.norm_tau() * w.norm_tau();
  if (wn2 == 0.0) {
    res.value = 0.0;
    res.converged = true;
    return res;
  }
  Element one = Element::identity(bm.source);
  double prev = -1.0;
  double eps = schedule.eps0;
  for (int k = 0; k < schedule.max_steps; ++k, eps *= schedule.ratio) {
    // the regularized arguments have spectra >= eps, so m_f >= eps exactly;
    // the floored inverse avoids spurious strict-positivity rejections deep
    // into the schedule
    Superoperator m = joint_calculus(
        bm, mu + eps * one, eta + eps * one,
        [&f](double s, double t) { return f.mean(s, t); }, tol);
    Superoperator d = m.power_floored(-theta, 0.5 * eps);
    double v = std::real(inner(d.apply(w), w));
    res.epsilon_trace.emplace_back(eps, v);
    res.value = v;
    if (v > schedule.divergence_cap * wn2) {
      res.infinite = true;
      res.converged = true;  // sound verdict: monotone sequence exceeded the cap
      return res;
    }
    if (prev >= 0.0 && std::abs(v - prev) <= schedule.rel_convergence * (1.0 + std::abs(v))) {
      res.converged = true;
      return res;
    }
    prev = v;
  }
  res.converged = false;  // ran out of schedule without a verdict
  return res;
}

QuasiEntropyResult quasi_entropy(const BimoduleStructure& bm, const Density& mu,
                                 const Density& eta, const Element& w,
                                 const RepresentingFunction& f, double theta,
                                 const EpsSchedule& schedule, const Tolerances& tol) {
  return quasi_entropy_positive(bm, mu.element(), eta.element(), w, f, theta, schedule, tol);
}

Superoperator compressed_mult_operator(const BimoduleStructure& bm, const Element& x,
                                       const Element& y, const Element& p,
                                       const RepresentingFunction& f, double theta,
                                       const Tolerances& tol) {
  // M_{x,y,p} coincides with the ambient M_{x,y} on the compressed subspace.
  Superoperator m = joint_calculus(
      bm, p * x * p, p * y * p, [&f](double s, double t) { return f.mean(s, t); }, tol);
  if (theta == 1.0) return m;
  return m.power(theta, tol);
}

Superoperator compressed_div_operator(const BimoduleStructure& bm, const Element& x,
                                      const Element& y, const Element& p,
                                      const RepresentingFunction& f, double theta,
                                      const Tolerances& tol) {
  require(theta > 0.0 && theta <= 1.0, ErrorCode::domain, "theta must lie in (0,1]");
  // D_{x,y,p} = D_{x + a p^perp, y + b p^perp} restricted to phi(p) B psi(p);
  // the perturbation keeps the ambient inverse well conditioned.
  Element one = Element::identity(bm.source);
  double ax = std::max(1.0, x.norm_op());
  double ay = std::max(1.0, y.norm_op());
  Element xp = (p * x * p + ax * (one - p)).symmetrized();
  Element yp = (p * y * p + ay * (one - p)).symmetrized();
  return div_operator(bm, xp, yp, f, theta, tol);
}

double compressed_quasi_entropy(const BimoduleStructure& bm, const Element& mu,
                                const Element& eta, const Element& w, const Element& p,
                                const RepresentingFunction& f, double theta,
                                const Tolerances& tol) {
  CompressedBimodule cb = restrict_bimodule(bm, p, tol);
  require(cb.target_supported(w, tol.structure), ErrorCode::domain,
          "compressed_quasi_entropy: w not supported in the compression");
  Element cmu = (p * mu * p).symmetrized(), ceta = (p * eta * p).symmetrized();
  require((mu - cmu).norm_tau() <= tol.structure * (1.0 + mu.norm_tau()) &&
              (eta - ceta).norm_tau() <= tol.structure * (1.0 + eta.norm_tau()),
          ErrorCode::domain, "compressed_quasi_entropy: states not supported in pAp");
  // strict positivity within the compression
  Element one = Element::identity(bm.source);
  double floor_mu = (cmu + (one - p)).min_eigenvalue(tol.self_adjoint * 1e2);
  double floor_eta = (ceta + (one - p)).min_eigenvalue(tol.self_adjoint * 1e2);
  require(floor_mu > tol.strict_positivity * std::max(1.0, mu.norm_op()) &&
              floor_eta > tol.strict_positivity * std::max(1.0, eta.norm_op()),
          ErrorCode::domain, "compressed_quasi_entropy: states not strictly positive in pAp");
  Superoperator d = compressed_div_operator(bm, cmu, ceta, p, f, theta, tol);
  return std::real(inner(d.apply(w), w));
}

}  // namespace qot

#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>

#include "rssl/grid.hpp"

// Scenario ingredients: the scaling profile g(t) with its reparametrized clock
// T(t) = int_0^t g(u)^{-2} du, the scaled potential g(t)^{-2} V(x/g(t)), an
// optional static defect potential, and the saturated nonlinearity family.
namespace rssl {

struct GValues {
  double g, dg, d2g;
};

struct GConditionReport {
  double epsilon = 0.0;
  double c_g = 0.0;          // estimate of lim (g - 2 t g') / g at t = 1e8
  double c_g_analytic = 0.0; // 1 - 2 epsilon for the default family
  double sup_tdg_over_g = 0.0;    // sup of |t g'/g| over the scan ladder
  double sup_t2d2g_over_g = 0.0;  // sup of |t^2 g''/g|
  bool pass = false;
  std::string violation;  // empty when pass
};

// Time-dependent scale factor g(t) = (1 + t^2)^{epsilon/2}, epsilon in (0, 1/2).
//
// T(t) is evaluated from a panel-quadrature table over a geometric node ladder
// (t <= 1e6) and by the closed-form asymptote T = t^{1-2e}/(1-2e) + C_inf
// beyond it, with C_inf pinned by continuity at the switch point; the inverse
// bisects the table branch and inverts the asymptote in closed form, so the
// roundtrip stays below 1e-9 * (1 + t).
class ScalingProfile {
 public:
  explicit ScalingProfile(double epsilon);

  double epsilon() const { return eps_; }
  double g(double t) const;
  double dg(double t) const;
  double d2g(double t) const;
  GValues g_eval(double t) const { return {g(t), dg(t), d2g(t)}; }

  double c_g() const { return 1.0 - 2.0 * eps_; }

  double time_map(double t) const;          // T(t), t >= 0
  double time_map_inverse(double s) const;  // T^{-1}(s), s >= 0

  // f(s) = -(g' g)(T^{-1}(s)); negative for growing profiles, and
  // s f(s) -> -epsilon / (1 - 2 epsilon).
  double f_of_s(double s) const;

 private:
  double eps_;
  struct Table;
  std::shared_ptr<const Table> table_;
};

// Admissibility scan: c_g estimated at t = 1e8 against the analytic limit,
// positivity/boundedness ratios over a log ladder, epsilon window (0, 1/2).
GConditionReport check_g_conditions(const ScalingProfile& p);
// Same, but throws FailsConditions naming the violated clause.
void require_g_conditions(const ScalingProfile& p);

// --- potentials ---------------------------------------------------------------

struct PotentialSpec {
  enum class Kind { gaussian_well, tabulated };
  Kind kind = Kind::gaussian_well;
  // gaussian_well: V(r) = -depth * exp(-r^2 / (2 width^2)), depth > 0
  double depth = 4.0;
  double width = 1.0;
  // tabulated: two-column samples, natural-spline interpolated, 0 beyond range
  Eigen::ArrayXd tab_r, tab_v;
  std::shared_ptr<const CubicSpline> tab_spline;  // built by tabulated_potential
};

PotentialSpec gaussian_well(double depth, double width);
PotentialSpec tabulated_potential(const Eigen::ArrayXd& r, const Eigen::ArrayXd& v);

double potential_value(const PotentialSpec& p, double r);
Eigen::ArrayXd potential_values(const PotentialSpec& p, const Eigen::ArrayXd& r);
// dV/dr (analytic for the Gaussian well, spline derivative for tables)
double potential_slope(const PotentialSpec& p, double r);

// ||V||_{L^2(R^n)} — closed form for the Gaussian well, quadrature for tables.
double potential_l2_norm(const PotentialSpec& p, int dim);
// sup_r (1 + r) |V(r)| — the weighted-decay validator.
double potential_weighted_sup(const PotentialSpec& p);

// Scaled potential g^{-2} V(r/g) sampled on the grid at time t.
Eigen::ArrayXd scaled_potential_values(const PotentialSpec& p, const ScalingProfile& prof,
                                       double t, const Eigen::ArrayXd& r);
// d/dt [g^{-2} V(r/g)] = -g' g^{-3} [2 V(rho) + rho V'(rho)], rho = r/g —
// the source term of the energy identity.
Eigen::ArrayXd scaled_potential_time_derivative(const PotentialSpec& p,
                                                const ScalingProfile& prof, double t,
                                                const Eigen::ArrayXd& r);

// --- saturated nonlinearity ----------------------------------------------------
//
// N(k) = -strength * k / (1 + k^2): bounded, attractive, saturating. The
// associated mean field N_{F,0}(k) = k^{-2} int_0^k q N(q) dq and flux
// N_F(k) = int_0^k q^2 N'(q) dq have closed forms used throughout.

struct NonlinearitySpec {
  double strength = 0.0;  // lambda_N >= 0; 0 disables the term
};

double nl_value(const NonlinearitySpec& nl, double k);  // N(k)
double nl_f0(const NonlinearitySpec& nl, double k);     // N_{F,0}(k)
double nl_f(const NonlinearitySpec& nl, double k);      // N_F(k)

Eigen::ArrayXd nl_values(const NonlinearitySpec& nl, const Eigen::ArrayXd& k);
Eigen::ArrayXd nl_f0_values(const NonlinearitySpec& nl, const Eigen::ArrayXd& k);
Eigen::ArrayXd nl_f_values(const NonlinearitySpec& nl, const Eigen::ArrayXd& k);

}  // namespace rssl

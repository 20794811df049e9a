#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "rssl/grid.hpp"
#include "rssl/model.hpp"

// Time propagation: second-order Strang splitting with the kinetic factor in
// the sine basis and every multiplicative term (scaled potential at the step
// midpoint, static defect potential, centrifugal barrier, saturating
// nonlinearity on the current modulus) as a diagonal phase. All factors are
// unitary, so mass is conserved to roundoff regardless of step size.
namespace rssl {

enum class SystemKind {
  free_only,   // i dpsi/dt = H0 psi
  autonomous,  // H0 + V(r) static (+ optional static W)
  linear,      // H0 + g(t)^{-2} V(r/g(t))
  mixture,     // H0 + W(r) + g(t)^{-2} V(r/g(t))
  nonlinear,   // H0 + g(t)^{-2} V(r/g(t)) + N(|psi|)
};

class Propagator {
 public:
  Propagator(const RadialGrid& grid, SystemKind kind, std::optional<ScalingProfile> profile,
             std::optional<PotentialSpec> v, std::optional<PotentialSpec> w,
             NonlinearitySpec nl, double dt);

  void set_state(const RadialField& f, double t);
  const RadialField& state() const { return field_; }
  double t() const;
  double dt() const { return dt_; }
  void set_dt(double dt);
  SystemKind kind() const { return kind_; }
  const std::optional<ScalingProfile>& profile() const { return profile_; }
  const NonlinearitySpec& nonlinearity() const { return nl_; }

  void step();
  // Steps to the whole-step time nearest t_target (never backwards).
  void advance_to(double t_target);

  // Multiplicative potential at time t as the stepper sees it (scaled V plus
  // static parts, no centrifugal term) — reused by ledgers and diagnostics.
  Eigen::ArrayXd potential_at(double t) const;
  // d/dt of the scaled-potential part at time t (zero when V is static).
  Eigen::ArrayXd potential_time_derivative_at(double t) const;

  struct EnergyRow {
    double t = 0.0;
    double mass = 0.0;
    double kinetic = 0.0;     // (psi, H0 psi) >= 0, centrifugal included
    double pot_scaled = 0.0;  // (psi, g^{-2}V(./g) psi)
    double pot_static = 0.0;  // (psi, W psi)
    double nl_form = 0.0;     // (psi, N(|psi|) psi)
    double nl_mean2 = 0.0;    // (psi, 2 N_{F,0}(|psi|) psi)
    double g_identity = 0.0;  // nl_form - nl_mean2  (the integral of N_F)
    double g0_source = 0.0;   // (psi, d/dt[g^{-2}V(./g)] psi)
    double g0_accum = 0.0;    // int_{t0}^{t} g0_source, trapezoid at step rate
    double h1 = 0.0;
  };
  // The asymptotic-energy ledger: kinetic + pot_scaled + pot_static + nl_mean2
  // drifts only through the accumulated g0_source integral.
  EnergyRow ledger_row() const;

 private:
  void refresh_kinetic_phase();
  double current_source() const;

  RadialGrid grid_;
  SystemKind kind_;
  std::optional<ScalingProfile> profile_;
  std::optional<PotentialSpec> v_, w_;
  NonlinearitySpec nl_;
  double dt_;
  double anchor_t_ = 0.0;
  long long steps_ = 0;
  double source_accum_ = 0.0;  // trapezoid of g0_source over completed steps
  double last_g0_ = 0.0;       // g0_source at the current state (left endpoint)
  RadialField field_;
  Eigen::ArrayXd centrifugal_;
  Eigen::ArrayXd static_pot_;        // static potential parts (V and/or W)
  Eigen::ArrayXcd kinetic_phase_;    // exp(-i dt kappa^2)
  Eigen::ArrayXd reduction_weights_;
};

// e^{-i tau H0} f. Exact single-shot phase multiplication in dimension 3; in
// higher dimensions the centrifugal barrier is split-stepped with sub-steps of
// at most max_substep (0 picks the default cap).
RadialField free_flow(const RadialField& f, double tau, double max_substep = 0.0);

// (||f||^2 + (f, -Laplacian f))^{1/2}
double h1_norm(const RadialField& f);

using Observer = std::function<void(const Propagator&)>;

// Runs the propagator, invoking every observer at each scheduled time (rounded
// to whole steps), then continues to t_end. Schedule must increase strictly.
void evolve_with_observers(Propagator& ps, double t_end, const std::vector<double>& schedule,
                           const std::vector<Observer>& observers);

}  // namespace rssl

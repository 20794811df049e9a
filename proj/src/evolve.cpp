#include "rssl/evolve.hpp"

#include <cmath>
#include <cstddef>

#include "rssl/spectral.hpp"

namespace rssl {

namespace {

// exp(-i arg) elementwise; each factor has modulus exactly 1 in floating
// point, which is what makes the splitting conserve mass to roundoff.
Eigen::ArrayXcd conjugate_phase(const Eigen::ArrayXd& arg) {
  return arg.unaryExpr([](double a) { return Complex(std::cos(a), -std::sin(a)); });
}

bool has_scaled_potential(SystemKind k) {
  return k == SystemKind::linear || k == SystemKind::mixture || k == SystemKind::nonlinear;
}

}  // namespace

Propagator::Propagator(const RadialGrid& grid, SystemKind kind,
                       std::optional<ScalingProfile> profile, std::optional<PotentialSpec> v,
                       std::optional<PotentialSpec> w, NonlinearitySpec nl, double dt)
    : grid_(grid),
      kind_(kind),
      profile_(std::move(profile)),
      v_(std::move(v)),
      w_(std::move(w)),
      nl_(nl),
      dt_(dt) {
  if (dt_ == 0.0) {
    throw ConfigError("propagator time step must be nonzero");
  }
  if (has_scaled_potential(kind_)) {
    if (!profile_) throw ConfigError("scaled-potential system needs a scaling profile");
    if (!v_) throw ConfigError("scaled-potential system needs a potential");
  }
  if (kind_ == SystemKind::autonomous && !v_) {
    throw ConfigError("autonomous system needs a potential");
  }
  if (kind_ == SystemKind::mixture && !w_) {
    throw ConfigError("mixture system needs a static defect potential");
  }

  centrifugal_ = centrifugal_values(grid_);
  static_pot_ = Eigen::ArrayXd::Zero(grid_.npoints);
  if (kind_ == SystemKind::autonomous) {
    static_pot_ += potential_values(*v_, grid_.r);
    if (w_) static_pot_ += potential_values(*w_, grid_.r);
  } else if (kind_ == SystemKind::mixture) {
    static_pot_ += potential_values(*w_, grid_.r);
  }
  reduction_weights_ = reduction_weights(grid_);
  field_ = make_field(grid_);
  refresh_kinetic_phase();
}

void Propagator::refresh_kinetic_phase() {
  kinetic_phase_ = conjugate_phase(dt_ * dst_frequencies(grid_).square());
}

void Propagator::set_state(const RadialField& f, double t) {
  require_same_grid(grid_, f.grid);
  field_ = f;
  anchor_t_ = t;
  steps_ = 0;
  source_accum_ = 0.0;
  last_g0_ = current_source();
}

double Propagator::current_source() const {
  if (!has_scaled_potential(kind_)) return 0.0;
  const Eigen::ArrayXd dens = grid_.dr * field_.v.array().abs2();
  return (scaled_potential_time_derivative(*v_, *profile_, t(), grid_.r) * dens).sum();
}

double Propagator::t() const { return anchor_t_ + static_cast<double>(steps_) * dt_; }

void Propagator::set_dt(double dt) {
  if (dt == 0.0) {
    throw ConfigError("propagator time step must be nonzero");
  }
  anchor_t_ = t();
  steps_ = 0;
  dt_ = dt;
  refresh_kinetic_phase();
}

Eigen::ArrayXd Propagator::potential_at(double t) const {
  Eigen::ArrayXd pot = static_pot_;
  if (has_scaled_potential(kind_)) {
    pot += scaled_potential_values(*v_, *profile_, t, grid_.r);
  }
  return pot;
}

Eigen::ArrayXd Propagator::potential_time_derivative_at(double t) const {
  if (has_scaled_potential(kind_)) {
    return scaled_potential_time_derivative(*v_, *profile_, t, grid_.r);
  }
  return Eigen::ArrayXd::Zero(grid_.npoints);
}

void Propagator::step() {
  const double half = 0.5 * dt_;
  Eigen::ArrayXd diag = centrifugal_ + static_pot_;
  if (has_scaled_potential(kind_)) {
    // Sampling the time-dependent potential at the step midpoint keeps the
    // splitting second order for non-autonomous flows.
    diag += scaled_potential_values(*v_, *profile_, t() + half, grid_.r);
  }

  if (kind_ == SystemKind::nonlinear) {
    const Eigen::ArrayXd amp = field_.v.array().abs() / reduction_weights_;
    field_.v.array() *= conjugate_phase(half * (diag + nl_values(nl_, amp)));
  } else {
    field_.v.array() *= conjugate_phase(half * diag);
  }

  dst_inplace(field_.v);
  field_.v.array() *= kinetic_phase_;
  dst_inplace(field_.v);
  field_.v *= dst_norm_factor(grid_.npoints);

  if (kind_ == SystemKind::nonlinear) {
    // The modulus changed under the kinetic factor; the second half-phase
    // re-evaluates the saturated nonlinearity on the current state.
    const Eigen::ArrayXd amp = field_.v.array().abs() / reduction_weights_;
    field_.v.array() *= conjugate_phase(half * (diag + nl_values(nl_, amp)));
  } else {
    field_.v.array() *= conjugate_phase(half * diag);
  }

  ++steps_;

  if (has_scaled_potential(kind_)) {
    // Trapezoid of the source term at step resolution: observation rows are
    // far too sparse to integrate (psi, d/dt[g^{-2}V(./g)] psi) once the state
    // carries fast internal oscillation.
    const double g0_now = current_source();
    source_accum_ += 0.5 * dt_ * (last_g0_ + g0_now);
    last_g0_ = g0_now;
  }
}

void Propagator::advance_to(double t_target) {
  long long k = std::llround((t_target - t()) / dt_);
  for (long long i = 0; i < k; ++i) step();
}

Propagator::EnergyRow Propagator::ledger_row() const {
  EnergyRow row;
  row.t = t();
  row.mass = mass(field_);
  row.kinetic = kinetic_form(field_);
  const Eigen::ArrayXd dens = grid_.dr * field_.v.array().abs2();
  if (has_scaled_potential(kind_)) {
    row.pot_scaled = (scaled_potential_values(*v_, *profile_, row.t, grid_.r) * dens).sum();
    row.g0_source =
        (scaled_potential_time_derivative(*v_, *profile_, row.t, grid_.r) * dens).sum();
    row.g0_accum = source_accum_;
  }
  if (static_pot_.size() > 0 && (kind_ == SystemKind::autonomous || kind_ == SystemKind::mixture)) {
    row.pot_static = (static_pot_ * dens).sum();
  }
  if (kind_ == SystemKind::nonlinear) {
    const Eigen::ArrayXd amp = field_.v.array().abs() / reduction_weights_;
    row.nl_form = (nl_values(nl_, amp) * dens).sum();
    row.nl_mean2 = 2.0 * (nl_f0_values(nl_, amp) * dens).sum();
    row.g_identity = row.nl_form - row.nl_mean2;
  }
  row.h1 = std::sqrt(row.mass + row.kinetic);
  return row;
}

RadialField free_flow(const RadialField& f, double tau, double max_substep) {
  RadialField out = f;
  if (tau == 0.0) return out;
  const RadialGrid& g = f.grid;
  const Eigen::ArrayXd kappa2 = dst_frequencies(g).square();
  const double nf = dst_norm_factor(g.npoints);

  if (g.dim == 3) {
    // No centrifugal term: one exact phase multiplication in the sine basis.
    dst_inplace(out.v);
    out.v.array() *= conjugate_phase(tau * kappa2);
    dst_inplace(out.v);
    out.v *= nf;
    return out;
  }

  double cap = max_substep;
  if (cap <= 0.0) {
    const double np1 = static_cast<double>(g.npoints + 1);
    cap = std::min(0.1 * g.dr * g.dr * np1 * np1 / M_PI, 0.5);
  }
  const long long nsub =
      std::max<long long>(1, static_cast<long long>(std::ceil(std::abs(tau) / cap)));
  const double h = tau / static_cast<double>(nsub);
  const Eigen::ArrayXcd kin = conjugate_phase(h * kappa2);
  const Eigen::ArrayXcd half_centrifugal = conjugate_phase(0.5 * h * centrifugal_values(g));
  for (long long i = 0; i < nsub; ++i) {
    out.v.array() *= half_centrifugal;
    dst_inplace(out.v);
    out.v.array() *= kin;
    dst_inplace(out.v);
    out.v *= nf;
    out.v.array() *= half_centrifugal;
  }
  return out;
}

double h1_norm(const RadialField& f) { return std::sqrt(mass(f) + kinetic_form(f)); }

void evolve_with_observers(Propagator& ps, double t_end, const std::vector<double>& schedule,
                           const std::vector<Observer>& observers) {
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (!(schedule[i] > schedule[i - 1])) {
      throw ConfigError("observation schedule must increase strictly");
    }
  }
  if (!schedule.empty() && schedule.back() > t_end * (1.0 + 1e-12)) {
    throw ConfigError("observation schedule extends beyond the final time");
  }
  for (double s : schedule) {
    ps.advance_to(s);
    for (const auto& observe : observers) observe(ps);
  }
  ps.advance_to(t_end);
}

}  // namespace rssl

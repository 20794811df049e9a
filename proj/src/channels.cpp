#include "rssl/channels.hpp"

#include <cmath>
#include <cstdio>

namespace rssl {

namespace {

Eigen::ArrayXd cutoff_profile(const Eigen::ArrayXd& y, double width) {
  return 0.5 * (1.0 - ((y - 1.0) / width).tanh());
}

void require_positive_time(const CutoffSpec& spec, double t) {
  if (spec.exponent != 0.0 && !(t > 0.0)) {
    throw ConfigError("time-power cutoff needs t > 0");
  }
}

}  // namespace

double cutoff_radius(const CutoffSpec& spec, double t) {
  require_positive_time(spec, t);
  return spec.radius_scale * std::pow(t, spec.exponent);
}

Eigen::ArrayXd cutoff_values(const CutoffSpec& spec, double t, const RadialGrid& g) {
  return cutoff_profile(g.r / cutoff_radius(spec, t), spec.width);
}

Eigen::ArrayXd cutoff_time_derivative_values(const CutoffSpec& spec, double t,
                                             const RadialGrid& g) {
  require_positive_time(spec, t);
  if (spec.exponent == 0.0) return Eigen::ArrayXd::Zero(g.npoints);
  const Eigen::ArrayXd y = g.r / cutoff_radius(spec, t);
  // d/dt F((y-1)/w) with y = r / (R t^a): dy/dt = -a y / t, and
  // F'(u) = -sech^2(u)/(2w), so the derivative is nonnegative for a > 0.
  const Eigen::ArrayXd sech2 = 1.0 - ((y - 1.0) / spec.width).tanh().square();
  return sech2 * (spec.exponent / (2.0 * spec.width * t)) * y;
}

RadialField cutoff_apply(const CutoffSpec& spec, double t, const RadialField& f) {
  RadialField out = f;
  out.v.array() *= cutoff_values(spec, t, f.grid).cast<Complex>();
  return out;
}

RadialField cutoff_complement_apply(const CutoffSpec& spec, double t, const RadialField& f) {
  RadialField out = f;
  out.v.array() *= (1.0 - cutoff_values(spec, t, f.grid)).cast<Complex>();
  return out;
}

double alpha_window_max(int dim) { return dim == 3 ? 1.0 / 3.0 : 2.0 / dim; }

double beta_window_max(int dim, double epsilon) {
  return 1.0 - 2.0 / dim - 2.0 * (dim - 2) * epsilon / dim;
}

void warn_if_outside_window(const char* name, double value, double max_value) {
  if (!(value > 0.0) || !(value < max_value)) {
    std::fprintf(stderr, "warning: %s = %.6g outside the admissible window (0, %.6g)\n", name,
                 value, max_value);
  }
}

Complex channel_amplitude(const BoundState& b, const RadialField& psi, double t,
                          const ScalingProfile& prof) {
  return inner_with_dilated(b.state, prof.g(t), psi);
}

Complex gauged_amplitude(double eigenvalue, double s, Complex a) {
  const double phase = eigenvalue * s;
  return Complex(std::cos(phase), std::sin(phase)) * a;
}

RadialField free_channel_projection(const RadialField& psi, double t,
                                    const CutoffSpec& alpha_cut, double free_substep) {
  warn_if_outside_window("alpha", alpha_cut.exponent, alpha_window_max(psi.grid.dim));
  RadialField w = free_flow(psi, -t, free_substep);
  w.v.array() *= cutoff_values(alpha_cut, t, psi.grid).cast<Complex>();
  return w;
}

RadialField weakly_localized_part(const RadialField& psi, double t, const CutoffSpec& alpha_cut,
                                  double free_substep) {
  RadialField out = psi;
  out.v -= free_flow(free_channel_projection(psi, t, alpha_cut, free_substep), t, free_substep).v;
  return out;
}

WeakLocalizationNorms weak_localization_norm(const RadialField& psi, double t,
                                             const CutoffSpec& beta_cut,
                                             const ScalingProfile& prof, double free_substep) {
  const double g = prof.g(t);
  warn_if_outside_window("beta", beta_cut.exponent,
                         beta_window_max(psi.grid.dim, prof.epsilon()));
  const RadialField w = free_flow(psi, -prof.time_map(t) * g * g, free_substep);
  WeakLocalizationNorms norms;
  CutoffSpec moved = beta_cut;
  moved.radius_scale = beta_cut.radius_scale * g;
  norms.primary = norm(cutoff_apply(moved, t, w));
  norms.doubly_dilated = norm(cutoff_apply(beta_cut, t, w));
  return norms;
}

Complex bubble_coefficient(const BoundState& b, const RadialField& psi_wl, double t,
                           const ScalingProfile& prof) {
  return inner_with_dilated(b.state, prof.g(t), psi_wl);
}

BubbleSplit bubble_split(const BoundState& b, const RadialField& psi_wl, double t,
                         const ScalingProfile& prof) {
  BubbleSplit split;
  RadialField dilated = resample(b.state, prof.g(t));
  split.c = inner(dilated, psi_wl);
  // Dividing by the dilated state's actual squared norm (1 up to interpolation
  // error) makes the remainder orthogonal to it at roundoff level.
  split.c_proj = split.c / mass(dilated);
  split.remainder = psi_wl;
  split.remainder.v -= split.c_proj * dilated.v;
  split.ortho_residual = std::abs(inner(dilated, split.remainder));
  split.bubble = std::move(dilated);
  split.bubble.v *= split.c_proj;
  return split;
}

Complex second_bubble_overlap(const BoundState& d, const RadialField& psi_c) {
  return inner(d.state, psi_c);
}

double local_mass(const RadialField& psi, double radius) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < psi.grid.npoints; ++j) {
    if (psi.grid.r[j] <= radius) acc += std::norm(psi.v[j]);
  }
  return std::sqrt(psi.grid.dr * acc);
}

void PropagationLedger::record(const Propagator& ps) {
  const RadialField& psi = ps.state();
  const double t = ps.t();
  if (!(t > 0.0)) {
    throw ConfigError("propagation ledger needs t > 0");
  }
  if (mass0_ < 0.0) mass0_ = mass(psi);

  const RadialField w = free_flow(psi, -t, free_substep_);
  const Eigen::ArrayXd fc = cutoff_values(cut_, t, psi.grid);
  const Eigen::ArrayXd dfc = cutoff_time_derivative_values(cut_, t, psi.grid);

  Eigen::ArrayXd interaction = ps.potential_at(t);
  if (ps.kind() == SystemKind::nonlinear) {
    interaction += nl_values(ps.nonlinearity(), amplitude(psi));
  }
  RadialField vpsi = psi;
  vpsi.v.array() *= interaction.cast<Complex>();
  const RadialField z = free_flow(vpsi, -t, free_substep_);

  Row row;
  row.t = t;
  const Eigen::ArrayXd w2 = w.v.array().abs2();
  row.expectation = psi.grid.dr * (fc * w2).sum();
  row.a1 = psi.grid.dr * (dfc * w2).sum();
  const Complex wfz = psi.grid.dr * (w.v.array().conjugate() * fc.cast<Complex>() * z.v.array()).sum();
  row.a2 = Complex(0.0, -1.0) * wfz;
  rows_.push_back(std::move(row));
}

PropagationLedger::Totals PropagationLedger::totals() const {
  Totals tot;
  tot.mass0 = mass0_ < 0.0 ? 0.0 : mass0_;
  for (std::size_t i = 1; i < rows_.size(); ++i) {
    const double h = rows_[i].t - rows_[i - 1].t;
    tot.int_a1 += 0.5 * h * (rows_[i].a1 + rows_[i - 1].a1);
    tot.int_abs_a2 += 0.5 * h * (std::abs(rows_[i].a2) + std::abs(rows_[i - 1].a2));
  }
  tot.int_abs_a3 = tot.int_abs_a2;  // A3 = conj(A2)
  return tot;
}

WeakLimitProbe::WeakLimitProbe(const RadialGrid& grid, const PotentialSpec& v,
                               std::vector<RadialField> dictionary, double ds) {
  if (dictionary.empty()) {
    throw ConfigError("weak-limit probe needs a nonempty dictionary");
  }
  props_.reserve(dictionary.size());
  for (auto& chi : dictionary) {
    Propagator p(grid, SystemKind::autonomous, std::nullopt, v, std::nullopt, NonlinearitySpec{},
                 ds);
    p.set_state(chi, 0.0);
    props_.push_back(std::move(p));
  }
}

namespace {
// Advance to the exact target time: whole steps, then one fractional step.
void advance_exact(Propagator& p, double target) {
  const double dt0 = p.dt();
  const double span = target - p.t();
  if (span <= 0.0) return;
  const long long whole = static_cast<long long>(std::floor(span / dt0));
  for (long long i = 0; i < whole; ++i) p.step();
  const double rem = target - p.t();
  if (rem > 1e-13 * std::max(1.0, std::abs(target))) {
    p.set_dt(rem);
    p.step();
    p.set_dt(dt0);
  }
}
}  // namespace

void WeakLimitProbe::observe(const RadialField& psi, double t, const ScalingProfile& prof) {
  Row row;
  row.t = t;
  row.s = prof.time_map(t);
  const double g = prof.g(t);
  row.overlaps.reserve(props_.size());
  for (auto& p : props_) {
    advance_exact(p, row.s);
    row.overlaps.push_back(inner_with_dilated(p.state(), g, psi));
  }
  rows_.push_back(std::move(row));
}

}  // namespace rssl

#include "rssl/spectral.hpp"

#include <cmath>
#include <limits>

#include "rssl/errors.hpp"
#include "rssl/snapshot.hpp"

namespace rssl {

Eigen::ArrayXd centrifugal_values(const RadialGrid& g) {
  const double c = 0.25 * (g.dim - 1) * (g.dim - 3);
  return c / g.r.square();
}

StaticHamiltonian make_hamiltonian(const RadialGrid& g, const PotentialSpec& v) {
  return StaticHamiltonian{g, potential_values(v, g.r)};
}

StaticHamiltonian free_hamiltonian(const RadialGrid& g) {
  return StaticHamiltonian{g, Eigen::ArrayXd::Zero(g.npoints)};
}

namespace {

// -d^2/dr^2 via the sine basis: involutive transform pair with the 2/(N+1)
// normalization folded into the return trip.
Eigen::VectorXcd second_derivative_form(const RadialGrid& g, const Eigen::VectorXcd& v,
                                        const Eigen::ArrayXd& kappa2) {
  Eigen::VectorXcd w = dst(v);
  w.array() *= kappa2.cast<Complex>();
  dst_inplace(w);
  return dst_norm_factor(g.npoints) * w;
}

// y = (K + diag) x with K the kinetic term including nothing else; diag is the
// full multiplicative part (centrifugal + potential - shift, as the caller
// assembled it).
Eigen::VectorXcd apply_shifted(const RadialGrid& g, const Eigen::ArrayXd& diag,
                               const Eigen::ArrayXd& kappa2, const Eigen::VectorXcd& x) {
  Eigen::VectorXcd y = second_derivative_form(g, x, kappa2);
  y.array() += diag.cast<Complex>() * x.array();
  return y;
}

struct CgResult {
  Eigen::VectorXcd x;
  double rel_residual = 0.0;
  int iterations = 0;
};

// Preconditioned conjugate gradients for the positive-definite shifted
// operator, optionally restricted to the complement of one unit vector.
// The preconditioner inverts the kinetic diagonal kappa^2 + precond_shift.
CgResult pcg(const RadialGrid& g, const Eigen::ArrayXd& diag, const Eigen::VectorXcd& b_in,
             double precond_shift, const Eigen::VectorXcd* deflate, double rtol,
             int max_iter) {
  const Eigen::ArrayXd kappa2 = dst_frequencies(g).square();
  const Eigen::ArrayXd pinv = 1.0 / (kappa2 + precond_shift);
  const double factor = dst_norm_factor(g.npoints);

  auto project = [&](Eigen::VectorXcd& x) {
    if (deflate) x -= (deflate->dot(x)) * (*deflate);
  };
  auto apply_a = [&](const Eigen::VectorXcd& x) {
    Eigen::VectorXcd xp = x;
    project(xp);
    Eigen::VectorXcd y = apply_shifted(g, diag, kappa2, xp);
    project(y);
    return y;
  };
  auto apply_m_inv = [&](const Eigen::VectorXcd& r) {
    Eigen::VectorXcd z = dst(r);
    z.array() *= pinv.cast<Complex>();
    dst_inplace(z);
    z *= factor;
    project(z);
    return z;
  };

  Eigen::VectorXcd b = b_in;
  project(b);
  const double bnorm = b.norm();
  CgResult out;
  out.x = Eigen::VectorXcd::Zero(g.npoints);
  if (bnorm == 0.0) return out;

  Eigen::VectorXcd r = b;
  Eigen::VectorXcd z = apply_m_inv(r);
  Eigen::VectorXcd p = z;
  double rz = std::real(r.dot(z));
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXcd ap = apply_a(p);
    const double pap = std::real(p.dot(ap));
    if (!(pap > 0.0)) break;  // lost positive definiteness: report residual as is
    const double alpha = rz / pap;
    out.x += alpha * p;
    r -= alpha * ap;
    out.iterations = it + 1;
    if (r.norm() <= rtol * bnorm) break;
    z = apply_m_inv(r);
    const double rz_next = std::real(r.dot(z));
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  project(out.x);
  out.rel_residual = (b - apply_a(out.x)).norm() / bnorm;
  return out;
}

struct DiagOperator {
  const RadialGrid& grid;
  Eigen::ArrayXd diag;    // centrifugal + potential
  Eigen::ArrayXd kappa2;
};

DiagOperator make_diag_operator(const RadialGrid& g, const Eigen::ArrayXd& potential) {
  return DiagOperator{g, centrifugal_values(g) + potential, dst_frequencies(g).square()};
}

RadialField apply_diag_operator(const DiagOperator& op, const RadialField& f) {
  RadialField out{f.grid, apply_shifted(op.grid, op.diag, op.kappa2, f.v)};
  return out;
}

double rayleigh(const DiagOperator& op, const RadialField& f) {
  return std::real(inner(f, apply_diag_operator(op, f))) / mass(f);
}

double residual_norm(const DiagOperator& op, const RadialField& f, double lambda) {
  RadialField hf = apply_diag_operator(op, f);
  hf.v -= lambda * f.v;
  return norm(hf) / norm(f);
}

// Ground state of K + diag by imaginary-time relaxation then shifted inverse
// iteration. seed_width sets the initial Gaussian's scale; a warm-start field
// (when given) replaces the Gaussian and shortens the relaxation phase.
BoundState ground_state_of_diag(const RadialGrid& g, const Eigen::ArrayXd& potential,
                                double seed_width, const RadialField* warm = nullptr,
                                double target_res = 2e-12) {
  const DiagOperator op = make_diag_operator(g, potential);
  const double w2 = 2.0 * seed_width * seed_width;
  RadialField w = warm ? *warm : reduce(g, [w2](double r) {
    return Complex(std::exp(-r * r / w2), 0.0);
  });
  w.v /= norm(w);

  const double depth = std::max(1.0, potential.abs().maxCoeff());
  const double tau = 0.1 / depth;
  const Eigen::ArrayXd half_pot = (-0.5 * tau * op.diag).exp();
  const Eigen::ArrayXd kin = (-tau * op.kappa2).exp();
  const double factor = dst_norm_factor(g.npoints);

  double lambda = 0.0, res = std::numeric_limits<double>::infinity();
  const int max_relax = 20000;
  double res_prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_relax; ++it) {
    w.v.array() *= half_pot.cast<Complex>();
    dst_inplace(w.v);
    w.v.array() *= kin.cast<Complex>();
    dst_inplace(w.v);
    w.v *= factor;
    w.v.array() *= half_pot.cast<Complex>();
    w.v /= norm(w);
    if (it % 10 == 9) {
      lambda = rayleigh(op, w);
      res = residual_norm(op, w, lambda);
      if (res < 1e-4) break;
      // The splitting error leaves a residual floor ~tau^2 * commutator; once
      // the decay stalls there with a negative level in hand (a safe shift for
      // inverse iteration), the polish below finishes far more cheaply. While
      // the Rayleigh quotient is still nonnegative, keep relaxing: marginal
      // wells approach their level slowly and must not be misread as unbound.
      if (it >= 499 && res > 0.95 * res_prev && lambda < 0.0) break;
      res_prev = res;
    }
  }
  if (!(lambda < 0.0)) {
    throw NoBoundState("relaxation found no negative level (Rayleigh quotient " +
                       std::to_string(lambda) + ")");
  }

  // Inverse iteration with a shift safely below the variational estimate,
  // driven to its roundoff floor: every extra round also damps the continuum
  // noise left in the far tail by the relaxation phase (resampling budgets
  // depend on that tail staying below 1e-12 of the peak).
  const double rtol = std::clamp(1e-3 * target_res, 1e-13, 1e-8);
  for (int outer = 0; outer < 60 && res > target_res; ++outer) {
    const double shift = lambda - std::max(0.05 * std::abs(lambda), 1e-3);
    const Eigen::ArrayXd shifted = op.diag - shift;
    const CgResult sol = pcg(g, shifted, w.v, -shift, nullptr, rtol, 20000);
    if (!(sol.x.norm() > 0.0)) break;
    w.v = sol.x / (std::sqrt(g.dr) * sol.x.norm());
    const double prev = res;
    lambda = rayleigh(op, w);
    res = residual_norm(op, w, lambda);
    if (res >= 0.7 * prev) break;  // stagnated at the floor
  }
  if (!(lambda < 0.0)) throw NoBoundState("inverse iteration drifted to a nonnegative level");

  // Phase convention: real with positive peak, unit norm.
  Eigen::Index peak = 0;
  w.v.cwiseAbs().maxCoeff(&peak);
  if (w.v[peak].real() < 0.0) w.v = -w.v;
  w.v /= norm(w);
  lambda = rayleigh(op, w);
  const double final_res = residual_norm(op, w, lambda);
  return BoundState{std::move(w), lambda, final_res};
}

}  // namespace

RadialField apply_hamiltonian(const StaticHamiltonian& h, const RadialField& f) {
  require_same_grid(h.grid, f.grid);
  return apply_diag_operator(make_diag_operator(h.grid, h.potential), f);
}

double kinetic_form(const RadialField& f) {
  const RadialGrid& g = f.grid;
  const Eigen::VectorXcd w = dst(f.v);
  const Eigen::ArrayXd kappa2 = dst_frequencies(g).square();
  const double spectral =
      g.dr * dst_norm_factor(g.npoints) * (kappa2 * w.array().abs2()).sum();
  const double barrier = g.dr * (centrifugal_values(g) * f.v.array().abs2()).sum();
  return spectral + barrier;
}

double rayleigh_quotient(const StaticHamiltonian& h, const RadialField& f) {
  return std::real(inner(f, apply_hamiltonian(h, f))) / mass(f);
}

BoundState solve_bound_state(const RadialGrid& g, const PotentialSpec& v) {
  const double seed = v.kind == PotentialSpec::Kind::gaussian_well
                          ? 0.5 + 1.5 * v.width
                          : 0.25 * v.tab_r[v.tab_r.size() - 1];
  return ground_state_of_diag(g, potential_values(v, g.r), seed);
}

BoundState solve_soliton(const RadialGrid& g, const NonlinearitySpec& nl, double mass_target) {
  if (!(nl.strength > 0.0)) throw NoSoliton("nonlinearity strength must be positive");
  if (!(mass_target > 0.0)) throw ConfigError("soliton mass target must be positive");
  const double amp = std::sqrt(mass_target);

  // Seed ladder, wide to narrow. At fixed mass a narrower profile has larger
  // amplitude; below the saturation knee that deepens the mean field, while
  // far above it the well instead shallows like 1/amplitude, so binding can
  // appear at either end — the ladder spans both regimes.
  RadialField w = make_field(g);
  bool seeded = false;
  for (const double sw : {4.0, 3.0, 2.0, 1.5, 1.0, 0.7, 0.5, 0.35, 0.25}) {
    RadialField trial =
        reduce(g, [sw](double r) { return Complex(std::exp(-r * r / (2.0 * sw * sw)), 0.0); });
    trial.v *= amp / norm(trial);
    try {
      (void)ground_state_of_diag(g, 2.0 * nl_f0_values(nl, amplitude(trial)), sw);
      w = std::move(trial);
      seeded = true;
      break;
    } catch (const NoBoundState&) {
    }
  }
  if (!seeded) {
    throw NoSoliton("mean-field operator binds at no seed width (strength too small)");
  }

  double delta = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 300 && delta > 1e-11; ++it) {
    // The inner eigensolve only needs to stay ahead of the outer contraction;
    // full drive-to-floor accuracy is deferred until delta itself is small.
    const double inner_res = std::clamp(0.01 * delta, 1e-12, 1e-6);
    const Eigen::ArrayXd diag = 2.0 * nl_f0_values(nl, amplitude(w));
    BoundState gs = [&] {
      try {
        return ground_state_of_diag(g, diag, 1.5, it == 0 ? nullptr : &w, inner_res);
      } catch (const NoBoundState&) {
        throw NoSoliton("mean-field operator lost its negative level during iteration");
      }
    }();
    RadialField next = gs.state;
    next.v *= amp;
    RadialField mixed{g, 0.5 * (w.v + next.v)};
    mixed.v *= amp / norm(mixed);
    delta = (mixed.v - w.v).norm() * std::sqrt(g.dr) / amp;
    w = std::move(mixed);
  }
  if (delta > 1e-9) throw NoSoliton("self-consistent iteration failed to contract");

  const DiagOperator op = make_diag_operator(g, 2.0 * nl_f0_values(nl, amplitude(w)));
  const double e = rayleigh(op, w);
  if (!(e < 0.0)) throw NoSoliton("converged profile has nonnegative energy level");
  return BoundState{w, e, residual_norm(op, w, e)};
}

BoundState solve_soliton_energy(const RadialGrid& g, const NonlinearitySpec& nl,
                                double energy_target) {
  if (!(energy_target < 0.0)) throw NoSoliton("soliton energy target must be negative");
  double m0 = 0.5, m1 = 1.0;
  BoundState s0 = solve_soliton(g, nl, m0);
  BoundState s1 = solve_soliton(g, nl, m1);
  double e0 = s0.eigenvalue, e1 = s1.eigenvalue;
  for (int it = 0; it < 40; ++it) {
    if (std::abs(e1 - energy_target) <= 1e-8 * std::max(1.0, std::abs(energy_target)))
      return s1;
    const double de = e1 - e0;
    double m2 = std::abs(de) > 1e-15 ? m1 + (energy_target - e1) * (m1 - m0) / de : 2.0 * m1;
    m2 = std::min(std::max(m2, 0.05 * m1), 20.0 * m1);  // keep the step sane
    m0 = m1;
    e0 = e1;
    m1 = m2;
    s1 = solve_soliton(g, nl, m1);
    e1 = s1.eigenvalue;
  }
  throw NoSoliton("energy-target search did not converge");
}

RadialField project_continuous(const BoundState& b, const RadialField& f) {
  require_same_grid(b.state.grid, f.grid);
  RadialField out = f;
  out.v -= (inner(b.state, f) / mass(b.state)) * b.state.v;
  return out;
}

RadialField apply_resolvent(const BoundState& b, const StaticHamiltonian& h,
                            const RadialField& f) {
  require_same_grid(b.state.grid, f.grid);
  require_same_grid(h.grid, f.grid);
  const RadialGrid& g = f.grid;
  const double lambda = b.eigenvalue;

  const RadialField pcf = project_continuous(b, f);
  // (lambda - H) x = P_c f  <=>  (H - lambda) x = -P_c f, solved on the
  // orthogonal complement of psi_b where H - lambda is positive definite.
  const Eigen::ArrayXd diag = centrifugal_values(g) + h.potential - lambda;
  Eigen::VectorXcd deflate = b.state.v * std::sqrt(g.dr);  // Euclidean unit vector
  deflate /= deflate.norm();
  const CgResult sol = pcg(g, diag, -pcf.v, -lambda, &deflate, 1e-10, 50000);

  RadialField x{g, sol.x};
  x = project_continuous(b, x);
  RadialField back = apply_hamiltonian(h, x);
  back.v = lambda * x.v - back.v;  // (lambda - H) x
  const double res = std::sqrt(mass(RadialField{g, back.v - pcf.v}));
  if (res > 1e-8 * std::max(norm(f), 1e-300)) {
    throw SolveDiverged("resolvent solve stalled at relative residual " +
                        std::to_string(res / std::max(norm(f), 1e-300)));
  }
  return x;
}

void write_bound_state(const std::string& path, const BoundState& b) {
  write_snapshot(path, b.state, b.eigenvalue, /*eigenvalue_slot=*/true);
}

BoundState read_bound_state(const std::string& path) {
  Snapshot s = read_snapshot(path);
  if (!s.eigenvalue_slot) {
    throw Error("snapshot at " + path + " does not carry an eigenvalue");
  }
  return BoundState{std::move(s.field), s.t, std::numeric_limits<double>::quiet_NaN()};
}

}  // namespace rssl

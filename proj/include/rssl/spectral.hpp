#pragma once

#include <string>

#include "rssl/grid.hpp"
#include "rssl/model.hpp"

// Static-operator layer: H = -Laplacian + potential on the reduced radial
// field (the Laplacian contributes the spectral kinetic term plus the
// centrifugal barrier (n-1)(n-3)/(4 r^2)), ground-state and soliton solvers,
// the continuous-spectrum projection, and a deflated resolvent solve.
namespace rssl {

// Centrifugal barrier samples; identically zero in dimension 3.
Eigen::ArrayXd centrifugal_values(const RadialGrid& g);

struct StaticHamiltonian {
  RadialGrid grid;
  Eigen::ArrayXd potential;  // V(r_j); the centrifugal term is added by apply
};

StaticHamiltonian make_hamiltonian(const RadialGrid& g, const PotentialSpec& v);
StaticHamiltonian free_hamiltonian(const RadialGrid& g);

RadialField apply_hamiltonian(const StaticHamiltonian& h, const RadialField& f);

// (f, -Laplacian f) >= 0, spectral + centrifugal quadratic form.
double kinetic_form(const RadialField& f);
// real (f, H f) / (f, f)
double rayleigh_quotient(const StaticHamiltonian& h, const RadialField& f);

struct BoundState {
  RadialField state;        // unit norm, real phase, positive peak
  double eigenvalue = 0.0;  // < 0
  double residual = 0.0;    // ||H state - eigenvalue state||
};

// Ground state of H = H0 + V: split-step imaginary-time relaxation with
// per-step renormalization until the Rayleigh residual drops below 1e-4,
// then shifted inverse iteration (preconditioned CG) down to residual 1e-9.
// Throws NoBoundState when the Rayleigh quotient never goes negative.
BoundState solve_bound_state(const RadialGrid& g, const PotentialSpec& v);

// Soliton of (H0 + 2 N_{F,0}(|psi|)) psi = E psi at fixed mass, by
// self-consistent ground-state iteration with damped mixing. The returned
// eigenvalue slot holds E < 0. Throws NoSoliton when strength is zero, the
// iteration fails to contract, or E comes out nonnegative.
BoundState solve_soliton(const RadialGrid& g, const NonlinearitySpec& nl,
                         double mass_target = 1.0);
// Secant search on the mass target so the soliton lands on a requested E.
BoundState solve_soliton_energy(const RadialGrid& g, const NonlinearitySpec& nl,
                                double energy_target);

// P_c f = f - (psi_b, f) psi_b / ||psi_b||^2 (single bound state).
RadialField project_continuous(const BoundState& b, const RadialField& f);

// x solving (eigenvalue - H) x = P_c f with (psi_b, x) = 0, by deflated
// preconditioned CG on H - eigenvalue restricted to the continuous subspace
// (positive definite there). Throws SolveDiverged.
RadialField apply_resolvent(const BoundState& b, const StaticHamiltonian& h,
                            const RadialField& f);

// RSSL snapshot round-trip with the eigenvalue stored in the t slot.
void write_bound_state(const std::string& path, const BoundState& b);
BoundState read_bound_state(const std::string& path);

}  // namespace rssl

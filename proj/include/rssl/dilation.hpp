#pragma once

#include "rssl/grid.hpp"
#include "rssl/model.hpp"
#include "rssl/spectral.hpp"

// The L^2-unitary scaling group, its generator, and the change of frame that
// turns the scaled potential static: phi(s) = g(t)^{1/2} psi(t, g(t) r) with
// s = T(t), which solves i d/ds phi = (H0 + V) phi + f(s) D phi.
namespace rssl {

// e^{-iD ln a} f: the reduced field a^{-1/2} v(r/a) (profile a^{-n/2} u(x/a)).
// Realized by spline resampling — unitary up to interpolation error.
RadialField apply_dilation(const RadialField& f, double scale);

// Generator D = -i (r d/dr + 1/2) on reduced fields; the radial derivative is
// spectral (sine coefficients evaluated as a cosine series).
RadialField apply_D(const RadialField& f);

struct FramePair {
  RadialField lab;          // psi
  double t = 0.0;
  RadialField transformed;  // phi = e^{+iD ln g(t)} psi
  double s = 0.0;           // T(t)
  ScalingProfile profile;
};

// phi = apply_dilation(psi, 1/g(t)) (the e^{+iD ln g} convention), s = T(t).
FramePair to_transformed_frame(const RadialField& psi, double t, const ScalingProfile& prof);
// psi = apply_dilation(phi, g(t)) at t = T^{-1}(s).
FramePair from_transformed_frame(const RadialField& phi, double s, const ScalingProfile& prof);

// Finite-difference check of the transformed-frame equation on three
// consecutive checkpoints a, b, c (s_a < s_b < s_c, any spacing):
// || d/ds phi |_b + i[(H0+V) phi_b + f(s_b) D phi_b] || / ||(H0+V) phi_b + f D phi_b||.
// h is the static-frame Hamiltonian (potential V, not scaled).
double frame_ode_residual(const FramePair& a, const FramePair& b, const FramePair& c,
                          const StaticHamiltonian& h);

}  // namespace rssl

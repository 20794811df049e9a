#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>

#include "rssl/errors.hpp"

// Half-line staggered grid and reduced radial fields.
//
// A radial function u on R^n is stored through its reduced form
//
//     v(r) = c_n r^{(n-1)/2} u(r),   c_n = sqrt(surface area of S^{n-1}),
//
// so that ||v||_{L^2(0,r_max)} = ||u||_{L^2(R^n)} and the radial part of the
// Laplacian becomes -d^2/dr^2 + (n-1)(n-3)/(4 r^2).  Samples live at
// r_j = (j+1) dr, j = 0..N-1, dr = r_max/(N+1): Dirichlet walls at r = 0 and
// r = r_max, which the type-I sine transform diagonalizes.
namespace rssl {

using Complex = std::complex<double>;

struct RadialGrid {
  int dim = 0;               // ambient dimension n >= 3
  Eigen::Index npoints = 0;  // N: interior points, power of two, >= 16
  double r_max = 0.0;
  double dr = 0.0;
  Eigen::ArrayXd r;          // r_j = (j+1) dr
};

// Validates dim/npoints/r_max; throws DimensionTooLow / NonPowerOfTwo /
// ConfigError (non-positive r_max).
RadialGrid make_grid(int dim, Eigen::Index npoints, double r_max);

bool same_grid(const RadialGrid& a, const RadialGrid& b);
void require_same_grid(const RadialGrid& a, const RadialGrid& b);

// Surface area of the unit sphere S^{n-1}: 2 pi^{n/2} / Gamma(n/2).
double sphere_area(int dim);

// c_n r_j^{(n-1)/2}: multiply a sampled radial profile by this to reduce it,
// divide to recover the amplitude |u| that nonlinearities act on.
Eigen::ArrayXd reduction_weights(const RadialGrid& g);

struct RadialField {
  RadialGrid grid;
  Eigen::VectorXcd v;  // reduced samples at grid.r
};

RadialField make_field(const RadialGrid& g);  // zero field

// Reduce a sampled (or callable) radial profile u to v = c_n r^{(n-1)/2} u.
RadialField reduce(const RadialGrid& g, const Eigen::VectorXcd& u_samples);
RadialField reduce(const RadialGrid& g, const std::function<Complex(double)>& u);

// Underlying amplitude samples |u(r_j)| (what saturated nonlinearities see).
Eigen::ArrayXd amplitude(const RadialField& f);

// dr-weighted inner product, conjugate-linear in the first slot.
Complex inner(const RadialField& a, const RadialField& b);
double mass(const RadialField& f);  // inner(f, f).real()
double norm(const RadialField& f);

// --- type-I discrete sine transform -----------------------------------------
//
// dst(v)_k = sum_j v_j sin(pi (j+1)(k+1) / (N+1)); applying it twice returns
// the input scaled by (N+1)/2, i.e. dst is involutive up to the factor
// dst_norm_factor(N) = 2/(N+1), and Parseval holds with the same factor.

Eigen::VectorXcd dst(const Eigen::VectorXcd& v);
void dst_inplace(Eigen::VectorXcd& v);
double dst_norm_factor(Eigen::Index npoints);

// Sine-mode frequencies kappa_k = (k+1) pi / r_max; the spectral kinetic
// operator multiplies mode k by kappa_k^2.
Eigen::ArrayXd dst_frequencies(const RadialGrid& g);

// Evaluate a cosine series sum_k w_k cos(kappa_k r_j) on the grid (companion
// transform used by the spectral radial derivative).
Eigen::VectorXcd cosine_series_on_grid(const RadialGrid& g, const Eigen::VectorXcd& w);

// --- rescaling ---------------------------------------------------------------

// L^2-unitary dilation realized by cubic-spline resampling of the underlying
// profile: v -> scale^{-1/2} v(r/scale) (i.e. u -> scale^{-n/2} u(x/scale)).
// The spline interpolates u on an evenly-mirrored knot set (radial profiles
// extend evenly through the origin) with natural end conditions.  For
// scale > 1 the content moves outward; if the source field has amplitude
// above 1e-12 (relative) beyond r_max/scale, throws ContentOverflow.
RadialField resample(const RadialField& f, double scale);

// Overlap of the dilated field scale^{-1/2} a(r/scale) with psi, computed by
// evaluating the spline of a directly under the quadrature sum (no dilated
// field is materialized, so spread psi and large scales are safe).
Complex inner_with_dilated(const RadialField& a, double scale, const RadialField& psi);

// --- natural cubic spline utility -------------------------------------------

class CubicSpline {
 public:
  CubicSpline() = default;
  // x strictly increasing; natural (zero second derivative) end conditions.
  CubicSpline(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y);
  // Evaluates inside [x_front, x_back]; queries outside return 0 (fields this
  // library interpolates decay below tolerance at the ends).
  double operator()(double q) const;
  double derivative(double q) const;

 private:
  Eigen::ArrayXd x_, y_, m_;  // m: second derivatives at knots
};

}  // namespace rssl

#pragma once

#include <complex>
#include <vector>

// Decay-rate and plateau fits over recorded diagnostic series.
namespace rssl {

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;  // of the line through (ln x, ln y)
  int npoints = 0;
};

// Least-squares line through (ln x, ln y); pairs with a nonpositive coordinate
// are skipped. Throws ConfigError with fewer than two usable points.
SlopeFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// d_i = max_{j >= i} |a_j - a_i|: sup-envelope of forward differences, the
// series the Cauchy-decay criteria fit against.
std::vector<double> cauchy_envelope(const std::vector<std::complex<double>>& a);

// Smallest C with envelope_i <= C / <s_i>, <s> = sqrt(1 + s^2).
double cauchy_constant(const std::vector<double>& s, const std::vector<double>& envelope);

struct PlateauReport {
  bool found = false;
  double value = 0.0;          // mean over the examined samples
  double rel_variation = 0.0;  // (max - min) / max
};
// A plateau is a positive-mean window whose relative variation is <= rel_tol.
PlateauReport detect_plateau(const std::vector<double>& samples, double rel_tol);

// Convergence order from two successive refinement differences
// (||u_h - u_{h/r}|| and ||u_{h/r} - u_{h/r^2}||): log(ratio)/log(r).
double observed_order(double diff_coarse, double diff_fine, double refinement = 2.0);

}  // namespace rssl

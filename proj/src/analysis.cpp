#include "rssl/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "rssl/errors.hpp"

namespace rssl {

SlopeFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw ConfigError("slope fit needs equally long abscissa and ordinate");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) {
    throw ConfigError("slope fit needs at least two positive samples");
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) {
    throw ConfigError("slope fit abscissa is degenerate");
  }
  SlopeFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.npoints = n;
  return fit;
}

std::vector<double> cauchy_envelope(const std::vector<std::complex<double>>& a) {
  std::vector<double> env(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    double sup = 0.0;
    for (std::size_t j = i; j < a.size(); ++j) {
      sup = std::max(sup, std::abs(a[j] - a[i]));
    }
    env[i] = sup;
  }
  return env;
}

double cauchy_constant(const std::vector<double>& s, const std::vector<double>& envelope) {
  if (s.size() != envelope.size()) {
    throw ConfigError("envelope and abscissa lengths differ");
  }
  double c = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    c = std::max(c, envelope[i] * std::sqrt(1.0 + s[i] * s[i]));
  }
  return c;
}

PlateauReport detect_plateau(const std::vector<double>& samples, double rel_tol) {
  PlateauReport rep;
  if (samples.empty()) return rep;
  const double lo = *std::min_element(samples.begin(), samples.end());
  const double hi = *std::max_element(samples.begin(), samples.end());
  if (!(hi > 0.0)) return rep;
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(samples.size());
  rep.value = mean;
  rep.rel_variation = (hi - lo) / hi;
  rep.found = rep.rel_variation <= rel_tol && mean > 0.0;
  return rep;
}

double observed_order(double diff_coarse, double diff_fine, double refinement) {
  if (!(diff_coarse > 0.0) || !(diff_fine > 0.0) || !(refinement > 1.0)) {
    throw ConfigError("order estimate needs positive differences and refinement > 1");
  }
  return std::log(diff_coarse / diff_fine) / std::log(refinement);
}

}  // namespace rssl

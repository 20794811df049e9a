#include "rssl/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace rssl {

namespace {

bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

RadialGrid make_grid(int dim, Eigen::Index npoints, double r_max) {
  if (dim < 3) throw DimensionTooLow("grid dimension must be >= 3, got " + std::to_string(dim));
  if (npoints < 16 || !is_power_of_two(npoints))
    throw NonPowerOfTwo("grid needs a power-of-two point count >= 16, got " +
                        std::to_string(npoints));
  if (!(r_max > 0.0)) throw ConfigError("grid r_max must be positive");
  RadialGrid g;
  g.dim = dim;
  g.npoints = npoints;
  g.r_max = r_max;
  g.dr = r_max / static_cast<double>(npoints + 1);
  g.r = g.dr * Eigen::ArrayXd::LinSpaced(npoints, 1.0, static_cast<double>(npoints));
  return g;
}

bool same_grid(const RadialGrid& a, const RadialGrid& b) {
  return a.dim == b.dim && a.npoints == b.npoints && a.r_max == b.r_max;
}

void require_same_grid(const RadialGrid& a, const RadialGrid& b) {
  if (!same_grid(a, b)) throw GridMismatch("fields live on different grids");
}

double sphere_area(int dim) {
  return 2.0 * std::pow(M_PI, 0.5 * dim) / std::tgamma(0.5 * dim);
}

Eigen::ArrayXd reduction_weights(const RadialGrid& g) {
  const double c_n = std::sqrt(sphere_area(g.dim));
  return c_n * g.r.pow(0.5 * (g.dim - 1));
}

RadialField make_field(const RadialGrid& g) {
  return RadialField{g, Eigen::VectorXcd::Zero(g.npoints)};
}

RadialField reduce(const RadialGrid& g, const Eigen::VectorXcd& u_samples) {
  if (u_samples.size() != g.npoints) throw GridMismatch("reduce: sample count != grid points");
  RadialField f{g, u_samples};
  f.v.array() *= reduction_weights(g).cast<Complex>();
  return f;
}

RadialField reduce(const RadialGrid& g, const std::function<Complex(double)>& u) {
  Eigen::VectorXcd s(g.npoints);
  for (Eigen::Index j = 0; j < g.npoints; ++j) s[j] = u(g.r[j]);
  return reduce(g, s);
}

Eigen::ArrayXd amplitude(const RadialField& f) {
  return f.v.array().abs() / reduction_weights(f.grid);
}

Complex inner(const RadialField& a, const RadialField& b) {
  require_same_grid(a.grid, b.grid);
  return a.grid.dr * a.v.dot(b.v);  // Eigen dot conjugates the first argument
}

double mass(const RadialField& f) { return f.grid.dr * f.v.squaredNorm(); }

double norm(const RadialField& f) { return std::sqrt(mass(f)); }

//=============================================================================
// DST-I backend
//
// FFTW's RODFT00 computes 2 * sum_j v_j sin(pi (j+1)(k+1)/(N+1)); we divide
// by two to get the plain sine sum.  Plans are created once per size under a
// mutex (FFTW planning is not reentrant) with FFTW_ESTIMATE so the algorithm
// choice — and therefore the output bit pattern — does not depend on runtime
// timing.  Real and imaginary parts ride through one plan as an interleaved
// pair (howmany = 2, stride 2).
//=============================================================================

namespace {

class TransformPlans {
 public:
  static const TransformPlans& get(Eigen::Index npoints) {
    static std::mutex mu;
    static std::map<Eigen::Index, std::unique_ptr<TransformPlans>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[npoints];
    if (!slot) slot.reset(new TransformPlans(npoints));
    return *slot;
  }

  void sine(Complex* data) const {
    fftw_execute_r2r(sine_plan_, reinterpret_cast<double*>(data),
                     reinterpret_cast<double*>(data));
  }

  void cosine(Complex* data) const {  // length npoints + 2
    fftw_execute_r2r(cosine_plan_, reinterpret_cast<double*>(data),
                     reinterpret_cast<double*>(data));
  }

  ~TransformPlans() {
    fftw_destroy_plan(sine_plan_);
    fftw_destroy_plan(cosine_plan_);
  }

 private:
  explicit TransformPlans(Eigen::Index npoints) {
    const int n = static_cast<int>(npoints);
    Eigen::VectorXcd scratch(npoints + 2);
    double* p = reinterpret_cast<double*>(scratch.data());
    const int ns[1] = {n};
    const fftw_r2r_kind sine_kind[1] = {FFTW_RODFT00};
    sine_plan_ = fftw_plan_many_r2r(1, ns, 2, p, nullptr, 2, 1, p, nullptr, 2, 1, sine_kind,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
    const int nc[1] = {n + 2};
    const fftw_r2r_kind cos_kind[1] = {FFTW_REDFT00};
    cosine_plan_ = fftw_plan_many_r2r(1, nc, 2, p, nullptr, 2, 1, p, nullptr, 2, 1, cos_kind,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
  }

  fftw_plan sine_plan_ = nullptr;
  fftw_plan cosine_plan_ = nullptr;
};

}  // namespace

void dst_inplace(Eigen::VectorXcd& v) {
  TransformPlans::get(v.size()).sine(v.data());
  v *= 0.5;
}

Eigen::VectorXcd dst(const Eigen::VectorXcd& v) {
  Eigen::VectorXcd out = v;
  dst_inplace(out);
  return out;
}

double dst_norm_factor(Eigen::Index npoints) { return 2.0 / static_cast<double>(npoints + 1); }

Eigen::ArrayXd dst_frequencies(const RadialGrid& g) {
  return (M_PI / g.r_max) *
         Eigen::ArrayXd::LinSpaced(g.npoints, 1.0, static_cast<double>(g.npoints));
}

Eigen::VectorXcd cosine_series_on_grid(const RadialGrid& g, const Eigen::VectorXcd& w) {
  // REDFT00 of length N+2 gives Y_j = X_0 + (-1)^j X_{N+1}
  //                                   + 2 sum_{k=1}^{N} X_k cos(pi j k/(N+1));
  // with X_0 = X_{N+1} = 0 and X_k = w_{k-1}/2 the interior outputs Y_{j+1}
  // are exactly sum_k w_k cos(kappa_k r_j).
  if (w.size() != g.npoints) throw GridMismatch("cosine series: coefficient count");
  Eigen::VectorXcd buf(g.npoints + 2);
  buf[0] = Complex(0, 0);
  buf.segment(1, g.npoints) = 0.5 * w;
  buf[g.npoints + 1] = Complex(0, 0);
  TransformPlans::get(g.npoints).cosine(buf.data());
  return buf.segment(1, g.npoints);
}

//=============================================================================
// Natural cubic spline
//=============================================================================

CubicSpline::CubicSpline(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y) : x_(x), y_(y) {
  const Eigen::Index n = x.size();
  m_ = Eigen::ArrayXd::Zero(n);
  if (n < 3) return;
  // Thomas solve of the standard tridiagonal system for interior second
  // derivatives; natural conditions pin m_0 = m_{n-1} = 0.
  Eigen::ArrayXd diag(n), rhs(n), sub(n);
  diag[0] = 1.0;
  rhs[0] = 0.0;
  sub[0] = 0.0;
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const double h0 = x[i] - x[i - 1];
    const double h1 = x[i + 1] - x[i];
    sub[i] = h0;
    diag[i] = 2.0 * (h0 + h1);
    rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
  }
  // forward sweep (upper diagonal of row i is h1 = x[i+1]-x[i])
  for (Eigen::Index i = 2; i + 1 < n; ++i) {
    const double w = sub[i] / diag[i - 1];
    const double upper_prev = x[i] - x[i - 1];
    diag[i] -= w * upper_prev;
    rhs[i] -= w * rhs[i - 1];
  }
  for (Eigen::Index i = n - 2; i >= 1; --i) {
    const double upper = x[i + 1] - x[i];
    const double mnext = (i + 2 < n) ? m_[i + 1] : 0.0;
    m_[i] = (rhs[i] - upper * mnext) / diag[i];
  }
}

double CubicSpline::operator()(double q) const {
  const Eigen::Index n = x_.size();
  if (n == 0) return 0.0;
  if (q < x_[0] || q > x_[n - 1]) return 0.0;
  // binary search for the knot interval
  Eigen::Index lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    const Eigen::Index mid = (lo + hi) / 2;
    (x_[mid] <= q ? lo : hi) = mid;
  }
  const double h = x_[hi] - x_[lo];
  const double a = (x_[hi] - q) / h;
  const double b = (q - x_[lo]) / h;
  return a * y_[lo] + b * y_[hi] +
         ((a * a * a - a) * m_[lo] + (b * b * b - b) * m_[hi]) * (h * h) / 6.0;
}

double CubicSpline::derivative(double q) const {
  const Eigen::Index n = x_.size();
  if (n == 0) return 0.0;
  if (q < x_[0] || q > x_[n - 1]) return 0.0;
  Eigen::Index lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    const Eigen::Index mid = (lo + hi) / 2;
    (x_[mid] <= q ? lo : hi) = mid;
  }
  const double h = x_[hi] - x_[lo];
  const double a = (x_[hi] - q) / h;
  const double b = (q - x_[lo]) / h;
  return (y_[hi] - y_[lo]) / h +
         (-(3.0 * a * a - 1.0) * m_[lo] + (3.0 * b * b - 1.0) * m_[hi]) * h / 6.0;
}

//=============================================================================
// Resampling dilation
//=============================================================================

namespace {

constexpr Eigen::Index kMirrorKnots = 8;       // even extension through r = 0
constexpr double kOverflowMassFraction = 1e-12;  // relative tail-mass budget

// Spline pair (re, im) of the underlying profile u = v / (c_n r^a) on
// mirrored knots.  c_n cancels against the re-reduction, so it is omitted.
struct ProfileSplines {
  CubicSpline re, im;
};

ProfileSplines underlying_splines(const RadialField& f) {
  const RadialGrid& g = f.grid;
  const double a = 0.5 * (g.dim - 1);
  const Eigen::Index n = g.npoints;
  const Eigen::Index m = std::min(kMirrorKnots, n);
  Eigen::ArrayXd x(n + m), yre(n + m), yim(n + m);
  const Eigen::ArrayXd ra = g.r.pow(a);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index src = m - 1 - i;
    x[i] = -g.r[src];
    yre[i] = f.v[src].real() / ra[src];
    yim[i] = f.v[src].imag() / ra[src];
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    x[m + j] = g.r[j];
    yre[m + j] = f.v[j].real() / ra[j];
    yim[m + j] = f.v[j].imag() / ra[j];
  }
  return ProfileSplines{CubicSpline(x, yre), CubicSpline(x, yim)};
}

}  // namespace

RadialField resample(const RadialField& f, double scale) {
  const RadialGrid& g = f.grid;
  if (!(scale > 0.0)) throw ConfigError("resample: scale must be positive");
  if (scale > 1.0) {
    // Mass-based budget: tail mass of 1e-12 * ||f||^2 past the edge costs at
    // most 1e-6 * ||f|| in norm, the dilation ops' unitarity tolerance.
    const double cutoff = g.r_max / scale;
    const double total = mass(f);
    if (total > 0.0) {
      double tail = 0.0;
      for (Eigen::Index j = g.npoints - 1; j >= 0 && g.r[j] > cutoff; --j) {
        tail += g.dr * std::norm(f.v[j]);
      }
      if (tail > kOverflowMassFraction * total)
        throw ContentOverflow("resample: mass beyond r_max/scale exceeds the 1e-12 budget");
    }
  }
  const ProfileSplines s = underlying_splines(f);
  const double a = 0.5 * (g.dim - 1);
  const double amp = std::pow(scale, -0.5 * g.dim);
  RadialField out = make_field(g);
  for (Eigen::Index j = 0; j < g.npoints; ++j) {
    const double q = g.r[j] / scale;
    const double w = amp * std::pow(g.r[j], a);
    out.v[j] = Complex(w * s.re(q), w * s.im(q));
  }
  return out;
}

Complex inner_with_dilated(const RadialField& a, double scale, const RadialField& psi) {
  require_same_grid(a.grid, psi.grid);
  if (!(scale > 0.0)) throw ConfigError("inner_with_dilated: scale must be positive");
  const RadialGrid& g = a.grid;
  const ProfileSplines s = underlying_splines(a);
  const double p = 0.5 * (g.dim - 1);
  const double amp = std::pow(scale, -0.5 * g.dim);
  Complex acc(0, 0);
  for (Eigen::Index j = 0; j < g.npoints; ++j) {
    const double q = g.r[j] / scale;
    const double w = amp * std::pow(g.r[j], p);
    acc += Complex(w * s.re(q), -w * s.im(q)) * psi.v[j];
  }
  return g.dr * acc;
}

}  // namespace rssl

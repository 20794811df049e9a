#include "rssl/model.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rssl/errors.hpp"

namespace rssl {
namespace {

// 16-point Gauss-Legendre rule on [-1, 1] (symmetric half listed).
constexpr int kGlHalf = 8;
constexpr double kGlNode[kGlHalf] = {
    0.09501250983763744, 0.28160355077925891, 0.45801677765722739,
    0.61787624440264375, 0.75540440835500303, 0.86563120238783174,
    0.94457502307323258, 0.98940093499164993};
constexpr double kGlWeight[kGlHalf] = {
    0.18945061045506850, 0.18260341504492359, 0.16915651939500254,
    0.14959598881657673, 0.12462897125553387, 0.09515851168249278,
    0.06225352393864789, 0.02715245941175409};

template <class F>
double gauss16(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < kGlHalf; ++i) {
    acc += kGlWeight[i] * (f(mid - half * kGlNode[i]) + f(mid + half * kGlNode[i]));
  }
  return half * acc;
}

// Switch point between the quadrature table and the power-law asymptote of T.
constexpr double kTableEnd = 1.0e6;
constexpr double kTableStart = 1.0e-4;
constexpr int kPanelsPerDecade = 32;

}  // namespace

struct ScalingProfile::Table {
  std::vector<double> node;  // panel edges, node[0] = 0
  std::vector<double> cum;   // cum[i] = T(node[i])
  double c_inf = 0.0;        // T(t) - t^{1-2e}/(1-2e) at the switch point
};

ScalingProfile::ScalingProfile(double epsilon) : eps_(epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 0.5)) {
    throw FailsConditions("scaling profile requires epsilon in (0, 1/2), got " +
                          std::to_string(epsilon));
  }
  auto table = std::make_shared<Table>();
  table->node.push_back(0.0);
  const double ratio = std::pow(10.0, 1.0 / kPanelsPerDecade);
  for (double t = kTableStart; t < kTableEnd * (1.0 + 1e-12); t *= ratio) {
    table->node.push_back(t);
  }
  table->node.back() = kTableEnd;  // guard against drift in the final edge
  const double e = eps_;
  auto integrand = [e](double u) { return std::pow(1.0 + u * u, -e); };
  table->cum.resize(table->node.size());
  table->cum[0] = 0.0;
  for (std::size_t i = 1; i < table->node.size(); ++i) {
    table->cum[i] =
        table->cum[i - 1] + gauss16(integrand, table->node[i - 1], table->node[i]);
  }
  const double p = 1.0 - 2.0 * e;
  table->c_inf = table->cum.back() - std::pow(kTableEnd, p) / p;
  table_ = std::move(table);
}

double ScalingProfile::g(double t) const { return std::pow(1.0 + t * t, 0.5 * eps_); }

double ScalingProfile::dg(double t) const {
  return eps_ * t * std::pow(1.0 + t * t, 0.5 * eps_ - 1.0);
}

double ScalingProfile::d2g(double t) const {
  const double q = 1.0 + t * t;
  return eps_ * std::pow(q, 0.5 * eps_ - 2.0) * (1.0 + (eps_ - 1.0) * t * t);
}

double ScalingProfile::time_map(double t) const {
  if (!(t >= 0.0)) throw Error("time_map requires t >= 0");
  const Table& tab = *table_;
  if (t > kTableEnd) {
    const double p = 1.0 - 2.0 * eps_;
    return std::pow(t, p) / p + tab.c_inf;
  }
  const auto it = std::upper_bound(tab.node.begin(), tab.node.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - tab.node.begin()) - 1;
  if (i + 1 >= tab.node.size() && t >= kTableEnd) return tab.cum.back();
  const double e = eps_;
  auto integrand = [e](double u) { return std::pow(1.0 + u * u, -e); };
  return tab.cum[i] + gauss16(integrand, tab.node[i], t);
}

double ScalingProfile::time_map_inverse(double s) const {
  if (!(s >= 0.0)) throw Error("time_map_inverse requires s >= 0");
  const Table& tab = *table_;
  const double p = 1.0 - 2.0 * eps_;
  if (s >= tab.cum.back()) {
    const double t = std::pow(p * (s - tab.c_inf), 1.0 / p);
    if (t >= kTableEnd) return t;
    // boundary fuzz: fall through to the table branch
  }
  const auto it = std::upper_bound(tab.cum.begin(), tab.cum.end(), s);
  std::size_t i = static_cast<std::size_t>(it - tab.cum.begin());
  if (i == 0) return 0.0;
  --i;
  if (i + 1 >= tab.node.size()) return kTableEnd;
  // Safeguarded Newton inside the bracketing panel; the integrand is the
  // exact derivative of time_map, so convergence is quadratic.
  double lo = tab.node[i], hi = tab.node[i + 1];
  double t = lo + (hi - lo) * (s - tab.cum[i]) /
                      std::max(tab.cum[i + 1] - tab.cum[i], 1e-300);
  for (int iter = 0; iter < 60; ++iter) {
    const double err = time_map(t) - s;
    if (err > 0.0) {
      hi = t;
    } else {
      lo = t;
    }
    const double step = err * std::pow(1.0 + t * t, eps_);
    double next = t - step;
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-14 * (1.0 + std::abs(t))) return next;
    t = next;
  }
  return t;
}

double ScalingProfile::f_of_s(double s) const {
  const double t = time_map_inverse(s);
  return -dg(t) * g(t);
}

GConditionReport check_g_conditions(const ScalingProfile& p) {
  GConditionReport rep;
  rep.epsilon = p.epsilon();
  rep.c_g_analytic = 1.0 - 2.0 * p.epsilon();
  const double t_far = 1e8;
  rep.c_g = (p.g(t_far) - 2.0 * t_far * p.dg(t_far)) / p.g(t_far);
  double sup1 = 0.0, sup2 = 0.0;
  bool positive = p.g(0.0) > 0.0;
  for (double t = 1e-4; t <= 1e8 * (1.0 + 1e-12); t *= std::pow(10.0, 0.125)) {
    const GValues v = p.g_eval(t);
    positive = positive && v.g > 0.0;
    sup1 = std::max(sup1, std::abs(t * v.dg / v.g));
    sup2 = std::max(sup2, std::abs(t * t * v.d2g / v.g));
  }
  rep.sup_tdg_over_g = sup1;
  rep.sup_t2d2g_over_g = sup2;
  if (!positive) {
    rep.violation = "g must stay positive";
  } else if (!(sup1 < 100.0) || !(sup2 < 100.0)) {
    rep.violation = "scaled derivatives t g'/g, t^2 g''/g must stay bounded";
  } else if (!(rep.c_g > 0.0) || !(rep.c_g < 1.0)) {
    rep.violation = "limit of (g - 2 t g')/g must lie in (0, 1)";
  } else if (std::abs(rep.c_g - rep.c_g_analytic) > 1e-4 * (1.0 + std::abs(rep.c_g_analytic))) {
    rep.violation = "limit of (g - 2 t g')/g disagrees with 1 - 2 epsilon";
  }
  rep.pass = rep.violation.empty();
  return rep;
}

void require_g_conditions(const ScalingProfile& p) {
  const GConditionReport rep = check_g_conditions(p);
  if (!rep.pass) throw FailsConditions("scaling profile rejected: " + rep.violation);
}

// --- potentials ---------------------------------------------------------------

PotentialSpec gaussian_well(double depth, double width) {
  if (!(depth > 0.0) || !(width > 0.0)) {
    throw ConfigError("gaussian well needs depth > 0 and width > 0");
  }
  PotentialSpec p;
  p.kind = PotentialSpec::Kind::gaussian_well;
  p.depth = depth;
  p.width = width;
  return p;
}

PotentialSpec tabulated_potential(const Eigen::ArrayXd& r, const Eigen::ArrayXd& v) {
  if (r.size() != v.size() || r.size() < 4) {
    throw ConfigError("tabulated potential needs >= 4 matching samples");
  }
  for (Eigen::Index i = 1; i < r.size(); ++i) {
    if (!(r[i] > r[i - 1])) throw ConfigError("tabulated potential radii must increase");
  }
  PotentialSpec p;
  p.kind = PotentialSpec::Kind::tabulated;
  p.tab_r = r;
  p.tab_v = v;
  p.tab_spline = std::make_shared<CubicSpline>(r, v);
  return p;
}

namespace {
const CubicSpline& potential_spline(const PotentialSpec& p) {
  if (!p.tab_spline) throw ConfigError("tabulated potential is missing its sample table");
  return *p.tab_spline;
}
}  // namespace

double potential_value(const PotentialSpec& p, double r) {
  if (p.kind == PotentialSpec::Kind::gaussian_well) {
    const double w = p.width;
    return -p.depth * std::exp(-r * r / (2.0 * w * w));
  }
  return potential_spline(p)(r);
}

Eigen::ArrayXd potential_values(const PotentialSpec& p, const Eigen::ArrayXd& r) {
  if (p.kind == PotentialSpec::Kind::gaussian_well) {
    const double w = p.width;
    return -p.depth * (-r.square() / (2.0 * w * w)).exp();
  }
  Eigen::ArrayXd out(r.size());
  const CubicSpline& s = potential_spline(p);
  for (Eigen::Index i = 0; i < r.size(); ++i) out[i] = s(r[i]);
  return out;
}

double potential_slope(const PotentialSpec& p, double r) {
  if (p.kind == PotentialSpec::Kind::gaussian_well) {
    const double w = p.width;
    return p.depth * r / (w * w) * std::exp(-r * r / (2.0 * w * w));
  }
  return potential_spline(p).derivative(r);
}

double potential_l2_norm(const PotentialSpec& p, int dim) {
  if (dim < 3) throw DimensionTooLow("potential norms are taken in dimension >= 3");
  if (p.kind == PotentialSpec::Kind::gaussian_well) {
    // ||V||^2 = depth^2 * pi^{n/2} * width^n
    return p.depth * std::pow(std::sqrt(M_PI) * p.width, 0.5 * dim);
  }
  const CubicSpline& s = potential_spline(p);
  const double hi = p.tab_r[p.tab_r.size() - 1];
  auto f = [&](double r) { return s(r) * s(r) * std::pow(r, dim - 1); };
  double acc = 0.0;
  const int panels = 512;
  for (int i = 0; i < panels; ++i) {
    acc += gauss16(f, hi * i / panels, hi * (i + 1) / panels);
  }
  return std::sqrt(sphere_area(dim) * acc);
}

double potential_weighted_sup(const PotentialSpec& p) {
  const double hi = p.kind == PotentialSpec::Kind::gaussian_well
                        ? 30.0 * p.width
                        : p.tab_r[p.tab_r.size() - 1];
  double sup = 0.0;
  const int samples = 60000;
  for (int i = 0; i <= samples; ++i) {
    const double r = hi * i / samples;
    sup = std::max(sup, (1.0 + r) * std::abs(potential_value(p, r)));
  }
  return sup;
}

Eigen::ArrayXd scaled_potential_values(const PotentialSpec& p, const ScalingProfile& prof,
                                       double t, const Eigen::ArrayXd& r) {
  const double gv = prof.g(t);
  return potential_values(p, (r / gv).eval()) / (gv * gv);
}

Eigen::ArrayXd scaled_potential_time_derivative(const PotentialSpec& p,
                                                const ScalingProfile& prof, double t,
                                                const Eigen::ArrayXd& r) {
  const double gv = prof.g(t);
  const double dgv = prof.dg(t);
  Eigen::ArrayXd out(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double rho = r[i] / gv;
    out[i] = -dgv / (gv * gv * gv) *
             (2.0 * potential_value(p, rho) + rho * potential_slope(p, rho));
  }
  return out;
}

// --- saturated nonlinearity ----------------------------------------------------

namespace {
// k - atan(k), summed as a series for small k to dodge the cancellation.
double k_minus_atan(double k) {
  const double a = std::abs(k);
  if (a >= 0.5) return k - std::atan(k);
  double term = k * k * k / 3.0;  // first series term
  double acc = term;
  const double m = -k * k;
  for (int j = 1; j < 48; ++j) {
    term *= m;
    const double contrib = term * (3.0 / (2.0 * j + 3.0));
    acc += contrib;
    if (std::abs(contrib) < 1e-18 * std::abs(acc)) break;
  }
  return acc;
}
}  // namespace

namespace {
void require_nonneg_amplitude(double k) {
  if (k < 0.0) throw ConfigError("nonlinearity argument is a modulus and must be >= 0");
}
}  // namespace

double nl_value(const NonlinearitySpec& nl, double k) {
  require_nonneg_amplitude(k);
  return -nl.strength * k / (1.0 + k * k);
}

double nl_f0(const NonlinearitySpec& nl, double k) {
  require_nonneg_amplitude(k);
  // Below 1e-4 use the series of (k - atan k)/k^2 directly: forming k^2 first
  // underflows for subnormal k and turns the removable singularity into 0/0.
  if (k < 1e-4) return -nl.strength * k * (1.0 / 3.0 - k * k / 5.0);
  return -nl.strength * k_minus_atan(k) / (k * k);
}

double nl_f(const NonlinearitySpec& nl, double k) {
  require_nonneg_amplitude(k);
  return -nl.strength * k * k * k / (1.0 + k * k) + 2.0 * nl.strength * k_minus_atan(k);
}

Eigen::ArrayXd nl_values(const NonlinearitySpec& nl, const Eigen::ArrayXd& k) {
  if (k.size() > 0) require_nonneg_amplitude(k.minCoeff());
  return -nl.strength * k / (1.0 + k.square());
}

Eigen::ArrayXd nl_f0_values(const NonlinearitySpec& nl, const Eigen::ArrayXd& k) {
  Eigen::ArrayXd out(k.size());
  for (Eigen::Index i = 0; i < k.size(); ++i) out[i] = nl_f0(nl, k[i]);
  return out;
}

Eigen::ArrayXd nl_f_values(const NonlinearitySpec& nl, const Eigen::ArrayXd& k) {
  Eigen::ArrayXd out(k.size());
  for (Eigen::Index i = 0; i < k.size(); ++i) out[i] = nl_f(nl, k[i]);
  return out;
}

}  // namespace rssl

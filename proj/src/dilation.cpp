#include "rssl/dilation.hpp"

namespace rssl {

RadialField apply_dilation(const RadialField& f, double scale) {
  if (!(scale > 0.0)) {
    throw ConfigError("dilation scale must be positive");
  }
  return resample(f, scale);
}

RadialField apply_D(const RadialField& f) {
  const RadialGrid& g = f.grid;
  // True sine coefficients of v, then d/dr as the matching cosine series.
  Eigen::VectorXcd coeff = dst(f.v) * dst_norm_factor(g.npoints);
  coeff.array() *= dst_frequencies(g).cast<Complex>();
  const Eigen::VectorXcd dv = cosine_series_on_grid(g, coeff);
  RadialField out{g, Eigen::VectorXcd(g.npoints)};
  const Complex mi(0.0, -1.0);
  out.v = mi * (g.r.cast<Complex>() * dv.array() + 0.5 * f.v.array()).matrix();
  return out;
}

FramePair to_transformed_frame(const RadialField& psi, double t, const ScalingProfile& prof) {
  FramePair pair{psi, t, RadialField{}, 0.0, prof};
  pair.transformed = apply_dilation(psi, 1.0 / prof.g(t));
  pair.s = prof.time_map(t);
  return pair;
}

FramePair from_transformed_frame(const RadialField& phi, double s, const ScalingProfile& prof) {
  const double t = prof.time_map_inverse(s);
  FramePair pair{RadialField{}, t, phi, s, prof};
  pair.lab = apply_dilation(phi, prof.g(t));
  return pair;
}

double frame_ode_residual(const FramePair& a, const FramePair& b, const FramePair& c,
                          const StaticHamiltonian& h) {
  require_same_grid(b.transformed.grid, a.transformed.grid);
  require_same_grid(b.transformed.grid, c.transformed.grid);
  if (!(a.s < b.s && b.s < c.s)) {
    throw ConfigError("frame checkpoints must have strictly increasing s");
  }
  const double hm = b.s - a.s;
  const double hp = c.s - b.s;
  // Three-point derivative on a nonuniform stencil, second-order accurate.
  const Eigen::VectorXcd deriv =
      (hm * hm * c.transformed.v - hp * hp * a.transformed.v +
       (hp * hp - hm * hm) * b.transformed.v) /
      (hm * hp * (hm + hp));

  RadialField rhs = apply_hamiltonian(h, b.transformed);
  const RadialField dphi = apply_D(b.transformed);
  rhs.v += b.profile.f_of_s(b.s) * dphi.v;

  const Complex mi(0.0, -1.0);
  const double defect = std::sqrt(b.transformed.grid.dr) * (deriv - mi * rhs.v).norm();
  const double scale = std::sqrt(b.transformed.grid.dr) * rhs.v.norm();
  return defect / scale;
}

}  // namespace rssl

#include "gnslab/functionals.hpp"

#include <cmath>
#include <vector>

#include "gnslab/errors.hpp"

namespace gnslab {

double functional_F(const GridFunction& u, const GnsParams& params) {
  const double grad = grad_lp_norm(u, params.p);
  return std::pow(grad, params.p) + lr_norm_pow(u, params.s);
}

double functional_G(const GridFunction& u, const GnsParams& params) {
  const double grad = grad_lp_norm(u, params.p);
  const double ns = lr_norm(u, params.s);
  return std::pow(grad, params.theta) * std::pow(ns, 1.0 - params.theta);
}

double scale_lambda_min(double A, double B, const GnsParams& params) {
  if (!(A > 0.0) || !(B > 0.0)) {
    throw ValidationError("scale minimization requires A > 0 and B > 0");
  }
  const double a = params.a_exp;
  const double b = params.b_exp;
  return std::pow(-b / a * B / A, 1.0 / (a - b));
}

double scale_min_closed_form(double A, double B, const GnsParams& params) {
  const double G = std::pow(A, params.theta / params.p) *
                   std::pow(B, (1.0 - params.theta) / params.s);
  return params.eta0 * std::pow(G, params.k_exp);
}

DeficitReport deficit(const GridFunction& u, const GnsParams& params,
                      double G_const) {
  if (!std::isfinite(G_const) || G_const <= 0.0) {
    throw ValidationError("reference constant must be finite and positive");
  }
  DeficitReport r;
  r.grad_p = grad_lp_norm(u, params.p);
  r.norm_s = lr_norm(u, params.s);
  r.norm_q = lr_norm(u, params.q);
  if (r.norm_q <= 0.0) {
    throw ValidationError("deficit of the zero function is undefined");
  }
  r.G_value = std::pow(r.grad_p, params.theta) *
              std::pow(r.norm_s, 1.0 - params.theta);
  r.delta = r.G_value / (G_const * r.norm_q) - 1.0;
  r.boundary_mass_fraction = boundary_mass_fraction(u, params.q);
  return r;
}

ScaleResult normalize_scale(const GridFunction& u, const GnsParams& params) {
  const double grad = grad_lp_norm(u, params.p);
  const double A = std::pow(grad, params.p);
  const double B = lr_norm_pow(u, params.s);
  if (A <= 0.0) {
    throw ValidationError(
        "scale normalization rejects functions with zero gradient");
  }
  if (B <= 0.0) {
    throw ValidationError("scale normalization rejects the zero function");
  }
  const double lam = scale_lambda_min(A, B, params);
  std::vector<double> center(u.dim(), 0.0);
  return ScaleResult{lam, rescale(u, lam, center, params.q)};
}

double sign_split_f(double t, const GnsParams& params) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw ValidationError("sign-split fraction t must lie in [0, 1]");
  }
  const double k = params.k_exp;
  const double e = k / params.q;
  return std::pow(std::pow(t, e) + std::pow(1.0 - t, e), 1.0 / k) - 1.0;
}

SignSplit sign_split_bound(const GridFunction& u, const GnsParams& params,
                           double G_const) {
  bool has_pos = false;
  bool has_neg = false;
  double pos_mass = 0.0;
  for (double v : u.values()) {
    if (v > 0.0) {
      has_pos = true;
      pos_mass += std::pow(v, params.q);
    } else if (v < 0.0) {
      has_neg = true;
    }
  }
  if (!has_pos || !has_neg) {
    throw ValidationError("sign-split bound requires a sign-changing function");
  }
  pos_mass *= u.cell_volume();
  const double total = lr_norm_pow(u, params.q);
  if (std::abs(total - 1.0) > 1e-8) {
    throw ValidationError(
        "sign-split bound requires unit q-norm (caller normalizes)");
  }
  SignSplit out;
  out.t = pos_mass / total;
  out.f_value = sign_split_f(out.t, params);
  out.delta = deficit(u, params, G_const).delta;
  return out;
}

}  // namespace gnslab

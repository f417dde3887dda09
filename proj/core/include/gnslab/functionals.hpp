#pragma once

#include "gnslab/gns_params.hpp"
#include "gnslab/grid_function.hpp"

namespace gnslab {

/// F(u) = ||grad u||_p^p + ||u||_s^s.
double functional_F(const GridFunction& u, const GnsParams& params);

/// G(u) = ||grad u||_p^theta * ||u||_s^(1-theta).
double functional_G(const GridFunction& u, const GnsParams& params);

/// argmin over lam > 0 of lam^a * A + lam^b * B, for A, B > 0.
double scale_lambda_min(double A, double B, const GnsParams& params);

/// The minimum value itself in closed form:
/// eta0 * (A^(theta/p) * B^((1-theta)/s))^k_exp.
double scale_min_closed_form(double A, double B, const GnsParams& params);

struct DeficitReport {
  double grad_p = 0.0;
  double norm_s = 0.0;
  double norm_q = 0.0;
  double G_value = 0.0;
  double delta = 0.0;
  double boundary_mass_fraction = 0.0;
};

/// delta(u) = G(u) / (G_const * ||u||_q) - 1 plus the norms that built it and
/// the fraction of |u|^q mass on the outermost cell layer (box-truncation
/// diagnostic). Errors on the zero function and on G_const <= 0.
DeficitReport deficit(const GridFunction& u, const GnsParams& params,
                      double G_const);

struct ScaleResult {
  double lambda_m = 1.0;
  GridFunction rescaled;
};

/// Optimal rescaling of u for F: lambda_m = (-b/a * B/A)^(1/(a-b)) with
/// A = ||grad u||_p^p, B = ||u||_s^s, and the resampled lambda_m^(n/q) *
/// u(lambda_m x). At lambda_m the scalar identity
/// lam^a A + lam^b B = eta0 * G(u)^k_exp holds. Rejects A = 0 (constants).
ScaleResult normalize_scale(const GridFunction& u, const GnsParams& params);

/// f(t) = (t^(k/q) + (1-t)^(k/q))^(1/k) - 1 with k = params.k_exp, t in [0,1].
/// Symmetric about 1/2, concave, zero at the endpoints.
double sign_split_f(double t, const GnsParams& params);

struct SignSplit {
  double t = 0.0;
  double f_value = 0.0;
  double delta = 0.0;
};

/// For sign-changing u with ||u||_q = 1 (caller normalizes): the positive-part
/// mass t = integral of (u+)^q, the lower bound f(t), and delta(u). The bound
/// f(t) <= delta(u) holds up to the error in G_const.
SignSplit sign_split_bound(const GridFunction& u, const GnsParams& params,
                           double G_const);

}  // namespace gnslab

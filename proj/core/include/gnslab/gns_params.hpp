#pragma once

#include <string>

namespace gnslab {

/// Admissible interpolation-inequality parameters and their derived exponents.
///
/// Domain: integer n >= 2, 1 < p < n, 1 <= s < q < p* where p* = np/(n-p).
/// Derived quantities:
///   theta     solves theta/p* + (1-theta)/s = 1/q, theta in (0, 1)
///   a_exp     = -n + p + np/q  (> 0), scaling power of the gradient term
///   b_exp     = -n + ns/q      (< 0), scaling power of the s-norm term
///   alpha_exp = (np + ps - ns)/(np + pq - ns), in (0, 1)
///   k_exp     = q * alpha_exp, in (0, q)
///   eta0      = lam^a_exp + lam^b_exp at lam = (-b_exp/a_exp)^(1/(a_exp-b_exp)),
///               the minimum of lam^a + lam^b over lam > 0
///   z_exp     = max(p, 2)
struct GnsParams {
  int n = 0;
  double p = 0.0;
  double s = 0.0;
  double q = 0.0;

  double p_star = 0.0;
  double theta = 0.0;
  double a_exp = 0.0;
  double b_exp = 0.0;
  double k_exp = 0.0;
  double alpha_exp = 0.0;
  double eta0 = 0.0;
  double z_exp = 0.0;
};

/// Validates the domain constraints (each violation reported separately) and
/// fills every derived field. Throws ValidationError.
GnsParams make_params(int n, double p, double s, double q);

/// min over lam > 0 of lam^params.a_exp + lam^params.b_exp.
double eta0_of(const GnsParams& params);

/// Serialized form carries base and derived fields; parsing revalidates by
/// recomputing the derived fields from (n, p, s, q) and comparing.
std::string params_to_json(const GnsParams& params);
GnsParams params_from_json(const std::string& text);

}  // namespace gnslab

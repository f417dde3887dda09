#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gnslab/asymmetry.hpp"
#include "gnslab/gns_params.hpp"
#include "gnslab/grid_function.hpp"
#include "gnslab/radial.hpp"

namespace gnslab {

/// One row of a perturbation sweep: u_eps = normalize(v + eps * w) probed for
/// deficit, asymmetry, rearrangement deficit, and box truncation.
struct ScanRecord {
  double eps = 0.0;
  double delta = 0.0;
  double lambda = 0.0;
  double delta_ps = 0.0;
  double boundary_mass = 0.0;
};

/// Perturbation directions w, all built around the embedded optimizer profile
/// v (unit q-norm) and normalized to unit q-norm themselves:
///  - radial_bump: exp(-(|x| - 1)^2 / 0.25), a radial ridge off the peak;
///  - translate:   -d/dx_0 of v (tangent to the translation orbit);
///  - dilate:      (n/q) v + sum_k x_k dv/dx_k (tangent to the dilation orbit);
///  - two_bump:    a copy of v displaced to (2.5, 0, ...);
///  - sign_flip:   -exp(-|x - (2, 0, ...)|^2 / 0.36), making u_eps change sign.
enum class Family { radial_bump, translate, dilate, two_bump, sign_flip };

/// Accepts the hyphenated CLI names (e.g. "radial-bump"); underscores work too.
Family family_from_name(const std::string& name);
std::string family_name(Family family);

/// The unit-q-norm direction w for the family on v_emb's grid.
GridFunction family_direction(Family family, const GridFunction& v_emb,
                              const GnsParams& params,
                              const OptimizerModel& model);

/// (v + eps * w) / ||v + eps * w||_q.
GridFunction perturbed_input(const GridFunction& v_emb, const GridFunction& w,
                             double eps, double q);

struct ScanInput {
  OptimizerModel model;
  std::vector<std::size_t> shape;
  std::vector<double> spacing;
  Family family = Family::radial_bump;
  /// Escape hatch: when set, this direction (q-normalized internally) is used
  /// instead of the named family. Must share the scan grid layout.
  std::optional<GridFunction> custom_w;
  /// Nonnegative, strictly increasing.
  std::vector<double> eps;
  SearchConfig search;
  int workers = 1;
};

/// One record per eps value, in eps order. A failing row is reported to
/// `diag` (when non-null) and dropped; it does not abort the sweep. Rows run
/// concurrently across `workers` threads; each row's asymmetry search gets a
/// seed derived from (search.seed, row), so results are independent of the
/// worker count.
std::vector<ScanRecord> run_scan(const ScanInput& input, std::ostream* diag);

/// Header "eps,delta,lambda,delta_ps,boundary_mass" + one row per record.
std::string records_to_csv(const std::vector<ScanRecord>& records);
std::vector<ScanRecord> records_from_csv(const std::string& text);

struct FitResult {
  /// Slope of log(lambda) on log(delta): lambda ~ delta^alpha_hat, so the
  /// stability exponent alpha in delta >= kappa * lambda^alpha is
  /// 1 / alpha_hat.
  double alpha_hat = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int points_used = 0;
};

/// Least squares of log(lambda) on log(delta) over the records with
/// 0 < delta < delta_threshold and lambda > 0; needs at least 3 such rows.
FitResult fit_powerlaw(const std::vector<ScanRecord>& records,
                       double delta_threshold);

}  // namespace gnslab

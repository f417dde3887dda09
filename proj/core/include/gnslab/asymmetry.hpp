#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "gnslab/gns_params.hpp"
#include "gnslab/grid_function.hpp"
#include "gnslab/radial.hpp"

namespace gnslab {

/// Settings for the orbit search behind asymmetry(). JSON round trip via
/// search_config_{to,from}_json with keys
/// {restarts, budget, b_min, b_max, seed, tol}; absent keys keep defaults.
struct SearchConfig {
  /// Randomized restarts added on top of the two deterministic starts.
  int restarts = 8;
  /// Objective-evaluation budget per local search.
  int budget = 500;
  /// Dilation box searched in log space.
  double b_min = 1e-3;
  double b_max = 1e3;
  std::uint64_t seed = 0;
  /// Termination threshold on the simplex diameter in scaled coordinates.
  double tol = 1e-6;
};

std::string search_config_to_json(const SearchConfig& cfg);
SearchConfig search_config_from_json(const std::string& text);

/// Axis-aligned affine subspace for the witness center: the listed axes are
/// pinned to the given coordinates, the rest stay free. Empty map = the whole
/// space; all axes pinned to 0 = the origin alone.
struct AffineRestriction {
  std::map<int, double> fixed_coords;
};

struct AsymmetryResult {
  /// min over the searched orbit of ||u - a v(b (x - x0))||_q^q / ||u||_q^q.
  double lambda_value = 0.0;
  OptimizerWitness witness;
  /// | ||v_w||_q - ||u||_q | / ||u||_q for the returned witness.
  double constraint_residual = 0.0;
  int restarts_used = 0;
  /// At least one local search terminated by simplex collapse (not budget).
  bool converged = false;
  /// The best dilation sits on the [b_min, b_max] box edge; the true optimum
  /// may lie outside the searched scale range.
  bool hit_scale_bound = false;
};

/// Distance of u from the orbit {a v(b (x - x0)) : a > 0, b > 0, x0} of the
/// radial profile v carried by the model, measured as a fraction of the
/// q-mass of u. The amplitude a is eliminated exactly: for each (b, x0) the
/// witness is scaled so its grid q-norm matches that of u. The remaining
/// (log b, x0) space is explored by multi-start Nelder-Mead descent.
AsymmetryResult asymmetry(const GridFunction& u, const GnsParams& params,
                          const OptimizerModel& model, const SearchConfig& cfg);

/// Same search with the witness center restricted to the affine subspace S.
AsymmetryResult relative_asymmetry(const GridFunction& u,
                                   const AffineRestriction& restriction,
                                   const GnsParams& params,
                                   const OptimizerModel& model,
                                   const SearchConfig& cfg);

/// sum |u(T_H x) - u(x)|^q * cellvol for a reflection H that permutes the
/// cell lattice exactly.
double reflection_distance(const GridFunction& u, const Hyperplane& h,
                           double q);

}  // namespace gnslab

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gnslab/gns_params.hpp"
#include "gnslab/grid_function.hpp"

namespace gnslab {

/// Offset c along `axis` where the cumulative |u|^q mass reaches half the
/// total, located by linear interpolation of the per-layer cumulative sums.
double median_offset(const GridFunction& u, int axis, double q);

struct HalfSpaceSplit {
  int axis = 0;
  double offset = 0.0;
  GridFunction u_plus;
  GridFunction u_minus;
  /// |u|^q masses of the two half spaces of u (not of the reflected halves).
  double mass_plus = 0.0;
  double mass_minus = 0.0;
};

/// u_plus keeps u on {x_axis > c} and mirrors it across; u_minus the same for
/// the lower half. c must sit on a cell-layer boundary, so both halves are
/// exact cell copies (mirror images that leave the box read 0).
HalfSpaceSplit reflect_halves(const GridFunction& u, int axis, double c,
                              double q);

/// Asymmetry estimator injected into the reduction pipeline (the package's
/// orbit search, or any stand-in for tests).
using AsymmetryOracle = std::function<double(const GridFunction&)>;

struct ReductionStage {
  std::string label;
  int axis = 0;
  /// '+' or '-' for half-space stages, '.' for the diagonal stage.
  char chosen_half = '.';
  double delta = 0.0;
  double lambda_estimate = 0.0;
  /// Distance between the interpolated median and the snapped layer boundary.
  double snap_residual = 0.0;
};

struct ReductionTrace {
  std::vector<ReductionStage> stages;
  GridFunction result;
};

/// Half-space symmetrization through axes 1..n-1 (axis 0 stays free). Each
/// stage: locate the median along the axis, snap it to the nearest layer
/// boundary, translate so the snapped median is at 0, split into reflected
/// halves, keep the half with the LARGER asymmetry estimate, renormalize to
/// unit q-mass. Requires u >= 0. The result is symmetric across {x_k = 0} for
/// every processed axis.
ReductionTrace nsym_reduce(const GridFunction& u, const GnsParams& params,
                           double G_const, const AsymmetryOracle& oracle);

/// Diagonal fold on the (axis 0, axis 1) plane for input symmetric across
/// {x_k = 0}, k >= 1, with the axis-0 median at 0. With Q = {|x_0| <= x_1}
/// (ties to Q) and R1, R2 the reflections across {x_0 = x_1}, {x_0 = -x_1}:
/// the output equals u on Q, u composed with R1 on R1(Q), and is extended to
/// the remaining half plane by the R2 reflection. The output is invariant
/// under R1, R2 and every retained coordinate reflection, and its q-mass is
/// 4x the tie-halved Q mass of u (see folded_quarter_mass); it is NOT
/// renormalized here. Requires equal count and spacing on axes 0 and 1.
GridFunction final_symmetrize(const GridFunction& u, const GnsParams& params);

/// sum over cells of Q of w * |u|^q * cellvol with w = 1/2 on the tie
/// diagonals |x_0| = x_1 and w = 1 inside.
double folded_quarter_mass(const GridFunction& u, double q);

/// nsym_reduce through axes 1..n-1, then the axis-0 median recentering and
/// the diagonal fold, with the folded result renormalized to unit q-mass.
/// The trace carries n stages (n-1 half-space choices + 1 diagonal stage).
ReductionTrace full_reduction(const GridFunction& u, const GnsParams& params,
                              double G_const, const AsymmetryOracle& oracle);

/// The reflections a fully reduced function is invariant under: both
/// diagonals on axes (0, 1) plus the coordinate planes of axes 2..n-1.
std::vector<Hyperplane> pipeline_symmetry_planes(int dim);

/// Exact invariance of u under the reflection across h (values compare
/// bitwise; h must act as a cell permutation).
bool is_reflection_symmetric(const GridFunction& u, const Hyperplane& h);

std::string trace_to_csv(const ReductionTrace& trace);

}  // namespace gnslab

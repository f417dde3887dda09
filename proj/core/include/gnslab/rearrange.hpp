#pragma once

#include <cstdint>

#include "gnslab/gns_params.hpp"
#include "gnslab/grid_function.hpp"

namespace gnslab {

/// Volume of the superlevel set {|u| > t} (strict), t >= 0.
double distribution(const GridFunction& u, double t);

/// Discrete symmetric-decreasing rearrangement: the multiset of |u| values is
/// reassigned so values fall with distance from the origin. Cells are ordered
/// by (center radius, flat index); values descend. Exactly equimeasurable
/// with |u| by construction.
GridFunction schwarz_rearrange(const GridFunction& u);

/// FNV-1a over the descending-sorted |u| values (rearrangement invariant).
std::uint64_t value_multiset_checksum(const GridFunction& u);

/// (||grad u||_p - ||grad u*||_p) / ||grad u*||_p. The continuum quantity is
/// nonnegative; the discrete one can dip below 0 by an O(h) violation.
double ps_deficit(const GridFunction& u, double p);

struct RearrangeResult {
  GridFunction u_star;
  std::uint64_t value_permutation_checksum = 0;
  double ps_deficit = 0.0;
};

RearrangeResult analyze_rearrangement(const GridFunction& u,
                                      const GnsParams& params);

struct CfmpGap {
  /// integral of |u - u*|^p*
  double lhs = 0.0;
  /// (integral u^p*)^(p/n) * (integral |grad u*|^p)^((z-1)/z) * gap^(1/z)
  double rhs_core = 0.0;
  /// integral |grad u|^p - integral |grad u*|^p (clamped at 0 inside rhs_core)
  double grad_gap = 0.0;
  /// The discrete gap fell below -1e-12 * integral |grad u|^p.
  bool negative_gap_flagged = false;
};

/// Both sides of the rearrangement-distance bound. Requires u >= 0 and exact
/// symmetry of u under every coordinate reflection through the origin.
CfmpGap cfmp_gap(const GridFunction& u, const GnsParams& params);

}  // namespace gnslab

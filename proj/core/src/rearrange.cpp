#include "gnslab/rearrange.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <vector>

#include "gnslab/errors.hpp"

namespace gnslab {

namespace {

std::vector<double> center_radius_sq(const GridFunction& u) {
  const int d = u.dim();
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> r2(u.size());
  for (std::size_t flat = 0; flat < u.size(); ++flat) {
    double acc = 0.0;
    for (int k = 0; k < d; ++k) {
      const double x = u.coordinate(k, idx[k]);
      acc += x * x;
    }
    r2[flat] = acc;
    for (int k = d - 1; k >= 0; --k) {
      if (++idx[k] < u.shape()[k]) break;
      idx[k] = 0;
    }
  }
  return r2;
}

std::vector<double> sorted_abs_descending(const GridFunction& u) {
  std::vector<double> vals(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    vals[i] = std::abs(u.values()[i]);
  }
  std::sort(vals.begin(), vals.end(), std::greater<double>());
  return vals;
}

}  // namespace

double distribution(const GridFunction& u, double t) {
  if (!std::isfinite(t) || t < 0.0) {
    throw ValidationError("distribution level t must be finite and >= 0");
  }
  std::size_t count = 0;
  for (double v : u.values()) {
    if (std::abs(v) > t) ++count;
  }
  return static_cast<double>(count) * u.cell_volume();
}

GridFunction schwarz_rearrange(const GridFunction& u) {
  const std::vector<double> r2 = center_radius_sq(u);
  std::vector<std::size_t> order(u.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&r2](std::size_t a, std::size_t b) {
    if (r2[a] != r2[b]) return r2[a] < r2[b];
    return a < b;
  });
  const std::vector<double> vals = sorted_abs_descending(u);
  GridFunction out = GridFunction::zeros(u.shape(), u.spacing());
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.values()[order[i]] = vals[i];
  }
  return out;
}

std::uint64_t value_multiset_checksum(const GridFunction& u) {
  const std::vector<double> vals = sorted_abs_descending(u);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (double v : vals) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (bits >> (8 * byte)) & 0xffull;
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

double ps_deficit(const GridFunction& u, double p) {
  const GridFunction star = schwarz_rearrange(u);
  const double g_star = grad_lp_norm(star, p);
  if (g_star <= 0.0) {
    throw ValidationError("rearranged function has zero gradient");
  }
  return (grad_lp_norm(u, p) - g_star) / g_star;
}

RearrangeResult analyze_rearrangement(const GridFunction& u,
                                      const GnsParams& params) {
  RearrangeResult r{schwarz_rearrange(u), value_multiset_checksum(u), 0.0};
  const double g_star = grad_lp_norm(r.u_star, params.p);
  if (g_star <= 0.0) {
    throw ValidationError("rearranged function has zero gradient");
  }
  r.ps_deficit = (grad_lp_norm(u, params.p) - g_star) / g_star;
  return r;
}

CfmpGap cfmp_gap(const GridFunction& u, const GnsParams& params) {
  for (double v : u.values()) {
    if (v < 0.0) {
      throw ValidationError("rearrangement bound requires u >= 0");
    }
  }
  for (int k = 0; k < u.dim(); ++k) {
    const GridFunction mirrored =
        reflect(u, Hyperplane::coordinate_plane(k, 0.0));
    if (mirrored.values() != u.values()) {
      throw ValidationError(
          "rearrangement bound requires symmetry under every coordinate "
          "reflection (axis " +
          std::to_string(k) + " fails)");
    }
  }
  const GridFunction star = schwarz_rearrange(u);
  const double grad_u = std::pow(grad_lp_norm(u, params.p), params.p);
  const double grad_star = std::pow(grad_lp_norm(star, params.p), params.p);
  CfmpGap out;
  out.lhs = lr_distance_pow(u, star, params.p_star);
  out.grad_gap = grad_u - grad_star;
  out.negative_gap_flagged = out.grad_gap < -1e-12 * grad_u;
  const double z = params.z_exp;
  const double gap = std::max(out.grad_gap, 0.0);
  out.rhs_core = std::pow(lr_norm_pow(u, params.p_star),
                          params.p / static_cast<double>(params.n)) *
                 std::pow(grad_star, (z - 1.0) / z) * std::pow(gap, 1.0 / z);
  return out;
}

}  // namespace gnslab

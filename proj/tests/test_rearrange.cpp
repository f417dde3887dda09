#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "gnslab/errors.hpp"
#include "gnslab/gns_params.hpp"
#include "gnslab/grid_function.hpp"
#include "gnslab/rearrange.hpp"

using namespace gnslab;

namespace {

// Concentric Gaussian pair displaced off-lattice by a fixed fraction of the
// cell size; radially decreasing about its own center, so any excess of
// ||grad u*||_p over ||grad u||_p is pure discretization error.
GridFunction offset_pair_2d(std::size_t N, double L, double w1, double w2) {
  const double h = 2.0 * L / static_cast<double>(N);
  const double cx = 0.5 * h, cy = 0.5 * h;
  return GridFunction::sample({N, N}, {h, h}, [&](std::span<const double> x) {
    const double r2 =
        (x[0] - cx) * (x[0] - cx) + (x[1] - cy) * (x[1] - cy);
    return std::exp(-r2 / (w1 * w1)) + std::exp(-r2 / (w2 * w2));
  });
}

GridFunction offset_pair_3d(std::size_t N, double L, double w1, double w2) {
  const double h = 2.0 * L / static_cast<double>(N);
  const double c = 0.5 * h;
  return GridFunction::sample(
      {N, N, N}, {h, h, h}, [&](std::span<const double> x) {
        const double r2 = (x[0] - c) * (x[0] - c) + (x[1] - c) * (x[1] - c) +
                          (x[2] - c) * (x[2] - c);
        return std::exp(-r2 / (w1 * w1)) + std::exp(-r2 / (w2 * w2));
      });
}

double violation(const GridFunction& u, double p) {
  const double d = ps_deficit(u, p);
  return d < 0.0 ? -d : 0.0;
}

}  // namespace

TEST_SUITE("rearrange") {

TEST_CASE("distribution measures superlevel volumes") {
  // indicator of the disk of radius 2 on [-4,4]^2; h = 1/16 is exact dyadic
  const GridFunction u = GridFunction::sample(
      {128, 128}, {0.0625, 0.0625}, [](std::span<const double> x) {
        return x[0] * x[0] + x[1] * x[1] < 4.0 ? 1.0 : 0.0;
      });
  const double area = 4.0 * std::numbers::pi;
  CHECK(distribution(u, 0.5) == doctest::Approx(area).epsilon(0.02));
  CHECK(distribution(u, 0.0) == distribution(u, 0.5));  // {u > 0} = disk
  CHECK(distribution(u, 1.0) == 0.0);                   // strict inequality
  CHECK(distribution(u, 7.0) == 0.0);
  CHECK_THROWS_AS(distribution(u, -0.1), ValidationError);
  CHECK_THROWS_AS(distribution(u, std::nan("")), ValidationError);
}

TEST_CASE("rearrangement is exactly equimeasurable") {
  std::mt19937_64 rng(424242u);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  std::vector<double> vals(64 * 64);
  for (double& v : vals) v = d(rng);
  const GridFunction u({64, 64}, {0.1875, 0.1875}, vals);
  const GridFunction star = schwarz_rearrange(u);

  std::vector<double> a(u.size()), b(star.size());
  for (std::size_t i = 0; i < u.size(); ++i) a[i] = std::abs(u.values()[i]);
  for (std::size_t i = 0; i < star.size(); ++i) b[i] = star.values()[i];
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);  // bitwise multiset identity

  // every L^r norm is preserved (up to summation order)
  for (double r : {1.0, 2.5, 7.0}) {
    CHECK(lr_norm_pow(star, r) ==
          doctest::Approx(lr_norm_pow(u, r)).epsilon(1e-12));
  }

  // values fall with distance from the origin along the assignment order
  std::vector<std::size_t> idx(2);
  std::vector<std::pair<double, double>> by_radius;  // (r^2, value)
  by_radius.reserve(star.size());
  for (std::size_t f = 0; f < star.size(); ++f) {
    star.unflatten(f, idx);
    const double x = star.coordinate(0, idx[0]);
    const double y = star.coordinate(1, idx[1]);
    by_radius.emplace_back(x * x + y * y, star.values()[f]);
  }
  std::sort(by_radius.begin(), by_radius.end(),
            [](const auto& l, const auto& r) { return l.first < r.first; });
  for (std::size_t i = 1; i < by_radius.size(); ++i) {
    if (by_radius[i].first > by_radius[i - 1].first) {
      CHECK(by_radius[i].second <= by_radius[i - 1].second);
    }
  }
}

TEST_CASE("value multiset checksum sees values, not their arrangement") {
  std::mt19937_64 rng(7u);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  std::vector<double> vals(32 * 32);
  for (double& v : vals) v = d(rng);
  const GridFunction u({32, 32}, {0.25, 0.25}, vals);
  const std::uint64_t base = value_multiset_checksum(u);

  std::vector<double> shuffled = vals;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const GridFunction v({32, 32}, {0.25, 0.25}, shuffled);
  CHECK(value_multiset_checksum(v) == base);

  const GridFunction m = reflect(u, Hyperplane::coordinate_plane(0, 0.0));
  CHECK(value_multiset_checksum(m) == base);
  CHECK(value_multiset_checksum(schwarz_rearrange(u)) == base);

  std::vector<double> touched = vals;
  touched[100] += 1e-9;
  const GridFunction w({32, 32}, {0.25, 0.25}, touched);
  CHECK(value_multiset_checksum(w) != base);
}

TEST_CASE("radial decreasing samples are their own rearrangement") {
  // dyadic spacing makes cell radii exact, so the value order equals the
  // radius order and ties carry equal values
  const GridFunction u = GridFunction::sample(
      {128, 128}, {0.09375, 0.09375}, [](std::span<const double> x) {
        return std::exp(-(x[0] * x[0] + x[1] * x[1]));
      });
  const GridFunction star = schwarz_rearrange(u);
  CHECK(star.values() == u.values());
  CHECK(ps_deficit(u, 1.5) == 0.0);
}

TEST_CASE("ps_deficit: zero for aligned translates, large for split bumps") {
  const GridFunction moved = GridFunction::sample(
      {128, 128}, {0.125, 0.125}, [](std::span<const double> x) {
        const double r2 = (x[0] - 1.5) * (x[0] - 1.5) + x[1] * x[1];
        return std::exp(-r2);
      });
  // 1.5 is 12 cells: the value multiset matches a centered sample up to the
  // dropped e^(-42) tail
  CHECK(std::abs(ps_deficit(moved, 2.0)) < 1e-12);

  const GridFunction two = GridFunction::sample(
      {128, 128}, {0.125, 0.125}, [](std::span<const double> x) {
        const double a2 = (x[0] - 2.0) * (x[0] - 2.0) + x[1] * x[1];
        const double b2 = (x[0] + 2.0) * (x[0] + 2.0) + x[1] * x[1];
        return std::exp(-a2) + 0.8 * std::exp(-b2);
      });
  CHECK(ps_deficit(two, 2.0) > 0.1);

  const GridFunction zero = GridFunction::zeros({8, 8}, {0.5, 0.5});
  CHECK_THROWS_AS(ps_deficit(zero, 2.0), ValidationError);
}

TEST_CASE("discrete rearrangement violation decays under refinement") {
  // 2-D: the violation falls with h (rate just under first order at these
  // resolutions)
  const double v128 = violation(offset_pair_2d(128, 6.0, 1.0, 2.0), 1.5);
  const double v256 = violation(offset_pair_2d(256, 6.0, 1.0, 2.0), 1.5);
  CHECK(v128 > 0.0);
  CHECK(v256 > 0.0);
  CHECK(v128 / v256 > 1.3);

  // 3-D: the rank pairing is clean enough that halving h at least halves the
  // violation
  const double w24 = violation(offset_pair_3d(24, 5.0, 1.5, 2.5), 2.0);
  const double w48 = violation(offset_pair_3d(48, 5.0, 1.5, 2.5), 2.0);
  CHECK(w24 > 0.0);
  CHECK(w48 > 0.0);
  CHECK(w24 / w48 >= 2.0);
}

TEST_CASE("analyze_rearrangement bundles the free functions") {
  const GnsParams P = make_params(2, 1.5, 1.5, 2.5);
  const GridFunction u = GridFunction::sample(
      {64, 64}, {0.1875, 0.1875}, [](std::span<const double> x) {
        const double r2 = (x[0] - 1.0) * (x[0] - 1.0) + x[1] * x[1];
        return std::exp(-r2) * (1.0 + 0.3 * x[1]);
      });
  const RearrangeResult r = analyze_rearrangement(u, P);
  CHECK(r.u_star.values() == schwarz_rearrange(u).values());
  CHECK(r.value_permutation_checksum == value_multiset_checksum(u));
  CHECK(r.ps_deficit == ps_deficit(u, P.p));
}

TEST_CASE("rearrangement distance bound: both sides behave") {
  const GnsParams P = make_params(2, 1.5, 1.5, 2.5);
  // exactly symmetric anisotropic Gaussian (dyadic spacing, even powers)
  const GridFunction u = GridFunction::sample(
      {128, 128}, {0.09375, 0.09375}, [](std::span<const double> x) {
        return std::exp(-(x[0] * x[0] + 2.0 * x[1] * x[1]));
      });
  const CfmpGap g = cfmp_gap(u, P);
  CHECK(std::isfinite(g.lhs));
  CHECK(std::isfinite(g.rhs_core));
  CHECK(g.lhs > 0.0);
  CHECK(g.rhs_core > 0.0);
  CHECK(g.grad_gap > 0.0);
  CHECK_FALSE(g.negative_gap_flagged);

  // a radial sample equals its rearrangement: both sides collapse to zero
  const GridFunction rad = GridFunction::sample(
      {64, 64}, {0.1875, 0.1875}, [](std::span<const double> x) {
        return std::exp(-(x[0] * x[0] + x[1] * x[1]));
      });
  const CfmpGap zg = cfmp_gap(rad, P);
  CHECK(zg.lhs == 0.0);
  CHECK(zg.grad_gap == 0.0);
  CHECK(zg.rhs_core == 0.0);
  CHECK_FALSE(zg.negative_gap_flagged);

  // preconditions
  GridFunction neg = rad;
  neg.values()[0] = -1e-3;
  CHECK_THROWS_AS(cfmp_gap(neg, P), ValidationError);
  const GridFunction off = GridFunction::sample(
      {32, 32}, {0.25, 0.25}, [](std::span<const double> x) {
        const double r2 = (x[0] - 1.0) * (x[0] - 1.0) + x[1] * x[1];
        return std::exp(-r2);
      });
  CHECK_THROWS_AS(cfmp_gap(off, P), ValidationError);
}

}  // TEST_SUITE

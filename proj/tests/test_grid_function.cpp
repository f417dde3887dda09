#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "gnslab/errors.hpp"
#include "gnslab/grid_function.hpp"

using namespace gnslab;

namespace {

GridFunction gaussian(std::size_t cells, double half_width, int dim,
                      std::vector<double> center = {}) {
  if (center.empty()) center.assign(static_cast<std::size_t>(dim), 0.0);
  std::vector<std::size_t> shape(static_cast<std::size_t>(dim), cells);
  std::vector<double> spacing(static_cast<std::size_t>(dim),
                              2.0 * half_width / static_cast<double>(cells));
  return GridFunction::sample(shape, spacing,
                              [&center](std::span<const double> x) {
                                double r2 = 0.0;
                                for (std::size_t k = 0; k < x.size(); ++k) {
                                  const double d = x[k] - center[k];
                                  r2 += d * d;
                                }
                                return std::exp(-r2);
                              });
}

}  // namespace

TEST_SUITE("grid_function") {

TEST_CASE("constructor enforces the layout invariants") {
  std::vector<double> four(4, 1.0);
  CHECK_NOTHROW(GridFunction({2, 2}, {0.5, 0.5}, four));
  // odd count
  CHECK_THROWS_AS(GridFunction({3, 2}, {0.5, 0.5}, std::vector<double>(6, 0.0)),
                  ValidationError);
  // count below 2
  CHECK_THROWS_AS(GridFunction({2, 0}, {0.5, 0.5}, std::vector<double>{}),
                  ValidationError);
  // nonpositive spacing
  CHECK_THROWS_AS(GridFunction({2, 2}, {0.5, 0.0}, four), ValidationError);
  CHECK_THROWS_AS(GridFunction({2, 2}, {0.5, -1.0}, four), ValidationError);
  // value count mismatch
  CHECK_THROWS_AS(GridFunction({2, 2}, {0.5, 0.5}, std::vector<double>(5, 0.0)),
                  ValidationError);
  // non-finite values
  std::vector<double> bad = four;
  bad[2] = std::nan("");
  CHECK_THROWS_AS(GridFunction({2, 2}, {0.5, 0.5}, bad), ValidationError);
  // dimension mismatch between shape and spacing
  CHECK_THROWS_AS(GridFunction({2, 2}, {0.5}, four), ValidationError);
}

TEST_CASE("cell centers follow the centered-box convention") {
  const GridFunction u = GridFunction::zeros({4, 6}, {0.5, 0.25});
  CHECK(u.coordinate(0, 0) == doctest::Approx(-0.75).epsilon(1e-15));
  CHECK(u.coordinate(0, 3) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(u.coordinate(1, 0) == doctest::Approx(-0.625).epsilon(1e-15));
  CHECK(u.coordinate(1, 5) == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(u.half_extent(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(u.half_extent(1) == doctest::Approx(0.75).epsilon(1e-15));
  // centers come in exact +/- pairs (reflection exactness hinges on this)
  const GridFunction g = GridFunction::zeros({128, 128}, {0.0625, 0.0625});
  for (std::size_t i = 0; i < 128; ++i) {
    CHECK(g.coordinate(0, i) == -g.coordinate(0, 127 - i));
  }
}

TEST_CASE("flat_index and unflatten are inverse, last axis fastest") {
  const GridFunction u = GridFunction::zeros({4, 6, 8}, {1.0, 1.0, 1.0});
  std::array<std::size_t, 3> idx{2, 3, 5};
  const std::size_t f = u.flat_index(idx);
  CHECK(f == (2 * 6 + 3) * 8 + 5);
  std::array<std::size_t, 3> back{};
  u.unflatten(f, back);
  CHECK(back == idx);
  CHECK(u.stride(2) == 1);
  CHECK(u.stride(1) == 8);
  CHECK(u.stride(0) == 48);
}

TEST_CASE("midpoint norms hit Gaussian closed forms to near machine precision") {
  // integral of exp(-r |x|^2) over R^2 = (pi/r)^(n/2); sampling a Gaussian is
  // spectrally accurate, so only the box tail (~1e-28) and rounding remain.
  const GridFunction u = gaussian(256, 8.0, 2);
  CHECK(lr_norm_pow(u, 2.0) ==
        doctest::Approx(1.5707963267948966192).epsilon(1e-12));
  CHECK(lr_norm_pow(u, 3.0) ==
        doctest::Approx(1.0471975511965977462).epsilon(1e-12));
  CHECK(lr_norm_pow(u, 4.0) ==
        doctest::Approx(0.78539816339744830962).epsilon(1e-12));
  CHECK(lr_norm_pow(u, 1.5) ==
        doctest::Approx(2.0943951023931954923).epsilon(1e-12));
  CHECK(lr_norm(u, 2.0) ==
        doctest::Approx(std::sqrt(1.5707963267948966192)).epsilon(1e-12));

  const GridFunction v = gaussian(96, 7.0, 3);
  CHECK(lr_norm_pow(v, 2.0) ==
        doctest::Approx(1.968701243215302468).epsilon(1e-10));
  CHECK(lr_norm_pow(v, 4.0) ==
        doctest::Approx(0.69604099960396348066).epsilon(1e-10));
}

TEST_CASE("gradient norm converges at second order to the closed form") {
  // || grad exp(-|x|^2) ||_p^p = n omega_n 2^p (1/2) p^(-(p+n)/2) Gamma((p+n)/2)
  const double closed_p2 = 3.1415926535897932385;   // n=2, p=2
  const double closed_p18 = 3.4439389902688076915;  // n=2, p=1.8
  const GridFunction coarse = gaussian(128, 8.0, 2);
  const GridFunction fine = gaussian(256, 8.0, 2);

  const double e_coarse_p2 =
      std::abs(std::pow(grad_lp_norm(coarse, 2.0), 2.0) - closed_p2) /
      closed_p2;
  const double e_fine_p2 =
      std::abs(std::pow(grad_lp_norm(fine, 2.0), 2.0) - closed_p2) / closed_p2;
  CHECK(e_fine_p2 < 5e-3);  // h^2 = 3.9e-3 at N=256 over [-8,8]
  CHECK(e_coarse_p2 / e_fine_p2 > 2.5);  // ~4 expected for O(h^2)
  CHECK(e_coarse_p2 / e_fine_p2 < 6.0);

  const double e_fine_p18 =
      std::abs(std::pow(grad_lp_norm(fine, 1.8), 1.8) - closed_p18) /
      closed_p18;
  CHECK(e_fine_p18 < 5e-3);
}

TEST_CASE("multilinear interpolation reproduces affine functions exactly") {
  const GridFunction u = GridFunction::sample(
      {32, 32}, {0.25, 0.25},
      [](std::span<const double> x) { return 2.0 + 3.0 * x[0] - x[1]; });
  std::mt19937_64 rng(11u);
  std::uniform_real_distribution<double> d(-3.5, 3.5);
  for (int t = 0; t < 200; ++t) {
    const std::array<double, 2> x{d(rng), d(rng)};
    const double want = 2.0 + 3.0 * x[0] - x[1];
    CHECK(interpolate(u, x) == doctest::Approx(want).epsilon(1e-12));
  }
  // outside the hull of cell centers reads zero
  const std::array<double, 2> outside{7.99, 0.0};
  CHECK(interpolate(u, outside) == 0.0);
}

TEST_CASE("rescale with identity arguments is a bit-exact copy") {
  const GridFunction u = gaussian(64, 6.0, 2);
  const std::array<double, 2> origin{0.0, 0.0};
  const GridFunction v = rescale(u, 1.0, origin, 2.5);
  CHECK(v.values() == u.values());
}

TEST_CASE("rescale preserves the q-norm up to interpolation error") {
  const double q = 2.5;
  const GridFunction u = gaussian(256, 8.0, 2);
  const std::array<double, 2> origin{0.0, 0.0};
  for (double lam : {0.8, 1.25}) {
    const GridFunction v = rescale(u, lam, origin, q);
    CHECK(lr_norm(v, q) ==
          doctest::Approx(lr_norm(u, q)).epsilon(5e-4));
  }
}

TEST_CASE("origin reflections are exact involutive permutations") {
  const GridFunction u = gaussian(64, 6.0, 2, {0.7, -0.4});
  for (int axis : {0, 1}) {
    const Hyperplane h = Hyperplane::coordinate_plane(axis, 0.0);
    CHECK(reflection_is_permutation(u, h));
    const GridFunction r = reflect(u, h);
    // multiset of values preserved
    std::vector<double> a = u.values();
    std::vector<double> b = r.values();
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
    const GridFunction rr = reflect(r, h);
    CHECK(rr.values() == u.values());
  }
}

TEST_CASE("diagonal reflections swap indices exactly") {
  const GridFunction u = gaussian(32, 4.0, 2, {0.5, 0.25});
  const Hyperplane d_plus = Hyperplane::diagonal_plane(0, 1, +1);
  const Hyperplane d_minus = Hyperplane::diagonal_plane(0, 1, -1);
  CHECK(reflection_is_permutation(u, d_plus));
  CHECK(reflection_is_permutation(u, d_minus));
  const GridFunction rp = reflect(u, d_plus);
  // value at (i, j) moved to (j, i)
  std::array<std::size_t, 2> ij{5, 20};
  std::array<std::size_t, 2> ji{20, 5};
  CHECK(rp.values()[u.flat_index(ij)] == u.values()[u.flat_index(ji)]);
  CHECK(reflect(rp, d_plus).values() == u.values());
  const GridFunction rm = reflect(u, d_minus);
  std::array<std::size_t, 2> anti{32 - 1 - 20, 32 - 1 - 5};
  CHECK(rm.values()[u.flat_index(ij)] == u.values()[u.flat_index(anti)]);
  CHECK(reflect(rm, d_minus).values() == u.values());
  // diagonals demand matching counts and spacing
  const GridFunction bad = GridFunction::zeros({4, 8}, {0.5, 0.5});
  CHECK_THROWS_AS(reflect(bad, d_plus), ValidationError);
}

TEST_CASE("aligned off-origin reflection mirrors a shifted Gaussian exactly") {
  // center the bump at an offset c that is a layer boundary: c = 16 * h
  const std::size_t n = 128;
  const double h = 0.0625;
  const double c = 16.0 * h;
  const GridFunction u = gaussian(n, 4.0, 1, {c});
  const Hyperplane mirror = Hyperplane::coordinate_plane(0, c);
  CHECK_FALSE(reflection_is_permutation(u, mirror));  // cells leave the box
  const GridFunction r = reflect(u, mirror);
  // the Gaussian is symmetric about its own center, so reflection must agree
  // wherever the mirror image stays inside the box
  const auto& rv = r.values();
  const auto& uv = u.values();
  const long long j = 16 + 64;  // boundary index of c
  for (std::size_t i = 0; i < n; ++i) {
    const long long src = 2 * j - 1 - static_cast<long long>(i);
    if (src >= 0 && src < static_cast<long long>(n)) {
      CHECK(rv[i] == uv[static_cast<std::size_t>(src)]);
    } else {
      CHECK(rv[i] == 0.0);
    }
  }
}

TEST_CASE("unaligned reflection falls back to interpolation") {
  const std::size_t n = 128;
  const double h = 0.0625;
  const double c = 16.3 * h;  // not on a layer boundary
  const GridFunction u = gaussian(n, 4.0, 1, {c});
  const Hyperplane mirror = Hyperplane::coordinate_plane(0, c);
  const GridFunction r = reflect(u, mirror);
  // still approximately equal to u away from the box edge
  double max_err = 0.0;
  for (std::size_t i = 8; i + 8 < n; ++i) {
    max_err = std::max(max_err, std::abs(r.values()[i] - u.values()[i]));
  }
  CHECK(max_err < 5e-3);
}

TEST_CASE("shift_cells translates content and zero-fills vacated cells") {
  const GridFunction u = GridFunction(
      {4}, {1.0}, std::vector<double>{1.0, 2.0, 3.0, 4.0});
  const GridFunction fwd = shift_cells(u, 0, 1);  // new[i] = old[i+1]
  CHECK(fwd.values() == std::vector<double>{2.0, 3.0, 4.0, 0.0});
  const GridFunction back = shift_cells(u, 0, -2);
  CHECK(back.values() == std::vector<double>{0.0, 0.0, 1.0, 2.0});
  const GridFunction none = shift_cells(u, 0, 0);
  CHECK(none.values() == u.values());
  // interior-supported content survives a round trip
  const GridFunction g = gaussian(64, 6.0, 2);
  const GridFunction round = shift_cells(shift_cells(g, 1, 5), 1, -5);
  double lost = 0.0;
  for (std::size_t f = 0; f < g.size(); ++f) {
    lost = std::max(lost, std::abs(round.values()[f] - g.values()[f]));
  }
  // only the 5-cell edge strip was dropped; its innermost layer sits at
  // y = -5.16 where exp(-y^2) = 2.8e-12
  CHECK(lost < 1e-11);
}

TEST_CASE("power barycenter locates a displaced bump") {
  const GridFunction u = gaussian(128, 8.0, 2, {1.5, -2.0});
  const std::vector<double> c = power_barycenter(u, 3.0);
  CHECK(c[0] == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(c[1] == doctest::Approx(-2.0).epsilon(1e-6));
  const GridFunction z = GridFunction::zeros({4, 4}, {1.0, 1.0});
  CHECK_THROWS_AS(power_barycenter(z, 2.0), ValidationError);
}

TEST_CASE("boundary mass fraction flags box truncation") {
  const GridFunction centered = gaussian(64, 6.0, 2);
  CHECK(boundary_mass_fraction(centered, 2.0) < 1e-12);
  const GridFunction clipped = gaussian(64, 1.2, 2);  // box too small
  CHECK(boundary_mass_fraction(clipped, 2.0) > 1e-3);
  const GridFunction z = GridFunction::zeros({4, 4}, {1.0, 1.0});
  CHECK(boundary_mass_fraction(z, 2.0) == 0.0);
}

TEST_CASE("norm guards reject out-of-domain exponents") {
  const GridFunction u = gaussian(16, 2.0, 2);
  CHECK_THROWS_AS(lr_norm(u, 0.5), ValidationError);
  CHECK_THROWS_AS(grad_lp_norm(u, 1.0), ValidationError);
  const GridFunction tiny = GridFunction::zeros({2, 2}, {1.0, 1.0});
  CHECK_THROWS_AS(grad_lp_norm(tiny, 2.0), ValidationError);  // needs 3 cells
}

TEST_CASE("lr_distance_pow demands matching layouts") {
  const GridFunction a = GridFunction::zeros({4, 4}, {1.0, 1.0});
  const GridFunction b = GridFunction::zeros({4, 4}, {0.5, 0.5});
  CHECK_THROWS_AS(lr_distance_pow(a, b, 2.0), ValidationError);
}

}  // TEST_SUITE

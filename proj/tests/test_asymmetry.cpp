#include <doctest.h>

#include <cmath>
#include <span>
#include <vector>

#include <json.hpp>

#include "gnslab/asymmetry.hpp"
#include "gnslab/errors.hpp"
#include "gnslab/gns_params.hpp"
#include "gnslab/grid_function.hpp"
#include "gnslab/radial.hpp"

using namespace gnslab;

namespace {

const GnsParams& params252() {
  static const GnsParams P = make_params(2, 1.5, 1.5, 2.5);
  return P;
}

const OptimizerModel& model252() {
  static const OptimizerModel m = [] {
    MinimizeOptions mo;
    mo.resolution = 256;
    const RadialSolveResult sol = minimize_radial(params252(), mo);
    return OptimizerModel{params252(), sol.profile, sol.G_est,
                          sol.F_min,   mo.resolution, 0};
  }();
  return m;
}

GridFunction two_bump(std::size_t N, double h) {
  return GridFunction::sample({N, N}, {h, h}, [](std::span<const double> x) {
    const double a2 = (x[0] - 1.5) * (x[0] - 1.5) + x[1] * x[1];
    const double b2 = (x[0] + 1.5) * (x[0] + 1.5) + x[1] * x[1];
    return std::exp(-a2) + 0.6 * std::exp(-b2);
  });
}

SearchConfig quick_cfg() {
  SearchConfig cfg;
  cfg.restarts = 2;
  cfg.budget = 300;
  return cfg;
}

}  // namespace

TEST_SUITE("asymmetry") {

TEST_CASE("search config JSON: defaults, round trip, rejection") {
  const SearchConfig def = search_config_from_json("{}");
  CHECK(def.restarts == 8);
  CHECK(def.budget == 500);
  CHECK(def.b_min == 1e-3);
  CHECK(def.b_max == 1e3);
  CHECK(def.seed == 0);
  CHECK(def.tol == 1e-6);

  const SearchConfig part = search_config_from_json("{\"restarts\": 3}");
  CHECK(part.restarts == 3);
  CHECK(part.budget == 500);

  SearchConfig cfg;
  cfg.restarts = 5;
  cfg.budget = 77;
  cfg.b_min = 0.25;
  cfg.b_max = 12.0;
  cfg.seed = 99;
  cfg.tol = 1e-8;
  const SearchConfig back = search_config_from_json(search_config_to_json(cfg));
  CHECK(back.restarts == cfg.restarts);
  CHECK(back.budget == cfg.budget);
  CHECK(back.b_min == cfg.b_min);
  CHECK(back.b_max == cfg.b_max);
  CHECK(back.seed == cfg.seed);
  CHECK(back.tol == cfg.tol);

  CHECK_THROWS_AS(search_config_from_json("not json"), FormatError);
  CHECK_THROWS_AS(search_config_from_json("[1,2]"), FormatError);
  CHECK_THROWS_AS(search_config_from_json("{\"restarts\": \"many\"}"),
                  FormatError);
  CHECK_THROWS_AS(search_config_from_json("{\"restarts\": -1}"),
                  ValidationError);
  CHECK_THROWS_AS(search_config_from_json("{\"budget\": 0}"), ValidationError);
  CHECK_THROWS_AS(
      search_config_from_json("{\"b_min\": 2.0, \"b_max\": 1.0}"),
      ValidationError);
  CHECK_THROWS_AS(search_config_from_json("{\"tol\": 0.0}"), ValidationError);
}

TEST_CASE("a planted orbit element is recovered to high accuracy") {
  OptimizerWitness w;
  w.a = 0.8;
  w.b = 1.3;
  w.x0 = {0.5, -0.25};
  w.profile = model252().profile;
  const GridFunction u = eval_witness(w, {64, 64}, {0.1875, 0.1875});

  const AsymmetryResult r = asymmetry(u, params252(), model252(), quick_cfg());
  CHECK(r.lambda_value <= 1e-4);
  CHECK(std::abs(r.witness.b - 1.3) / 1.3 <= 0.01);
  CHECK(std::abs(r.witness.x0[0] - 0.5) <= 0.1875);   // within one cell
  CHECK(std::abs(r.witness.x0[1] + 0.25) <= 0.1875);
  CHECK(r.constraint_residual <= 1e-6);
  CHECK(r.converged);
  CHECK(r.restarts_used >= 1);
  CHECK_FALSE(r.hit_scale_bound);
}

TEST_CASE("asymmetry is deterministic and scale invariant") {
  const GridFunction u = two_bump(64, 0.1875);
  const AsymmetryResult a = asymmetry(u, params252(), model252(), quick_cfg());
  const AsymmetryResult b = asymmetry(u, params252(), model252(), quick_cfg());
  CHECK(a.lambda_value == b.lambda_value);  // bitwise repeatable
  CHECK(a.witness.b == b.witness.b);
  CHECK(a.witness.x0 == b.witness.x0);
  CHECK(a.restarts_used == 2 + quick_cfg().restarts);
  CHECK(a.lambda_value > 0.1);  // genuinely asymmetric input

  GridFunction scaled = u;
  for (double& v : scaled.values()) v *= 3.7;
  const AsymmetryResult c =
      asymmetry(scaled, params252(), model252(), quick_cfg());
  CHECK(c.lambda_value == doctest::Approx(a.lambda_value).epsilon(1e-12));
}

TEST_CASE("asymmetry commutes with whole-cell translations") {
  const GridFunction u = two_bump(64, 0.1875);
  const AsymmetryResult a = asymmetry(u, params252(), model252(), quick_cfg());
  const GridFunction moved = shift_cells(u, 0, -4);  // content moves +0.75
  const AsymmetryResult m =
      asymmetry(moved, params252(), model252(), quick_cfg());
  CHECK(m.lambda_value == doctest::Approx(a.lambda_value).epsilon(1e-6));
  CHECK(m.witness.x0[0] - a.witness.x0[0] ==
        doctest::Approx(0.75).epsilon(0.05));
}

TEST_CASE("the empty restriction reproduces the free search") {
  const GridFunction u = two_bump(64, 0.1875);
  const AsymmetryResult free_r =
      asymmetry(u, params252(), model252(), quick_cfg());
  const AsymmetryResult same = relative_asymmetry(
      u, AffineRestriction{}, params252(), model252(), quick_cfg());
  CHECK(same.lambda_value == free_r.lambda_value);
  CHECK(same.witness.b == free_r.witness.b);

  AffineRestriction pin;
  pin.fixed_coords[0] = 0.0;
  const AsymmetryResult pinned =
      relative_asymmetry(u, pin, params252(), model252(), quick_cfg());
  // restricting the center can only hurt
  CHECK(pinned.lambda_value >= free_r.lambda_value - 1e-9);
  CHECK(pinned.witness.x0[0] == 0.0);

  AffineRestriction bad;
  bad.fixed_coords[7] = 0.0;
  CHECK_THROWS_AS(
      relative_asymmetry(u, bad, params252(), model252(), quick_cfg()),
      ValidationError);
}

TEST_CASE("search result is no worse than a brute-force orbit scan") {
  const GridFunction u = two_bump(32, 0.375);
  const double q = params252().q;
  const double uq = lr_norm_pow(u, q);

  double brute = 1e300;
  for (int bi = 0; bi < 17; ++bi) {
    const double b =
        0.5 * std::pow(2.5 / 0.5, static_cast<double>(bi) / 16.0);
    for (double cx = -2.25; cx <= 2.26; cx += 0.375) {
      for (double cy = -2.25; cy <= 2.26; cy += 0.375) {
        OptimizerWitness w;
        w.a = 1.0;
        w.b = b;
        w.x0 = {cx, cy};
        w.profile = model252().profile;
        const GridFunction v = eval_witness(w, u.shape(), u.spacing());
        const double wq = lr_norm_pow(v, q);
        if (wq <= 0.0) continue;
        const double amp = std::pow(uq / wq, 1.0 / q);
        double acc = 0.0;
        for (std::size_t f = 0; f < u.size(); ++f) {
          acc += std::pow(
              std::abs(u.values()[f] - amp * v.values()[f]), q);
        }
        brute = std::min(brute, acc * u.cell_volume() / uq);
      }
    }
  }
  SearchConfig cfg = quick_cfg();
  cfg.budget = 400;
  const AsymmetryResult r = asymmetry(u, params252(), model252(), cfg);
  CHECK(r.lambda_value <= brute + 1e-9);
  CHECK(r.lambda_value >= 0.5 * brute);  // same minimum, finer location
}

TEST_CASE("an undersized dilation box is flagged") {
  const GridFunction u = two_bump(64, 0.1875);
  SearchConfig cfg = quick_cfg();
  cfg.b_min = 1e-3;
  cfg.b_max = 1e-2;
  const AsymmetryResult r = asymmetry(u, params252(), model252(), cfg);
  CHECK(r.hit_scale_bound);
  CHECK(r.witness.b <= 1e-2 * (1.0 + 1e-12));
}

TEST_CASE("asymmetry rejects malformed inputs") {
  const GridFunction zero = GridFunction::zeros({16, 16}, {0.5, 0.5});
  CHECK_THROWS_AS(asymmetry(zero, params252(), model252(), quick_cfg()),
                  ValidationError);
  const GnsParams P3 = make_params(3, 2.0, 2.0, 4.0);
  const GridFunction u = two_bump(16, 0.5);
  CHECK_THROWS_AS(asymmetry(u, P3, model252(), quick_cfg()), ValidationError);
  SearchConfig bad = quick_cfg();
  bad.budget = 0;
  CHECK_THROWS_AS(asymmetry(u, params252(), model252(), bad), ValidationError);
}

TEST_CASE("reflection distance: zero, relabeling, q-th power scaling") {
  const std::size_t N = 16;
  const Hyperplane h = Hyperplane::coordinate_plane(1, 0.0);

  // symmetric part + epsilon * antisymmetric part, built by explicit indexing
  GridFunction sym = GridFunction::sample(
      {N, N}, {0.5, 0.5}, [](std::span<const double> x) {
        return std::exp(-(x[0] * x[0]));
      });
  GridFunction anti = GridFunction::zeros({N, N}, {0.5, 0.5});
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < N / 2; ++j) {
      const double v = std::sin(0.3 * static_cast<double>(i * N + j) + 0.7);
      anti.values()[i * N + j] = v;
      anti.values()[i * N + (N - 1 - j)] = -v;
    }
  }
  const double q = 2.5;
  CHECK(reflection_distance(sym, h, q) == 0.0);

  auto mix = [&](double eps) {
    GridFunction u = sym;
    for (std::size_t f = 0; f < u.size(); ++f) {
      u.values()[f] += eps * anti.values()[f];
    }
    return u;
  };
  const double d1 = reflection_distance(mix(0.01), h, q);
  const double d2 = reflection_distance(mix(0.02), h, q);
  CHECK(d1 > 0.0);
  // |u o T - u| = 2 eps |anti| exactly, so the distance scales as eps^q
  CHECK(d2 / d1 == doctest::Approx(std::pow(2.0, q)).epsilon(1e-12));

  // relabeling the two sides leaves the distance unchanged
  const GridFunction flipped = reflect(mix(0.01), h);
  CHECK(reflection_distance(flipped, h, q) ==
        doctest::Approx(d1).epsilon(1e-13));

  // a plane that does not permute the lattice is refused
  CHECK_THROWS_AS(reflection_distance(sym, Hyperplane::coordinate_plane(1, 0.3), q),
                  ValidationError);
}

}  // TEST_SUITE

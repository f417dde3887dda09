#include "gnslab/symmetrize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <utility>
#include <vector>

#include "gnslab/errors.hpp"
#include "gnslab/functionals.hpp"

namespace gnslab {

namespace {

std::vector<double> layer_masses(const GridFunction& u, int axis, double q) {
  const int count = u.shape()[static_cast<std::size_t>(axis)];
  const std::size_t stride = u.stride(axis);
  const double vol = u.cell_volume();
  std::vector<double> mass(static_cast<std::size_t>(count), 0.0);
  const auto& vals = u.values();
  for (std::size_t f = 0; f < vals.size(); ++f) {
    const auto layer = (f / stride) % static_cast<std::size_t>(count);
    mass[layer] += std::pow(std::abs(vals[f]), q) * vol;
  }
  return mass;
}

GridFunction scaled_copy(const GridFunction& u, double factor) {
  std::vector<double> vals = u.values();
  for (double& v : vals) v *= factor;
  return GridFunction(u.shape(), u.spacing(), std::move(vals));
}

GridFunction normalized_unit_q(const GridFunction& u, double q) {
  const double nq = lr_norm(u, q);
  if (nq <= 0.0) {
    throw ValidationError("cannot normalize the zero function");
  }
  return scaled_copy(u, 1.0 / nq);
}

struct SnapResult {
  int boundary = 0;      // layer-boundary index in [1, count-1]
  double residual = 0.0; // |median - snapped boundary coordinate|
};

SnapResult snap_median(const GridFunction& u, int axis, double q) {
  const double c = median_offset(u, axis, q);
  const int count = u.shape()[static_cast<std::size_t>(axis)];
  const double h = u.spacing()[static_cast<std::size_t>(axis)];
  int j = static_cast<int>(std::llround(c / h + count / 2.0));
  j = std::clamp(j, 1, count - 1);
  const double snapped = (j - count / 2.0) * h;
  return SnapResult{j, std::abs(c - snapped)};
}

}  // namespace

double median_offset(const GridFunction& u, int axis, double q) {
  if (axis < 0 || axis >= u.dim()) {
    throw ValidationError("median axis out of range");
  }
  if (q < 1.0) {
    throw ValidationError("norm exponent must be at least 1");
  }
  const std::vector<double> mass = layer_masses(u, axis, q);
  double total = 0.0;
  for (double m : mass) total += m;
  if (total <= 0.0) {
    throw ValidationError("median is undefined for the zero function");
  }
  const int count = u.shape()[static_cast<std::size_t>(axis)];
  const double h = u.spacing()[static_cast<std::size_t>(axis)];
  const double half = total / 2.0;
  double cum = 0.0;
  for (int j = 0; j < count; ++j) {
    const double next = cum + mass[static_cast<std::size_t>(j)];
    if (next >= half) {
      const double boundary = (j - count / 2.0) * h;
      const double within =
          mass[static_cast<std::size_t>(j)] > 0.0
              ? (half - cum) / mass[static_cast<std::size_t>(j)]
              : 0.0;
      return boundary + h * within;
    }
    cum = next;
  }
  return (count / 2.0) * h;  // unreachable for finite positive mass
}

HalfSpaceSplit reflect_halves(const GridFunction& u, int axis, double c,
                              double q) {
  if (axis < 0 || axis >= u.dim()) {
    throw ValidationError("reflection axis out of range");
  }
  const int count = u.shape()[static_cast<std::size_t>(axis)];
  const double h = u.spacing()[static_cast<std::size_t>(axis)];
  const double jd = c / h + count / 2.0;
  const auto j = static_cast<int>(std::llround(jd));
  if (std::abs(jd - j) > 1e-9) {
    throw ValidationError(
        "half-space boundary must lie on a cell-layer boundary");
  }
  if (j < 0 || j > count) {
    throw ValidationError("half-space boundary lies outside the box");
  }

  const std::size_t stride = u.stride(axis);
  const auto& vals = u.values();
  std::vector<double> plus(vals.size(), 0.0);
  std::vector<double> minus(vals.size(), 0.0);
  const double vol = u.cell_volume();
  double mass_plus = 0.0;
  double mass_minus = 0.0;

  for (std::size_t f = 0; f < vals.size(); ++f) {
    const auto i = static_cast<int>((f / stride) % static_cast<std::size_t>(count));
    const int src = 2 * j - 1 - i;
    const bool src_in = src >= 0 && src < count;
    // flat index of the mirrored cell differs only along `axis`.
    const std::size_t fsrc =
        src_in ? f + (static_cast<std::size_t>(src) - static_cast<std::size_t>(i)) * stride
               : f;
    if (i >= j) {
      plus[f] = vals[f];
      mass_plus += std::pow(std::abs(vals[f]), q) * vol;
      minus[f] = src_in ? vals[fsrc] : 0.0;
    } else {
      minus[f] = vals[f];
      mass_minus += std::pow(std::abs(vals[f]), q) * vol;
      plus[f] = src_in ? vals[fsrc] : 0.0;
    }
  }

  return HalfSpaceSplit{axis,
                        (j - count / 2.0) * h,
                        GridFunction(u.shape(), u.spacing(), std::move(plus)),
                        GridFunction(u.shape(), u.spacing(), std::move(minus)),
                        mass_plus,
                        mass_minus};
}

ReductionTrace nsym_reduce(const GridFunction& u, const GnsParams& params,
                           double G_const, const AsymmetryOracle& oracle) {
  if (u.dim() != params.n) {
    throw ValidationError("grid dimension does not match the parameter n");
  }
  for (double v : u.values()) {
    if (v < 0.0) {
      throw ValidationError("half-space reduction requires a nonnegative input");
    }
  }
  if (!oracle) {
    throw ValidationError("an asymmetry estimator must be supplied");
  }
  const double q = params.q;

  std::vector<ReductionStage> stages;
  GridFunction cur = normalized_unit_q(u, q);

  for (int axis = 1; axis < params.n; ++axis) {
    const SnapResult snap = snap_median(cur, axis, q);
    const int count = cur.shape()[static_cast<std::size_t>(axis)];
    cur = shift_cells(cur, axis, snap.boundary - count / 2);
    HalfSpaceSplit split = reflect_halves(cur, axis, 0.0, q);

    const double norm_plus = lr_norm(split.u_plus, q);
    const double norm_minus = lr_norm(split.u_minus, q);
    if (norm_plus <= 0.0 && norm_minus <= 0.0) {
      throw NumericalError("both reflected halves vanish");
    }

    double lambda_plus = -1.0;
    double lambda_minus = -1.0;
    GridFunction cand_plus = GridFunction::zeros(cur.shape(), cur.spacing());
    GridFunction cand_minus = cand_plus;
    if (norm_plus > 0.0) {
      cand_plus = scaled_copy(split.u_plus, 1.0 / norm_plus);
      lambda_plus = oracle(cand_plus);
    }
    if (norm_minus > 0.0) {
      cand_minus = scaled_copy(split.u_minus, 1.0 / norm_minus);
      lambda_minus = oracle(cand_minus);
    }

    const bool choose_plus = lambda_plus >= lambda_minus;
    cur = choose_plus ? std::move(cand_plus) : std::move(cand_minus);

    ReductionStage stage;
    stage.label = "half-space";
    stage.axis = axis;
    stage.chosen_half = choose_plus ? '+' : '-';
    stage.delta = deficit(cur, params, G_const).delta;
    stage.lambda_estimate = choose_plus ? lambda_plus : lambda_minus;
    stage.snap_residual = snap.residual;
    stages.push_back(std::move(stage));
  }

  return ReductionTrace{std::move(stages), std::move(cur)};
}

GridFunction final_symmetrize(const GridFunction& u, const GnsParams& params) {
  if (u.dim() != params.n) {
    throw ValidationError("grid dimension does not match the parameter n");
  }
  if (u.dim() < 2) {
    throw ValidationError("the diagonal fold needs at least two axes");
  }
  const int count = u.shape()[0];
  if (u.shape()[1] != count) {
    throw ValidationError("axes 0 and 1 must carry equal cell counts");
  }
  if (std::abs(u.spacing()[0] - u.spacing()[1]) >
      1e-12 * std::abs(u.spacing()[0])) {
    throw ValidationError("axes 0 and 1 must carry equal spacing");
  }
  for (int axis = 1; axis < u.dim(); ++axis) {
    if (!is_reflection_symmetric(u, Hyperplane::coordinate_plane(axis, 0.0))) {
      throw ValidationError(
          "input must be mirror symmetric across every axis past the first");
    }
  }

  const auto& vals = u.values();
  std::vector<double> out(vals.size(), 0.0);
  const std::size_t s0 = u.stride(0);
  const std::size_t s1 = u.stride(1);
  const auto n0 = static_cast<std::size_t>(count);

  std::vector<std::size_t> pass2;
  pass2.reserve(vals.size() / 2 + 1);

  for (std::size_t f = 0; f < vals.size(); ++f) {
    const auto i0 = static_cast<int>((f / s0) % n0);
    const auto i1 = static_cast<int>((f / s1) % n0);
    const int m0 = 2 * i0 + 1 - count;
    const int m1 = 2 * i1 + 1 - count;
    if (m1 >= std::abs(m0)) {
      out[f] = vals[f];  // wedge around the +x1 axis keeps its values
    } else if (m0 >= std::abs(m1)) {
      // wedge around +x0: read through the swap reflection {x0 = x1}.
      const std::size_t fsrc = f + (static_cast<std::size_t>(i1) - static_cast<std::size_t>(i0)) * s0 +
                               (static_cast<std::size_t>(i0) - static_cast<std::size_t>(i1)) * s1;
      out[f] = vals[fsrc];
    } else {
      pass2.push_back(f);
    }
  }

  // Lower sectors read the already-filled upper ones through {x0 = -x1}.
  for (std::size_t f : pass2) {
    const auto i0 = static_cast<int>((f / s0) % n0);
    const auto i1 = static_cast<int>((f / s1) % n0);
    const auto j0 = static_cast<std::size_t>(count - 1 - i1);
    const auto j1 = static_cast<std::size_t>(count - 1 - i0);
    const std::size_t fsrc = f + (j0 - static_cast<std::size_t>(i0)) * s0 +
                             (j1 - static_cast<std::size_t>(i1)) * s1;
    out[f] = out[fsrc];
  }

  return GridFunction(u.shape(), u.spacing(), std::move(out));
}

double folded_quarter_mass(const GridFunction& u, double q) {
  if (u.dim() < 2) {
    throw ValidationError("the diagonal fold needs at least two axes");
  }
  const int count = u.shape()[0];
  if (u.shape()[1] != count) {
    throw ValidationError("axes 0 and 1 must carry equal cell counts");
  }
  const auto& vals = u.values();
  const std::size_t s0 = u.stride(0);
  const std::size_t s1 = u.stride(1);
  const auto n0 = static_cast<std::size_t>(count);
  const double vol = u.cell_volume();
  double acc = 0.0;
  for (std::size_t f = 0; f < vals.size(); ++f) {
    const auto i0 = static_cast<int>((f / s0) % n0);
    const auto i1 = static_cast<int>((f / s1) % n0);
    const int m0 = 2 * i0 + 1 - count;
    const int m1 = 2 * i1 + 1 - count;
    if (m1 < std::abs(m0)) continue;
    const double weight = (m1 == std::abs(m0)) ? 0.5 : 1.0;
    acc += weight * std::pow(std::abs(vals[f]), q) * vol;
  }
  return acc;
}

ReductionTrace full_reduction(const GridFunction& u, const GnsParams& params,
                              double G_const, const AsymmetryOracle& oracle) {
  ReductionTrace trace = nsym_reduce(u, params, G_const, oracle);
  GridFunction cur = std::move(trace.result);
  const double q = params.q;

  const SnapResult snap = snap_median(cur, 0, q);
  const int count = cur.shape()[0];
  cur = shift_cells(cur, 0, snap.boundary - count / 2);

  GridFunction folded = final_symmetrize(cur, params);
  folded = normalized_unit_q(folded, q);

  ReductionStage stage;
  stage.label = "diagonal";
  stage.axis = 0;
  stage.chosen_half = '.';
  stage.delta = deficit(folded, params, G_const).delta;
  stage.lambda_estimate = oracle ? oracle(folded) : 0.0;
  stage.snap_residual = snap.residual;
  trace.stages.push_back(std::move(stage));

  trace.result = std::move(folded);
  return trace;
}

std::vector<Hyperplane> pipeline_symmetry_planes(int dim) {
  if (dim < 2) {
    throw ValidationError("the reduction pipeline needs at least two axes");
  }
  std::vector<Hyperplane> planes;
  planes.push_back(Hyperplane::diagonal_plane(0, 1, +1));
  planes.push_back(Hyperplane::diagonal_plane(0, 1, -1));
  for (int axis = 2; axis < dim; ++axis) {
    planes.push_back(Hyperplane::coordinate_plane(axis, 0.0));
  }
  return planes;
}

bool is_reflection_symmetric(const GridFunction& u, const Hyperplane& h) {
  if (!reflection_is_permutation(u, h)) {
    return false;
  }
  const GridFunction mirrored = reflect(u, h);
  return mirrored.values() == u.values();
}

std::string trace_to_csv(const ReductionTrace& trace) {
  std::ostringstream os;
  os << "stage,label,axis,chosen_half,delta,lambda_estimate,snap_residual\n";
  char buf[512];
  for (std::size_t i = 0; i < trace.stages.size(); ++i) {
    const ReductionStage& st = trace.stages[i];
    std::snprintf(buf, sizeof(buf), "%zu,%s,%d,%c,%.17g,%.17g,%.17g\n", i,
                  st.label.c_str(), st.axis, st.chosen_half, st.delta,
                  st.lambda_estimate, st.snap_residual);
    os << buf;
  }
  return os.str();
}

}  // namespace gnslab

#include "gnslab/grid_function.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "gnslab/errors.hpp"

namespace gnslab {

namespace {

// Relative slack for deciding whether an offset sits on a cell-layer boundary.
constexpr double kAlignTol = 1e-9;

void validate_axes(const std::vector<std::size_t>& shape,
                   const std::vector<double>& spacing) {
  if (shape.empty()) {
    throw ValidationError("grid must have dimension >= 1");
  }
  if (shape.size() != spacing.size()) {
    throw ValidationError("shape and spacing must have equal length");
  }
  for (std::size_t k = 0; k < shape.size(); ++k) {
    if (shape[k] < 2 || shape[k] % 2 != 0) {
      throw ValidationError("axis " + std::to_string(k) +
                            ": cell count must be even and >= 2, got " +
                            std::to_string(shape[k]));
    }
    if (!std::isfinite(spacing[k]) || spacing[k] <= 0.0) {
      throw ValidationError("axis " + std::to_string(k) +
                            ": spacing must be finite and positive");
    }
  }
}

}  // namespace

GridFunction::GridFunction(std::vector<std::size_t> shape,
                           std::vector<double> spacing,
                           std::vector<double> values)
    : shape_(std::move(shape)),
      spacing_(std::move(spacing)),
      values_(std::move(values)) {
  validate_axes(shape_, spacing_);
  std::size_t cells = 1;
  for (std::size_t n : shape_) {
    if (cells > std::numeric_limits<std::size_t>::max() / n) {
      throw ValidationError("grid cell count overflows");
    }
    cells *= n;
  }
  if (values_.size() != cells) {
    throw ValidationError("value count " + std::to_string(values_.size()) +
                          " does not match grid cell count " +
                          std::to_string(cells));
  }
  strides_.assign(shape_.size(), 1);
  for (int k = static_cast<int>(shape_.size()) - 2; k >= 0; --k) {
    strides_[k] = strides_[k + 1] * shape_[k + 1];
  }
  half_extent_.resize(shape_.size());
  cell_volume_ = 1.0;
  for (std::size_t k = 0; k < shape_.size(); ++k) {
    half_extent_[k] = 0.5 * static_cast<double>(shape_[k]) * spacing_[k];
    cell_volume_ *= spacing_[k];
  }
  check_finite();
}

GridFunction GridFunction::zeros(std::vector<std::size_t> shape,
                                 std::vector<double> spacing) {
  validate_axes(shape, spacing);
  std::size_t cells = 1;
  for (std::size_t n : shape) cells *= n;
  return GridFunction(std::move(shape), std::move(spacing),
                      std::vector<double>(cells, 0.0));
}

GridFunction GridFunction::sample(
    std::vector<std::size_t> shape, std::vector<double> spacing,
    const std::function<double(std::span<const double>)>& f) {
  GridFunction g = zeros(std::move(shape), std::move(spacing));
  const int d = g.dim();
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> x(d);
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    for (int k = 0; k < d; ++k) x[k] = g.coordinate(k, idx[k]);
    g.values()[flat] = f(x);
    for (int k = d - 1; k >= 0; --k) {
      if (++idx[k] < g.shape()[k]) break;
      idx[k] = 0;
    }
  }
  g.check_finite();
  return g;
}

std::size_t GridFunction::flat_index(std::span<const std::size_t> idx) const {
  std::size_t flat = 0;
  for (std::size_t k = 0; k < shape_.size(); ++k) {
    flat += idx[k] * strides_[k];
  }
  return flat;
}

void GridFunction::unflatten(std::size_t flat, std::span<std::size_t> idx) const {
  for (std::size_t k = 0; k < shape_.size(); ++k) {
    idx[k] = (flat / strides_[k]) % shape_[k];
  }
}

bool GridFunction::same_layout(const GridFunction& other) const {
  return shape_ == other.shape_ && spacing_ == other.spacing_;
}

void GridFunction::check_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw ValidationError("grid values must be finite");
    }
  }
}

double lr_norm_pow(const GridFunction& u, double r) {
  if (!std::isfinite(r) || r < 1.0) {
    throw ValidationError("norm exponent r must be >= 1");
  }
  double acc = 0.0;
  for (double v : u.values()) {
    acc += std::pow(std::abs(v), r);
  }
  return acc * u.cell_volume();
}

double lr_norm(const GridFunction& u, double r) {
  return std::pow(lr_norm_pow(u, r), 1.0 / r);
}

double lr_distance_pow(const GridFunction& u, const GridFunction& v, double r) {
  if (!u.same_layout(v)) {
    throw ValidationError("grid layouts differ");
  }
  if (!std::isfinite(r) || r < 1.0) {
    throw ValidationError("norm exponent r must be >= 1");
  }
  double acc = 0.0;
  const std::vector<double>& a = u.values();
  const std::vector<double>& b = v.values();
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += std::pow(std::abs(a[i] - b[i]), r);
  }
  return acc * u.cell_volume();
}

double grad_lp_norm(const GridFunction& u, double p) {
  if (!std::isfinite(p) || p <= 1.0) {
    throw ValidationError("gradient norm exponent p must exceed 1");
  }
  const int d = u.dim();
  for (int k = 0; k < d; ++k) {
    if (u.shape()[k] < 3) {
      throw ValidationError("gradient needs at least 3 cells per axis");
    }
  }
  const std::vector<double>& v = u.values();
  std::vector<std::size_t> idx(d, 0);
  double acc = 0.0;
  for (std::size_t flat = 0; flat < u.size(); ++flat) {
    double g2 = 0.0;
    for (int k = 0; k < d; ++k) {
      const std::size_t n = u.shape()[k];
      const std::size_t s = u.stride(k);
      const double h = u.spacing()[k];
      double dk;
      if (idx[k] == 0) {
        dk = (v[flat + s] - v[flat]) / h;
      } else if (idx[k] == n - 1) {
        dk = (v[flat] - v[flat - s]) / h;
      } else {
        dk = (v[flat + s] - v[flat - s]) / (2.0 * h);
      }
      g2 += dk * dk;
    }
    acc += std::pow(g2, 0.5 * p);
    for (int k = d - 1; k >= 0; --k) {
      if (++idx[k] < u.shape()[k]) break;
      idx[k] = 0;
    }
  }
  return std::pow(acc * u.cell_volume(), 1.0 / p);
}

double interpolate(const GridFunction& u, std::span<const double> x) {
  const int d = u.dim();
  // Per axis: lattice coordinate t in [0, N-1] over cell centers, else 0.
  std::size_t base[8];
  double frac[8];
  if (d > 8) {
    throw ValidationError("interpolation supports dimension <= 8");
  }
  for (int k = 0; k < d; ++k) {
    const double h = u.spacing()[k];
    const double first = u.coordinate(k, 0);
    const double t = (x[k] - first) / h;
    const double top = static_cast<double>(u.shape()[k] - 1);
    if (!(t >= 0.0 && t <= top)) {
      return 0.0;
    }
    double fl = std::floor(t);
    if (fl > top - 1.0) fl = top - 1.0;
    base[k] = static_cast<std::size_t>(fl);
    frac[k] = t - fl;
  }
  const std::vector<double>& v = u.values();
  double acc = 0.0;
  const unsigned corners = 1u << d;
  for (unsigned c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t flat = 0;
    for (int k = 0; k < d; ++k) {
      const bool hi = (c >> k) & 1u;
      w *= hi ? frac[k] : 1.0 - frac[k];
      flat += (base[k] + (hi ? 1 : 0)) * u.stride(k);
    }
    if (w != 0.0) acc += w * v[flat];
  }
  return acc;
}

GridFunction rescale(const GridFunction& u, double lambda,
                     std::span<const double> x0, double q) {
  const int d = u.dim();
  if (!std::isfinite(lambda) || lambda <= 0.0) {
    throw ValidationError("rescale factor lambda must be finite and positive");
  }
  if (static_cast<int>(x0.size()) != d) {
    throw ValidationError("rescale center dimension mismatch");
  }
  if (!std::isfinite(q) || q <= 0.0) {
    throw ValidationError("rescale exponent q must be positive");
  }
  bool identity = lambda == 1.0;
  for (double c : x0) {
    if (!std::isfinite(c)) throw ValidationError("rescale center must be finite");
    identity = identity && c == 0.0;
  }
  if (identity) {
    return u;
  }
  const double amp = std::pow(lambda, static_cast<double>(d) / q);
  GridFunction out = GridFunction::zeros(u.shape(), u.spacing());
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> y(d);
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    for (int k = 0; k < d; ++k) {
      y[k] = lambda * (out.coordinate(k, idx[k]) - x0[k]);
    }
    out.values()[flat] = amp * interpolate(u, y);
    for (int k = d - 1; k >= 0; --k) {
      if (++idx[k] < u.shape()[k]) break;
      idx[k] = 0;
    }
  }
  return out;
}

namespace {

// Layer-boundary index j in [0, N] with offset == (j - N/2) * h, or -1.
long long aligned_boundary(const GridFunction& u, int axis, double offset) {
  const double h = u.spacing()[axis];
  const double n2 = 0.5 * static_cast<double>(u.shape()[axis]);
  const double j = offset / h + n2;
  const double jr = std::round(j);
  if (std::abs(j - jr) > kAlignTol * (1.0 + std::abs(j)) || jr < 0.0 ||
      jr > 2.0 * n2) {
    return -1;
  }
  return static_cast<long long>(jr);
}

void validate_hyperplane(const GridFunction& u, const Hyperplane& h) {
  const int d = u.dim();
  if (h.kind == Hyperplane::Kind::coordinate) {
    if (h.axis < 0 || h.axis >= d) {
      throw ValidationError("hyperplane axis out of range");
    }
    if (!std::isfinite(h.offset)) {
      throw ValidationError("hyperplane offset must be finite");
    }
  } else {
    if (d < 2) {
      throw ValidationError("diagonal hyperplane needs dimension >= 2");
    }
    if (h.i < 0 || h.i >= d || h.j < 0 || h.j >= d || h.i == h.j) {
      throw ValidationError("diagonal hyperplane axes invalid");
    }
    if (h.sign != 1 && h.sign != -1) {
      throw ValidationError("diagonal hyperplane sign must be +1 or -1");
    }
    if (u.shape()[h.i] != u.shape()[h.j] ||
        u.spacing()[h.i] != u.spacing()[h.j]) {
      throw ValidationError(
          "diagonal reflection requires equal count and spacing on both axes");
    }
  }
}

}  // namespace

bool reflection_is_permutation(const GridFunction& u, const Hyperplane& h) {
  validate_hyperplane(u, h);
  if (h.kind == Hyperplane::Kind::diagonal) {
    return true;
  }
  const long long n = static_cast<long long>(u.shape()[h.axis]);
  return aligned_boundary(u, h.axis, h.offset) == n / 2;
}

GridFunction reflect(const GridFunction& u, const Hyperplane& h) {
  validate_hyperplane(u, h);
  const int d = u.dim();
  GridFunction out = GridFunction::zeros(u.shape(), u.spacing());
  std::vector<std::size_t> idx(d, 0);

  if (h.kind == Hyperplane::Kind::coordinate) {
    const long long j = aligned_boundary(u, h.axis, h.offset);
    if (j >= 0) {
      const long long n = static_cast<long long>(u.shape()[h.axis]);
      for (std::size_t flat = 0; flat < out.size(); ++flat) {
        const long long src = 2 * j - 1 - static_cast<long long>(idx[h.axis]);
        if (src >= 0 && src < n) {
          const std::size_t sflat =
              flat + (static_cast<std::size_t>(src) - idx[h.axis]) * u.stride(h.axis);
          out.values()[flat] = u.values()[sflat];
        }
        for (int k = d - 1; k >= 0; --k) {
          if (++idx[k] < u.shape()[k]) break;
          idx[k] = 0;
        }
      }
      return out;
    }
    std::vector<double> y(d);
    for (std::size_t flat = 0; flat < out.size(); ++flat) {
      for (int k = 0; k < d; ++k) y[k] = out.coordinate(k, idx[k]);
      y[h.axis] = 2.0 * h.offset - y[h.axis];
      out.values()[flat] = interpolate(u, y);
      for (int k = d - 1; k >= 0; --k) {
        if (++idx[k] < u.shape()[k]) break;
        idx[k] = 0;
      }
    }
    return out;
  }

  const std::size_t n = u.shape()[h.i];
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    std::size_t si, sj;
    if (h.sign > 0) {
      si = idx[h.j];
      sj = idx[h.i];
    } else {
      si = n - 1 - idx[h.j];
      sj = n - 1 - idx[h.i];
    }
    const std::size_t sflat = flat + (si - idx[h.i]) * u.stride(h.i) +
                              (sj - idx[h.j]) * u.stride(h.j);
    out.values()[flat] = u.values()[sflat];
    for (int k = d - 1; k >= 0; --k) {
      if (++idx[k] < u.shape()[k]) break;
      idx[k] = 0;
    }
  }
  return out;
}

double boundary_mass_fraction(const GridFunction& u, double r) {
  if (!std::isfinite(r) || r <= 0.0) {
    throw ValidationError("mass exponent r must be positive");
  }
  const int d = u.dim();
  std::vector<std::size_t> idx(d, 0);
  double total = 0.0;
  double rim = 0.0;
  for (std::size_t flat = 0; flat < u.size(); ++flat) {
    const double m = std::pow(std::abs(u.values()[flat]), r);
    total += m;
    for (int k = 0; k < d; ++k) {
      if (idx[k] == 0 || idx[k] == u.shape()[k] - 1) {
        rim += m;
        break;
      }
    }
    for (int k = d - 1; k >= 0; --k) {
      if (++idx[k] < u.shape()[k]) break;
      idx[k] = 0;
    }
  }
  return total > 0.0 ? rim / total : 0.0;
}

std::vector<double> power_barycenter(const GridFunction& u, double r) {
  if (!std::isfinite(r) || r <= 0.0) {
    throw ValidationError("mass exponent r must be positive");
  }
  const int d = u.dim();
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> acc(d, 0.0);
  double total = 0.0;
  for (std::size_t flat = 0; flat < u.size(); ++flat) {
    const double m = std::pow(std::abs(u.values()[flat]), r);
    total += m;
    for (int k = 0; k < d; ++k) {
      acc[k] += m * u.coordinate(k, idx[k]);
    }
    for (int k = d - 1; k >= 0; --k) {
      if (++idx[k] < u.shape()[k]) break;
      idx[k] = 0;
    }
  }
  if (total <= 0.0) {
    throw ValidationError("barycenter of the zero function is undefined");
  }
  for (double& a : acc) a /= total;
  return acc;
}

GridFunction shift_cells(const GridFunction& u, int axis, long long cells) {
  const int d = u.dim();
  if (axis < 0 || axis >= d) {
    throw ValidationError("shift axis out of range");
  }
  if (cells == 0) {
    return u;
  }
  GridFunction out = GridFunction::zeros(u.shape(), u.spacing());
  const long long n = static_cast<long long>(u.shape()[axis]);
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    const long long src = static_cast<long long>(idx[axis]) + cells;
    if (src >= 0 && src < n) {
      const std::size_t sflat =
          flat + (static_cast<std::size_t>(src) - idx[axis]) * u.stride(axis);
      out.values()[flat] = u.values()[sflat];
    }
    for (int k = d - 1; k >= 0; --k) {
      if (++idx[k] < u.shape()[k]) break;
      idx[k] = 0;
    }
  }
  return out;
}

}  // namespace gnslab

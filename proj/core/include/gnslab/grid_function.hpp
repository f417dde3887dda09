#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace gnslab {

/// Reflection hyperplane. Two kinds:
///  - coordinate: {x_axis = offset}
///  - diagonal:   {x_i = sign * x_j} with sign in {+1, -1}, through the origin
struct Hyperplane {
  enum class Kind { coordinate, diagonal };

  Kind kind = Kind::coordinate;
  int axis = 0;
  double offset = 0.0;
  int i = 0;
  int j = 1;
  int sign = +1;

  static Hyperplane coordinate_plane(int axis, double offset = 0.0) {
    Hyperplane h;
    h.kind = Kind::coordinate;
    h.axis = axis;
    h.offset = offset;
    return h;
  }

  static Hyperplane diagonal_plane(int i, int j, int sign) {
    Hyperplane h;
    h.kind = Kind::diagonal;
    h.i = i;
    h.j = j;
    h.sign = sign;
    return h;
  }
};

/// Scalar function sampled at the cell centers of a uniform grid whose box is
/// centered at the coordinate origin.
///
/// Layout and conventions:
///  - every axis has an even cell count, so coordinate hyperplanes through the
///    origin fall between cells and origin reflections permute cells exactly;
///  - cell k on an axis with count N and spacing h has center (k + 0.5 - N/2)*h;
///  - values are stored row-major with the last axis fastest;
///  - all values must be finite.
class GridFunction {
 public:
  GridFunction(std::vector<std::size_t> shape, std::vector<double> spacing,
               std::vector<double> values);

  static GridFunction zeros(std::vector<std::size_t> shape,
                            std::vector<double> spacing);

  /// Samples f at every cell center. f receives the center coordinates.
  static GridFunction sample(
      std::vector<std::size_t> shape, std::vector<double> spacing,
      const std::function<double(std::span<const double>)>& f);

  int dim() const { return static_cast<int>(shape_.size()); }
  const std::vector<std::size_t>& shape() const { return shape_; }
  const std::vector<double>& spacing() const { return spacing_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  std::size_t size() const { return values_.size(); }

  double cell_volume() const { return cell_volume_; }
  /// Center coordinate of cell `index` along `axis`.
  double coordinate(int axis, std::size_t index) const {
    return (static_cast<double>(index) + 0.5) * spacing_[axis] - half_extent_[axis];
  }
  /// Half the box edge length along `axis` (the domain is [-H, H]).
  double half_extent(int axis) const { return half_extent_[axis]; }
  std::size_t stride(int axis) const { return strides_[axis]; }

  /// Flat index of a multi-index (row-major, last axis fastest).
  std::size_t flat_index(std::span<const std::size_t> idx) const;
  /// Writes the multi-index of a flat index into `idx` (size dim()).
  void unflatten(std::size_t flat, std::span<std::size_t> idx) const;

  /// True when shapes and spacings match cell for cell.
  bool same_layout(const GridFunction& other) const;

  /// Re-checks finiteness of all values (used after in-place edits).
  void check_finite() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> spacing_;
  std::vector<double> values_;
  std::vector<std::size_t> strides_;
  std::vector<double> half_extent_;
  double cell_volume_ = 1.0;
};

/// Discrete L^r norm (midpoint quadrature): (sum |u|^r * cellvol)^(1/r), r >= 1.
double lr_norm(const GridFunction& u, double r);

/// sum |u|^r * cellvol without the outer root.
double lr_norm_pow(const GridFunction& u, double r);

/// sum |u - v|^r * cellvol; u and v must share the grid layout.
double lr_distance_pow(const GridFunction& u, const GridFunction& v, double r);

/// Discrete L^p norm of |grad u|, p > 1. Central differences in the interior,
/// one-sided at the first and last layer of each axis.
double grad_lp_norm(const GridFunction& u, double p);

/// Multilinear interpolation over the cell-center lattice; reads 0 outside the
/// hull of the outermost centers.
double interpolate(const GridFunction& u, std::span<const double> x);

/// The rescaling lambda^(n/q) * u(lambda * (x - x0)) sampled on u's own grid
/// via multilinear interpolation. lambda = 1, x0 = 0 returns a bit-exact copy.
GridFunction rescale(const GridFunction& u, double lambda,
                     std::span<const double> x0, double q);

/// u composed with the reflection across H. Coordinate hyperplanes whose
/// offset is aligned to a cell-layer boundary use an exact index remap (cells
/// whose mirror image falls outside the box read 0); unaligned offsets fall
/// back to interpolation. Diagonal reflections require the two axes to have
/// equal counts and spacing and are always exact permutations.
GridFunction reflect(const GridFunction& u, const Hyperplane& h);

/// True when the reflection across H maps the cell lattice onto itself
/// bijectively (origin-offset coordinate planes and valid diagonals).
bool reflection_is_permutation(const GridFunction& u, const Hyperplane& h);

/// Fraction of sum |u|^r * cellvol carried by the outermost cell layer
/// (cells touching the box boundary on any axis). Returns 0 for u = 0.
double boundary_mass_fraction(const GridFunction& u, double r);

/// Barycenter of the measure |u|^r dx. Errors on u = 0.
std::vector<double> power_barycenter(const GridFunction& u, double r);

/// Translates the sample lattice by a whole number of cells along `axis`
/// (content moves by -cells * h, i.e. cells > 0 moves values toward lower
/// indices). Vacated cells read 0; values shifted past the box are dropped.
GridFunction shift_cells(const GridFunction& u, int axis, long long cells);

}  // namespace gnslab

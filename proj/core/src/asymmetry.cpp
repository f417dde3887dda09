#include "gnslab/asymmetry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gnslab/errors.hpp"

namespace gnslab {

namespace {

constexpr double kPenaltyWeight = 1e3;
constexpr double kEmptyWitnessValue = 1e6;
constexpr double kEarlyExitLambda = 1e-12;

/// lambda(b, x0) with the amplitude eliminated against the grid q-norm of u.
class OrbitObjective {
 public:
  OrbitObjective(const GridFunction& u, const RadialProfile& profile, double q,
                 std::vector<int> free_axes, std::vector<double> x0_fixed,
                 double ln_bmin, double ln_bmax)
      : u_(u),
        q_(q),
        free_axes_(std::move(free_axes)),
        x0_(std::move(x0_fixed)),
        ln_bmin_(ln_bmin),
        ln_bmax_(ln_bmax) {
    witness_.a = 1.0;
    witness_.profile = profile;
    uq_mass_ = lr_norm_pow(u, q);
    scale_.reserve(free_axes_.size());
    for (int axis : free_axes_) {
      scale_.push_back(u.half_extent(axis));
    }
  }

  int dims() const { return 1 + static_cast<int>(free_axes_.size()); }
  double uq_mass() const { return uq_mass_; }
  const std::vector<double>& scale() const { return scale_; }
  long evals() const { return evals_; }

  std::vector<double> pack(double b, std::span<const double> x0_full) const {
    std::vector<double> z(static_cast<std::size_t>(dims()), 0.0);
    z[0] = std::log(b);
    for (std::size_t i = 0; i < free_axes_.size(); ++i) {
      z[1 + i] = x0_full[static_cast<std::size_t>(free_axes_[i])] / scale_[i];
    }
    return z;
  }

  double clamped_b(const std::vector<double>& z) const {
    return std::exp(std::clamp(z[0], ln_bmin_, ln_bmax_));
  }

  std::vector<double> unpack_x0(const std::vector<double>& z) const {
    std::vector<double> x0 = x0_;
    for (std::size_t i = 0; i < free_axes_.size(); ++i) {
      x0[static_cast<std::size_t>(free_axes_[i])] = z[1 + i] * scale_[i];
    }
    return x0;
  }

  double operator()(const std::vector<double>& z) {
    ++evals_;
    double penalty = 0.0;
    if (z[0] < ln_bmin_) {
      const double over = ln_bmin_ - z[0];
      penalty = kPenaltyWeight * over * over;
    } else if (z[0] > ln_bmax_) {
      const double over = z[0] - ln_bmax_;
      penalty = kPenaltyWeight * over * over;
    }
    return lambda_at(clamped_b(z), unpack_x0(z), nullptr) + penalty;
  }

  /// Shared by the search loop and the final report; `a_out` receives the
  /// eliminated amplitude when non-null.
  double lambda_at(double b, std::vector<double> x0, double* a_out) {
    witness_.b = b;
    witness_.x0 = std::move(x0);
    const GridFunction w = eval_witness(witness_, u_.shape(), u_.spacing());
    const double wq_mass = lr_norm_pow(w, q_);
    if (!(wq_mass > 1e-300)) {
      if (a_out != nullptr) *a_out = 0.0;
      return kEmptyWitnessValue;
    }
    const double a = std::pow(uq_mass_ / wq_mass, 1.0 / q_);
    if (a_out != nullptr) *a_out = a;
    const auto& uv = u_.values();
    const auto& wv = w.values();
    double acc = 0.0;
    for (std::size_t f = 0; f < uv.size(); ++f) {
      acc += std::pow(std::abs(uv[f] - a * wv[f]), q_);
    }
    return acc * u_.cell_volume() / uq_mass_;
  }

 private:
  const GridFunction& u_;
  double q_;
  std::vector<int> free_axes_;
  std::vector<double> x0_;
  std::vector<double> scale_;
  double ln_bmin_;
  double ln_bmax_;
  double uq_mass_ = 0.0;
  OptimizerWitness witness_;
  long evals_ = 0;
};

struct LocalSearchResult {
  std::vector<double> z;
  double value = std::numeric_limits<double>::infinity();
  bool by_diameter = false;
};

double simplex_diameter(const std::vector<std::vector<double>>& pts,
                        std::size_t best) {
  double d = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i == best) continue;
    for (std::size_t k = 0; k < pts[i].size(); ++k) {
      d = std::max(d, std::abs(pts[i][k] - pts[best][k]));
    }
  }
  return d;
}

/// Nelder-Mead with standard coefficients (reflect 1, expand 2, contract 1/2,
/// shrink 1/2); stops on simplex collapse below `tol` or on the eval budget.
LocalSearchResult nelder_mead(OrbitObjective& obj, std::vector<double> start,
                              const std::vector<double>& init_step, int budget,
                              double tol) {
  const std::size_t d = start.size();
  std::vector<std::vector<double>> pts;
  pts.reserve(d + 1);
  pts.push_back(start);
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<double> p = start;
    p[k] += init_step[k];
    pts.push_back(std::move(p));
  }

  int evals_left = budget;
  std::vector<double> fv(d + 1, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < pts.size() && evals_left > 0; ++i) {
    fv[i] = obj(pts[i]);
    --evals_left;
  }

  std::vector<std::size_t> order(d + 1);
  LocalSearchResult out;
  while (true) {
    for (std::size_t i = 0; i <= d; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&fv](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order[0];
    const std::size_t second_worst = order[d - 1];
    const std::size_t worst = order[d];

    out.z = pts[best];
    out.value = fv[best];
    if (simplex_diameter(pts, best) < tol || fv[best] < kEarlyExitLambda) {
      out.by_diameter = true;
      return out;
    }
    if (evals_left <= 0) {
      return out;
    }

    std::vector<double> centroid(d, 0.0);
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < d; ++k) centroid[k] += pts[i][k];
    }
    for (double& c : centroid) c /= static_cast<double>(d);

    auto blend = [&centroid, &pts, worst, d](double t) {
      std::vector<double> p(d);
      for (std::size_t k = 0; k < d; ++k) {
        p[k] = centroid[k] + t * (centroid[k] - pts[worst][k]);
      }
      return p;
    };

    std::vector<double> reflected = blend(1.0);
    const double fr = obj(reflected);
    --evals_left;

    if (fr < fv[best]) {
      if (evals_left > 0) {
        std::vector<double> expanded = blend(2.0);
        const double fe = obj(expanded);
        --evals_left;
        if (fe < fr) {
          pts[worst] = std::move(expanded);
          fv[worst] = fe;
          continue;
        }
      }
      pts[worst] = std::move(reflected);
      fv[worst] = fr;
      continue;
    }
    if (fr < fv[second_worst]) {
      pts[worst] = std::move(reflected);
      fv[worst] = fr;
      continue;
    }

    const bool outside = fr < fv[worst];
    std::vector<double> contracted = blend(outside ? 0.5 : -0.5);
    double fc = std::numeric_limits<double>::infinity();
    if (evals_left > 0) {
      fc = obj(contracted);
      --evals_left;
    }
    if (fc < std::min(fr, fv[worst])) {
      pts[worst] = std::move(contracted);
      fv[worst] = fc;
      continue;
    }

    for (std::size_t i = 0; i <= d; ++i) {
      if (i == best) continue;
      if (evals_left <= 0) break;  // keep pts/fv pairs consistent
      for (std::size_t k = 0; k < d; ++k) {
        pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
      }
      fv[i] = obj(pts[i]);
      --evals_left;
    }
  }
}

AsymmetryResult run_orbit_search(const GridFunction& u,
                                 const AffineRestriction& restriction,
                                 const GnsParams& params,
                                 const OptimizerModel& model,
                                 const SearchConfig& cfg) {
  if (u.dim() != params.n) {
    throw ValidationError("grid dimension does not match the parameter n");
  }
  if (model.profile.dim != u.dim()) {
    throw ValidationError("model profile dimension does not match the grid");
  }
  if (cfg.restarts < 0 || cfg.budget < 1) {
    throw ValidationError("search config needs restarts >= 0 and budget >= 1");
  }
  if (!(cfg.b_min > 0.0) || !(cfg.b_max > cfg.b_min)) {
    throw ValidationError("search config needs 0 < b_min < b_max");
  }
  if (!(cfg.tol > 0.0)) {
    throw ValidationError("search tolerance must be positive");
  }
  const double q = params.q;
  const double u_qnorm = lr_norm(u, q);
  if (!(u_qnorm > 0.0)) {
    throw ValidationError("asymmetry of the zero function is undefined");
  }

  std::vector<int> free_axes;
  std::vector<double> x0_fixed(static_cast<std::size_t>(u.dim()), 0.0);
  for (const auto& [axis, value] : restriction.fixed_coords) {
    if (axis < 0 || axis >= u.dim()) {
      throw ValidationError("restricted axis out of range");
    }
    if (!std::isfinite(value)) {
      throw ValidationError("restricted coordinate must be finite");
    }
    x0_fixed[static_cast<std::size_t>(axis)] = value;
  }
  for (int axis = 0; axis < u.dim(); ++axis) {
    if (restriction.fixed_coords.find(axis) == restriction.fixed_coords.end()) {
      free_axes.push_back(axis);
    }
  }

  const double ln_bmin = std::log(cfg.b_min);
  const double ln_bmax = std::log(cfg.b_max);
  OrbitObjective obj(u, model.profile, q, free_axes, x0_fixed, ln_bmin,
                     ln_bmax);

  // Deterministic start 0: unit dilation centered at the |u|^q barycenter
  // (free coordinates only; pinned ones stay on S).
  std::vector<double> start_x0 = x0_fixed;
  const std::vector<double> bary = power_barycenter(u, q);
  for (int axis : free_axes) {
    start_x0[static_cast<std::size_t>(axis)] = bary[static_cast<std::size_t>(axis)];
  }
  const std::vector<double> z0 = obj.pack(1.0, start_x0);

  // Deterministic start 1: dilation matching the rms radius of |u|^q around
  // the start center to that of the profile.
  const double uq_mass = obj.uq_mass();
  double r2_u = 0.0;
  {
    const auto& vals = u.values();
    const int dim = u.dim();
    std::vector<std::size_t> idx(static_cast<std::size_t>(dim), 0);
    const double vol = u.cell_volume();
    for (std::size_t f = 0; f < vals.size(); ++f) {
      double r2 = 0.0;
      for (int k = 0; k < dim; ++k) {
        const double dx =
            u.coordinate(k, idx[static_cast<std::size_t>(k)]) -
            start_x0[static_cast<std::size_t>(k)];
        r2 += dx * dx;
      }
      r2_u += r2 * std::pow(std::abs(vals[f]), q) * vol;
      for (int k = dim - 1; k >= 0; --k) {
        auto& ik = idx[static_cast<std::size_t>(k)];
        if (++ik < u.shape()[static_cast<std::size_t>(k)]) break;
        ik = 0;
      }
    }
    r2_u /= uq_mass;
  }
  const double prof_mass = radial_moment(model.profile, q);
  double b_match = 1.0;
  if (r2_u > 0.0 && prof_mass > 0.0) {
    // second radial moment of |v|^q: reuse the trapezoid rule with the
    // profile values premultiplied by r^(2/q).
    RadialProfile weighted = model.profile;
    for (std::size_t i = 0; i < weighted.values.size(); ++i) {
      weighted.values[i] = std::abs(weighted.values[i]) *
                           std::pow(weighted.radii[i], 2.0 / q);
    }
    const double r2_prof = radial_moment(weighted, q) / prof_mass;
    if (r2_prof > 0.0) {
      b_match = std::clamp(std::sqrt(r2_prof / r2_u), cfg.b_min, cfg.b_max);
    }
  }
  std::vector<double> z1 = z0;
  z1[0] = std::log(b_match);

  std::vector<std::vector<double>> starts;
  starts.push_back(z0);
  starts.push_back(z1);
  for (int r = 0; r < cfg.restarts; ++r) {
    std::mt19937_64 rng(cfg.seed +
                        0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(r + 1));
    std::uniform_real_distribution<double> db(-1.5, 1.5);
    std::uniform_real_distribution<double> dx(-0.2, 0.2);
    std::vector<double> z = z0;
    z[0] = std::clamp(z0[0] + db(rng), ln_bmin, ln_bmax);
    for (std::size_t k = 1; k < z.size(); ++k) {
      z[k] += dx(rng);
    }
    starts.push_back(std::move(z));
  }

  std::vector<double> init_step(static_cast<std::size_t>(obj.dims()), 0.05);
  init_step[0] = 0.3;

  AsymmetryResult result;
  LocalSearchResult best;
  for (const auto& start : starts) {
    LocalSearchResult local =
        nelder_mead(obj, start, init_step, cfg.budget, cfg.tol);
    ++result.restarts_used;
    result.converged = result.converged || local.by_diameter;
    if (local.value < best.value) {
      best = std::move(local);
    }
    if (best.value < kEarlyExitLambda) break;
  }

  const double b_best = obj.clamped_b(best.z);
  result.hit_scale_bound = best.z[0] <= ln_bmin + 1e-9 * std::abs(ln_bmin) ||
                           best.z[0] >= ln_bmax - 1e-9 * std::abs(ln_bmax);

  double a_best = 0.0;
  std::vector<double> x0_best = obj.unpack_x0(best.z);
  result.lambda_value = obj.lambda_at(b_best, x0_best, &a_best);

  result.witness.a = a_best;
  result.witness.b = b_best;
  result.witness.x0 = std::move(x0_best);
  result.witness.profile = model.profile;

  if (a_best > 0.0) {
    const GridFunction v =
        eval_witness(result.witness, u.shape(), u.spacing());
    result.constraint_residual = std::abs(lr_norm(v, q) - u_qnorm) / u_qnorm;
  } else {
    result.constraint_residual = 1.0;  // escaped witness: constraint is moot
  }
  return result;
}

}  // namespace

std::string search_config_to_json(const SearchConfig& cfg) {
  nlohmann::json j;
  j["restarts"] = cfg.restarts;
  j["budget"] = cfg.budget;
  j["b_min"] = cfg.b_min;
  j["b_max"] = cfg.b_max;
  j["seed"] = cfg.seed;
  j["tol"] = cfg.tol;
  return j.dump(2) + "\n";
}

SearchConfig search_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("search config is not valid JSON: ") +
                      e.what());
  }
  if (!j.is_object()) {
    throw FormatError("search config must be a JSON object");
  }
  SearchConfig cfg;
  try {
    if (j.contains("restarts")) cfg.restarts = j.at("restarts").get<int>();
    if (j.contains("budget")) cfg.budget = j.at("budget").get<int>();
    if (j.contains("b_min")) cfg.b_min = j.at("b_min").get<double>();
    if (j.contains("b_max")) cfg.b_max = j.at("b_max").get<double>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("tol")) cfg.tol = j.at("tol").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("search config field has wrong type: ") +
                      e.what());
  }
  if (cfg.restarts < 0 || cfg.budget < 1) {
    throw ValidationError("search config needs restarts >= 0 and budget >= 1");
  }
  if (!(cfg.b_min > 0.0) || !(cfg.b_max > cfg.b_min)) {
    throw ValidationError("search config needs 0 < b_min < b_max");
  }
  if (!(cfg.tol > 0.0)) {
    throw ValidationError("search tolerance must be positive");
  }
  return cfg;
}

AsymmetryResult asymmetry(const GridFunction& u, const GnsParams& params,
                          const OptimizerModel& model,
                          const SearchConfig& cfg) {
  return run_orbit_search(u, AffineRestriction{}, params, model, cfg);
}

AsymmetryResult relative_asymmetry(const GridFunction& u,
                                   const AffineRestriction& restriction,
                                   const GnsParams& params,
                                   const OptimizerModel& model,
                                   const SearchConfig& cfg) {
  return run_orbit_search(u, restriction, params, model, cfg);
}

double reflection_distance(const GridFunction& u, const Hyperplane& h,
                           double q) {
  if (!reflection_is_permutation(u, h)) {
    throw ValidationError(
        "reflection distance needs a lattice-permuting hyperplane");
  }
  const GridFunction mirrored = reflect(u, h);
  return lr_distance_pow(mirrored, u, q);
}

}  // namespace gnslab

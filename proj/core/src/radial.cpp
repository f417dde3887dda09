#include "gnslab/radial.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "gnslab/errors.hpp"
#include "gnslab/functionals.hpp"

namespace gnslab {

using nlohmann::json;

double unit_ball_volume(int n) {
  if (n < 1) {
    throw ValidationError("unit ball volume needs dimension >= 1");
  }
  const double nd = static_cast<double>(n);
  return std::pow(std::numbers::pi, 0.5 * nd) / std::tgamma(0.5 * nd + 1.0);
}

RadialProfile make_radial_profile(int dim, std::vector<double> radii,
                                  std::vector<double> values, double q) {
  if (dim < 2) {
    throw ValidationError("radial profile dimension must be >= 2");
  }
  if (radii.size() < 2 || radii.size() != values.size()) {
    throw ValidationError("radial profile needs matching radii/values, >= 2 points");
  }
  if (radii.front() != 0.0) {
    throw ValidationError("radial profile must start at r = 0");
  }
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  const double mono_tol = 1e-12 * std::max(1.0, scale);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!std::isfinite(radii[i]) || !std::isfinite(values[i])) {
      throw ValidationError("radial profile entries must be finite");
    }
    if (i > 0 && radii[i] <= radii[i - 1]) {
      throw ValidationError("radial profile radii must be strictly increasing");
    }
    if (values[i] < 0.0) {
      throw ValidationError("radial profile values must be nonnegative");
    }
    if (i > 0 && values[i] > values[i - 1] + mono_tol) {
      throw ValidationError("radial profile values must be nonincreasing");
    }
  }
  if (!std::isfinite(q) || q <= 0.0) {
    throw ValidationError("radial profile norm exponent q must be positive");
  }
  RadialProfile v;
  v.dim = dim;
  v.radii = std::move(radii);
  v.values = std::move(values);
  v.q_norm = std::pow(radial_moment(v, q), 1.0 / q);
  return v;
}

double radial_moment(const RadialProfile& v, double e) {
  const std::size_t m = v.radii.size();
  const double nd = static_cast<double>(v.dim);
  const double factor = nd * unit_ball_volume(v.dim);
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double lo = i == 0 ? v.radii[0] : v.radii[i - 1];
    const double hi = i + 1 == m ? v.radii[m - 1] : v.radii[i + 1];
    const double w = 0.5 * (hi - lo);
    acc += w * std::pow(std::abs(v.values[i]), e) *
           std::pow(v.radii[i], nd - 1.0);
  }
  return factor * acc;
}

double radial_grad_pow(const RadialProfile& v, double p) {
  const std::size_t m = v.radii.size();
  const double nd = static_cast<double>(v.dim);
  const double omega = unit_ball_volume(v.dim);
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < m; ++j) {
    const double d = (v.values[j + 1] - v.values[j]) / (v.radii[j + 1] - v.radii[j]);
    acc += std::pow(std::abs(d), p) *
           (std::pow(v.radii[j + 1], nd) - std::pow(v.radii[j], nd));
  }
  return omega * acc;
}

namespace {

// Uniform radial mesh with the quadrature weights the solver needs.
struct Mesh {
  int n = 0;
  std::size_t m = 0;
  double dr = 0.0;
  double r_max = 0.0;
  std::vector<double> r;      // node radii
  std::vector<double> node_w; // n*omega_n * trapezoid weight * r^(n-1)
  std::vector<double> shell;  // omega_n * (r_{j+1}^n - r_j^n) per segment
  std::vector<double> cellv;  // node cell volume for the L2 inner product
};

Mesh build_mesh(int n, std::size_t m, double r_max) {
  Mesh mesh;
  mesh.n = n;
  mesh.m = m;
  mesh.r_max = r_max;
  mesh.dr = r_max / static_cast<double>(m - 1);
  const double nd = static_cast<double>(n);
  const double omega = unit_ball_volume(n);
  mesh.r.resize(m);
  mesh.node_w.resize(m);
  mesh.shell.resize(m - 1);
  mesh.cellv.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    mesh.r[i] = static_cast<double>(i) * mesh.dr;
  }
  mesh.r.back() = r_max;
  for (std::size_t i = 0; i < m; ++i) {
    const double w = (i == 0 || i + 1 == m) ? 0.5 * mesh.dr : mesh.dr;
    mesh.node_w[i] = nd * omega * w * std::pow(mesh.r[i], nd - 1.0);
    const double lo = i == 0 ? 0.0 : mesh.r[i] - 0.5 * mesh.dr;
    const double hi = i + 1 == m ? r_max : mesh.r[i] + 0.5 * mesh.dr;
    mesh.cellv[i] = omega * (std::pow(hi, nd) - std::pow(lo, nd));
  }
  for (std::size_t j = 0; j + 1 < m; ++j) {
    mesh.shell[j] =
        omega * (std::pow(mesh.r[j + 1], nd) - std::pow(mesh.r[j], nd));
  }
  return mesh;
}

double mesh_moment(const Mesh& mesh, const std::vector<double>& y, double e) {
  double acc = 0.0;
  for (std::size_t i = 0; i < mesh.m; ++i) {
    acc += mesh.node_w[i] * std::pow(y[i], e);
  }
  return acc;
}

double mesh_grad_pow(const Mesh& mesh, const std::vector<double>& y, double p) {
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < mesh.m; ++j) {
    acc += mesh.shell[j] * std::pow(std::abs(y[j + 1] - y[j]) / mesh.dr, p);
  }
  return acc;
}

double mesh_F(const Mesh& mesh, const std::vector<double>& y,
              const GnsParams& g) {
  return mesh_grad_pow(mesh, y, g.p) + mesh_moment(mesh, y, g.s);
}

// dF/dy_i divided by the node cell volume (discrete L2 gradient).
void mesh_gradient(const Mesh& mesh, const std::vector<double>& y,
                   const GnsParams& g, std::vector<double>& grad) {
  const std::size_t m = mesh.m;
  grad.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    grad[i] = mesh.node_w[i] * g.s * std::pow(y[i], g.s - 1.0);
  }
  for (std::size_t j = 0; j + 1 < m; ++j) {
    const double d = (y[j + 1] - y[j]) / mesh.dr;
    const double t = mesh.shell[j] * g.p *
                     std::pow(std::abs(d), g.p - 1.0) *
                     (d >= 0.0 ? 1.0 : -1.0) / mesh.dr;
    grad[j] -= t;
    grad[j + 1] += t;
  }
  for (std::size_t i = 0; i < m; ++i) {
    grad[i] /= mesh.cellv[i];
  }
}

// Weighted L2 projection onto nonincreasing sequences (pool adjacent
// violators), then clamp at 0; the clamp of an antitonic fit stays antitonic
// and yields the projection onto the intersection.
void project_monotone(std::vector<double>& y, const std::vector<double>& w) {
  const std::size_t m = y.size();
  std::vector<double> mean(m), wsum(m);
  std::vector<std::size_t> count(m);
  std::size_t top = 0;
  for (std::size_t i = 0; i < m; ++i) {
    mean[top] = y[i];
    wsum[top] = w[i];
    count[top] = 1;
    while (top > 0 && mean[top - 1] < mean[top]) {
      const double ws = wsum[top - 1] + wsum[top];
      mean[top - 1] = (wsum[top - 1] * mean[top - 1] + wsum[top] * mean[top]) / ws;
      wsum[top - 1] = ws;
      count[top - 1] += count[top];
      --top;
    }
    ++top;
  }
  std::size_t pos = 0;
  for (std::size_t b = 0; b < top; ++b) {
    const double v = std::max(mean[b], 0.0);
    for (std::size_t c = 0; c < count[b]; ++c) {
      y[pos++] = v;
    }
  }
}

// Scales to the target q-mass; reports failure if the profile collapsed to 0.
bool try_renormalize(const Mesh& mesh, std::vector<double>& y, double q,
                     double target) {
  const double mass = mesh_moment(mesh, y, q);
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    return false;
  }
  const double t = std::pow(target / mass, 1.0 / q);
  for (double& v : y) v *= t;
  return true;
}

void renormalize(const Mesh& mesh, std::vector<double>& y, double q,
                 double target) {
  if (!try_renormalize(mesh, y, q, target)) {
    throw NumericalError("radial solver: profile mass degenerated");
  }
}

// Linear interpolation of a uniform-mesh profile; 0 beyond the last node.
double interp_uniform(const std::vector<double>& y, double dr, double r) {
  if (r <= 0.0) return y.front();
  const double t = r / dr;
  const double top = static_cast<double>(y.size() - 1);
  if (t >= top) {
    return t == top ? y.back() : 0.0;
  }
  const std::size_t i = static_cast<std::size_t>(t);
  const double f = t - static_cast<double>(i);
  return y[i] * (1.0 - f) + y[i + 1] * f;
}

// Analytic minimization over the rescaling family, resampled onto the mesh.
// Returns true and replaces y when the move lowered F.
bool try_scale_move(const Mesh& mesh, std::vector<double>& y,
                    const GnsParams& g, double target, double& F_cur) {
  const double A = mesh_grad_pow(mesh, y, g.p);
  const double B = mesh_moment(mesh, y, g.s);
  if (!(A > 0.0) || !(B > 0.0)) return false;
  const double lam = scale_lambda_min(A, B, g);
  if (!std::isfinite(lam) || lam <= 0.0 || std::abs(lam - 1.0) < 1e-14) {
    return false;
  }
  const double amp = std::pow(lam, static_cast<double>(g.n) / g.q);
  std::vector<double> cand(mesh.m);
  for (std::size_t i = 0; i < mesh.m; ++i) {
    cand[i] = amp * interp_uniform(y, mesh.dr, lam * mesh.r[i]);
  }
  project_monotone(cand, mesh.cellv);
  if (!try_renormalize(mesh, cand, g.q, target)) return false;
  const double F_new = mesh_F(mesh, cand, g);
  if (F_new < F_cur) {
    y.swap(cand);
    F_cur = F_new;
    return true;
  }
  return false;
}

struct LevelOutcome {
  double F = 0.0;
  bool stagnated = false;
  int accepted = 0;
};

LevelOutcome descend_level(const Mesh& mesh, std::vector<double>& y,
                           const GnsParams& g, double target, int budget) {
  LevelOutcome out;
  project_monotone(y, mesh.cellv);
  renormalize(mesh, y, g.q, target);
  double F_cur = mesh_F(mesh, y, g);
  std::vector<double> grad, cand;
  double step = 1.0;
  double F_window = F_cur;
  constexpr int kWindow = 40;
  for (int sweep = 0; sweep < budget; ++sweep) {
    mesh_gradient(mesh, y, g, grad);
    bool accepted = false;
    double tau = step;
    for (int half = 0; half < 48; ++half) {
      cand = y;
      for (std::size_t i = 0; i < mesh.m; ++i) {
        cand[i] -= tau * grad[i];
      }
      project_monotone(cand, mesh.cellv);
      if (!try_renormalize(mesh, cand, g.q, target)) {
        tau *= 0.5;
        continue;
      }
      double move2 = 0.0;
      for (std::size_t i = 0; i < mesh.m; ++i) {
        const double d = cand[i] - y[i];
        move2 += mesh.cellv[i] * d * d;
      }
      if (move2 == 0.0) break;
      const double F_new = mesh_F(mesh, cand, g);
      if (F_new <= F_cur - 1e-4 * move2 / tau) {
        y.swap(cand);
        F_cur = F_new;
        accepted = true;
        step = std::min(tau * 4.0, 1e8);
        break;
      }
      tau *= 0.5;
    }
    if (!accepted) {
      out.stagnated = true;
      break;
    }
    ++out.accepted;
    if (out.accepted % 25 == 0) {
      if (try_scale_move(mesh, y, g, target, F_cur)) ++out.accepted;
    }
    if (out.accepted % kWindow == 0) {
      if (F_window - F_cur <= 1e-13 * std::abs(F_cur)) break;
      F_window = F_cur;
    }
  }
  if (try_scale_move(mesh, y, g, target, F_cur)) ++out.accepted;
  out.F = F_cur;
  return out;
}

std::vector<double> initial_profile(const Mesh& mesh, std::uint64_t seed) {
  std::vector<double> y(mesh.m);
  for (std::size_t i = 0; i < mesh.m; ++i) {
    y[i] = std::exp(-mesh.r[i] * mesh.r[i]);
  }
  if (seed != 0) {
    std::mt19937_64 rng(seed);
    auto unit = [&rng]() {
      return static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    double c[4], phase[4];
    for (int j = 0; j < 4; ++j) {
      c[j] = 0.05 * (2.0 * unit() - 1.0) / static_cast<double>(j + 1);
      phase[j] = 2.0 * std::numbers::pi * unit();
    }
    for (std::size_t i = 0; i < mesh.m; ++i) {
      double xi = 0.0;
      for (int j = 0; j < 4; ++j) {
        xi += c[j] * std::cos((j + 1) * std::numbers::pi * mesh.r[i] / mesh.r_max +
                              phase[j]);
      }
      y[i] *= 1.0 + xi;
    }
  }
  return y;
}

}  // namespace

RadialSolveResult minimize_radial(const GnsParams& params,
                                  const MinimizeOptions& opts) {
  if (opts.resolution < 256) {
    throw ValidationError("radial resolution must be >= 256");
  }
  if (!std::isfinite(opts.r_max) || opts.r_max <= 0.0) {
    throw ValidationError("r_max must be finite and positive");
  }
  if (opts.budget < 1) {
    throw ValidationError("budget must be >= 1");
  }
  if (!std::isfinite(opts.q_mass) || opts.q_mass <= 0.0) {
    throw ValidationError("target q-mass must be positive");
  }

  // Coarse-to-fine continuation: each level's result seeds the next.
  std::vector<std::size_t> sizes{static_cast<std::size_t>(opts.resolution)};
  while (sizes.back() > 321) {
    sizes.push_back((sizes.back() + 1) / 2);
  }
  std::reverse(sizes.begin(), sizes.end());

  RadialSolveResult result;
  std::vector<double> y;
  Mesh mesh;
  for (std::size_t li = 0; li < sizes.size(); ++li) {
    Mesh fine = build_mesh(params.n, sizes[li], opts.r_max);
    if (li == 0) {
      y = initial_profile(fine, opts.seed);
    } else {
      std::vector<double> up(fine.m);
      for (std::size_t i = 0; i < fine.m; ++i) {
        up[i] = interp_uniform(y, mesh.dr, fine.r[i]);
      }
      y.swap(up);
    }
    mesh = std::move(fine);
    LevelOutcome lo = descend_level(mesh, y, params, opts.q_mass, opts.budget);
    result.iterations += lo.accepted;
    result.stagnated = lo.stagnated;
    result.F_min = lo.F;
  }

  double tail = 0.0;
  for (std::size_t i = 0; i < mesh.m; ++i) {
    if (mesh.r[i] >= 0.9 * opts.r_max) {
      tail += mesh.node_w[i] * std::pow(y[i], params.q);
    }
  }
  if (tail > 1e-8 * opts.q_mass) {
    std::ostringstream msg;
    msg << "radial solver: r_max too small, tail q-mass fraction "
        << tail / opts.q_mass << " exceeds 1e-8";
    throw NumericalError(msg.str());
  }

  result.profile =
      make_radial_profile(params.n, mesh.r, std::move(y), params.q);
  const double A = radial_grad_pow(result.profile, params.p);
  const double B = radial_moment(result.profile, params.s);
  result.F_min = A + B;
  result.G_est = std::pow(
      result.F_min / (params.eta0 * std::pow(opts.q_mass, params.alpha_exp)),
      1.0 / params.k_exp);
  result.G_direct = std::pow(A, params.theta / params.p) *
                    std::pow(B, (1.0 - params.theta) / params.s) /
                    result.profile.q_norm;
  if (!std::isfinite(result.G_est) || result.G_est <= 0.0) {
    throw NumericalError("radial solver: constant estimate is not finite");
  }
  return result;
}

double phi_of_mass(double m, double phi1, const GnsParams& params) {
  if (!std::isfinite(m) || m <= 0.0) {
    throw ValidationError("phi is defined for positive mass only");
  }
  return std::pow(m, params.alpha_exp) * phi1;
}

GridFunction eval_witness(const OptimizerWitness& w,
                          std::vector<std::size_t> shape,
                          std::vector<double> spacing) {
  if (w.a == 0.0 || !std::isfinite(w.a)) {
    throw ValidationError("witness amplitude a must be finite and nonzero");
  }
  if (!(w.b > 0.0) || !std::isfinite(w.b)) {
    throw ValidationError("witness scale b must be finite and positive");
  }
  const std::size_t d = shape.size();
  if (w.x0.size() != d) {
    throw ValidationError("witness center dimension mismatch");
  }
  const std::vector<double>& radii = w.profile.radii;
  const std::vector<double>& vals = w.profile.values;
  if (radii.size() < 2) {
    throw ValidationError("witness profile too short");
  }
  // Uniform meshes take the O(1) path; general meshes use binary search.
  const double dr0 = radii[1] - radii[0];
  bool uniform = true;
  for (std::size_t i = 1; i + 1 < radii.size() && uniform; ++i) {
    uniform = std::abs(radii[i + 1] - radii[i] - dr0) <= 1e-9 * radii.back();
  }
  auto profile_at = [&](double r) -> double {
    if (uniform) return interp_uniform(vals, dr0, r);
    if (r <= 0.0) return vals.front();
    if (r > radii.back()) return 0.0;
    const auto it = std::upper_bound(radii.begin(), radii.end(), r);
    const std::size_t i = static_cast<std::size_t>(it - radii.begin()) - 1;
    if (i + 1 >= radii.size()) return vals.back();
    const double f = (r - radii[i]) / (radii[i + 1] - radii[i]);
    return vals[i] * (1.0 - f) + vals[i + 1] * f;
  };
  GridFunction out = GridFunction::zeros(std::move(shape), std::move(spacing));
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    double r2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double dx = out.coordinate(static_cast<int>(k), idx[k]) - w.x0[k];
      r2 += dx * dx;
    }
    out.values()[flat] = w.a * profile_at(w.b * std::sqrt(r2));
    for (int k = static_cast<int>(d) - 1; k >= 0; --k) {
      if (++idx[k] < out.shape()[k]) break;
      idx[k] = 0;
    }
  }
  return out;
}

std::string model_to_json(const OptimizerModel& m) {
  json j;
  j["params"] = json::parse(params_to_json(m.params));
  j["radii"] = m.profile.radii;
  j["values"] = m.profile.values;
  j["G_est"] = m.G_est;
  j["F_min"] = m.F_min;
  j["resolution"] = m.resolution;
  j["seed"] = m.seed;
  return j.dump();
}

OptimizerModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("model: invalid JSON: ") + e.what());
  }
  for (const char* key :
       {"params", "radii", "values", "G_est", "F_min", "resolution", "seed"}) {
    if (!j.contains(key)) {
      throw FormatError(std::string("model: missing field \"") + key + "\"");
    }
  }
  OptimizerModel m;
  m.params = params_from_json(j["params"].dump());
  if (!j["radii"].is_array() || !j["values"].is_array()) {
    throw FormatError("model: radii and values must be arrays");
  }
  std::vector<double> radii, values;
  try {
    radii = j["radii"].get<std::vector<double>>();
    values = j["values"].get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("model: bad profile arrays: ") + e.what());
  }
  m.profile = make_radial_profile(m.params.n, std::move(radii),
                                  std::move(values), m.params.q);
  if (!j["G_est"].is_number() || !j["F_min"].is_number()) {
    throw FormatError("model: G_est and F_min must be numbers");
  }
  m.G_est = j["G_est"].get<double>();
  m.F_min = j["F_min"].get<double>();
  if (!std::isfinite(m.G_est) || m.G_est <= 0.0) {
    throw FormatError("model: G_est must be finite and positive");
  }
  if (!j["resolution"].is_number_integer() || !j["seed"].is_number_integer()) {
    throw FormatError("model: resolution and seed must be integers");
  }
  m.resolution = j["resolution"].get<int>();
  m.seed = j["seed"].get<std::uint64_t>();
  return m;
}

void write_model_file(const std::string& path, const OptimizerModel& m) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw FormatError("model: cannot open " + path + " for writing");
  }
  out << model_to_json(m) << '\n';
  if (!out) {
    throw NumericalError("model: write failed");
  }
}

OptimizerModel read_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("model: cannot open " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace gnslab

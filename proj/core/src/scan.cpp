#include "gnslab/scan.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>
#include <utility>

#include "gnslab/errors.hpp"
#include "gnslab/functionals.hpp"
#include "gnslab/rearrange.hpp"

namespace gnslab {

namespace {

constexpr const char* kCsvHeader = "eps,delta,lambda,delta_ps,boundary_mass";

/// Central-difference derivative along `axis`, one-sided at the box faces
/// (the same stencil the gradient norm uses).
GridFunction axis_derivative(const GridFunction& u, int axis) {
  const auto& vals = u.values();
  const std::size_t stride = u.stride(axis);
  const auto count = u.shape()[static_cast<std::size_t>(axis)];
  const double h = u.spacing()[static_cast<std::size_t>(axis)];
  std::vector<double> out(vals.size(), 0.0);
  for (std::size_t f = 0; f < vals.size(); ++f) {
    const std::size_t i = (f / stride) % count;
    if (i == 0) {
      out[f] = (vals[f + stride] - vals[f]) / h;
    } else if (i + 1 == count) {
      out[f] = (vals[f] - vals[f - stride]) / h;
    } else {
      out[f] = (vals[f + stride] - vals[f - stride]) / (2.0 * h);
    }
  }
  return GridFunction(u.shape(), u.spacing(), std::move(out));
}

GridFunction normalized_direction(GridFunction w, double q,
                                  const char* label) {
  const double norm = lr_norm(w, q);
  if (!(norm > 0.0)) {
    throw NumericalError(std::string("perturbation direction '") + label +
                         "' vanishes on this grid");
  }
  for (double& v : w.values()) v /= norm;
  return w;
}

}  // namespace

Family family_from_name(const std::string& name) {
  std::string canon;
  canon.reserve(name.size());
  for (char c : name) canon.push_back(c == '_' ? '-' : c);
  if (canon == "radial-bump") return Family::radial_bump;
  if (canon == "translate") return Family::translate;
  if (canon == "dilate") return Family::dilate;
  if (canon == "two-bump") return Family::two_bump;
  if (canon == "sign-flip") return Family::sign_flip;
  throw ValidationError(
      "unknown family '" + name +
      "' (choose radial-bump, translate, dilate, two-bump, or sign-flip)");
}

std::string family_name(Family family) {
  switch (family) {
    case Family::radial_bump: return "radial-bump";
    case Family::translate: return "translate";
    case Family::dilate: return "dilate";
    case Family::two_bump: return "two-bump";
    case Family::sign_flip: return "sign-flip";
  }
  throw ValidationError("unknown family value");
}

GridFunction family_direction(Family family, const GridFunction& v_emb,
                              const GnsParams& params,
                              const OptimizerModel& model) {
  const double q = params.q;
  const int dim = v_emb.dim();
  switch (family) {
    case Family::radial_bump: {
      GridFunction w = GridFunction::sample(
          v_emb.shape(), v_emb.spacing(), [](std::span<const double> x) {
            double r2 = 0.0;
            for (double c : x) r2 += c * c;
            const double d = std::sqrt(r2) - 1.0;
            return std::exp(-d * d / 0.25);
          });
      return normalized_direction(std::move(w), q, "radial-bump");
    }
    case Family::translate: {
      GridFunction w = axis_derivative(v_emb, 0);
      for (double& v : w.values()) v = -v;
      return normalized_direction(std::move(w), q, "translate");
    }
    case Family::dilate: {
      std::vector<double> out = v_emb.values();
      const double factor = static_cast<double>(params.n) / q;
      for (double& v : out) v *= factor;
      for (int axis = 0; axis < dim; ++axis) {
        const GridFunction d = axis_derivative(v_emb, axis);
        const std::size_t stride = v_emb.stride(axis);
        const auto count = v_emb.shape()[static_cast<std::size_t>(axis)];
        const auto& dv = d.values();
        for (std::size_t f = 0; f < out.size(); ++f) {
          const std::size_t i = (f / stride) % count;
          out[f] += v_emb.coordinate(axis, i) * dv[f];
        }
      }
      GridFunction w(v_emb.shape(), v_emb.spacing(), std::move(out));
      return normalized_direction(std::move(w), q, "dilate");
    }
    case Family::two_bump: {
      OptimizerWitness displaced;
      displaced.a = 1.0;
      displaced.b = 1.0;
      displaced.x0.assign(static_cast<std::size_t>(dim), 0.0);
      displaced.x0[0] = 2.5;
      displaced.profile = model.profile;
      GridFunction w = eval_witness(displaced, v_emb.shape(), v_emb.spacing());
      return normalized_direction(std::move(w), q, "two-bump");
    }
    case Family::sign_flip: {
      GridFunction w = GridFunction::sample(
          v_emb.shape(), v_emb.spacing(), [](std::span<const double> x) {
            double r2 = 0.0;
            for (std::size_t k = 0; k < x.size(); ++k) {
              const double c = k == 0 ? x[k] - 2.0 : x[k];
              r2 += c * c;
            }
            return -std::exp(-r2 / 0.36);
          });
      return normalized_direction(std::move(w), q, "sign-flip");
    }
  }
  throw ValidationError("unknown family value");
}

GridFunction perturbed_input(const GridFunction& v_emb, const GridFunction& w,
                             double eps, double q) {
  if (!v_emb.same_layout(w)) {
    throw ValidationError("perturbation direction must share the input grid");
  }
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    throw ValidationError("eps must be finite and nonnegative");
  }
  std::vector<double> vals = v_emb.values();
  const auto& wv = w.values();
  for (std::size_t f = 0; f < vals.size(); ++f) {
    vals[f] += eps * wv[f];
  }
  GridFunction u(v_emb.shape(), v_emb.spacing(), std::move(vals));
  const double norm = lr_norm(u, q);
  if (!(norm > 0.0)) {
    throw NumericalError("perturbation annihilated the input");
  }
  for (double& v : u.values()) v /= norm;
  return u;
}

std::vector<ScanRecord> run_scan(const ScanInput& input, std::ostream* diag) {
  const GnsParams& params = input.model.params;
  if (static_cast<int>(input.shape.size()) != params.n ||
      input.spacing.size() != input.shape.size()) {
    throw ValidationError("scan grid layout must match the model dimension");
  }
  if (input.eps.empty()) {
    throw ValidationError("eps grid must be nonempty");
  }
  for (std::size_t i = 0; i < input.eps.size(); ++i) {
    if (!std::isfinite(input.eps[i]) || input.eps[i] < 0.0) {
      throw ValidationError("eps values must be finite and nonnegative");
    }
    if (i > 0 && !(input.eps[i] > input.eps[i - 1])) {
      throw ValidationError("eps grid must be strictly increasing");
    }
  }
  if (input.workers < 1) {
    throw ValidationError("workers must be at least 1");
  }

  OptimizerWitness centered;
  centered.a = 1.0;
  centered.b = 1.0;
  centered.x0.assign(input.shape.size(), 0.0);
  centered.profile = input.model.profile;
  GridFunction v_emb = eval_witness(centered, input.shape, input.spacing);
  {
    const double norm = lr_norm(v_emb, params.q);
    if (!(norm > 0.0)) {
      throw ValidationError("model profile reads zero on the scan grid");
    }
    for (double& v : v_emb.values()) v /= norm;
  }
  GridFunction w = GridFunction::zeros(input.shape, input.spacing);
  if (input.custom_w.has_value()) {
    if (!input.custom_w->same_layout(v_emb)) {
      throw ValidationError(
          "custom perturbation direction must share the scan grid layout");
    }
    w = normalized_direction(*input.custom_w, params.q, "custom");
  } else {
    w = family_direction(input.family, v_emb, params, input.model);
  }

  const std::size_t rows = input.eps.size();
  std::vector<std::optional<ScanRecord>> slots(rows);
  std::atomic<std::size_t> next{0};
  std::mutex diag_mutex;

  auto worker = [&]() {
    while (true) {
      const std::size_t row = next.fetch_add(1);
      if (row >= rows) break;
      const double eps = input.eps[row];
      try {
        const GridFunction u = perturbed_input(v_emb, w, eps, params.q);
        const DeficitReport rep = deficit(u, params, input.model.G_est);
        SearchConfig row_cfg = input.search;
        row_cfg.seed =
            input.search.seed + 1000003ULL * static_cast<std::uint64_t>(row);
        const AsymmetryResult asym =
            asymmetry(u, params, input.model, row_cfg);
        ScanRecord rec;
        rec.eps = eps;
        rec.delta = rep.delta;
        rec.lambda = asym.lambda_value;
        rec.delta_ps = ps_deficit(u, params.p);
        rec.boundary_mass = rep.boundary_mass_fraction;
        slots[row] = rec;
      } catch (const std::exception& e) {
        if (diag != nullptr) {
          std::lock_guard<std::mutex> lock(diag_mutex);
          (*diag) << "scan row " << row << " (eps=" << eps
                  << ") failed: " << e.what() << "\n";
        }
      }
    }
  };

  const int nthreads =
      std::min<int>(input.workers, static_cast<int>(rows));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  std::vector<ScanRecord> records;
  records.reserve(rows);
  for (const auto& slot : slots) {
    if (slot.has_value()) records.push_back(*slot);
  }
  return records;
}

std::string records_to_csv(const std::vector<ScanRecord>& records) {
  std::ostringstream os;
  os << kCsvHeader << "\n";
  char buf[256];
  for (const ScanRecord& r : records) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", r.eps,
                  r.delta, r.lambda, r.delta_ps, r.boundary_mass);
    os << buf;
  }
  return os.str();
}

std::vector<ScanRecord> records_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) {
    throw FormatError("scan CSV is empty");
  }
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
    line.pop_back();
  }
  if (line != kCsvHeader) {
    throw FormatError(std::string("scan CSV header must be '") + kCsvHeader +
                      "'");
  }
  std::vector<ScanRecord> records;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    double vals[5];
    for (int k = 0; k < 5; ++k) {
      if (!std::getline(ls, field, ',')) {
        throw FormatError("scan CSV row " + std::to_string(lineno) +
                          " has fewer than 5 fields");
      }
      try {
        std::size_t used = 0;
        vals[k] = std::stod(field, &used);
        while (used < field.size() && field[used] == ' ') ++used;
        if (used != field.size()) {
          throw std::invalid_argument("trailing characters");
        }
      } catch (const std::exception&) {
        throw FormatError("scan CSV row " + std::to_string(lineno) +
                          " field " + std::to_string(k + 1) +
                          " is not a number");
      }
      if (!std::isfinite(vals[k])) {
        throw FormatError("scan CSV row " + std::to_string(lineno) +
                          " field " + std::to_string(k + 1) + " is not finite");
      }
    }
    if (std::getline(ls, field, ',')) {
      throw FormatError("scan CSV row " + std::to_string(lineno) +
                        " has more than 5 fields");
    }
    records.push_back(
        ScanRecord{vals[0], vals[1], vals[2], vals[3], vals[4]});
  }
  return records;
}

FitResult fit_powerlaw(const std::vector<ScanRecord>& records,
                       double delta_threshold) {
  if (!(delta_threshold > 0.0)) {
    throw ValidationError("delta threshold must be positive");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (const ScanRecord& r : records) {
    if (r.delta > 0.0 && r.delta < delta_threshold && r.lambda > 0.0) {
      xs.push_back(std::log(r.delta));
      ys.push_back(std::log(r.lambda));
    }
  }
  const int m = static_cast<int>(xs.size());
  if (m < 3) {
    throw ValidationError(
        "power-law fit needs at least 3 rows with 0 < delta < threshold and "
        "lambda > 0");
  }
  double mx = 0.0;
  double my = 0.0;
  for (int i = 0; i < m; ++i) {
    mx += xs[static_cast<std::size_t>(i)];
    my += ys[static_cast<std::size_t>(i)];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (int i = 0; i < m; ++i) {
    const double dx = xs[static_cast<std::size_t>(i)] - mx;
    const double dy = ys[static_cast<std::size_t>(i)] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) {
    throw ValidationError("power-law fit needs at least two distinct delta values");
  }
  FitResult fit;
  fit.alpha_hat = sxy / sxx;
  fit.intercept = my - fit.alpha_hat * mx;
  double ss_res = 0.0;
  for (int i = 0; i < m; ++i) {
    const double pred =
        fit.intercept + fit.alpha_hat * xs[static_cast<std::size_t>(i)];
    const double resid = ys[static_cast<std::size_t>(i)] - pred;
    ss_res += resid * resid;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.points_used = m;
  return fit;
}

}  // namespace gnslab

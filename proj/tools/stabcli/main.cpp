// stabcli: command-line harness around the gnslab core library.
//
// Subcommands: constant, deficit, asymmetry, rearrange, symmetrize, reduce,
// scan, fit. Exit codes: 0 success, 2 rejected input (validation/format),
// 3 numerical failure.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gnslab/asymmetry.hpp"
#include "gnslab/errors.hpp"
#include "gnslab/functionals.hpp"
#include "gnslab/gfn_io.hpp"
#include "gnslab/gns_params.hpp"
#include "gnslab/grid_function.hpp"
#include "gnslab/radial.hpp"
#include "gnslab/rearrange.hpp"
#include "gnslab/scan.hpp"
#include "gnslab/symmetrize.hpp"

namespace {

using namespace gnslab;

double parse_double_field(const std::string& field, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument("trailing text");
    return v;
  } catch (const std::exception&) {
    throw ValidationError(std::string(what) + ": '" + field +
                          "' is not a number");
  }
}

GnsParams parse_params_arg(const std::string& text) {
  std::vector<std::string> fields;
  std::istringstream is(text);
  std::string field;
  while (std::getline(is, field, ',')) fields.push_back(field);
  if (fields.size() != 4) {
    throw ValidationError("--params expects four values: n,p,s,q");
  }
  const double nd = parse_double_field(fields[0], "--params n");
  if (nd != std::floor(nd) || nd < -1e9 || nd > 1e9) {
    throw ValidationError("n must be an integer >= 2");
  }
  return make_params(static_cast<int>(nd),
                     parse_double_field(fields[1], "--params p"),
                     parse_double_field(fields[2], "--params s"),
                     parse_double_field(fields[3], "--params q"));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open file: " + path);
  }
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("cannot write file: " + path);
  }
  out << content;
  if (!out) {
    throw ValidationError("write failed: " + path);
  }
}

void require_nonnegative_input(const GridFunction& u) {
  for (double v : u.values()) {
    if (v < 0.0) {
      throw ValidationError(
          "input has negative values; the reduction pipeline requires u >= 0 "
          "(apply an absolute value to the samples first)");
    }
  }
}

struct SearchFlags {
  std::string config_path;
  int restarts = -1;
  int budget = -1;
  double tol = -1.0;
  std::uint64_t seed = 0;
  bool seed_set = false;

  SearchConfig resolve() const {
    SearchConfig cfg;
    if (!config_path.empty()) {
      cfg = search_config_from_json(read_text_file(config_path));
    }
    if (restarts >= 0) cfg.restarts = restarts;
    if (budget >= 0) cfg.budget = budget;
    if (tol > 0.0) cfg.tol = tol;
    if (seed_set) cfg.seed = seed;
    return cfg;
  }
};

void add_search_flags(CLI::App* cmd, SearchFlags& flags) {
  cmd->add_option("--search-config", flags.config_path,
                  "JSON search config {restarts,budget,b_min,b_max,seed,tol}");
  cmd->add_option("--restarts", flags.restarts,
                  "randomized restarts for the orbit search");
  cmd->add_option("--budget", flags.budget,
                  "objective evaluations per local search");
  cmd->add_option("--tol", flags.tol, "simplex collapse tolerance");
  cmd->add_option("--seed", flags.seed, "seed for the randomized restarts")
      ->each([&flags](const std::string&) { flags.seed_set = true; });
}

void print_asymmetry(const AsymmetryResult& res) {
  std::printf("lambda=%.17g\n", res.lambda_value);
  std::printf("b=%.17g\n", res.witness.b);
  std::printf("a=%.17g\n", res.witness.a);
  std::printf("x0=");
  for (std::size_t k = 0; k < res.witness.x0.size(); ++k) {
    std::printf(k == 0 ? "%.17g" : ",%.17g", res.witness.x0[k]);
  }
  std::printf("\n");
  std::printf("constraint_residual=%.17g\n", res.constraint_residual);
  std::printf("restarts_used=%d\n", res.restarts_used);
  std::printf("converged=%s\n", res.converged ? "true" : "false");
  if (res.hit_scale_bound) {
    std::fprintf(stderr,
                 "warning: the dilation search stopped on the [b_min, b_max] "
                 "boundary; the true optimum may lie outside\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "stabcli: numerical experiments on the sharp constant, deficit, and "
      "asymmetry of grid-sampled functions"};
  app.require_subcommand(1);

  // ---- constant ----
  auto* c_const = app.add_subcommand(
      "constant",
      "minimize F over nonincreasing radial profiles and write the optimizer "
      "model (JSON)");
  std::string const_params;
  std::string const_out;
  int const_resolution = 2048;
  std::uint64_t const_seed = 0;
  double const_rmax = 20.0;
  int const_budget = 600;
  double const_mass = 1.0;
  c_const->add_option("--params", const_params, "n,p,s,q")->required();
  c_const->add_option("--out", const_out, "output model path")->required();
  c_const->add_option("--resolution", const_resolution, "radial mesh points")
      ->capture_default_str();
  c_const->add_option("--seed", const_seed, "start-profile seed (0 = plain)")
      ->capture_default_str();
  c_const->add_option("--rmax", const_rmax, "radial domain half-width")
      ->capture_default_str();
  c_const->add_option("--budget", const_budget,
                      "descent sweeps per continuation level")
      ->capture_default_str();
  c_const->add_option("--mass", const_mass, "q-mass constraint")
      ->capture_default_str();

  // ---- deficit ----
  auto* c_def = app.add_subcommand(
      "deficit", "evaluate the deficit of a GFN input against a model");
  std::string def_model;
  std::string def_input;
  c_def->add_option("--model", def_model, "optimizer model (JSON)")->required();
  c_def->add_option("--input", def_input, "input grid function (.gfn)")
      ->required();

  // ---- asymmetry ----
  auto* c_asym = app.add_subcommand(
      "asymmetry",
      "distance from the model optimizer orbit, minimized over (b, x0)");
  std::string asym_model;
  std::string asym_input;
  std::vector<std::string> asym_fixes;
  SearchFlags asym_flags;
  c_asym->add_option("--model", asym_model, "optimizer model (JSON)")
      ->required();
  c_asym->add_option("--input", asym_input, "input grid function (.gfn)")
      ->required();
  c_asym->add_option("--fix", asym_fixes,
                     "AXIS=VALUE pins a witness-center coordinate (repeat to "
                     "pin several)");
  add_search_flags(c_asym, asym_flags);

  // ---- rearrange ----
  auto* c_re = app.add_subcommand(
      "rearrange",
      "symmetric decreasing rearrangement and its gradient-norm deficit");
  std::string re_params;
  std::string re_model;
  std::string re_input;
  std::string re_out;
  c_re->add_option("--params", re_params, "n,p,s,q (or use --model)");
  c_re->add_option("--model", re_model, "optimizer model carrying the params");
  c_re->add_option("--input", re_input, "input grid function (.gfn)")
      ->required();
  c_re->add_option("--out", re_out, "write the rearranged function here");

  // ---- symmetrize ----
  auto* c_sym = app.add_subcommand(
      "symmetrize",
      "half-space symmetrization through axes 1..n-1 (axis 0 stays free)");
  std::string sym_model;
  std::string sym_input;
  std::string sym_out;
  std::string sym_trace;
  SearchFlags sym_flags;
  c_sym->add_option("--model", sym_model, "optimizer model (JSON)")->required();
  c_sym->add_option("--input", sym_input, "input grid function (.gfn)")
      ->required();
  c_sym->add_option("--out", sym_out, "write the symmetrized function here");
  c_sym->add_option("--trace", sym_trace,
                    "write the stage trace CSV here (default: stdout)");
  add_search_flags(c_sym, sym_flags);

  // ---- reduce ----
  auto* c_red = app.add_subcommand(
      "reduce",
      "full reduction: half-space stages plus the diagonal fold on axes 0,1");
  std::string red_model;
  std::string red_input;
  std::string red_out;
  std::string red_trace;
  SearchFlags red_flags;
  c_red->add_option("--model", red_model, "optimizer model (JSON)")->required();
  c_red->add_option("--input", red_input, "input grid function (.gfn)")
      ->required();
  c_red->add_option("--out", red_out, "write the reduced function here");
  c_red->add_option("--trace", red_trace,
                    "write the stage trace CSV here (default: stdout)");
  add_search_flags(c_red, red_flags);

  // ---- scan ----
  auto* c_scan = app.add_subcommand(
      "scan",
      "sweep u_eps = normalize(v + eps*w) and record "
      "eps,delta,lambda,delta_ps,boundary_mass per row. Families: "
      "radial-bump w=exp(-(|x|-1)^2/0.25); translate w=-dv/dx0; dilate "
      "w=(n/q)v+sum_k x_k dv/dx_k; two-bump w=v displaced by 2.5 along axis "
      "0; sign-flip w=-exp(-|x-2e0|^2/0.36)");
  std::string scan_model;
  std::string scan_family = "radial-bump";
  std::string scan_custom_w;
  std::string scan_out;
  std::vector<double> scan_eps;
  double scan_eps_min = 1e-3;
  double scan_eps_max = 0.3;
  int scan_eps_count = 7;
  int scan_resolution = 128;
  double scan_extent = 8.0;
  int scan_workers = 1;
  SearchFlags scan_flags;
  c_scan->add_option("--model", scan_model, "optimizer model (JSON)")
      ->required();
  c_scan->add_option("--family", scan_family,
                     "radial-bump | translate | dilate | two-bump | sign-flip")
      ->capture_default_str();
  c_scan->add_option("--w", scan_custom_w,
                     "custom perturbation direction (.gfn) overriding "
                     "--family");
  c_scan->add_option("--eps", scan_eps, "explicit eps grid (comma separated)")
      ->delimiter(',');
  c_scan->add_option("--eps-min", scan_eps_min, "geometric grid start")
      ->capture_default_str();
  c_scan->add_option("--eps-max", scan_eps_max, "geometric grid end")
      ->capture_default_str();
  c_scan->add_option("--eps-count", scan_eps_count, "geometric grid size")
      ->capture_default_str();
  c_scan->add_option("--resolution", scan_resolution, "cells per axis")
      ->capture_default_str();
  c_scan->add_option("--extent", scan_extent, "box half-width")
      ->capture_default_str();
  c_scan->add_option("--workers", scan_workers, "concurrent scan rows")
      ->capture_default_str();
  c_scan->add_option("--out", scan_out, "CSV path (default: stdout)");
  add_search_flags(c_scan, scan_flags);

  // ---- fit ----
  auto* c_fit = app.add_subcommand(
      "fit",
      "least squares of log(lambda) on log(delta) over low-deficit scan rows");
  std::string fit_input;
  double fit_threshold = 0.05;
  c_fit->add_option("--input", fit_input, "scan CSV")->required();
  c_fit->add_option("--threshold", fit_threshold,
                    "keep rows with 0 < delta < threshold")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(c_const)) {
      const GnsParams params = parse_params_arg(const_params);
      MinimizeOptions opts;
      opts.resolution = const_resolution;
      opts.r_max = const_rmax;
      opts.budget = const_budget;
      opts.seed = const_seed;
      opts.q_mass = const_mass;
      const RadialSolveResult res = minimize_radial(params, opts);
      OptimizerModel model;
      model.params = params;
      model.profile = res.profile;
      model.G_est = res.G_est;
      model.F_min = res.F_min;
      model.resolution = const_resolution;
      model.seed = const_seed;
      write_model_file(const_out, model);
      std::printf("G_est=%.17g\n", res.G_est);
      std::printf("F_min=%.17g\n", res.F_min);
      std::printf("eta0=%.17g\n", params.eta0);
      std::printf("k=%.17g\n", params.k_exp);
      std::printf("G_direct=%.17g\n", res.G_direct);
      std::printf("iterations=%d\n", res.iterations);
    } else if (app.got_subcommand(c_def)) {
      const OptimizerModel model = read_model_file(def_model);
      const GridFunction u = read_gfn_file(def_input);
      const DeficitReport rep = deficit(u, model.params, model.G_est);
      std::printf("delta=%.17g\n", rep.delta);
      std::printf("G_value=%.17g\n", rep.G_value);
      std::printf("grad_p=%.17g\n", rep.grad_p);
      std::printf("norm_s=%.17g\n", rep.norm_s);
      std::printf("norm_q=%.17g\n", rep.norm_q);
      std::printf("boundary_mass=%.17g\n", rep.boundary_mass_fraction);
    } else if (app.got_subcommand(c_asym)) {
      const OptimizerModel model = read_model_file(asym_model);
      const GridFunction u = read_gfn_file(asym_input);
      const SearchConfig cfg = asym_flags.resolve();
      AffineRestriction restriction;
      for (const std::string& fix : asym_fixes) {
        const std::size_t eq = fix.find_first_of("=:");
        if (eq == std::string::npos) {
          throw ValidationError("--fix expects AXIS=VALUE, got '" + fix + "'");
        }
        const double axis = parse_double_field(fix.substr(0, eq), "--fix axis");
        if (axis != std::floor(axis)) {
          throw ValidationError("--fix axis must be an integer");
        }
        restriction.fixed_coords[static_cast<int>(axis)] =
            parse_double_field(fix.substr(eq + 1), "--fix value");
      }
      const AsymmetryResult res =
          restriction.fixed_coords.empty()
              ? asymmetry(u, model.params, model, cfg)
              : relative_asymmetry(u, restriction, model.params, model, cfg);
      print_asymmetry(res);
    } else if (app.got_subcommand(c_re)) {
      GnsParams params;
      if (!re_params.empty()) {
        params = parse_params_arg(re_params);
      } else if (!re_model.empty()) {
        params = read_model_file(re_model).params;
      } else {
        throw ValidationError("rearrange needs --params or --model");
      }
      const GridFunction u = read_gfn_file(re_input);
      const RearrangeResult res = analyze_rearrangement(u, params);
      if (!re_out.empty()) {
        write_gfn_file(re_out, res.u_star);
      }
      std::printf("checksum=%016llx\n",
                  static_cast<unsigned long long>(
                      res.value_permutation_checksum));
      std::printf("ps_deficit=%.17g\n", res.ps_deficit);
    } else if (app.got_subcommand(c_sym) || app.got_subcommand(c_red)) {
      const bool full = app.got_subcommand(c_red);
      const std::string& model_path = full ? red_model : sym_model;
      const std::string& input_path = full ? red_input : sym_input;
      const std::string& out_path = full ? red_out : sym_out;
      const std::string& trace_path = full ? red_trace : sym_trace;
      const SearchConfig cfg =
          (full ? red_flags : sym_flags).resolve();

      const OptimizerModel model = read_model_file(model_path);
      const GridFunction u = read_gfn_file(input_path);
      require_nonnegative_input(u);
      const GnsParams& params = model.params;
      const AsymmetryOracle oracle = [&](const GridFunction& v) {
        return asymmetry(v, params, model, cfg).lambda_value;
      };
      const ReductionTrace trace =
          full ? full_reduction(u, params, model.G_est, oracle)
               : nsym_reduce(u, params, model.G_est, oracle);
      if (!out_path.empty()) {
        write_gfn_file(out_path, trace.result);
      }
      const std::string csv = trace_to_csv(trace);
      if (trace_path.empty()) {
        std::fputs(csv.c_str(), stdout);
      } else {
        write_text_file(trace_path, csv);
      }
      std::fprintf(stderr, "stages=%zu\n", trace.stages.size());
    } else if (app.got_subcommand(c_scan)) {
      ScanInput input;
      input.model = read_model_file(scan_model);
      const int dim = input.model.params.n;
      if (scan_resolution < 4 || scan_resolution % 2 != 0) {
        throw ValidationError("--resolution must be an even count >= 4");
      }
      if (!(scan_extent > 0.0)) {
        throw ValidationError("--extent must be positive");
      }
      input.shape.assign(static_cast<std::size_t>(dim),
                         static_cast<std::size_t>(scan_resolution));
      input.spacing.assign(static_cast<std::size_t>(dim),
                           2.0 * scan_extent / scan_resolution);
      input.family = family_from_name(scan_family);
      if (!scan_custom_w.empty()) {
        input.custom_w = read_gfn_file(scan_custom_w);
      }
      if (!scan_eps.empty()) {
        input.eps = scan_eps;
      } else {
        if (scan_eps_count < 1) {
          throw ValidationError("--eps-count must be at least 1");
        }
        if (!(scan_eps_min > 0.0) || !(scan_eps_max >= scan_eps_min)) {
          throw ValidationError("need 0 < --eps-min <= --eps-max");
        }
        for (int i = 0; i < scan_eps_count; ++i) {
          const double t =
              scan_eps_count == 1
                  ? 0.0
                  : static_cast<double>(i) / (scan_eps_count - 1);
          input.eps.push_back(scan_eps_min *
                              std::pow(scan_eps_max / scan_eps_min, t));
        }
      }
      input.search = scan_flags.resolve();
      input.workers = scan_workers;
      const std::vector<ScanRecord> records = run_scan(input, &std::cerr);
      const std::string csv = records_to_csv(records);
      if (scan_out.empty()) {
        std::fputs(csv.c_str(), stdout);
      } else {
        write_text_file(scan_out, csv);
      }
    } else if (app.got_subcommand(c_fit)) {
      const std::vector<ScanRecord> records =
          records_from_csv(read_text_file(fit_input));
      const FitResult fit = fit_powerlaw(records, fit_threshold);
      std::printf("alpha_hat=%.17g\n", fit.alpha_hat);
      std::printf("intercept=%.17g\n", fit.intercept);
      std::printf("r_squared=%.17g\n", fit.r_squared);
      std::printf("points_used=%d\n", fit.points_used);
      if (fit.alpha_hat != 0.0) {
        std::printf("stability_exponent=%.17g\n", 1.0 / fit.alpha_hat);
      }
    }
    return 0;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

#include "gnslab/gns_params.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "gnslab/errors.hpp"

namespace gnslab {

using nlohmann::json;

GnsParams make_params(int n, double p, double s, double q) {
  if (n < 2) {
    throw ValidationError("n must be an integer >= 2");
  }
  if (!std::isfinite(p) || !std::isfinite(s) || !std::isfinite(q)) {
    throw ValidationError("p, s, q must be finite");
  }
  if (p <= 1.0) {
    throw ValidationError("p must exceed 1");
  }
  if (p >= static_cast<double>(n)) {
    throw ValidationError("p must be less than n");
  }
  if (s < 1.0) {
    throw ValidationError("s must be at least 1");
  }
  if (q <= s) {
    throw ValidationError("q must exceed s");
  }
  const double nd = static_cast<double>(n);
  const double p_star = nd * p / (nd - p);
  if (q >= p_star) {
    throw ValidationError("q must be less than p* = np/(n-p)");
  }

  GnsParams g;
  g.n = n;
  g.p = p;
  g.s = s;
  g.q = q;
  g.p_star = p_star;
  g.theta = (1.0 / s - 1.0 / q) / (1.0 / s - 1.0 / p_star);
  g.a_exp = -nd + p + nd * p / q;
  g.b_exp = -nd + nd * s / q;
  g.alpha_exp = (nd * p + p * s - nd * s) / (nd * p + p * q - nd * s);
  g.k_exp = q * g.alpha_exp;
  g.z_exp = std::max(p, 2.0);
  g.eta0 = eta0_of(g);
  return g;
}

double eta0_of(const GnsParams& params) {
  const double a = params.a_exp;
  const double b = params.b_exp;
  const double lam = std::pow(-b / a, 1.0 / (a - b));
  return std::pow(lam, a) + std::pow(lam, b);
}

std::string params_to_json(const GnsParams& params) {
  json j;
  j["n"] = params.n;
  j["p"] = params.p;
  j["s"] = params.s;
  j["q"] = params.q;
  j["p_star"] = params.p_star;
  j["theta"] = params.theta;
  j["a_exp"] = params.a_exp;
  j["b_exp"] = params.b_exp;
  j["k_exp"] = params.k_exp;
  j["alpha_exp"] = params.alpha_exp;
  j["eta0"] = params.eta0;
  j["z_exp"] = params.z_exp;
  return j.dump();
}

GnsParams params_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("params: invalid JSON: ") + e.what());
  }
  for (const char* key : {"n", "p", "s", "q"}) {
    if (!j.contains(key) || !j[key].is_number()) {
      throw FormatError(std::string("params: missing numeric field \"") + key +
                        "\"");
    }
  }
  if (!j["n"].is_number_integer()) {
    throw FormatError("params: n must be an integer");
  }
  GnsParams g = make_params(j["n"].get<int>(), j["p"].get<double>(),
                            j["s"].get<double>(), j["q"].get<double>());
  const struct {
    const char* key;
    double value;
  } derived[] = {
      {"p_star", g.p_star}, {"theta", g.theta},         {"a_exp", g.a_exp},
      {"b_exp", g.b_exp},   {"k_exp", g.k_exp},         {"alpha_exp", g.alpha_exp},
      {"eta0", g.eta0},     {"z_exp", g.z_exp},
  };
  for (const auto& d : derived) {
    if (!j.contains(d.key)) continue;
    if (!j[d.key].is_number()) {
      throw FormatError(std::string("params: field \"") + d.key +
                        "\" must be a number");
    }
    const double stored = j[d.key].get<double>();
    const double tol = 1e-9 * std::max(1.0, std::abs(d.value));
    if (std::abs(stored - d.value) > tol) {
      std::ostringstream msg;
      msg << "params: stored " << d.key << " = " << stored
          << " disagrees with recomputed value " << d.value;
      throw ValidationError(msg.str());
    }
  }
  return g;
}

}  // namespace gnslab

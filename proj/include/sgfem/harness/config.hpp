#pragma once

// Experiment configuration: one JSON document with snake_case keys.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "sgfem/coeffs.hpp"
#include "sgfem/pce.hpp"

namespace sgfem::harness {

using nlohmann::json;

struct FamilyEntry {
  std::string family = "hermite";  // hermite | jacobi | laguerre
  double alpha = 0.0;
  double beta = 0.0;
};

/// Acceptance rule for one sweep axis.
struct FitSpec {
  std::string criterion = "none";  // none | slope | min_slope | superalgebraic | monotone
  double expected = 0.0;           // slope: target value
  double tol = 0.0;                // slope: allowed deviation
  double min = 0.0;                // min_slope: lower bound
  double max_final_error = -1.0;   // checked on the finest point when >= 0
};

struct ReferenceSpec {
  std::string kind = "analytic";  // analytic | collocation
  int m_ref = 0;
  int n_ref = 0;   // time steps of the reference
  int q_ref = 0;   // Gauss nodes per dimension in z
  bool estimate = true;  // estimate the reference error from a half-resolution reference
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::vector<FamilyEntry> distribution{FamilyEntry{}};
  std::string random_factor = "constant";
  NamedParams factor_params;
  std::string spatial_field = "identity";
  NamedParams field_params;
  std::string initial_datum = "sine";
  NamedParams datum_params;
  int dim = 1;
  int fe_order = 1;
  std::vector<int> n_values{0};
  std::vector<int> m_values{8};
  std::vector<int> nk_values{8};
  std::string scheme = "crank_nicolson";
  double final_time = 0.1;
  int coefficient_quadrature = 0;  // 0: automatic
  int error_quadrature = 40;       // analytic reference: Gauss nodes per dimension in z
  ReferenceSpec reference;
  std::map<std::string, FitSpec> fits;  // keys n, m, n_k
  std::string output_csv;
  std::string output_json;

  DistributionSpec distribution_spec() const {
    std::vector<PolyFamily> f;
    for (const auto& e : distribution) {
      if (e.family == "hermite") f.push_back(PolyFamily::hermite());
      else if (e.family == "jacobi") f.push_back(PolyFamily::jacobi(e.alpha, e.beta));
      else if (e.family == "laguerre") f.push_back(PolyFamily::laguerre(e.alpha));
      else throw std::invalid_argument("unknown family '" + e.family + "'");
    }
    return DistributionSpec(std::move(f));
  }

  CoefficientField coefficient_field() const {
    const int N = static_cast<int>(distribution.size());
    return builtin_separable(random_factor_by_name(random_factor, N, factor_params),
                             spatial_field_by_name(spatial_field, dim, field_params), dim,
                             param_or(factor_params, "allow_non_elliptic", 0.0) != 0.0);
  }

  InitialDatum initial() const { return initial_datum_by_name(initial_datum, datum_params); }

  /// Throws on invalid settings; returns warnings for legal but questionable ones.
  std::vector<std::string> validate() const {
    std::vector<std::string> warn;
    auto check_list = [](const std::vector<int>& v, const char* what, int lo) {
      if (v.empty()) throw std::invalid_argument(std::string("config: sweep list '") + what + "' is empty");
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] < lo) throw std::invalid_argument(std::string("config: value out of range in '") + what + "'");
        if (i && v[i] <= v[i - 1]) throw std::invalid_argument(std::string("config: '") + what + "' must be strictly increasing");
      }
    };
    check_list(n_values, "n", 0);
    check_list(m_values, "m", 1);
    check_list(nk_values, "n_k", 1);
    if (dim != 1 && dim != 2) throw std::invalid_argument("config: dim must be 1 or 2");
    if (fe_order != 1 && fe_order != 2) throw std::invalid_argument("config: fe_order must be 1 or 2");
    if (!(final_time > 0)) throw std::invalid_argument("config: final_time must be positive");
    if (distribution.empty()) throw std::invalid_argument("config: distribution is empty");
    (void)distribution_spec();
    for (const auto& [axis, f] : fits) {
      if (axis != "n" && axis != "m" && axis != "n_k") throw std::invalid_argument("config: unknown fit axis '" + axis + "'");
      static const std::vector<std::string> kinds = {"none", "slope", "min_slope", "superalgebraic", "monotone"};
      if (std::find(kinds.begin(), kinds.end(), f.criterion) == kinds.end())
        throw std::invalid_argument("config: unknown fit criterion '" + f.criterion + "'");
    }
    if (reference.kind == "collocation") {
      const int max_m = m_values.back(), max_nk = nk_values.back();
      if (reference.m_ref <= max_m || reference.n_ref <= max_nk)
        throw std::invalid_argument("config: collocation reference must be strictly finer than every sweep point");
      for (int m : m_values)
        if (reference.m_ref % m != 0)
          throw std::invalid_argument("config: reference mesh must be a refinement of every sweep mesh");
      if (reference.q_ref < 1) throw std::invalid_argument("config: q_ref must be >= 1");
      if (reference.m_ref < 4 * max_m)
        warn.push_back("reference mesh m_ref = " + std::to_string(reference.m_ref) + " is below 4x the finest sweep mesh (" +
                       std::to_string(4 * max_m) + ")");
      if (reference.n_ref < 4 * max_nk)
        warn.push_back("reference grid n_ref = " + std::to_string(reference.n_ref) + " is below 4x the finest sweep grid (" +
                       std::to_string(4 * max_nk) + ")");
    } else if (reference.kind != "analytic") {
      throw std::invalid_argument("config: reference kind must be 'analytic' or 'collocation'");
    }
    return warn;
  }
};

inline void to_json(json& j, const FamilyEntry& e) {
  j = json{{"family", e.family}};
  if (e.family != "hermite") j["alpha"] = e.alpha;
  if (e.family == "jacobi") j["beta"] = e.beta;
}

inline void from_json(const json& j, FamilyEntry& e) {
  e.family = j.at("family").get<std::string>();
  e.alpha = j.value("alpha", 0.0);
  e.beta = j.value("beta", 0.0);
}

inline void to_json(json& j, const FitSpec& f) {
  j = json{{"criterion", f.criterion}};
  if (f.criterion == "slope") {
    j["expected"] = f.expected;
    j["tol"] = f.tol;
  }
  if (f.criterion == "min_slope") j["min"] = f.min;
  if (f.max_final_error >= 0) j["max_final_error"] = f.max_final_error;
}

inline void from_json(const json& j, FitSpec& f) {
  f.criterion = j.value("criterion", std::string("none"));
  f.expected = j.value("expected", 0.0);
  f.tol = j.value("tol", 0.0);
  f.min = j.value("min", 0.0);
  f.max_final_error = j.value("max_final_error", -1.0);
}

inline void to_json(json& j, const ReferenceSpec& r) {
  j = json{{"kind", r.kind}};
  if (r.kind == "collocation") {
    j["m_ref"] = r.m_ref;
    j["n_ref"] = r.n_ref;
    j["q_ref"] = r.q_ref;
    j["estimate"] = r.estimate;
  }
}

inline void from_json(const json& j, ReferenceSpec& r) {
  r.kind = j.value("kind", std::string("analytic"));
  r.m_ref = j.value("m_ref", 0);
  r.n_ref = j.value("n_ref", 0);
  r.q_ref = j.value("q_ref", 0);
  r.estimate = j.value("estimate", true);
}

inline void to_json(json& j, const ExperimentConfig& c) {
  j = json{{"name", c.name},
           {"distribution", c.distribution},
           {"coefficient",
            {{"random_factor", c.random_factor},
             {"factor_params", c.factor_params},
             {"spatial_field", c.spatial_field},
             {"field_params", c.field_params}}},
           {"initial_datum", {{"name", c.initial_datum}, {"params", c.datum_params}}},
           {"geometry", {{"dim", c.dim}, {"fe_order", c.fe_order}}},
           {"sweep", {{"n", c.n_values}, {"m", c.m_values}, {"n_k", c.nk_values}}},
           {"scheme", c.scheme},
           {"final_time", c.final_time},
           {"quadrature", {{"coefficient", c.coefficient_quadrature}, {"error", c.error_quadrature}}},
           {"reference", c.reference},
           {"fits", c.fits},
           {"output", {{"csv", c.output_csv}, {"json", c.output_json}}}};
}

inline void from_json(const json& j, ExperimentConfig& c) {
  c = ExperimentConfig{};
  c.name = j.value("name", c.name);
  if (j.contains("distribution")) c.distribution = j.at("distribution").get<std::vector<FamilyEntry>>();
  if (j.contains("coefficient")) {
    const auto& k = j.at("coefficient");
    c.random_factor = k.value("random_factor", c.random_factor);
    c.factor_params = k.value("factor_params", NamedParams{});
    c.spatial_field = k.value("spatial_field", c.spatial_field);
    c.field_params = k.value("field_params", NamedParams{});
  }
  if (j.contains("initial_datum")) {
    c.initial_datum = j.at("initial_datum").value("name", c.initial_datum);
    c.datum_params = j.at("initial_datum").value("params", NamedParams{});
  }
  if (j.contains("geometry")) {
    c.dim = j.at("geometry").value("dim", c.dim);
    c.fe_order = j.at("geometry").value("fe_order", c.fe_order);
  }
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    c.n_values = s.value("n", c.n_values);
    c.m_values = s.value("m", c.m_values);
    c.nk_values = s.value("n_k", c.nk_values);
  }
  c.scheme = j.value("scheme", c.scheme);
  c.final_time = j.value("final_time", c.final_time);
  if (j.contains("quadrature")) {
    c.coefficient_quadrature = j.at("quadrature").value("coefficient", c.coefficient_quadrature);
    c.error_quadrature = j.at("quadrature").value("error", c.error_quadrature);
  }
  if (j.contains("reference")) c.reference = j.at("reference").get<ReferenceSpec>();
  if (j.contains("fits")) c.fits = j.at("fits").get<std::map<std::string, FitSpec>>();
  if (j.contains("output")) {
    c.output_csv = j.at("output").value("csv", std::string());
    c.output_json = j.at("output").value("json", std::string());
  }
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config '" + path + "'");
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config '" + path + "' is not valid JSON: " + e.what());
  }
  return j.get<ExperimentConfig>();
}

/// FNV-1a 64-bit hash of the canonical JSON form, as hex.
inline std::string config_hash(const ExperimentConfig& c) {
  const std::string s = json(c).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

}  // namespace sgfem::harness

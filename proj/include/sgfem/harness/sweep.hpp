#pragma once

// Convergence sweeps over (n, m, N_k) and the report they produce.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "sgfem/harness/config.hpp"
#include "sgfem/harness/rates.hpp"
#include "sgfem/harness/reference.hpp"
#include "sgfem/sgsystem.hpp"
#include "sgfem/timestep.hpp"

namespace sgfem::harness {

inline constexpr const char* kToolVersion = "0.1.0";

struct PointResult {
  int n = 0, m = 0, nk = 0;
  double error = std::numeric_limits<double>::quiet_NaN();
  double runtime_s = 0.0;
  double aliasing = 0.0;
  std::string failure;  // empty on success
  bool ok() const { return failure.empty(); }
};

struct AxisEntry {
  int value = 0;
  double h = 0.0;  // refinement parameter used in the fit (1/n, mesh width, or tau)
  PointResult point;
  Admission admission;
};

struct AxisVerdict {
  std::string criterion = "none";
  bool passed = true;
  std::string message;
};

struct AxisReport {
  std::string axis;  // n | m | n_k
  std::map<std::string, int> fixed;
  std::vector<AxisEntry> entries;
  std::optional<FitResult> fit;
  std::string fit_note;
  std::vector<double> pairwise;
  std::vector<double> local;
  AxisVerdict verdict;
};

struct ConvergenceReport {
  std::string config_name;
  std::string config_hash;
  std::string tool_version = kToolVersion;
  std::string reference_kind;
  double reference_error = 0.0;
  std::vector<std::string> warnings;
  std::vector<AxisReport> axes;
  std::vector<PointResult> joint;
  bool joint_monotone = true;
  bool passed = true;

  const AxisReport* axis(const std::string& name) const {
    for (const auto& a : axes)
      if (a.axis == name) return &a;
    return nullptr;
  }
};

/// Everything about an experiment that does not depend on the sweep point.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig cfg)
      : cfg_(std::move(cfg)),
        warnings_(cfg_.validate()),
        dist_(cfg_.distribution_spec()),
        field_(cfg_.coefficient_field()),
        u0_(cfg_.initial()),
        scheme_(RationalScheme::by_name(cfg_.scheme)) {
    if (cfg_.reference.kind == "analytic" && !analytic_applicable(field_, u0_))
      throw std::invalid_argument(
          "analytic reference needs a 1-D field constant in x and deterministic sine data; use a collocation reference");
  }

  const ExperimentConfig& config() const { return cfg_; }
  const DistributionSpec& distribution() const { return dist_; }
  const CoefficientField& field() const { return field_; }
  const InitialDatum& datum() const { return u0_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Builds the collocation reference (and its half-resolution estimate) once.
  void prepare_reference() {
    if (cfg_.reference.kind != "collocation" || ref_) return;
    const auto& r = cfg_.reference;
    ref_ = std::make_unique<CollocationReference>(collocation_reference(
        dist_, r.q_ref, FeSpace(mesh(r.m_ref), cfg_.fe_order), make_uniform_grid(cfg_.final_time, r.n_ref), field_, u0_));
    if (r.estimate && r.m_ref % 2 == 0 && r.n_ref % 2 == 0) {
      const auto half = collocation_reference(dist_, r.q_ref, FeSpace(mesh(r.m_ref / 2), cfg_.fe_order),
                                              make_uniform_grid(cfg_.final_time, r.n_ref / 2), field_, u0_);
      reference_error_ = reference_difference(half, *ref_);
    }
  }

  double reference_error() const { return reference_error_; }

  Mesh mesh(int m) const { return cfg_.dim == 1 ? Mesh::interval(m) : Mesh::unit_square(m); }

  /// Final SG state for one sweep point.
  SgState solve(int n, int m, int nk, double* aliasing = nullptr) {
    const FeSpace space(mesh(m), cfg_.fe_order);
    const MultiIndexSet mis(dist_.dim(), n);
    const auto key = std::make_pair(n, m);
    auto it = ops_.find(key);
    if (it == ops_.end()) {
      double al = 0.0;
      const int q = cfg_.coefficient_quadrature > 0 ? cfg_.coefficient_quadrature : -1;
      it = ops_.emplace(key, std::make_pair(build_sg_operator(dist_, n, space, field_, q, &al), al)).first;
    }
    if (aliasing) *aliasing = it->second.second;
    const auto& op = it->second.first;
    SgState s = initial_coefficients(dist_, mis, u0_, space);
    s.coefficients = evolve_final(scheme_, make_uniform_grid(cfg_.final_time, nk), op.mass, op.stiffness, s.coefficients);
    s.time = cfg_.final_time;
    return s;
  }

  /// Error of one sweep point against the configured reference.
  double error(const SgState& s, int n, int m) {
    const FeSpace space(mesh(m), cfg_.fe_order);
    const MultiIndexSet mis(dist_.dim(), n);
    if (cfg_.reference.kind == "analytic") {
      const auto coeffs = u0_.sine_coeffs;
      const double T = cfg_.final_time;
      const auto& f = field_;
      return error_norm_H_analytic(
          s, dist_, mis, space,
          [&](std::span<const double> z) { return analytic_reference(coeffs, scalar_coefficient(f, z), T); },
          cfg_.error_quadrature);
    }
    prepare_reference();
    return error_norm_H(s, dist_, mis, space, *ref_);
  }

  /// Solve and measure; failures are recorded, not thrown.
  PointResult run_point(int n, int m, int nk) {
    const auto key = std::make_tuple(n, m, nk);
    if (auto it = points_.find(key); it != points_.end()) return it->second;
    PointResult r;
    r.n = n, r.m = m, r.nk = nk;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const SgState s = solve(n, m, nk, &r.aliasing);
      r.error = error(s, n, m);
      if (!std::isfinite(r.error)) throw NumericalError("non-finite error norm");
    } catch (const std::exception& e) {
      r.failure = e.what();
    }
    r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    points_.emplace(key, r);
    return r;
  }

 private:
  ExperimentConfig cfg_;
  std::vector<std::string> warnings_;
  DistributionSpec dist_;
  CoefficientField field_;
  InitialDatum u0_;
  RationalScheme scheme_;
  std::unique_ptr<CollocationReference> ref_;
  double reference_error_ = 0.0;
  std::map<std::pair<int, int>, std::pair<SgOperator, double>> ops_;
  std::map<std::tuple<int, int, int>, PointResult> points_;
};

/// Four significant digits, for messages.
inline std::string short_num(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

namespace detail {

inline bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

inline void evaluate_axis(AxisReport& a, const FitSpec& spec, double ref_error) {
  std::vector<RatePoint> usable;
  std::vector<std::size_t> usable_idx;
  bool any_failed = false;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    const auto& e = a.entries[i];
    if (!e.point.ok()) {
      any_failed = true;
      a.entries[i].admission.reason = "failed: " + e.point.failure;
      continue;
    }
    if (e.h > 0) {
      usable.push_back({e.h, e.point.error});
      usable_idx.push_back(i);
    } else {
      a.entries[i].admission.reason = "no refinement parameter";
    }
  }
  const auto adm = admissible_points(usable, ref_error);
  std::vector<RatePoint> admitted;
  for (std::size_t k = 0; k < usable.size(); ++k) {
    a.entries[usable_idx[k]].admission = adm[k];
    if (adm[k].admitted) admitted.push_back(usable[k]);
  }
  a.pairwise = pairwise_slopes(admitted);
  if (admitted.size() >= 3) {
    a.fit = fit_rate(admitted);
    a.local = local_slopes(admitted, 3);
  } else {
    a.fit_note = "fewer than 3 admissible points";
  }

  AxisVerdict& v = a.verdict;
  v.criterion = spec.criterion;
  std::vector<std::string> msgs;
  if (spec.criterion != "none" && any_failed) {
    v.passed = false;
    msgs.push_back("some points failed");
  }
  std::vector<double> errs;
  for (const auto& e : a.entries)
    if (e.point.ok()) errs.push_back(e.point.error);
  if (spec.criterion == "slope" || spec.criterion == "min_slope") {
    if (!a.fit) {
      v.passed = false;
      msgs.push_back(a.fit_note);
    } else if (spec.criterion == "slope") {
      const bool ok = std::abs(a.fit->slope - spec.expected) <= spec.tol;
      v.passed = v.passed && ok;
      msgs.push_back("slope " + short_num(a.fit->slope) + (ok ? " within " : " outside ") + short_num(spec.expected) + " +- " +
                     short_num(spec.tol));
    } else {
      const bool ok = a.fit->slope >= spec.min;
      v.passed = v.passed && ok;
      msgs.push_back("slope " + short_num(a.fit->slope) + (ok ? " >= " : " < ") + short_num(spec.min));
    }
  } else if (spec.criterion == "monotone") {
    const bool ok = strictly_decreasing(errs);
    v.passed = v.passed && ok;
    msgs.push_back(ok ? "errors strictly decreasing" : "errors not strictly decreasing");
  } else if (spec.criterion == "superalgebraic") {
    const bool dec = strictly_decreasing(errs);
    // local slopes over all points with a refinement parameter, not only the admitted ones
    std::vector<RatePoint> pos;
    for (const auto& p : usable)
      if (p.error > kErrorFloor) pos.push_back(p);
    const auto ls = pos.size() >= 4 ? local_slopes(pos, 3) : std::vector<double>{};
    a.local = ls;
    bool inc = ls.size() >= 2;
    for (std::size_t i = 1; i < ls.size(); ++i) inc = inc && ls[i] > ls[i - 1];
    v.passed = v.passed && dec && inc;
    msgs.push_back(dec ? "errors strictly decreasing" : "errors not strictly decreasing");
    msgs.push_back(inc ? "local slopes increasing" : "local slopes not increasing");
  }
  if (spec.max_final_error >= 0) {
    const auto& last = a.entries.back().point;
    const bool ok = last.ok() && last.error <= spec.max_final_error;
    v.passed = v.passed && ok;
    msgs.push_back("final error " + short_num(last.error) + (ok ? " <= " : " > ") + short_num(spec.max_final_error));
  }
  for (std::size_t i = 0; i < msgs.size(); ++i) v.message += (i ? "; " : "") + msgs[i];
}

}  // namespace detail

/// Refinement parameter of an axis value.
inline double axis_h(const std::string& axis, int value, const ExperimentConfig& cfg) {
  if (axis == "n") return value > 0 ? 1.0 / value : 0.0;
  if (axis == "m") return 1.0 / value;
  return cfg.final_time / value;
}

/// Runs the sweep: each axis with the other two at their finest values, then
/// the joint table that refines all axes together.
inline ConvergenceReport run_sweep(Experiment& ex) {
  const auto& cfg = ex.config();
  ConvergenceReport rep;
  rep.config_name = cfg.name;
  rep.config_hash = config_hash(cfg);
  rep.reference_kind = cfg.reference.kind;
  rep.warnings = ex.warnings();
  ex.prepare_reference();
  rep.reference_error = ex.reference_error();

  const int nf = cfg.n_values.back(), mf = cfg.m_values.back(), kf = cfg.nk_values.back();
  const std::vector<std::pair<std::string, const std::vector<int>*>> axes = {
      {"n", &cfg.n_values}, {"m", &cfg.m_values}, {"n_k", &cfg.nk_values}};
  for (const auto& [name, values] : axes) {
    if (values->size() < 2 && !cfg.fits.count(name)) continue;
    AxisReport a;
    a.axis = name;
    if (name != "n") a.fixed["n"] = nf;
    if (name != "m") a.fixed["m"] = mf;
    if (name != "n_k") a.fixed["n_k"] = kf;
    for (int v : *values) {
      const int n = name == "n" ? v : nf, m = name == "m" ? v : mf, k = name == "n_k" ? v : kf;
      a.entries.push_back({v, axis_h(name, v, cfg), ex.run_point(n, m, k), {}});
    }
    const auto it = cfg.fits.find(name);
    detail::evaluate_axis(a, it == cfg.fits.end() ? FitSpec{} : it->second, rep.reference_error);
    rep.passed = rep.passed && a.verdict.passed;
    rep.axes.push_back(std::move(a));
  }

  const std::size_t L = std::max({cfg.n_values.size(), cfg.m_values.size(), cfg.nk_values.size()});
  auto pick = [L](const std::vector<int>& v, std::size_t i) {
    // align the lists at their finest end
    const std::size_t off = L - v.size();
    return v[i < off ? 0 : i - off];
  };
  for (std::size_t i = 0; i < L; ++i)
    rep.joint.push_back(ex.run_point(pick(cfg.n_values, i), pick(cfg.m_values, i), pick(cfg.nk_values, i)));
  for (std::size_t i = 1; i < rep.joint.size(); ++i) {
    const auto& a = rep.joint[i - 1];
    const auto& b = rep.joint[i];
    if (a.ok() && b.ok() && b.error > 1.05 * a.error) rep.joint_monotone = false;
  }
  if (!rep.joint_monotone) rep.warnings.push_back("joint refinement is not monotone within 5%");
  return rep;
}

inline nlohmann::json to_json(const PointResult& p) {
  nlohmann::json j{{"n", p.n}, {"m", p.m}, {"n_k", p.nk}, {"runtime_s", p.runtime_s}, {"aliasing", p.aliasing}};
  if (p.ok()) j["error"] = p.error;
  else {
    j["error"] = nullptr;
    j["failure"] = p.failure;
  }
  return j;
}

inline nlohmann::json to_json(const ConvergenceReport& r) {
  using nlohmann::json;
  json axes = json::array();
  for (const auto& a : r.axes) {
    json pts = json::array();
    for (const auto& e : a.entries) {
      json p = to_json(e.point);
      p["value"] = e.value;
      p["h"] = e.h;
      p["admitted"] = e.admission.admitted;
      if (!e.admission.reason.empty()) p["excluded_because"] = e.admission.reason;
      pts.push_back(p);
    }
    json ja{{"axis", a.axis},
            {"fixed", a.fixed},
            {"points", pts},
            {"pairwise_slopes", a.pairwise},
            {"local_slopes", a.local},
            {"verdict", {{"criterion", a.verdict.criterion}, {"passed", a.verdict.passed}, {"message", a.verdict.message}}}};
    if (a.fit)
      ja["fit"] = {{"slope", a.fit->slope},
                   {"intercept", a.fit->intercept},
                   {"residual", a.fit->residual},
                   {"ci95", a.fit->ci95},
                   {"points", a.fit->points}};
    else
      ja["fit"] = nullptr;
    if (!a.fit_note.empty()) ja["fit_note"] = a.fit_note;
    axes.push_back(ja);
  }
  json joint = json::array();
  for (const auto& p : r.joint) joint.push_back(to_json(p));
  return json{{"config", r.config_name},
              {"config_hash", r.config_hash},
              {"tool_version", r.tool_version},
              {"reference", {{"kind", r.reference_kind}, {"error_estimate", r.reference_error}}},
              {"warnings", r.warnings},
              {"axes", axes},
              {"joint", joint},
              {"joint_monotone", r.joint_monotone},
              {"passed", r.passed}};
}

/// One row per measured point: axis,value,error,runtime_s.
inline std::string to_csv(const ConvergenceReport& r) {
  std::ostringstream os;
  os << "axis,value,error,runtime_s\n" << std::setprecision(17);
  auto row = [&](const std::string& axis, const std::string& value, const PointResult& p) {
    os << axis << ',' << value << ',';
    if (p.ok()) os << p.error;
    else os << "nan";
    os << ',' << p.runtime_s << '\n';
  };
  for (const auto& a : r.axes)
    for (const auto& e : a.entries) row(a.axis, std::to_string(e.value), e.point);
  for (const auto& p : r.joint)
    row("joint", std::to_string(p.n) + ":" + std::to_string(p.m) + ":" + std::to_string(p.nk), p);
  return os.str();
}

inline void write_outputs(const ConvergenceReport& r, const ExperimentConfig& cfg) {
  for (const auto& p : {cfg.output_json, cfg.output_csv}) {
    const auto dir = std::filesystem::path(p).parent_path();
    if (!p.empty() && !dir.empty()) std::filesystem::create_directories(dir);
  }
  if (!cfg.output_json.empty()) {
    std::ofstream f(cfg.output_json);
    if (!f) throw std::runtime_error("cannot write '" + cfg.output_json + "'");
    f << to_json(r).dump(2) << '\n';
  }
  if (!cfg.output_csv.empty()) {
    std::ofstream f(cfg.output_csv);
    if (!f) throw std::runtime_error("cannot write '" + cfg.output_csv + "'");
    f << to_csv(r);
  }
}

}  // namespace sgfem::harness

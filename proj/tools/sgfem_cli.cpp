// sgfem: tables, single solves, convergence sweeps and invariant checks.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "sgfem/harness/checks.hpp"
#include "sgfem/harness/config.hpp"
#include "sgfem/harness/sweep.hpp"
#include "sgfem/orthopoly.hpp"
#include "sgfem/pce.hpp"

using namespace sgfem;
using namespace sgfem::harness;

namespace {

constexpr int kExitFitFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

PolyFamily family_from(const std::string& name, double alpha, double beta) {
  if (name == "hermite") return PolyFamily::hermite();
  if (name == "jacobi") return PolyFamily::jacobi(alpha, beta);
  if (name == "laguerre") return PolyFamily::laguerre(alpha);
  throw std::invalid_argument("unknown family '" + name + "'");
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << text;
}

std::string tables_text(const std::string& what, const PolyFamily& fam, int N, int n) {
  char buf[128];
  std::string out;
  if (what == "recurrence") {
    for (int k = 0; k <= n; ++k) {
      const auto r = recurrence_coeff(fam, k);
      std::snprintf(buf, sizeof buf, "%d %.17g %.17g\n", k, r.a, r.b);
      out += buf;
    }
  } else if (what == "gauss") {
    const auto g = gauss_rule(fam, n);
    for (std::size_t i = 0; i < g.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g %.17g\n", g.nodes[i], g.weights[i]);
      out += buf;
    }
  } else if (what == "eigen") {
    for (int k = 0; k <= n; ++k) {
      std::snprintf(buf, sizeof buf, "%d %.17g\n", k, sl_eigenvalue(fam, k));
      out += buf;
    }
  } else if (what == "eps") {
    out = triple_products(DistributionSpec::iid(fam, N), n).to_text();
  } else {
    throw std::invalid_argument("unknown table '" + what + "' (recurrence | gauss | eigen | eps)");
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic Galerkin finite elements for random parabolic problems"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  std::string family = "hermite", what = "eps", out;
  double alpha = 0.0, beta = 0.0;
  int N = 1, degree = 2;
  auto* tables = app.add_subcommand("tables", "Write recurrence, Gauss, eigenvalue or triple-product tables");
  tables->add_option("--what", what, "recurrence | gauss | eigen | eps")->capture_default_str();
  tables->add_option("--family", family, "hermite | jacobi | laguerre")->capture_default_str();
  tables->add_option("--alpha", alpha, "Jacobi/Laguerre alpha");
  tables->add_option("--beta", beta, "Jacobi beta");
  tables->add_option("--dim", N, "number of random variables (eps)")->capture_default_str();
  tables->add_option("--degree", degree, "degree n (eps, recurrence, eigen) or node count (gauss)")->capture_default_str();
  tables->add_option("-o,--out", out, "output file (default stdout)");

  std::string config_path;
  int sn = -1, sm = -1, sk = -1;
  auto* solve = app.add_subcommand("solve", "Solve one configuration and report the final state and its error");
  solve->add_option("config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  solve->add_option("--n", sn, "chaos degree (default: finest in config)");
  solve->add_option("--m", sm, "mesh parameter (default: finest in config)");
  solve->add_option("--nk", sk, "time steps (default: finest in config)");
  solve->add_option("-o,--out", out, "output JSON (default stdout)");

  std::string csv, json_out;
  auto* converge = app.add_subcommand("converge", "Run the convergence sweep; exit 0 iff all requested fits pass");
  converge->add_option("config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  converge->add_option("--csv", csv, "override output.csv");
  converge->add_option("--json", json_out, "override output.json");

  auto* check = app.add_subcommand("check", "Run the invariant suite at one sweep point");
  check->add_option("config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  check->add_option("--n", sn, "chaos degree (default: finest in config)");
  check->add_option("--m", sm, "mesh parameter (default: coarsest in config)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*tables) {
      emit(tables_text(what, family_from(family, alpha, beta), N, degree), out);
      return 0;
    }

    auto cfg = load_config(config_path);
    if (*converge) {
      if (!csv.empty()) cfg.output_csv = csv;
      if (!json_out.empty()) cfg.output_json = json_out;
    }
    Experiment ex(cfg);
    for (const auto& w : ex.warnings()) std::cerr << "warning: " << w << '\n';

    if (*solve) {
      const int n = sn >= 0 ? sn : cfg.n_values.back();
      const int m = sm > 0 ? sm : cfg.m_values.back();
      const int k = sk > 0 ? sk : cfg.nk_values.back();
      double aliasing = 0.0;
      const SgState s = ex.solve(n, m, k, &aliasing);
      const FeSpace space(ex.mesh(m), cfg.fe_order);
      const auto M = assemble_mass(space).matrix();
      const MultiIndexSet mis(ex.distribution().dim(), n);
      json modes = json::array();
      for (std::size_t b = 0; b < s.modes(); ++b)
        modes.push_back({{"index", format_multi_index(mis[b])}, {"l2_norm", std::sqrt(s.mode(b).dot(M * s.mode(b)))}});
      const json j{{"config", cfg.name},
                   {"config_hash", config_hash(cfg)},
                   {"tool_version", kToolVersion},
                   {"n", n},
                   {"m", m},
                   {"n_k", k},
                   {"time", s.time},
                   {"dofs", s.dof},
                   {"modes", modes},
                   {"mean_at_center", evaluate(space, Eigen::VectorXd(s.mode(0)), Point(0.5, 0.5))},
                   {"aliasing", aliasing},
                   {"error", ex.error(s, n, m)}};
      emit(j.dump(2) + "\n", out);
      return 0;
    }

    if (*converge) {
      const auto rep = run_sweep(ex);
      write_outputs(rep, cfg);
      for (const auto& a : rep.axes) {
        std::cout << "axis " << a.axis << ":";
        for (const auto& e : a.entries) std::cout << ' ' << e.value << '=' << (e.point.ok() ? short_num(e.point.error) : "FAILED");
        if (a.fit) std::cout << "  slope " << short_num(a.fit->slope) << " +- " << short_num(a.fit->ci95);
        std::cout << "  [" << a.verdict.criterion << (a.verdict.passed ? " ok" : " FAILED");
        if (!a.verdict.message.empty()) std::cout << ": " << a.verdict.message;
        std::cout << "]\n";
      }
      for (const auto& w : rep.warnings) std::cout << "warning: " << w << '\n';
      std::cout << (rep.passed ? "PASS" : "FAIL") << '\n';
      return rep.passed ? 0 : kExitFitFailed;
    }

    if (*check) {
      const int n = sn >= 0 ? sn : cfg.n_values.back();
      const int m = sm > 0 ? sm : cfg.m_values.front();
      bool all = true;
      for (const auto& r : run_checks(ex, n, m)) {
        std::cout << (r.passed ? "ok   " : "FAIL ") << r.name << "  " << r.value << "  " << r.detail << '\n';
        all = all && r.passed;
      }
      return all ? 0 : kExitFitFailed;
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return 0;
}

// Command-line front end for the convergence laboratory. Subcommands:
//
//   run      one experiment (objective, start, methods, instrumentation)
//   figure   one of the six pinned reproduction setups
//   verify   condition certificates plus a fully audited, monitored run
//   certify  evaluate a condition system for a scalar triple, no run
//   lemmas   randomized checks of the supporting matrix inequalities
//
// Exit codes: 0 clean, 1 a verification verdict failed, 2 usage error,
// 3 numerical breakdown.

#include <cstdio>
#include <exception>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qnlab/experiment.hpp"

namespace {

using namespace qnlab;

constexpr int kExitOk = 0;
constexpr int kExitVerdict = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

const char* ok_str(bool pass) { return pass ? "ok" : "FAIL"; }

// Raw option storage shared by `run` and `verify`. Strings are parsed into
// an ExperimentConfig only after CLI11 has merged flags and config file.
struct ExperimentOpts {
  ExperimentConfig base;
  std::vector<std::string> methods;
  std::string init = "exact-hessian";
  double gd_step = 0.0;
  double r = 0.0, epsilon = 0.0, delta = 0.0;

  CLI::Option* gd_step_opt = nullptr;
  CLI::Option* r_opt = nullptr;
  CLI::Option* epsilon_opt = nullptr;
  CLI::Option* delta_opt = nullptr;
};

void add_experiment_flags(CLI::App* sub, ExperimentOpts& o) {
  sub->add_option("--objective", o.base.objective, "objective: f1, f2, or f3")
      ->capture_default_str();
  sub->add_option("--dim", o.base.dim, "problem dimension")->capture_default_str();
  sub->add_option("--x0-scale", o.base.x0_scale,
                  "start at x0-scale times the all-ones vector")
      ->capture_default_str();
  sub->add_option("--method", o.methods,
                  "method cell, repeatable: dfp, bfgs, newton, gd "
                  "(default bfgs, newton, gd)");
  sub->add_option("--init", o.init,
                  "quasi-Newton seed: exact-hessian, identity, or scaled-identity")
      ->capture_default_str();
  sub->add_option("--init-scale", o.base.scaled_identity_c,
                  "coefficient for the scaled-identity seed")
      ->capture_default_str();
  o.gd_step_opt = sub->add_option("--gd-step", o.gd_step,
                                  "gradient step size (default 1 / L)");
  sub->add_option("--max-iters", o.base.max_iters, "iteration cap")
      ->capture_default_str();
  sub->add_flag("--audit", o.base.audit,
               "reconstruct matrices and audit the one-step potential bound");
  sub->add_option("--out", o.base.output_dir, "output directory for traces")
      ->capture_default_str();
  sub->add_option("--seed", o.base.seed, "seed recorded in the outputs")
      ->capture_default_str();
  sub->add_flag("--parallel", o.base.parallel, "run method cells concurrently");
  sub->add_flag("--dense-newton", o.base.dense_newton,
               "allow dense Hessian factorization above the size gate");
  o.r_opt = sub->add_option("--r", o.r, "triple: contraction factor in (0,1)");
  o.epsilon_opt =
      sub->add_option("--epsilon", o.epsilon, "triple: initial-distance budget");
  o.delta_opt = sub->add_option("--delta", o.delta, "triple: potential budget");
  sub->set_config("--config", "", "read options from a key = value file");
}

// CLI11 only reads config files for the app parse() was called on, so a
// subcommand's --config has to be applied by hand. Stream parsing fills just
// the options the command line left unset, which keeps explicit flags in
// charge of any key the file also names.
void apply_config_file(CLI::App* sub) {
  CLI::Option* cfg = sub->get_config_ptr();
  if (cfg == nullptr || cfg->count() == 0) return;
  const std::string path = cfg->as<std::string>();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  sub->parse_from_stream(in);
}

ExperimentConfig finish_experiment_opts(const ExperimentOpts& o) {
  ExperimentConfig config = o.base;
  if (!o.methods.empty()) {
    config.methods.clear();
    for (const std::string& name : o.methods) {
      config.methods.push_back(parse_method(name));
    }
  }
  config.init_policy = parse_init_policy(o.init);
  if (o.gd_step_opt->count() > 0) config.gd_step = o.gd_step;
  const int triple_parts = (o.r_opt->count() > 0) + (o.epsilon_opt->count() > 0) +
                           (o.delta_opt->count() > 0);
  if (triple_parts == 3) {
    config.triple = ConditionTriple{o.r, o.epsilon, o.delta};
  } else if (triple_parts != 0) {
    throw ConfigError("--r, --epsilon, and --delta must be given together");
  }
  return config;
}

void print_monitor(const MonitorReport& m) {
  const MonitorCheck& d = m.initial_distance;
  const MonitorCheck& p = m.initial_potential;
  std::printf("    monitor: sigma0 %.6g <= %.6g %s; potential0 ", d.lhs, d.rhs,
              ok_str(d.pass));
  if (p.applicable) {
    std::printf("%.6g <= %.6g %s", p.lhs, p.rhs, ok_str(p.pass));
  } else {
    std::printf("unavailable FAIL");
  }
  std::printf("; hypotheses %s\n", ok_str(m.hypotheses_pass));
  std::printf("    monitor: %zu rows (%d suspended), summed distance %.6g <= %.6g %s, "
              "conclusions %s, overall %s\n",
              m.rows.size(), m.suspended_rows, m.summed_distance.lhs,
              m.summed_distance.rhs, ok_str(m.summed_distance.pass),
              ok_str(m.conclusions_pass), ok_str(m.pass));
}

void print_audits(const AuditSummary& a) {
  std::printf("    audits: %d/%d held, %d weak only, %d inapplicable, %s\n", a.passed,
              a.total, a.weak_only, a.inapplicable, ok_str(a.pass()));
}

void print_cell(const CellResult& cell) {
  if (!cell.ran) {
    std::printf("  [%s] skipped: %s\n", method_name(cell.method),
                cell.skip_reason.c_str());
    return;
  }
  std::printf("  [%s] %d iterations, termination %s, final ratio %.6g, %.3f s\n",
              method_name(cell.method), cell.iters,
              termination_name(cell.trace.termination), cell.final_ratio,
              cell.wall_seconds);
  if (cell.envelope_checked) {
    std::printf("    superlinear envelope (1/sqrt(k))^k: %s\n",
                ok_str(cell.envelope_ok));
  }
  if (cell.incomplete) {
    std::printf("    warning: non-finite values reached the trace\n");
  }
  if (cell.trace.termination == Termination::NumericalBreakdown) {
    std::printf("    breakdown: %s\n", cell.trace.breakdown_reason.c_str());
  }
  for (const std::string& w : cell.trace.warnings) {
    std::printf("    warning: %s\n", w.c_str());
  }
  if (cell.monitor) print_monitor(*cell.monitor);
  if (cell.audits) print_audits(*cell.audits);
  if (!cell.trace_path.empty()) {
    std::printf("    trace: %s\n", cell.trace_path.c_str());
  }
}

void print_result(const ExperimentResult& result) {
  std::printf("%s, dim %d, x0 scale %g\n", result.config.objective.c_str(),
              result.config.dim, result.config.x0_scale);
  for (const CellResult& cell : result.cells) print_cell(cell);
  std::printf("  summary: %s\n", result.summary_path.c_str());
}

void print_certificate(const ConditionCertificate& cert) {
  std::printf("%s conditions for r=%g, epsilon=%g, delta=%g:\n",
              method_name(cert.system), cert.triple.r, cert.triple.epsilon,
              cert.triple.delta);
  for (const ConditionInequality& ineq : cert.inequalities) {
    std::printf("  %-18s %.9g <= %.9g  %s\n", ineq.name.c_str(), ineq.lhs, ineq.rhs,
                ok_str(ineq.pass));
  }
  std::printf("  basin: |x0 - x*| <= %g mu^(3/2)/(M sqrt(L)), matrix distance <= %g\n",
              cert.x_radius_coefficient, cert.matrix_radius);
  std::printf("  verdict: %s\n", cert.pass ? "accepted" : "rejected");
}

int do_run(const ExperimentOpts& opts) {
  const ExperimentResult result = run_experiment(finish_experiment_opts(opts));
  print_result(result);
  return result.any_breakdown ? kExitNumeric : kExitOk;
}

int do_figure(const std::string& id, const std::string& out_dir) {
  const ExperimentResult result = run_figure(id, out_dir);
  std::printf("%s: ", id.c_str());
  print_result(result);
  return result.any_breakdown ? kExitNumeric : kExitOk;
}

int do_verify(const ExperimentOpts& opts) {
  const VerifyReport report = verify_experiment(finish_experiment_opts(opts));
  for (const ConditionCertificate& cert : report.certificates) {
    print_certificate(cert);
  }
  print_result(report.result);
  std::printf("verify: certificates %s, monitors %s, audits %s, verdict %s\n",
              ok_str(report.certificates_pass),
              ok_str(report.result.monitors_pass), ok_str(report.result.audits_pass),
              report.pass ? "PASS" : "FAIL");
  return report.pass ? kExitOk : kExitVerdict;
}

int do_certify(const std::string& system, double r, double epsilon, double delta) {
  const ConditionTriple triple{r, epsilon, delta};
  const Method m = parse_method(system);
  ConditionCertificate cert;
  if (m == Method::DFP) {
    cert = dfp_conditions(triple);
  } else if (m == Method::BFGS) {
    cert = bfgs_conditions(triple);
  } else {
    throw ConfigError("certify needs --system dfp or bfgs");
  }
  print_certificate(cert);
  return cert.pass ? kExitOk : kExitVerdict;
}

int do_lemmas(std::uint64_t seed, int cases) {
  const std::vector<SuiteResult> suites = run_inequality_suites(seed, cases);
  int failures = 0;
  for (const SuiteResult& suite : suites) {
    std::printf("%-24s %d cases, %d failures  %s\n", suite.name.c_str(), suite.cases,
                suite.failures, ok_str(suite.failures == 0));
    failures += suite.failures;
  }
  return failures == 0 ? kExitOk : kExitVerdict;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quasi-Newton convergence laboratory"};
  app.require_subcommand(1);

  ExperimentOpts run_opts;
  CLI::App* run_cmd = app.add_subcommand("run", "run one experiment");
  add_experiment_flags(run_cmd, run_opts);

  std::string figure_id;
  std::string figure_out = ".";
  CLI::App* figure_cmd =
      app.add_subcommand("figure", "run a pinned reproduction setup");
  figure_cmd->add_option("id", figure_id, "fig1 .. fig6")->required();
  figure_cmd->add_option("--out", figure_out, "output directory for traces")
      ->capture_default_str();

  ExperimentOpts verify_opts;
  CLI::App* verify_cmd = app.add_subcommand(
      "verify", "certify a triple and audit a run against it");
  add_experiment_flags(verify_cmd, verify_opts);

  std::string certify_system;
  double certify_r = 0.0, certify_epsilon = 0.0, certify_delta = 0.0;
  CLI::App* certify_cmd =
      app.add_subcommand("certify", "evaluate a condition system for a triple");
  certify_cmd->add_option("--system", certify_system, "dfp or bfgs")->required();
  certify_cmd->add_option("--r", certify_r, "contraction factor in (0,1)")
      ->required();
  certify_cmd->add_option("--epsilon", certify_epsilon, "initial-distance budget")
      ->required();
  certify_cmd->add_option("--delta", certify_delta, "potential budget")->required();

  std::uint64_t lemmas_seed = 0;
  int lemmas_cases = 10000;
  CLI::App* lemmas_cmd =
      app.add_subcommand("lemmas", "randomized checks of the matrix inequalities");
  lemmas_cmd->add_option("--seed", lemmas_seed, "base seed")->capture_default_str();
  lemmas_cmd->add_option("--cases", lemmas_cases, "cases per suite")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run_cmd->parsed()) {
      apply_config_file(run_cmd);
      return do_run(run_opts);
    }
    if (figure_cmd->parsed()) return do_figure(figure_id, figure_out);
    if (verify_cmd->parsed()) {
      apply_config_file(verify_cmd);
      return do_verify(verify_opts);
    }
    if (certify_cmd->parsed()) {
      return do_certify(certify_system, certify_r, certify_epsilon, certify_delta);
    }
    if (lemmas_cmd->parsed()) return do_lemmas(lemmas_seed, lemmas_cases);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const InvalidTripleError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const InvalidDimError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const LinalgError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  }
  return kExitUsage;
}

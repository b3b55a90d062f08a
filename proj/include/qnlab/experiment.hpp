#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qnlab/theory.hpp"

namespace qnlab {

// One harness invocation: which objective/start, which methods to compare,
// and what instrumentation to attach. Output is one CSV per method plus a
// JSON summary in output_dir.
struct ExperimentConfig {
  std::string objective = "f1";  // f1 | f2 | f3
  int dim = 30;
  double x0_scale = 0.45;  // x0 = x0_scale * ones
  std::vector<Method> methods{Method::BFGS, Method::Newton, Method::GradientDescent};
  InitPolicy init_policy = InitPolicy::ExactHessianAtX0;  // quasi-Newton cells
  double scaled_identity_c = 1.0;  // coefficient for the scaled-identity policy
  std::optional<double> gd_step;  // default 1 / lip_grad on the run's ball
  int max_iters = 60;
  bool audit = false;  // reconstruct matrices and run potential audits
  std::optional<ConditionTriple> triple;  // enables trajectory monitors
  std::string output_dir = ".";
  std::uint64_t seed = 0;
  bool parallel = false;  // run method cells concurrently
  bool dense_newton = false;
};

BuiltinKind parse_builtin(const std::string& name);
Method parse_method(const std::string& name);
InitPolicy parse_init_policy(const std::string& name);
const char* init_policy_name(InitPolicy p);

Vector scaled_ones(int dim, double scale);

// The objective with constants certified on the ball that contains the whole
// run: radius 1.1 * ||x0 - x*|| (1 when x0 is the optimum).
std::unique_ptr<Objective> make_run_objective(const ExperimentConfig& config);

struct AuditSummary {
  int total = 0;         // steps where the audit hypotheses held
  int passed = 0;        // stated bound held
  int weak_only = 0;     // only the doubled-denominator variant held
  int inapplicable = 0;  // hypotheses failed (reported, not counted)
  bool pass() const { return total == passed; }
};

struct CellResult {
  Method method = Method::BFGS;
  bool ran = false;
  std::string skip_reason;  // set when the cell was skipped, e.g. degenerate gd step

  Trace trace;
  std::vector<WeightedFrame> frames;
  double wall_seconds = 0.0;
  int iters = 0;             // records past the initial one
  double final_ratio = 1.0;  // ||r_last|| / ||r_0||
  bool incomplete = false;   // a non-finite value reached the CSV

  bool envelope_checked = false;  // quasi-Newton cells only
  bool envelope_ok = true;        // ratio under (1/sqrt(k))^k at every gated k

  std::optional<MonitorReport> monitor;  // when a triple was supplied
  std::optional<AuditSummary> audits;    // when auditing
  std::string trace_path;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::string summary_path;
  std::vector<CellResult> cells;

  bool envelope_ok = true;    // over envelope-checked cells
  bool monitors_pass = true;  // over cells with monitors
  bool audits_pass = true;    // over cells with audits
  bool any_breakdown = false;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

// The six pinned reproduction setups.
struct FigureSpec {
  const char* id;
  const char* objective;
  int dim;
  double x0_scale;
};

const std::vector<FigureSpec>& figure_specs();
const FigureSpec* find_figure(const std::string& id);  // null when unknown
ExperimentConfig figure_config(const FigureSpec& spec, const std::string& output_dir);
ExperimentResult run_figure(const std::string& id, const std::string& output_dir);

// Condition certificate plus a fully audited run: the "does the theory hold
// here" entry point. pass requires the certificates, every monitor, and
// every audit to come back clean.
struct VerifyReport {
  std::vector<ConditionCertificate> certificates;  // one per quasi-Newton method
  ExperimentResult result;
  bool certificates_pass = true;
  bool pass = false;
};

VerifyReport verify_experiment(ExperimentConfig config);

// Randomized checks of the matrix/vector inequalities on seeded admissible
// instances, dims 2 through 12.
struct SuiteResult {
  std::string name;
  int cases = 0;
  int failures = 0;
};

std::vector<SuiteResult> run_inequality_suites(std::uint64_t seed, int cases);

}  // namespace qnlab

#include "qnlab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <random>
#include <sstream>

#include "json.hpp"

namespace qnlab {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

BuiltinKind parse_builtin(const std::string& name) {
  if (name == "f1") return BuiltinKind::F1;
  if (name == "f2") return BuiltinKind::F2;
  if (name == "f3") return BuiltinKind::F3;
  throw ConfigError("unknown objective '" + name + "' (expected f1, f2, or f3)");
}

Method parse_method(const std::string& name) {
  if (name == "dfp") return Method::DFP;
  if (name == "bfgs") return Method::BFGS;
  if (name == "newton") return Method::Newton;
  if (name == "gd") return Method::GradientDescent;
  throw ConfigError("unknown method '" + name + "' (expected dfp, bfgs, newton, or gd)");
}

InitPolicy parse_init_policy(const std::string& name) {
  if (name == "exact-hessian") return InitPolicy::ExactHessianAtX0;
  if (name == "identity") return InitPolicy::Identity;
  if (name == "scaled-identity") return InitPolicy::ScaledIdentity;
  throw ConfigError("unknown init policy '" + name +
                    "' (expected exact-hessian, identity, or scaled-identity)");
}

const char* init_policy_name(InitPolicy p) {
  switch (p) {
    case InitPolicy::ExactHessianAtX0: return "exact-hessian";
    case InitPolicy::Identity: return "identity";
    case InitPolicy::ScaledIdentity: return "scaled-identity";
    case InitPolicy::Explicit: return "explicit";
  }
  return "?";
}

Vector scaled_ones(int dim, double scale) {
  if (dim < 1) throw ConfigError("dim must be >= 1");
  return scale * Vector::Ones(dim);
}

std::unique_ptr<Objective> make_run_objective(const ExperimentConfig& config) {
  if (!std::isfinite(config.x0_scale)) {
    throw ConfigError("x0_scale must be finite");
  }
  const BuiltinKind kind = parse_builtin(config.objective);
  const double dist = std::abs(config.x0_scale) * std::sqrt(double(config.dim));
  const double radius = dist > 0.0 ? 1.1 * dist : 1.0;
  return make_builtin(kind, config.dim, radius);
}

namespace {

constexpr int kDenseNewtonDimCap = 1000;

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_cell(double v, bool& incomplete) {
  if (!std::isfinite(v)) {
    incomplete = true;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
  }
  return fmt_num(v);
}

bool is_quasi_newton(Method m) { return m == Method::DFP || m == Method::BFGS; }

std::string trace_filename(const ExperimentConfig& config, Method m) {
  return config.objective + "_d" + std::to_string(config.dim) + "_" + method_name(m) +
         ".csv";
}

// The side of the potential the method's own theory tracks.
const std::optional<double>& tracked_potential(Method m, const WeightedFrame& f) {
  return m == Method::DFP ? f.potential_B : f.potential_H;
}

void write_trace_csv(const fs::path& path, const ExperimentConfig& config,
                     CellResult& cell) {
  const Trace& trace = cell.trace;
  const std::vector<WeightedFrame>& frames = cell.frames;
  const double r0 = frames.empty() ? 0.0 : frames.front().r_norm;

  bool incomplete = false;
  std::ostringstream rows;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const WeightedFrame& f = frames[i];
    std::string ratio_cell, root_cell, tau_cell, pot_cell, env_cell, env_root_cell;
    double ratio = std::numeric_limits<double>::quiet_NaN();
    if (i == 0) {
      ratio = r0 > 0.0 ? 1.0 : std::numeric_limits<double>::quiet_NaN();
      ratio_cell = csv_cell(ratio, incomplete);
    } else {
      ratio = r0 > 0.0 ? f.r_norm / r0 : std::numeric_limits<double>::quiet_NaN();
      ratio_cell = csv_cell(ratio, incomplete);
      root_cell = csv_cell(std::pow(ratio, 1.0 / double(f.k)), incomplete);
      env_cell = csv_cell(std::pow(double(f.k), -0.5 * double(f.k)), incomplete);
      env_root_cell = csv_cell(1.0 / std::sqrt(double(f.k)), incomplete);
    }
    if (f.tau) tau_cell = csv_cell(*f.tau, incomplete);
    const std::optional<double>& pot = tracked_potential(cell.method, f);
    if (pot) pot_cell = csv_cell(*pot, incomplete);
    rows << f.k << ',' << ratio_cell << ',' << root_cell << ','
         << csv_cell(f.sigma, incomplete) << ',' << tau_cell << ',' << pot_cell << ','
         << env_cell << ',' << env_root_cell << '\n';
  }
  cell.incomplete = incomplete;

  std::ofstream out(path);
  if (!out) {
    throw ConfigError("cannot open trace file for writing: " + path.string());
  }
  out << "# objective " << config.objective << "\n";
  out << "# dim " << config.dim << "\n";
  out << "# x0_scale " << fmt_num(config.x0_scale) << "\n";
  out << "# method " << method_name(cell.method) << "\n";
  if (is_quasi_newton(cell.method)) {
    out << "# init " << init_policy_name(config.init_policy) << "\n";
  }
  if (cell.method == Method::GradientDescent) {
    out << "# gd_step " << fmt_num(trace.config.gd_step) << "\n";
  }
  out << "# max_iters " << config.max_iters << "\n";
  out << "# seed " << config.seed << "\n";
  out << "# audit " << (config.audit ? 1 : 0) << "\n";
  out << "# mu " << fmt_num(trace.mu) << "\n";
  out << "# lip_grad " << fmt_num(trace.lip_grad) << "\n";
  out << "# lip_hess " << fmt_num(trace.lip_hess) << "\n";
  out << "# radius " << fmt_num(trace.radius) << "\n";
  out << "# kappa " << fmt_num(std::sqrt(trace.lip_grad / trace.mu)) << "\n";
  if (config.triple) {
    out << "# triple r " << fmt_num(config.triple->r) << " epsilon "
        << fmt_num(config.triple->epsilon) << " delta " << fmt_num(config.triple->delta)
        << "\n";
  }
  out << "# termination " << termination_name(trace.termination) << "\n";
  if (!trace.breakdown_reason.empty()) {
    out << "# breakdown " << trace.breakdown_reason << "\n";
  }
  for (const std::string& w : trace.warnings) {
    out << "# warning " << w << "\n";
  }
  out << "# incomplete " << (incomplete ? 1 : 0) << "\n";
  out << "k,ratio,ratio_kth_root,sigma,tau,potential,env,env_root\n";
  out << rows.str();
}

CellResult run_cell(const Objective& obj, const MetricContext& ctx,
                    const ExperimentConfig& config, Method m) {
  CellResult cell;
  cell.method = m;

  OptimizerConfig oc;
  oc.method = m;
  oc.x0 = scaled_ones(config.dim, config.x0_scale);
  oc.max_iters = config.max_iters;
  oc.init_policy = config.init_policy;
  oc.scaled_identity_c = config.scaled_identity_c;
  oc.track_B = m == Method::DFP;
  oc.dense_newton = config.dense_newton;
  if (m == Method::GradientDescent) {
    const double step = config.gd_step ? *config.gd_step : 1.0 / obj.lip_grad();
    if (!(step > 0.0) || !std::isfinite(step)) {
      cell.skip_reason = "default gradient step 1/lip_grad is not positive and "
                         "finite on this ball; pass an explicit step";
      return cell;
    }
    oc.gd_step = step;
  }
  if (m == Method::Newton && !obj.hessian_is_diagonal() &&
      config.dim > kDenseNewtonDimCap && !config.dense_newton) {
    cell.skip_reason = "dense Newton solves are gated off at this dimension";
    return cell;
  }

  const auto t0 = std::chrono::steady_clock::now();
  cell.trace = run(obj, oc);
  ReplayOptions ro;
  ro.with_potentials = config.audit;
  cell.frames = replay_frames(obj, cell.trace, ctx, ro);
  cell.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  cell.ran = true;
  cell.iters = int(cell.trace.records.size()) - 1;

  const double r0 = cell.frames.front().r_norm;
  cell.final_ratio = r0 > 0.0 ? cell.frames.back().r_norm / r0 : 0.0;

  if (is_quasi_newton(m)) {
    cell.envelope_checked = true;
    for (const WeightedFrame& f : cell.frames) {
      if (f.k < 1 || r0 <= 0.0) continue;
      const double ratio = f.r_norm / r0;
      if (!(ratio > tol::kRatioFloor)) continue;
      const double env = std::pow(double(f.k), -0.5 * double(f.k));
      if (!(ratio <= env + tol::kEnvelopeSlack * std::max(1.0, env))) {
        cell.envelope_ok = false;
      }
    }
    if (config.triple) {
      cell.monitor = trajectory_monitor(cell.trace, cell.frames, m, *config.triple);
    }
    if (config.audit) {
      double delta = 0.0;
      if (config.triple) {
        delta = config.triple->delta;
      } else {
        for (const WeightedFrame& f : cell.frames) {
          const std::optional<double>& pot = tracked_potential(m, f);
          if (pot) delta = std::max(delta, *pot);
        }
        if (!(delta > 0.0)) delta = 1.0;
      }
      AuditSummary as;
      for (std::size_t i = 0; i + 1 < cell.frames.size(); ++i) {
        const PotentialAuditReport rep =
            m == Method::DFP
                ? dfp_potential_audit(cell.frames[i], cell.frames[i + 1], delta)
                : bfgs_potential_audit(cell.frames[i], cell.frames[i + 1], delta);
        if (!rep.applicable) {
          as.inapplicable += 1;
          continue;
        }
        as.total += 1;
        if (rep.pass) {
          as.passed += 1;
        } else if (rep.pass_weak) {
          as.weak_only += 1;
        }
      }
      cell.audits = as;
    }
  }
  return cell;
}

json cell_summary(const CellResult& cell) {
  json c;
  c["method"] = method_name(cell.method);
  c["ran"] = cell.ran;
  if (!cell.ran) {
    c["skip_reason"] = cell.skip_reason;
    return c;
  }
  c["termination"] = termination_name(cell.trace.termination);
  if (!cell.trace.breakdown_reason.empty()) {
    c["breakdown"] = cell.trace.breakdown_reason;
  }
  c["iters"] = cell.iters;
  c["wall_seconds"] = cell.wall_seconds;
  c["final_ratio"] = cell.final_ratio;
  c["incomplete"] = cell.incomplete;
  if (cell.envelope_checked) {
    c["envelope_ok"] = cell.envelope_ok;
  }
  if (cell.monitor) {
    c["monitor"] = {{"hypotheses_pass", cell.monitor->hypotheses_pass},
                    {"conclusions_pass", cell.monitor->conclusions_pass},
                    {"pass", cell.monitor->pass},
                    {"rows", cell.monitor->rows.size()},
                    {"suspended_rows", cell.monitor->suspended_rows}};
  }
  if (cell.audits) {
    c["audits"] = {{"total", cell.audits->total},
                   {"passed", cell.audits->passed},
                   {"weak_only", cell.audits->weak_only},
                   {"inapplicable", cell.audits->inapplicable},
                   {"pass", cell.audits->pass()}};
  }
  c["trace"] = cell.trace_path;
  return c;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (config.methods.empty()) {
    throw ConfigError("run_experiment: need at least one method");
  }
  for (std::size_t i = 0; i < config.methods.size(); ++i) {
    for (std::size_t j = i + 1; j < config.methods.size(); ++j) {
      if (config.methods[i] == config.methods[j]) {
        throw ConfigError("run_experiment: duplicate method in the method list");
      }
    }
  }

  const std::unique_ptr<Objective> obj = make_run_objective(config);
  const MetricContext ctx = build_context(*obj);

  ExperimentResult result;
  result.config = config;

  std::vector<CellResult> cells(config.methods.size());
  if (config.parallel && config.methods.size() > 1) {
    std::vector<std::future<CellResult>> futures;
    futures.reserve(config.methods.size());
    for (Method m : config.methods) {
      futures.push_back(std::async(std::launch::async, [&obj, &ctx, &config, m] {
        return run_cell(*obj, ctx, config, m);
      }));
    }
    for (std::size_t i = 0; i < futures.size(); ++i) cells[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < config.methods.size(); ++i) {
      cells[i] = run_cell(*obj, ctx, config, config.methods[i]);
    }
  }

  const fs::path out_dir(config.output_dir);
  fs::create_directories(out_dir);
  for (CellResult& cell : cells) {
    if (!cell.ran) continue;
    const std::string name = trace_filename(config, cell.method);
    write_trace_csv(out_dir / name, config, cell);
    cell.trace_path = (out_dir / name).string();
  }

  json summary;
  summary["objective"] = config.objective;
  summary["dim"] = config.dim;
  summary["x0_scale"] = config.x0_scale;
  summary["init"] = init_policy_name(config.init_policy);
  if (config.init_policy == InitPolicy::ScaledIdentity) {
    summary["init_scale"] = config.scaled_identity_c;
  }
  summary["max_iters"] = config.max_iters;
  summary["audit"] = config.audit;
  summary["seed"] = config.seed;
  summary["mu"] = obj->mu();
  summary["lip_grad"] = obj->lip_grad();
  summary["lip_hess"] = obj->lip_hess();
  summary["radius"] = obj->radius();
  summary["kappa"] = std::sqrt(obj->lip_grad() / obj->mu());
  if (config.triple) {
    summary["triple"] = {{"r", config.triple->r},
                         {"epsilon", config.triple->epsilon},
                         {"delta", config.triple->delta}};
  }
  summary["cells"] = json::array();
  for (CellResult& cell : cells) {
    summary["cells"].push_back(cell_summary(cell));
    if (!cell.ran) continue;
    if (cell.envelope_checked && !cell.envelope_ok) result.envelope_ok = false;
    if (cell.monitor && !cell.monitor->pass) result.monitors_pass = false;
    if (cell.audits && !cell.audits->pass()) result.audits_pass = false;
    if (cell.trace.termination == Termination::NumericalBreakdown) {
      result.any_breakdown = true;
    }
  }
  summary["envelope_ok"] = result.envelope_ok;
  summary["monitors_pass"] = result.monitors_pass;
  summary["audits_pass"] = result.audits_pass;
  summary["any_breakdown"] = result.any_breakdown;

  const std::string summary_name =
      config.objective + "_d" + std::to_string(config.dim) + "_summary.json";
  const fs::path summary_path = out_dir / summary_name;
  std::ofstream out(summary_path);
  if (!out) {
    throw ConfigError("cannot open summary file for writing: " + summary_path.string());
  }
  out << summary.dump(2) << "\n";

  result.summary_path = summary_path.string();
  result.cells = std::move(cells);
  return result;
}

const std::vector<FigureSpec>& figure_specs() {
  static const std::vector<FigureSpec> specs = {
      {"fig1", "f1", 30, 0.45},   {"fig2", "f1", 3000, 0.45},
      {"fig3", "f2", 30, 0.95},   {"fig4", "f2", 3000, 0.99},
      {"fig5", "f3", 30, 1.0},    {"fig6", "f3", 3000, 0.99},
  };
  return specs;
}

const FigureSpec* find_figure(const std::string& id) {
  for (const FigureSpec& spec : figure_specs()) {
    if (id == spec.id) return &spec;
  }
  return nullptr;
}

ExperimentConfig figure_config(const FigureSpec& spec, const std::string& output_dir) {
  ExperimentConfig config;
  config.objective = spec.objective;
  config.dim = spec.dim;
  config.x0_scale = spec.x0_scale;
  config.methods = {Method::BFGS, Method::Newton, Method::GradientDescent};
  config.output_dir = output_dir;
  return config;
}

ExperimentResult run_figure(const std::string& id, const std::string& output_dir) {
  const FigureSpec* spec = find_figure(id);
  if (spec == nullptr) {
    throw ConfigError("unknown figure id '" + id + "' (expected fig1 .. fig6)");
  }
  return run_experiment(figure_config(*spec, output_dir));
}

VerifyReport verify_experiment(ExperimentConfig config) {
  if (!config.triple) {
    throw ConfigError("verify needs a condition triple (r, epsilon, delta)");
  }
  bool any_qn = false;
  for (Method m : config.methods) any_qn = any_qn || is_quasi_newton(m);
  if (!any_qn) {
    throw ConfigError("verify needs at least one quasi-Newton method");
  }
  config.audit = true;

  VerifyReport report;
  for (Method m : config.methods) {
    if (!is_quasi_newton(m)) continue;
    report.certificates.push_back(m == Method::DFP ? dfp_conditions(*config.triple)
                                                   : bfgs_conditions(*config.triple));
    report.certificates_pass =
        report.certificates_pass && report.certificates.back().pass;
  }
  report.result = run_experiment(config);
  report.pass = report.certificates_pass && report.result.monitors_pass &&
                report.result.audits_pass && !report.result.any_breakdown;
  return report;
}

namespace {

Matrix random_gaussian(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = gauss(rng);
  }
  return m;
}

Vector random_unit(std::mt19937_64& rng, int dim) {
  Vector v;
  double n = 0.0;
  do {
    v = random_gaussian(rng, dim, 1).col(0);
    n = v.norm();
  } while (!(n > 1e-8));
  return v / n;
}

BuiltinKind cycle_kind(int i) {
  switch (i % 3) {
    case 0: return BuiltinKind::F1;
    case 1: return BuiltinKind::F2;
    default: return BuiltinKind::F3;
  }
}

}  // namespace

std::vector<SuiteResult> run_inequality_suites(std::uint64_t seed, int cases) {
  if (cases < 1) throw ConfigError("run_inequality_suites: need at least one case");
  std::vector<SuiteResult> suites;
  auto dim_of = [](int i) { return 2 + (i % 11); };  // dims 2..12

  {
    SuiteResult s{"projection-gap", cases, 0};
    std::mt19937_64 rng(seed);
    for (int i = 0; i < cases; ++i) {
      const int d = dim_of(i);
      const Matrix a = symmetrized(random_gaussian(rng, d, d));
      if (!check_projection_gap(a, random_unit(rng, d)).pass) s.failures += 1;
    }
    suites.push_back(std::move(s));
  }
  {
    SuiteResult s{"norm-product", cases, 0};
    std::mt19937_64 rng(seed + 1);
    for (int i = 0; i < cases; ++i) {
      const int d = dim_of(i);
      const Matrix g = random_gaussian(rng, d, d);
      const Matrix a = symmetrized(g * g.transpose()) + 0.1 * Matrix::Identity(d, d);
      const Matrix b = random_gaussian(rng, d, 2 + ((i + 5) % 11));
      if (!check_norm_product_bounds(a, b).pass) s.failures += 1;
    }
    suites.push_back(std::move(s));
  }
  {
    SuiteResult s{"inverse-drift", cases, 0};
    std::mt19937_64 rng(seed + 2);
    std::uniform_real_distribution<double> drift_target(0.05, 0.95);
    for (int i = 0; i < cases; ++i) {
      const int d = dim_of(i);
      Matrix a;
      double inv_norm = 0.0;
      do {
        a = random_gaussian(rng, d, d);
        const Vector sv = Eigen::JacobiSVD<Matrix>(a).singularValues();
        inv_norm = sv(sv.size() - 1) > 1e-8 * sv(0) ? 1.0 / sv(sv.size() - 1) : 0.0;
      } while (!(inv_norm > 0.0));
      const Matrix e_raw = random_gaussian(rng, d, d);
      const double e_norm = Eigen::JacobiSVD<Matrix>(e_raw).singularValues()(0);
      const Matrix e = e_raw * (drift_target(rng) / (inv_norm * e_norm));
      const InverseDriftReport rep = check_banach(a, e);
      if (!rep.applicable || !rep.pass) s.failures += 1;
    }
    suites.push_back(std::move(s));
  }
  {
    SuiteResult s{"gradient-linearization", cases, 0};
    std::mt19937_64 rng(seed + 3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < cases; ++i) {
      const int d = dim_of(i);
      const double radius = 0.3 + 0.7 * unit(rng);
      const auto obj = make_builtin(cycle_kind(i), d, radius);
      const Vector x = (radius * unit(rng)) * random_unit(rng, d);
      const Vector y = (radius * unit(rng)) * random_unit(rng, d);
      if (!check_gradient_linearization_bound(*obj, x, y).pass) s.failures += 1;
    }
    suites.push_back(std::move(s));
  }
  {
    SuiteResult s{"secant-frame", cases, 0};
    std::mt19937_64 rng(seed + 4);
    std::uniform_real_distribution<double> unit(0.25, 1.0);
    for (int i = 0; i < cases; ++i) {
      const int d = dim_of(i);
      const auto obj = make_builtin(cycle_kind(i), d, 1.0);
      // Start close enough that tau < 1 is certain: sigma scales by at most
      // sqrt(lip_grad) under the weighting.
      const double safe = 0.8 * std::pow(obj->mu(), 1.5) /
                          (obj->lip_hess() * std::sqrt(obj->lip_grad()));
      OptimizerConfig oc;
      oc.method = i % 2 == 0 ? Method::BFGS : Method::DFP;
      oc.x0 = (safe * unit(rng)) * random_unit(rng, d);
      oc.max_iters = 1;
      const Trace trace = run(*obj, oc);
      const MetricContext ctx = build_context(*obj);
      const std::vector<WeightedFrame> frames = replay_frames(*obj, trace, ctx);
      const SecantFrameReport rep =
          frames.empty() ? SecantFrameReport{} : secant_frame_report(frames.front());
      if (!rep.applicable || !rep.pass) s.failures += 1;
    }
    suites.push_back(std::move(s));
  }
  return suites;
}

}  // namespace qnlab

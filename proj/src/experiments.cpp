#include "psgla/experiments.h"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>

#include "psgla/constants.h"
#include "psgla/coupling.h"
#include "psgla/errors.h"
#include "psgla/io.h"
#include "psgla/metrics.h"
#include "psgla/random.h"
#include "psgla/sampler.h"

namespace psgla {

namespace {

constexpr const char* kSeedRule =
    "chain i uses mix64(mix64(seed) ^ i); sub-streams use derive_seed(seed, stream)";

struct Problem {
  ConvexBody body;
  LossPtr loss;
};

Problem build_problem(const ExperimentConfig& c) {
  ConvexBody body = build_body(c.body);
  LossPtr loss = build_loss(c.loss, body);
  return {std::move(body), std::move(loss)};
}

TuneOptions tune_options(const TuneSpec& t) {
  TuneOptions o;
  o.epsilon = t.epsilon;
  o.lambda = t.lambda;
  o.delta = t.delta;
  o.max_steps = t.max_steps;
  return o;
}

double resolve_beta(const ExperimentConfig& c, const Problem& pr) {
  if (c.sampler.beta) return *c.sampler.beta;
  ProblemData p = problem_data(pr.body, *pr.loss, 1.0);
  return tune_parameters(p, tune_options(c.tune)).beta;
}

double resolve_eta(const ExperimentConfig& c, const ProblemData& p, long steps) {
  if (c.sampler.eta) return *c.sampler.eta;
  if (steps < 4) throw ConfigError("sampler.eta", "\"auto\" requires at least 4 steps");
  return eta_schedule_log(steps, contraction_constants(p).log_a);
}

std::string prepare(const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  return out_dir;
}

std::string file(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

std::string config_comment(const ExperimentConfig& c) { return "config=" + to_json(c).dump(); }

void write_manifest(const std::string& dir, const ExperimentConfig& c, Json resolved,
                    const std::vector<std::string>& outputs) {
  Json m;
  m["config"] = to_json(c);
  m["seed"] = c.seed;
  m["seed_rule"] = kSeedRule;
  m["resolved"] = std::move(resolved);
  m["outputs"] = outputs;
  write_json(file(dir, "manifest.json"), m);
}

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  void write(const std::string& dir) const {
    const double s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    Json t;
    t["wall_seconds"] = s;
    write_json(file(dir, "timing.json"), t);
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

SamplerConfig sampler_config(const ExperimentConfig& c, double eta, double beta, long steps,
                             int chains, std::uint64_t seed) {
  SamplerConfig s;
  s.eta = eta;
  s.beta = beta;
  s.steps = steps;
  s.seed = seed;
  s.substeps = c.sampler.substeps;
  s.chains = chains;
  s.init = c.sampler.init == "uniform" ? InitKind::kUniform : InitKind::kOrigin;
  s.x0 = c.sampler.x0;
  return s;
}

// Terminal states; substeps > 1 refines each unit of time with the projected
// Euler scheme of the continuous-time interpolation.
Batch terminal_states(const Problem& pr, const SamplerConfig& s) {
  if (s.substeps == 1) return run_ensemble(pr.body, *pr.loss, s);
  s.validate();
  Batch initial(s.chains, pr.body.dim());
  const std::uint64_t init_seed = derive_seed(s.seed, streams::kInitial);
  for (int i = 0; i < s.chains; ++i) {
    RandomStream rng(chain_seed(init_seed, static_cast<std::uint64_t>(i)));
    initial.row(i) = initial_state(pr.body, s, rng).transpose();
  }
  EulerOptions e;
  e.eta = s.eta;
  e.beta = s.beta;
  e.horizon = static_cast<double>(s.steps);
  e.substeps = s.substeps;
  LossPtr loss = pr.loss;
  StochasticDrift drift(loss, s.eta);
  return euler_ensemble(pr.body, drift, e, initial, s.seed);
}

Json estimate_json(const Estimate& e) {
  return Json{{"value", e.value}, {"ci_lo", e.ci_lo}, {"ci_hi", e.ci_hi}};
}

Json problem_json(const ProblemData& p) {
  Json j;
  j["n"] = p.n;
  j["D"] = p.D;
  j["r"] = p.r;
  j["l"] = p.lipschitz;
  j["u"] = p.smoothness;
  j["sigma"] = p.sigma;
  j["beta"] = p.beta;
  return j;
}

Json constants_json(const TheoryConstants& tc) {
  const ContractionConstants& cc = tc.contraction;
  Json j;
  j["regime"] = cc.regime == DampingRegime::kUnderdamped ? "underdamped" : "overdamped";
  j["a"] = finite_or_null(cc.a);
  j["log_a"] = cc.log_a;
  j["omega_N"] = finite_or_null(cc.omega);
  j["xi"] = finite_or_null(cc.xi);
  j["c_W1mult"] = finite_or_null(cc.c_w1mult);
  j["log_c_W1mult"] = cc.log_c_w1mult;
  j["c_globalContract"] = finite_or_null(tc.c_global_contract);
  j["log_c_globalContract"] = tc.log_c_global_contract;
  j["c_AtoC"] = finite_or_null(tc.c_a_to_c);
  j["log_c_AtoC"] = tc.log_c_a_to_c;
  j["c_CtoM"] = finite_or_null(tc.c_c_to_m);
  j["log_c_CtoM"] = finite_or_null(tc.log_c_c_to_m);
  j["c_globalConst"] = finite_or_null(tc.c_global_const);
  j["log_c_globalConst"] = tc.log_c_global_const;
  j["c_tanakaRt"] = tc.discretization.c_tanaka_rt;
  j["c_tanakaConst"] = tc.discretization.c_tanaka_const;
  j["c_aveTanakaLin"] = tc.averaging.c_ave_lin;
  j["c_aveTanakaRoot"] = tc.averaging.c_ave_root;
  j["c_aveTanakaTQ"] = tc.averaging.c_ave_tq;
  j["c_subOpt"] = tc.c_subopt;
  return j;
}

// W1 against ground truth: exact with bootstrap CI in 1D, sliced (no CI) in 2D.
Estimate w1_against(const Batch& a, const Batch& truth, int bootstrap, int directions,
                    std::uint64_t seed) {
  if (a.cols() == 1) return w1_bootstrap(Vector(a.col(0)), Vector(truth.col(0)), bootstrap, seed);
  const double v = w1_sliced(a, truth, directions, seed);
  return {v, v, v};
}

}  // namespace

int cmd_sample(const ExperimentConfig& c, const std::string& out_dir) {
  Timer timer;
  const std::string dir = prepare(out_dir);
  const Problem pr = build_problem(c);
  const double beta = resolve_beta(c, pr);
  const ProblemData p = problem_data(pr.body, *pr.loss, beta);
  const double eta = resolve_eta(c, p, c.sampler.steps);
  const SamplerConfig s = sampler_config(c, eta, beta, c.sampler.steps, c.sampler.chains, c.seed);
  const Batch terminal = terminal_states(pr, s);
  write_batch_csv(file(dir, "terminal.csv"), config_comment(c), terminal);
  std::vector<std::string> outputs{"terminal.csv"};
  if (s.chains == 1 && s.substeps == 1) {
    write_trajectory_csv(file(dir, "trajectory.csv"), config_comment(c),
                         run_chain(pr.body, *pr.loss, s));
    outputs.push_back("trajectory.csv");
  }
  write_manifest(dir, c, Json{{"eta", eta}, {"beta", beta}, {"steps", s.steps}, {"chains", s.chains}},
                 outputs);
  timer.write(dir);
  return kExitOk;
}

int cmd_converge(const ExperimentConfig& c, const std::string& out_dir) {
  Timer timer;
  const std::string dir = prepare(out_dir);
  const Problem pr = build_problem(c);
  const int n = pr.body.dim();
  if (n > 2) throw ConfigError("body", "converge needs a 1D or 2D problem");
  const double beta = resolve_beta(c, pr);
  const ProblemData p = problem_data(pr.body, *pr.loss, beta);
  const TheoryConstants tc = composite_constants(p);
  const ConvergeSpec& cv = c.converge;

  GibbsSample truth;
  GibbsSample null_batch;
  try {
    truth = gibbs_rejection_sample(pr.body, *pr.loss, beta, cv.ground_truth,
                                   derive_seed(c.seed, streams::kGroundTruth));
    null_batch = gibbs_rejection_sample(pr.body, *pr.loss, beta, c.sampler.chains,
                                        derive_seed(c.seed, streams::kNullBatch));
  } catch (const TemperatureError& e) {
    throw TemperatureError(std::string(e.what()) + " (converge ground truth at beta = " +
                           format_double(beta) + ")");
  }
  const Estimate null_w1 =
      w1_against(null_batch.samples, truth.samples, cv.bootstrap, cv.directions, c.seed);

  const std::size_t K = cv.checkpoints.size();
  Matrix table(static_cast<Eigen::Index>(K), 7);
  std::vector<double> Ts, w1s;
  Json rows = Json::array();
  bool bound_above = true;
  for (std::size_t i = 0; i < K; ++i) {
    const long T = cv.checkpoints[i];
    const double eta = resolve_eta(c, p, T);
    const std::uint64_t seed = derive_seed(c.seed, streams::kCheckpointBase + i);
    const SamplerConfig s = sampler_config(c, eta, beta, T, c.sampler.chains, seed);
    const Batch terminal = terminal_states(pr, s);
    const Estimate w1 = w1_against(terminal, truth.samples, cv.bootstrap, cv.directions, seed);
    const double log_bound = eta <= 0.5 ? log_wasserstein_bound(tc.log_c_global_contract,
                                                                tc.log_c_global_const, eta,
                                                                tc.contraction.log_a, T)
                                        : std::numeric_limits<double>::quiet_NaN();
    const bool above = std::isnan(log_bound) || !(w1.value > 0.0) || log_bound >= std::log(w1.value);
    bound_above = bound_above && above;
    table.row(static_cast<Eigen::Index>(i)) << static_cast<double>(T), eta, w1.value, w1.ci_lo,
        w1.ci_hi, std::exp(log_bound), log_bound;
    Ts.push_back(static_cast<double>(T));
    w1s.push_back(w1.value);
    rows.push_back(Json{{"T", T},
                        {"eta", eta},
                        {"w1", estimate_json(w1)},
                        {"bound", finite_or_null(std::exp(log_bound))},
                        {"log_bound", finite_or_null(log_bound)},
                        {"bound_above", above}});
  }
  write_csv(file(dir, "checkpoints.csv"), config_comment(c),
            {"T", "eta", "w1", "ci_lo", "ci_hi", "bound", "log_bound"}, table);

  bool monotone = true;
  for (std::size_t i = 0; i + 1 < K; ++i) monotone = monotone && table(i + 1, 2) <= table(i, 4);

  Json fit_json = nullptr;
  bool exponent_ok = true;
  const bool fittable = K >= 4 && Ts.back() / Ts.front() >= 100.0;
  if (fittable) {
    const RateFit fit = rate_fit(Ts, w1s, null_w1.value > 0.0 ? null_w1.value : 0.0);
    exponent_ok = fit.power.slope <= cv.max_exponent;
    fit_json = Json{{"exponent", fit.power.slope},
                    {"intercept", fit.power.intercept},
                    {"stderr", fit.power.slope_stderr},
                    {"log_factor_slope", fit.log_factor.slope},
                    {"log_factor_intercept", fit.log_factor.intercept},
                    {"log_factor_stderr", fit.log_factor.slope_stderr},
                    {"clipped", fit.clipped}};
  }
  const bool pass = monotone && exponent_ok && bound_above;

  Json report;
  report["problem"] = problem_json(p);
  report["constants"] = constants_json(tc);
  report["ground_truth"] = Json{{"samples", cv.ground_truth},
                                {"proposals", truth.proposals},
                                {"acceptance_rate", truth.acceptance_rate}};
  report["null_w1"] = estimate_json(null_w1);
  report["w1_method"] = n == 1 ? "exact_1d" : "sliced";
  report["checkpoints"] = rows;
  report["rate_fit"] = fit_json;
  report["criteria"] = Json{{"monotone_within_ci", monotone},
                            {"exponent_at_most", cv.max_exponent},
                            {"exponent_ok", fittable ? Json(exponent_ok) : Json(nullptr)},
                            {"bound_above_all", bound_above},
                            {"pass", pass}};
  write_json(file(dir, "report.json"), report);
  write_manifest(dir, c, Json{{"beta", beta}, {"chains", c.sampler.chains}},
                 {"checkpoints.csv", "report.json"});
  timer.write(dir);
  return pass ? kExitOk : kExitStatistical;
}

int cmd_couple(const ExperimentConfig& c, const std::string& out_dir) {
  Timer timer;
  const std::string dir = prepare(out_dir);
  const Problem pr = build_problem(c);
  const double beta = resolve_beta(c, pr);
  const ProblemData p = problem_data(pr.body, *pr.loss, beta);
  const ContractionConstants cc = contraction_constants(p);
  const CoupleSpec& cs = c.couple;
  const double a = cs.a ? *cs.a : cc.a;
  const double eta = resolve_eta(c, p, cs.horizon);
  const OscillatorSolution sol = OscillatorSolution::from_contraction(cc, p.D);

  SupermartingaleOptions opt;
  opt.kind = cs.kind == "reflection" ? CouplingKind::kReflection : CouplingKind::kReflectionMaximal;
  opt.grid_points = cs.grid_points;
  opt.bootstrap = cs.bootstrap;
  opt.confidence = cs.confidence;
  opt.identical_start = cs.identical_start;
  opt.keep_distances = cs.keep_distances;
  const SupermartingaleReport rep =
      supermartingale_check(pr.body, *pr.loss, sol, eta, beta, a, cs.replicates, cs.horizon,
                            derive_seed(c.seed, streams::kCoupling), opt);

  const double d0 = rep.mean_distance.front(), dT = rep.mean_distance.back();
  const bool ratio_ok = !cs.distance_ratio || d0 == 0.0 || dT < *cs.distance_ratio * d0;
  const bool pass = rep.pass && ratio_ok;

  const int bins = 20;
  Matrix hist(bins, 3);
  long never = 0;
  for (int b = 0; b < bins; ++b) {
    hist(b, 0) = static_cast<double>(cs.horizon) * b / bins;
    hist(b, 1) = static_cast<double>(cs.horizon) * (b + 1) / bins;
    hist(b, 2) = 0.0;
  }
  for (long t : rep.coupling_times) {
    if (t < 0) {
      ++never;
      continue;
    }
    const int b = std::min(bins - 1, static_cast<int>(static_cast<double>(t) * bins / cs.horizon));
    hist(b, 2) += 1.0;
  }
  write_csv(file(dir, "coupling_times.csv"), config_comment(c), {"t_lo", "t_hi", "count"}, hist);
  std::vector<std::string> outputs{"report.json", "coupling_times.csv"};
  if (cs.keep_distances) {
    std::vector<std::string> header;
    for (long t : rep.grid) header.push_back("t" + std::to_string(t));
    write_csv(file(dir, "distances.csv"), config_comment(c), header, rep.distances);
    outputs.push_back("distances.csv");
  }

  Json grid = Json::array();
  for (std::size_t j = 0; j < rep.grid.size(); ++j) {
    grid.push_back(Json{{"t", rep.grid[j]},
                        {"mean_M", rep.mean_m[j]},
                        {"ci_lo", rep.ci_lo[j]},
                        {"ci_hi", rep.ci_hi[j]},
                        {"mean_distance", rep.mean_distance[j]}});
  }
  Json report;
  report["problem"] = problem_json(p);
  report["eta"] = eta;
  report["beta"] = beta;
  report["a"] = a;
  report["omega_N"] = finite_or_null(sol.omega());
  report["xi"] = finite_or_null(sol.xi());
  report["coupling"] = cs.kind;
  report["replicates"] = rep.replicates;
  report["horizon"] = rep.horizon;
  report["grid"] = grid;
  report["critical_z"] = rep.critical_z;
  report["worst_excess"] = rep.worst_excess;
  report["worst_pair"] = Json::array({rep.worst_t1, rep.worst_t2});
  report["never_coupled"] = never;
  report["criteria"] = Json{{"supermartingale", rep.pass},
                            {"distance_ratio", finite_or_null(d0 > 0.0 ? dT / d0 : 0.0)},
                            {"distance_ratio_limit", cs.distance_ratio ? Json(*cs.distance_ratio)
                                                                       : Json(nullptr)},
                            {"distance_ratio_ok", ratio_ok},
                            {"pass", pass}};
  write_json(file(dir, "report.json"), report);
  write_manifest(dir, c, Json{{"eta", eta}, {"beta", beta}, {"a", a}}, outputs);
  timer.write(dir);
  return pass ? kExitOk : kExitStatistical;
}

int cmd_constants(const ExperimentConfig& c, const std::string& out_dir) {
  Timer timer;
  const std::string dir = prepare(out_dir);
  const Problem pr = build_problem(c);
  const double beta = resolve_beta(c, pr);
  ProblemData p = problem_data(pr.body, *pr.loss, beta);
  const TheoryConstants tc = composite_constants(p);
  Json out;
  out["problem"] = problem_json(p);
  out["constants"] = constants_json(tc);
  write_json(file(dir, "constants.json"), out);
  std::cout << out.dump(2) << '\n';
  write_manifest(dir, c, Json{{"beta", beta}}, {"constants.json"});
  timer.write(dir);
  return kExitOk;
}

int cmd_tune(const ExperimentConfig& c, const std::string& out_dir) {
  Timer timer;
  const std::string dir = prepare(out_dir);
  const Problem pr = build_problem(c);
  const ProblemData p = problem_data(pr.body, *pr.loss, 1.0);
  const TuneOptions opt = tune_options(c.tune);
  const TuneResult t = tune_parameters(p, opt);

  Json out;
  out["problem"] = problem_json(p);
  out["epsilon"] = opt.epsilon;
  out["lambda"] = opt.lambda;
  out["delta"] = opt.delta;
  out["rho"] = opt.rho();
  out["zeta"] = opt.zeta();
  out["beta"] = t.beta;
  out["log_T"] = t.log_T;
  out["T"] = t.T;
  out["T_saturated"] = t.T_saturated;
  out["eta"] = t.eta;
  out["T_run"] = t.T_run;
  out["eta_run"] = t.eta_run;
  out["log_a"] = t.log_a;
  out["c_subOpt"] = t.c_subopt;
  out["predicted"] = Json{{"log_term", t.log_term},
                          {"w1_term", finite_or_null(t.w1_bound_term)},
                          {"log_w1_term", t.log_w1_bound_term}};
  out["constants"] = constants_json(t.constants);
  std::vector<std::string> outputs{"tune.json"};
  bool pass = true;
  if (c.tune.run) {
    if (pr.body.dim() > 2) throw ConfigError("tune.run", "the verification run needs a 1D or 2D problem");
    const std::uint64_t seed = derive_seed(c.seed, streams::kCheckpointBase);
    const SamplerConfig s = sampler_config(c, t.eta_run, t.beta, t.T_run, c.tune.chains, seed);
    const Batch terminal = terminal_states(pr, s);
    write_batch_csv(file(dir, "terminal.csv"), config_comment(c), terminal);
    outputs.push_back("terminal.csv");
    const GibbsSample truth = gibbs_rejection_sample(pr.body, *pr.loss, t.beta, c.tune.ground_truth,
                                                     derive_seed(c.seed, streams::kGroundTruth));
    const Estimate w1 = w1_against(terminal, truth.samples, c.tune.bootstrap, 64, seed);
    const Estimate sub = suboptimality_estimate(*pr.loss, terminal, c.tune.bootstrap, seed);
    ProblemData at = p;
    at.beta = t.beta;
    const double bound = suboptimality_bound(at, t.c_subopt, w1.value);
    const bool within_cap = !t.T_saturated && t.T <= c.tune.max_steps;
    const bool bound_ok = sub.value <= bound;
    const bool eps_ok = !within_cap || sub.value <= opt.epsilon;
    pass = bound_ok && eps_ok;
    out["run"] = Json{{"chains", c.tune.chains},
                      {"T", t.T_run},
                      {"eta", t.eta_run},
                      {"beta", t.beta},
                      {"w1", estimate_json(w1)},
                      {"suboptimality", estimate_json(sub)},
                      {"bound", bound},
                      {"theory_T_within_cap", within_cap},
                      {"bound_ok", bound_ok},
                      {"epsilon_ok", within_cap ? Json(eps_ok) : Json(nullptr)},
                      {"ground_truth_acceptance", truth.acceptance_rate},
                      {"pass", pass}};
  }
  write_json(file(dir, "tune.json"), out);
  write_manifest(dir, c, Json{{"beta", t.beta}, {"T", t.T_run}, {"eta", t.eta_run}}, outputs);
  timer.write(dir);
  return pass ? kExitOk : kExitStatistical;
}

int run_experiment(const ExperimentConfig& c, const std::string& out_dir) {
  if (c.experiment == "sample") return cmd_sample(c, out_dir);
  if (c.experiment == "converge") return cmd_converge(c, out_dir);
  if (c.experiment == "couple") return cmd_couple(c, out_dir);
  if (c.experiment == "constants") return cmd_constants(c, out_dir);
  if (c.experiment == "tune") return cmd_tune(c, out_dir);
  throw ConfigError("experiment", "unknown experiment " + c.experiment);
}

}  // namespace psgla

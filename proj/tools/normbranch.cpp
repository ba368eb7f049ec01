// normbranch: command-line driver. Every subcommand reads a JSON config,
// runs one module and prints a summary JSON; tabular data goes to CSV.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <iostream>

#include "cli_support.hpp"
#include "normbranch/branch.hpp"
#include "normbranch/pass.hpp"
#include "normbranch/profile.hpp"
#include "normbranch/shooter.hpp"
#include "normbranch/varflow.hpp"
#include "normbranch/verify.hpp"

using namespace normbranch;
using namespace normbranch::cli;
using nlohmann::json;

namespace {

struct Output {
  std::string status = "ok";
  json results = json::array();
  json verification = json::object();
  std::map<std::string, std::string> files;
};

ShootOptions shoot_options(const json& block) {
  ShootOptions o;
  o.shot.rtol = get_number(block, "rtol", o.shot.rtol);
  o.shot.atol = get_number(block, "atol", o.shot.atol);
  if (auto h = get_optional_number(block, "center_hint")) o.centerHint = *h;
  return o;
}

double required(const json& block, const std::string& key) {
  auto v = get_optional_number(block, key);
  if (!v) throw ConfigError("missing \"command." + key + "\"");
  return *v;
}

std::string profile_csv(const RadialProfile& profile) {
  std::string s = "r,u,du\n";
  for (const auto& x : profile) s += csv_line({x.r, x.u, x.du});
  return s;
}

std::string field_csv(const Field& u) {
  std::string s = "r,u\n";
  for (int i = 0; i < u.size(); ++i) s += csv_line({u.mesh().node(i), u[i]});
  s += csv_line({u.mesh().radius(), 0.0});
  return s;
}

json identity_json(const Field& u, double omega, const ProblemSpec& spec) {
  const IdentityTerms t = identity_terms(u, spec);
  const double poh = pohozaev_residual(t, omega, spec), neh = nehari_residual(t, omega, spec);
  return {{"pohozaev_residual", poh},
          {"nehari_residual", neh},
          {"identities_pass", poh <= kIdentityTolerance && neh <= kIdentityTolerance}};
}

json identity_summary(const std::vector<BranchPoint>& points) {
  double poh = 0.0, neh = 0.0;
  for (const auto& p : points) {
    poh = std::max(poh, p.pohozaevResidual);
    neh = std::max(neh, p.nehariResidual);
  }
  return {{"max_pohozaev_residual", poh},
          {"max_nehari_residual", neh},
          {"identities_pass", poh <= kIdentityTolerance && neh <= kIdentityTolerance}};
}

Branch branch_from(const RunConfig& run) {
  const json& b = run.block;
  const int samples = get_int(b, "samples", 101);
  if (samples < 5) throw ConfigError("\"command.samples\" must be >= 5");
  const double offset = get_number(b, "window_offset", 0.01);
  if (!(offset >= 0.0 && offset < 0.5)) throw ConfigError("\"command.window_offset\" must lie in [0, 0.5)");
  auto w = offset_window(admissible_window(run.spec, get_number(b, "rho", 1.0)), offset);
  w.first = get_number(b, "lambda_min", w.first);
  w.second = get_number(b, "lambda_max", w.second);
  if (!(w.first < w.second)) throw ConfigError("need lambda_min < lambda_max");
  StepPolicy policy;
  policy.initialStep = 1.0 / (samples - 1);
  return trace_branch(run.spec, w.first, w.second, policy);
}

json branch_json(const Branch& b) {
  json gaps = json::array();
  for (const auto& [lo, hi] : b.gaps) gaps.push_back({lo, hi});
  return {{"points", b.points.size()},
          {"lambda_min", b.lambdaMin},
          {"lambda_max", b.lambdaMax},
          {"low_status", to_string(b.lowStatus)},
          {"high_status", to_string(b.highStatus)},
          {"max_rho", b.points[b.max_index()].rho},
          {"gaps", gaps},
          {"shots", b.shots}};
}

Output cmd_solve(const RunConfig& run, bool withReport) {
  Output out;
  const RadialSolution sol = shoot_ground_state(required(run.block, "omega"), run.spec, shoot_options(run.block));
  const BranchPoint p = make_branch_point(sol);
  out.results.push_back(point_json(p));
  if (withReport) {
    const VerificationReport rep = verify_solution(sol, get_number(run.block, "strip_width", 0.0));
    out.verification = rep.to_json();
  } else {
    out.verification = identity_summary({p});
    if (auto f = get_string(run.block, "profile_csv")) out.files[*f] = profile_csv(sol.profile);
  }
  return out;
}

Output cmd_branch(const RunConfig& run) {
  Output out;
  const Branch b = branch_from(run);
  out.results.push_back(branch_json(b));
  out.verification = identity_summary(b.points);
  if (auto f = get_string(run.block, "csv")) out.files[*f] = branch_csv(b.points);
  return out;
}

Output cmd_rho_star(const RunConfig& run) {
  Output out;
  const Branch b = branch_from(run);
  const RhoStar r = find_rho_star(b);
  json j = {{"rho_star", r.rhoStar},
            {"lambda_star", r.lambdaStar},
            {"interpolated_lambda", r.interpolatedLambda},
            {"point", point_json(r.point)},
            {"branch", branch_json(b)}};
  out.results.push_back(j);
  out.verification = identity_summary({r.point});
  if (auto f = get_string(run.block, "csv")) out.files[*f] = branch_csv(b.points);
  return out;
}

Output cmd_normalized(const RunConfig& run) {
  Output out;
  const double rho = required(run.block, "rho");
  if (!(rho > 0.0)) throw ConfigError("\"command.rho\" must be > 0");
  const Branch b = branch_from(run);
  std::optional<RhoStar> star;
  try {
    star = find_rho_star(b);
  } catch (const SolverError& e) {
    if (e.kind() != ErrorKind::NoInteriorMax) throw;
  }
  const NormalizedSet set = solve_normalized(b, rho, star);
  for (const auto& p : set.solutions) out.results.push_back(point_json(p));
  out.verification = identity_summary(set.solutions);
  out.verification["count"] = set.solutions.size();
  out.verification["count_is_lower_bound"] = set.countIsLowerBound;
  if (star) out.verification["rho_star"] = star->rhoStar;
  if (set.solutions.empty()) out.status = "empty";
  if (auto f = get_string(run.block, "csv")) out.files[*f] = branch_csv(set.solutions);
  return out;
}

std::shared_ptr<const Mesh> mesh_for(const RunConfig& run, int intervals) {
  if (intervals < 16 || intervals % 2) throw ConfigError("mesh intervals must be even and >= 16");
  return std::make_shared<const Mesh>(run.spec.dimension, run.spec.radius, intervals);
}

Output cmd_minimize(const RunConfig& run) {
  Output out;
  const json& b = run.block;
  const double rho = required(b, "rho");
  if (!(rho > 0.0)) throw ConfigError("\"command.rho\" must be > 0");
  const auto mesh = mesh_for(run, get_int(b, "intervals", 2000));
  const int finalIntervals = get_int(b, "final_intervals", 32000);
  FlowConfig fc;
  fc.tolerance = get_number(b, "tolerance", fc.tolerance);
  fc.alpha = get_optional_number(b, "alpha");
  const FlowResult fr =
      flow_to_minimizer(run.spec, rho, sample_field(mesh, first_eigenfunction(run.spec.dimension, run.spec.radius)), fc);
  Field u = fr.u;
  double omega = fr.omega, energy = fr.energy;
  int newtonSteps = 0;
  if (finalIntervals > 0) {
    const SaddleResult s = refine_saddle(resample(fr.u, mesh_for(run, finalIntervals)), fr.omega, run.spec, rho);
    u = s.u;
    omega = s.omega;
    energy = s.energy;
    newtonSteps = s.newtonSteps;
  }
  out.results.push_back({{"energy", energy},
                         {"omega", omega},
                         {"rho", u.mass()},
                         {"grad_norm_sq", u.grad_norm_sq()},
                         {"flow_iterations", fr.iterations},
                         {"flow_energy", fr.energy},
                         {"newton_steps", newtonSteps},
                         {"intervals", u.mesh().intervals()},
                         {"alpha", fr.alpha},
                         {"in_alpha_interior", fr.inAlphaInterior},
                         {"boundary_level", std::isfinite(fr.boundaryLevel) ? json(fr.boundaryLevel) : json(nullptr)},
                         {"boundary_certificate", fr.boundaryCertificate},
                         {"positive", fr.positive}});
  out.verification = identity_json(u, omega, run.spec);
  out.verification["multiplier_window"] = multiplier_window(omega, rho, run.spec).pass;
  if (auto f = get_string(b, "profile_csv")) out.files[*f] = field_csv(u);
  return out;
}

Output cmd_pass(const RunConfig& run) {
  Output out;
  const json& b = run.block;
  const double rho = required(b, "rho");
  if (!(rho > 0.0)) throw ConfigError("\"command.rho\" must be > 0");
  PassConfig pc;
  pc.intervals = get_int(b, "intervals", pc.intervals);
  mesh_for(run, pc.intervals);
  pc.nodes = get_int(b, "nodes", pc.nodes);
  if (pc.nodes < 5) throw ConfigError("\"command.nodes\" must be >= 5");
  pc.finalIntervals = get_int(b, "final_intervals", 32000);
  if (pc.finalIntervals) mesh_for(run, pc.finalIntervals);
  pc.eps0 = get_optional_number(b, "eps0");
  pc.alpha = get_optional_number(b, "alpha");
  pc.cutoff.innerFraction = get_number(b, "cutoff_inner", pc.cutoff.innerFraction);
  pc.cutoff.outerFraction = get_number(b, "cutoff_outer", pc.cutoff.outerFraction);
  try {
    pc.cutoff.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const PassResult r = mountain_pass(run.spec, rho, pc);
  const SaddleResult& s = r.saddle;
  out.results.push_back({{"energy", s.energy},
                         {"omega", s.omega},
                         {"rho", s.u.mass()},
                         {"newton_steps", s.newtonSteps},
                         {"newton_residual", s.newtonResidual},
                         {"positive", s.positive},
                         {"intervals", s.u.mesh().intervals()},
                         {"eps0", r.initial.eps0},
                         {"alpha", r.initial.alpha},
                         {"initial_max", r.initialMax},
                         {"relaxed_max", r.relaxedMax},
                         {"string_iterations", r.stringReport.iterations},
                         {"string_converged", r.stringReport.converged},
                         {"lower_bound", r.bounds.lower},
                         {"upper_bound", r.bounds.upper},
                         {"fitted_C", r.bounds.upperConstant},
                         {"sandwich", r.sandwich}});
  out.verification = identity_json(s.u, s.omega, run.spec);
  out.verification["multiplier_window"] = multiplier_window(s.omega, rho, run.spec).pass;
  if (b.contains("eta_grid")) {
    PassConfig coarse = pc;
    coarse.finalIntervals = 0;
    const EtaScan scan = level_vs_eta(run.spec, rho, get_numbers(b, "eta_grid", {}), coarse);
    json levels = json::array();
    for (const auto& lv : scan.levels)
      levels.push_back({{"eta", lv.eta}, {"level", lv.level}, {"upper_bound", lv.upperBound}, {"ok", lv.ok}, {"error", lv.error}});
    out.results.push_back({{"levels", levels},
                           {"non_increasing", scan.nonIncreasing},
                           {"worst_increase", scan.worstIncrease},
                           {"left_limit_estimate", scan.leftLimitEstimate},
                           {"left_limit_gap", scan.leftLimitGap},
                           {"discretization_tolerance", scan.discretizationTolerance},
                           {"left_continuous", scan.leftContinuous}});
  }
  if (auto f = get_string(b, "profile_csv")) out.files[*f] = field_csv(s.u);
  return out;
}

Output cmd_bubbles(const RunConfig& run) {
  Output out;
  const auto eps = get_numbers(run.block, "eps", {0.04, 0.02, 0.01, 0.005});
  const AsymptoticsFit fit = bubble_asymptotics_fit(run.spec.dimension, eps, run.spec.radius);
  std::string csv = "eps,grad_norm_sq,crit_norm,mass_sq\n";
  for (std::size_t i = 0; i < eps.size(); ++i) csv += csv_line({eps[i], fit.gradNormSq[i], fit.critNorm[i], fit.massSq[i]});
  auto slope = [](const SlopeFit& s) {
    return json{{"slope", s.slope}, {"expected", s.expected}, {"residual", s.residual}, {"pass", s.pass}};
  };
  json j = {{"gradient_remainder", slope(fit.gradientRemainder)},
            {"critical_remainder", slope(fit.criticalRemainder)},
            {"mass", slope(fit.mass)}};
  if (run.spec.dimension == 4) {
    j["log_model_residual"] = fit.logModelResidual;
    j["power_model_residual"] = fit.powerModelResidual;
    j["log_model_wins"] = fit.logModelWins;
  }
  out.results.push_back(j);
  if (auto f = get_string(run.block, "csv")) out.files[*f] = csv;
  return out;
}

Output cmd_theta(const RunConfig& run) {
  Output out;
  const int N = run.spec.dimension;
  if (N < 3) throw ConfigError("theta needs dimension >= 3");
  std::vector<double> fr;
  for (int i = 0; i < 10; ++i) fr.push_back(0.02 + 0.96 * i / 9.0);
  fr = get_numbers(run.block, "eps_fractions", fr);
  for (double f : fr)
    if (!(f > 0.0 && f < 1.0)) throw ConfigError("\"command.eps_fractions\" must lie in (0, 1)");
  const double S = sobolev_constant(N);
  std::vector<double> eps;
  for (double f : fr) eps.push_back(f * S);
  MeshConfig mc;
  mc.intervals = get_int(run.block, "intervals", mc.intervals);
  mesh_for(run, mc.intervals);
  const auto pts = theta_curve(N, run.spec.radius, eps, mc);
  const double l1 = lambda1(N, run.spec.radius);
  std::string csv = "eps,eps_over_S,theta,theta_over_lambda1,iterations\n";
  bool monotone = true, allOk = true;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& t = pts[i];
    out.results.push_back({{"eps", t.eps}, {"theta", t.theta}, {"iterations", t.iterations}, {"converged", t.converged}, {"error", t.error}});
    csv += csv_line({t.eps, fr[i], t.theta, t.theta / l1, static_cast<double>(t.iterations)});
    allOk = allOk && t.converged;
    if (i > 0 && !(t.theta < pts[i - 1].theta)) monotone = false;
  }
  out.verification = {{"monotone_decreasing", monotone}, {"all_converged", allOk}, {"lambda1", l1}, {"sobolev", S}};
  if (!allOk) out.status = "failed";
  if (auto f = get_string(run.block, "csv")) out.files[*f] = csv;
  return out;
}

Output dispatch(const RunConfig& run) {
  if (run.command == "solve") return cmd_solve(run, false);
  if (run.command == "verify") return cmd_solve(run, true);
  if (run.command == "branch") return cmd_branch(run);
  if (run.command == "rho-star") return cmd_rho_star(run);
  if (run.command == "normalized") return cmd_normalized(run);
  if (run.command == "minimize") return cmd_minimize(run);
  if (run.command == "pass") return cmd_pass(run);
  if (run.command == "bubbles") return cmd_bubbles(run);
  if (run.command == "theta") return cmd_theta(run);
  throw ConfigError("unknown command " + run.command);
}

int exit_for(const SolverError& e, const std::string& command) {
  switch (e.kind()) {
    case ErrorKind::NoBracket:
    case ErrorKind::EmptyBranch:
    case ErrorKind::NoInteriorMax: return kExitEmpty;
    default: break;
  }
  (void)command;
  return kExitSolver;
}

std::string iso_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normalized solutions of -Δu + ωu = η(μu^{p-1} + u^{q-1}) on balls"};
  app.require_subcommand(1);
  std::string configPath, outPath;
  bool noCache = false;
  std::optional<double> omega, rho;
  std::optional<std::string> csv;
  app.set_version_flag("--version", kVersion);
  static const std::map<std::string, std::string> blurbs = {
      {"solve", "positive radial solution at a fixed omega"},
      {"verify", "solve, then run every certificate check"},
      {"branch", "trace rho(lambda) over a lambda window"},
      {"rho-star", "maximum of rho along the branch"},
      {"normalized", "all branch solutions with a prescribed mass"},
      {"minimize", "local minimizer on the mass sphere by constrained flow"},
      {"pass", "mountain-pass saddle on the mass sphere"},
      {"bubbles", "norms and slope fits of cut-off bubbles"},
      {"theta", "theta_eps curve on a grid of eps/S"},
  };
  for (const auto& [name, keys] : command_keys()) {
    auto* sub = app.add_subcommand(name, blurbs.at(name));
    sub->add_option("--config", configPath, "JSON config file")->required();
    sub->add_option("--out", outPath, "summary JSON path (default stdout)");
    sub->add_flag("--no-cache", noCache, "bypass the result cache");
    if (keys.count("omega")) sub->add_option("--omega", omega, "frequency ω (overrides command.omega)");
    if (keys.count("rho")) sub->add_option("--rho", rho, "mass ρ (overrides command.rho)");
    if (keys.count("csv")) sub->add_option("--csv", csv, "CSV output path (overrides command.csv)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  RunConfig run;
  std::string hash;
  try {
    json config = read_config_file(configPath);
    if (config.is_object()) {
      json& block = config["command"];
      if (block.is_null()) block = json::object();
      if (block.is_object()) {
        if (omega) block["omega"] = *omega;
        if (rho) block["rho"] = *rho;
        if (csv) block["csv"] = *csv;
      }
    }
    run = parse_config(config, command);
    hash = config_hash(run);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  auto emit = [&](const json& summary, const std::map<std::string, std::string>& files) {
    for (const auto& [path, content] : files) write_atomic(path, content);
    const std::string text = summary.dump(2) + "\n";
    if (outPath.empty()) std::cout << text;
    else write_atomic(outPath, text);
  };

  const auto dir = cache_dir();
  if (!noCache) {
    if (auto hit = cache_load(dir, hash); hit && hit->contains("summary")) {
      std::map<std::string, std::string> files;
      for (const auto& [k, v] : hit->value("files", json::object()).items()) files[k] = v.get<std::string>();
      emit(hit->at("summary"), files);
      return hit->value("exit_code", kExitOk);
    }
  }

  json summary = {{"command", command}, {"config_hash", hash}};
  int code = kExitOk;
  Output out;
  try {
    out = dispatch(run);
    if (out.status == "empty") code = kExitEmpty;
    if (out.status == "failed") code = kExitSolver;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SolverError& e) {
    code = exit_for(e, command);
    out.status = code == kExitEmpty ? "empty" : "failed";
    out.results = json::array({{{"error", to_string(e.kind())}, {"message", e.what()}}});
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  }
  summary["status"] = out.status;
  summary["results"] = out.results;
  summary["verification"] = out.verification;
  try {
    emit(summary, out.files);
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return kExitSolver;
  }
  if (!noCache) {
    json entry = {{"record", {{"config_hash", hash}, {"version", kVersion}, {"command", command}, {"created", iso_now()}}},
                  {"summary", summary},
                  {"exit_code", code},
                  {"files", out.files}};
    try {
      cache_store(dir, hash, entry);
    } catch (const std::exception& e) {
      std::cerr << "warning: cache write failed: " << e.what() << "\n";
    }
  }
  return code;
}

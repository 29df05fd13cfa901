#include "secbeam/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <Eigen/Core>

#include "secbeam/beampattern.hpp"

namespace secbeam {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  if (text == "inf" || text == "infinity") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": '" + text + "' is not a number");
  return v;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& text) {
  Int v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": '" + text + "' is not an integer");
  return v;
}

std::vector<double> parse_doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(parse_double(key, item));
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

DesignMode parse_mode(const std::string& text) {
  if (text == "precise") return DesignMode::Precise;
  if (text == "uncertain") return DesignMode::Uncertain;
  throw ConfigError("modes: unknown design mode '" + text + "'");
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_number(v[i]);
  return out;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

std::string design_label(double delta_deg) {
  return delta_deg == 0.0 ? std::string("precise") : "uncertain_" + format_number(delta_deg) + "deg";
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string trials_csv(const std::vector<TrialResult>& rows) {
  std::ostringstream o;
  o << "mode,p0_watts,gamma_b_db,gamma_s,delta_theta_deg,trial,seed,status,binding_family,iterations,"
       "solver_iterations,sinr_eve_linear,worst_sinr_eve_linear,min_user_sinr_linear,secrecy_rate_bits,"
       "worst_secrecy_rate_bits,max_rank1_defect,min_slack,power_error\n";
  for (const auto& r : rows) {
    o << to_string(r.mode) << ',' << format_number(r.power_budget) << ',' << format_number(r.gamma_b_db) << ','
      << format_number(r.gamma_s) << ',' << format_number(r.delta_theta_deg) << ',' << r.trial << ',' << r.seed
      << ',' << r.status << ',' << r.family << ',' << r.iterations << ',' << r.solver_iterations << ','
      << format_number(r.sinr_eve) << ',' << format_number(r.worst_sinr_eve) << ','
      << format_number(r.min_user_sinr) << ',' << format_number(r.secrecy_rate) << ','
      << format_number(r.worst_secrecy_rate) << ',' << format_number(r.max_rank1_defect) << ','
      << format_number(r.min_slack) << ',' << format_number(r.power_error) << '\n';
  }
  return o.str();
}

double secrecy_or_nan(const TrialResult& r) {
  return r.status == "ok" ? r.secrecy_rate : std::numeric_limits<double>::quiet_NaN();
}

struct Task {
  DesignMode mode;
  double p0, gamma_b_db, gamma_s, delta_deg;
  int trial, sweep;
};

std::vector<TrialResult> run_tasks(const ExperimentConfig& cfg, const std::vector<Task>& tasks, int jobs,
                                   std::vector<DesignSolution>* solutions = nullptr) {
  std::vector<TrialResult> out(tasks.size());
  if (solutions) solutions->assign(tasks.size(), DesignSolution{});
  parallel_for(static_cast<int>(tasks.size()), jobs, [&](int i) {
    const auto& t = tasks[static_cast<std::size_t>(i)];
    DesignSolution* sol = solutions ? &(*solutions)[static_cast<std::size_t>(i)] : nullptr;
    out[static_cast<std::size_t>(i)] =
        run_design(cfg, t.mode, t.p0, t.gamma_b_db, t.gamma_s, t.delta_deg, t.trial, t.sweep, sol);
  });
  return out;
}

}  // namespace

const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::Fig2: return "fig2";
    case Experiment::Fig3: return "fig3";
    case Experiment::Fig4: return "fig4";
    case Experiment::Fig5: return "fig5";
    case Experiment::Custom: return "custom";
  }
  return "unknown";
}

Experiment parse_experiment(const std::string& name) {
  for (auto e : {Experiment::Fig2, Experiment::Fig3, Experiment::Fig4, Experiment::Fig5, Experiment::Custom}) {
    if (name == to_string(e)) return e;
  }
  throw ConfigError("experiment: unknown id '" + name + "' (fig2, fig3, fig4, fig5, custom)");
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_number: conversion failed");
  return std::string(buf, ptr);
}

void ExperimentConfig::validate() const {
  require(n_antennas >= 2, "n_antennas: need at least 2 antennas");
  require(n_users >= 1, "n_users: need at least one user");
  require(antenna_spacing > 0.0, "antenna_spacing: must be positive");
  require(frame_length >= 1, "frame_length: must be >= 1");
  require(theta0_deg > -90.0 && theta0_deg < 90.0, "theta0_deg: must lie in (-90, 90)");
  require(!delta_theta_deg.empty(), "delta_theta_deg: sweep is empty");
  for (double d : delta_theta_deg) {
    require(d >= 0.0 && std::isfinite(d), "delta_theta_deg: values must be >= 0");
    require(theta0_deg - d >= -90.0 && theta0_deg + d <= 90.0, "delta_theta_deg: interval leaves [-90, 90]");
  }
  require(desired_halfwidth_deg > 0.0, "desired_halfwidth_deg: must be positive");
  require(noise_power > 0.0 && std::isfinite(noise_power), "noise_power: must be positive");
  require(target_gain_power > 0.0 && std::isfinite(target_gain_power), "target_gain_power: must be positive");
  require(!power_budget.empty(), "power_budget: sweep is empty");
  for (double p : power_budget) require(p > 0.0 && std::isfinite(p), "power_budget: values must be positive");
  require(!gamma_b_db.empty(), "gamma_b_db: sweep is empty");
  for (double g : gamma_b_db) require(std::isfinite(g), "gamma_b_db: values must be finite");
  require(gamma_bp >= 0.0, "gamma_bp: must be >= 0 (inf disables the bound)");
  require(!gamma_s.empty(), "gamma_s: sweep is empty");
  for (double g : gamma_s) require(std::isfinite(g), "gamma_s: values must be finite");
  require(ripple > 0.0 && ripple < 1.0, "ripple: must lie in (0, 1)");
  require(sidelobe_guard_deg >= 0.0, "sidelobe_guard_deg: must be >= 0");
  require(grid_resolution_deg > 0.0 && grid_resolution_deg <= 90.0, "grid_resolution_deg: must lie in (0, 90]");
  const double cells = 180.0 / grid_resolution_deg;
  require(std::abs(cells - std::round(cells)) < 1e-9, "grid_resolution_deg: must divide 180");
  require(trials >= 1, "trials: must be >= 1");
  require(iter_max >= 1, "iter_max: must be >= 1");
  require(epsilon > 0.0, "epsilon: must be positive");
  require(!modes.empty(), "modes: no design mode selected");
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream o;
  o << "experiment = " << to_string(experiment) << '\n'
    << "n_antennas = " << n_antennas << '\n'
    << "n_users = " << n_users << '\n'
    << "antenna_spacing = " << format_number(antenna_spacing) << '\n'
    << "frame_length = " << frame_length << '\n'
    << "theta0_deg = " << format_number(theta0_deg) << '\n'
    << "delta_theta_deg = " << join(delta_theta_deg) << '\n'
    << "desired_halfwidth_deg = " << format_number(desired_halfwidth_deg) << '\n'
    << "noise_power = " << format_number(noise_power) << '\n'
    << "target_gain_power = " << format_number(target_gain_power) << '\n'
    << "power_budget = " << join(power_budget) << '\n'
    << "scale_thresholds_with_power = " << (scale_thresholds_with_power ? "true" : "false") << '\n'
    << "gamma_b_db = " << join(gamma_b_db) << '\n'
    << "gamma_bp = " << format_number(gamma_bp) << '\n'
    << "gamma_s = " << join(gamma_s) << '\n'
    << "ripple = " << format_number(ripple) << '\n'
    << "sidelobe_guard_deg = " << format_number(sidelobe_guard_deg) << '\n'
    << "grid_resolution_deg = " << format_number(grid_resolution_deg) << '\n'
    << "trials = " << trials << '\n'
    << "seed = " << seed << '\n'
    << "iter_max = " << iter_max << '\n'
    << "epsilon = " << format_number(epsilon) << '\n'
    << "modes = ";
  for (std::size_t i = 0; i < modes.size(); ++i) o << (i ? "," : "") << to_string(modes[i]);
  o << '\n';
  return o.str();
}

std::string ExperimentConfig::hash() const { return hex64(fnv1a(canonical())); }

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError(key + ": given twice");
    if (val.empty()) throw ConfigError(key + ": empty value");

    if (key == "experiment") cfg.experiment = parse_experiment(val);
    else if (key == "n_antennas") cfg.n_antennas = parse_int<Index>(key, val);
    else if (key == "n_users") cfg.n_users = parse_int<Index>(key, val);
    else if (key == "antenna_spacing") cfg.antenna_spacing = parse_double(key, val);
    else if (key == "frame_length") cfg.frame_length = parse_int<Index>(key, val);
    else if (key == "theta0_deg") cfg.theta0_deg = parse_double(key, val);
    else if (key == "delta_theta_deg") cfg.delta_theta_deg = parse_doubles(key, val);
    else if (key == "desired_halfwidth_deg") cfg.desired_halfwidth_deg = parse_double(key, val);
    else if (key == "noise_power") cfg.noise_power = parse_double(key, val);
    else if (key == "target_gain_power") cfg.target_gain_power = parse_double(key, val);
    else if (key == "power_budget") cfg.power_budget = parse_doubles(key, val);
    else if (key == "scale_thresholds_with_power") cfg.scale_thresholds_with_power = parse_bool(key, val);
    else if (key == "gamma_b_db") cfg.gamma_b_db = parse_doubles(key, val);
    else if (key == "gamma_bp") cfg.gamma_bp = parse_double(key, val);
    else if (key == "gamma_s") cfg.gamma_s = parse_doubles(key, val);
    else if (key == "ripple") cfg.ripple = parse_double(key, val);
    else if (key == "sidelobe_guard_deg") cfg.sidelobe_guard_deg = parse_double(key, val);
    else if (key == "grid_resolution_deg") cfg.grid_resolution_deg = parse_double(key, val);
    else if (key == "trials") cfg.trials = parse_int<int>(key, val);
    else if (key == "seed") cfg.seed = parse_int<std::uint64_t>(key, val);
    else if (key == "iter_max") cfg.iter_max = parse_int<int>(key, val);
    else if (key == "epsilon") cfg.epsilon = parse_double(key, val);
    else if (key == "modes") {
      cfg.modes.clear();
      for (const auto& m : split_list(val)) cfg.modes.push_back(parse_mode(m));
    } else {
      throw ConfigError("unknown key '" + key + "' on line " + std::to_string(lineno));
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_config(in);
}

void apply_paper_scale(ExperimentConfig& cfg) {
  cfg.n_antennas = 18;
  cfg.n_users = 4;
  cfg.trials = std::max(cfg.trials, 50);
}

std::uint64_t trial_seed(std::uint64_t master, int trial, int sweep) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ static_cast<std::uint64_t>(trial));
  h = splitmix64(h ^ (static_cast<std::uint64_t>(sweep) << 32));
  return h;
}

Scenario make_scenario(const ExperimentConfig& cfg, double power_budget, double delta_theta_deg,
                       std::uint64_t seed) {
  Scenario s;
  s.geometry = {cfg.n_antennas, cfg.antenna_spacing};
  s.channel = sample_channel(cfg.n_users, cfg.n_antennas, seed);
  s.noise_power = cfg.noise_power;
  s.power_budget = power_budget;
  s.frame_length = cfg.frame_length;
  s.target.theta0 = deg2rad(cfg.theta0_deg);
  s.target.delta_theta = deg2rad(delta_theta_deg);
  s.target.gain = Complex(std::sqrt(cfg.target_gain_power), 0.0);
  return s;
}

Thresholds make_thresholds(const ExperimentConfig& cfg, double power_budget, double gamma_b_db, double gamma_s) {
  const double k = cfg.scale_thresholds_with_power ? power_budget : 1.0;
  Thresholds t;
  t.gamma_b = db2lin(gamma_b_db);
  t.gamma_bp = cfg.gamma_bp * k * k;
  t.gamma_s = gamma_s * k;
  t.ripple = cfg.ripple;
  return t;
}

DesignOptions make_options(const ExperimentConfig& cfg) {
  DesignOptions o;
  o.epsilon = cfg.epsilon;
  o.max_iterations = cfg.iter_max;
  o.sidelobe_guard = deg2rad(cfg.sidelobe_guard_deg);
  return o;
}

AngularGrid make_grid(const ExperimentConfig& cfg) {
  return AngularGrid::uniform(deg2rad(-90.0), deg2rad(90.0), deg2rad(cfg.grid_resolution_deg));
}

TrialResult run_design(const ExperimentConfig& cfg, DesignMode mode, double power_budget, double gamma_b_db,
                       double gamma_s, double delta_theta_deg, int trial, int sweep, DesignSolution* solution) {
  TrialResult r;
  r.mode = mode;
  r.power_budget = power_budget;
  r.gamma_b_db = gamma_b_db;
  r.gamma_s = gamma_s;
  r.delta_theta_deg = delta_theta_deg;
  r.trial = trial;
  r.sweep = sweep;
  r.seed = trial_seed(cfg.seed, trial, sweep);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.sinr_eve = r.worst_sinr_eve = r.min_user_sinr = r.secrecy_rate = r.worst_secrecy_rate = nan;
  r.max_rank1_defect = r.min_slack = r.power_error = nan;

  const Scenario scn = make_scenario(cfg, power_budget, delta_theta_deg, r.seed);
  const Thresholds thr = make_thresholds(cfg, power_budget, gamma_b_db, gamma_s);
  const DesignOptions opts = make_options(cfg);
  const AngularGrid grid = make_grid(cfg);
  try {
    DesignSolution sol;
    if (mode == DesignMode::Precise) {
      const auto pattern = rect_pattern(grid, scn.target.theta0, deg2rad(cfg.desired_halfwidth_deg));
      const auto desired = solve_desired_covariance(pattern, scn.geometry, power_budget, opts.solver);
      sol = solve_problem8(scn, desired.r, thr, opts);
    } else {
      sol = solve_problem9(scn, grid, thr, opts);
    }
    const auto val = validate_solution(scn, grid, thr, sol, mode, opts);
    r.status = "ok";
    r.iterations = static_cast<int>(sol.trace.records.size()) - 1;
    for (const auto& rec : sol.trace.records) r.solver_iterations += rec.solver_iterations;
    r.sinr_eve = sol.metrics.sinr_eve;
    r.worst_sinr_eve = sol.metrics.worst_sinr_eve;
    r.min_user_sinr = *std::min_element(sol.metrics.user_sinr.begin(), sol.metrics.user_sinr.end());
    r.secrecy_rate = sol.metrics.secrecy_rate;
    r.worst_secrecy_rate = sol.metrics.worst_secrecy_rate;
    r.max_rank1_defect = *std::max_element(sol.rank1_defect.begin(), sol.rank1_defect.end());
    r.min_slack = val.relaxed.min_slack;
    r.power_error = val.relaxed.power_error;
    r.trace = sol.trace;
    if (solution) *solution = std::move(sol);
  } catch (const InfeasibleDesign& e) {
    r.status = "infeasible";
    r.family = e.family();
  } catch (const DesignFailure& e) {
    r.status = "failed";
    r.trace = e.trace();
    r.iterations = static_cast<int>(r.trace.records.size()) - 1;
  } catch (const NumericalError&) {
    r.status = "failed";
  }
  return r;
}

void parallel_for(int count, int jobs, const std::function<void(int)>& task) {
  const int workers = std::max(1, std::min(jobs, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

RunSummary run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, int jobs) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out_dir);
  RunSummary summary;
  std::map<std::string, std::string> outputs;  // file name -> bytes

  const double p0 = cfg.power_budget.front();
  const double gb0 = cfg.gamma_b_db.front();
  const double gs0 = cfg.gamma_s.front();
  const double dt0 = cfg.delta_theta_deg.front();
  std::vector<Task> tasks;

  switch (cfg.experiment) {
    case Experiment::Fig2: {
      for (double d : cfg.delta_theta_deg) {
        tasks.push_back({d == 0.0 ? DesignMode::Precise : DesignMode::Uncertain, p0, gb0, gs0, d, 0, 0});
      }
      std::vector<DesignSolution> sols;
      summary.trials = run_tasks(cfg, tasks, jobs, &sols);
      const auto grid = make_grid(cfg);
      const UlaGeometry geom{cfg.n_antennas, cfg.antenna_spacing};
      std::ostringstream o;
      o << "theta_deg,design,power_linear\n";
      for (std::size_t t = 0; t < tasks.size(); ++t) {
        const bool ok = summary.trials[t].status == "ok";
        const RealVector prof = ok ? beampattern_profile(sols[t].covariance, grid, geom) : RealVector();
        const std::string label = design_label(tasks[t].delta_deg);
        for (Index m = 0; m < grid.size(); ++m) {
          const double deg = -90.0 + cfg.grid_resolution_deg * static_cast<double>(m);
          o << format_number(deg) << ',' << label << ','
            << format_number(ok ? prof(m) : std::numeric_limits<double>::quiet_NaN()) << '\n';
        }
      }
      outputs["beampattern.csv"] = o.str();
      break;
    }
    case Experiment::Fig3: {
      tasks.push_back({DesignMode::Precise, p0, gb0, gs0, dt0, 0, 0});
      tasks.push_back({DesignMode::Uncertain, p0, gb0, gs0, dt0, 0, 0});
      summary.trials = run_tasks(cfg, tasks, jobs);
      std::ostringstream o;
      o << "algorithm,iteration,c_or_obj,sinr_eve_linear\n";
      for (std::size_t t = 0; t < tasks.size(); ++t) {
        const bool dk = tasks[t].mode == DesignMode::Precise;
        for (const auto& rec : summary.trials[t].trace.records) {
          if (rec.status != conic::Status::Optimal) continue;
          o << (dk ? "dinkelbach" : "quadratic_transform") << ',' << rec.iteration << ','
            << format_number(dk ? rec.c : rec.surrogate) << ',' << format_number(rec.sinr_eve) << '\n';
        }
      }
      outputs["convergence.csv"] = o.str();
      break;
    }
    case Experiment::Fig4: {
      for (DesignMode mode : cfg.modes)
        for (double p : cfg.power_budget)
          for (std::size_t g = 0; g < cfg.gamma_b_db.size(); ++g)
            for (int t = 0; t < cfg.trials; ++t)
              tasks.push_back({mode, p, cfg.gamma_b_db[g], gs0, dt0, t, static_cast<int>(g)});
      summary.trials = run_tasks(cfg, tasks, jobs);
      std::ostringstream o;
      o << "mode,p0_watts,gamma_b_db,trial,secrecy_rate_bits\n";
      for (const auto& r : summary.trials) {
        o << to_string(r.mode) << ',' << format_number(r.power_budget) << ',' << format_number(r.gamma_b_db) << ','
          << r.trial << ',' << format_number(secrecy_or_nan(r)) << '\n';
      }
      outputs["secrecy_vs_gamma_b.csv"] = o.str();
      break;
    }
    case Experiment::Fig5: {
      for (double gb : cfg.gamma_b_db)
        for (std::size_t s = 0; s < cfg.gamma_s.size(); ++s)
          for (int t = 0; t < cfg.trials; ++t)
            tasks.push_back({DesignMode::Uncertain, p0, gb, cfg.gamma_s[s], dt0, t, static_cast<int>(s)});
      summary.trials = run_tasks(cfg, tasks, jobs);
      std::ostringstream o;
      o << "gamma_b_db,gamma_s,trial,secrecy_rate_bits\n";
      for (const auto& r : summary.trials) {
        o << format_number(r.gamma_b_db) << ',' << format_number(r.gamma_s) << ',' << r.trial << ','
          << format_number(secrecy_or_nan(r)) << '\n';
      }
      outputs["secrecy_vs_gamma_s.csv"] = o.str();
      break;
    }
    case Experiment::Custom: {
      int sweep = 0;
      for (double gb : cfg.gamma_b_db)
        for (double gs : cfg.gamma_s)
          for (double d : cfg.delta_theta_deg) {
            for (DesignMode mode : cfg.modes)
              for (double p : cfg.power_budget)
                for (int t = 0; t < cfg.trials; ++t) tasks.push_back({mode, p, gb, gs, d, t, sweep});
            ++sweep;
          }
      summary.trials = run_tasks(cfg, tasks, jobs);
      break;
    }
  }
  outputs["trials.csv"] = trials_csv(summary.trials);

  for (const auto& [name, body] : outputs) {
    write_file(out_dir / name, body);
    summary.files.push_back(out_dir / name);
  }

  int ok = 0, infeasible = 0, failed = 0;
  for (const auto& r : summary.trials) {
    if (r.status == "ok") ++ok;
    else if (r.status == "infeasible") ++infeasible;
    else ++failed;
  }
  summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::ostringstream m;
  m << "# run manifest\n"
    << "version = " << kVersion << '\n'
    << "eigen = " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << '\n'
    << "compiler = " << __VERSION__ << '\n'
    << "experiment = " << to_string(cfg.experiment) << '\n'
    << "config_hash = " << cfg.hash() << '\n'
    << "jobs = " << jobs << '\n'
    << "designs = " << summary.trials.size() << " (ok " << ok << ", infeasible " << infeasible << ", failed "
    << failed << ")\n"
    << "wall_seconds = " << std::fixed << std::setprecision(3) << summary.wall_seconds << '\n';
  m << "\n[files]\n";
  for (const auto& [name, body] : outputs) m << name << " fnv1a64 = " << hex64(fnv1a(body)) << '\n';
  m << "\n[config]\n" << cfg.canonical();
  write_file(out_dir / "manifest.txt", m.str());
  summary.files.push_back(out_dir / "manifest.txt");
  return summary;
}

}  // namespace secbeam

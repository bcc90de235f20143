#include "gridsec/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "gridsec/detattack.hpp"
#include "gridsec/detection.hpp"
#include "gridsec/ergodic.hpp"
#include "gridsec/game.hpp"
#include "gridsec/grid.hpp"
#include "gridsec/rng.hpp"
#include "gridsec/stealth.hpp"

namespace gridsec {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    if (!cur.empty()) parts.push_back(cur);
  }
  return parts;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid numeric value for '" + key + "': " + s);
  }
}

// Run fn(0..n-1) on a small worker pool. Each grid point derives its own
// seed from (master seed, index), so results are order-independent.
void parallel_for_indexed(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const unsigned workers =
      std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                      static_cast<unsigned>(n)));
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct BuiltModel {
  GridCase grid;
  Jacobian jacobian;
  MeasurementModel model;
};

BuiltModel build_from_config(const ExperimentConfig& config) {
  if (config.case_path.empty()) {
    throw ConfigError("no case file given (set case=... or --case)");
  }
  if (!(config.tau > 0.0)) throw ConfigError("tau must be positive");
  if (!(config.rho >= 0.0 && config.rho < 1.0)) {
    throw ConfigError("rho must lie in [0, 1)");
  }
  BuiltModel bm;
  try {
    bm.grid = load_case_file(config.case_path);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("case file error: ") + e.what());
  }
  bm.jacobian = build_jacobian(bm.grid);
  const StatePrior prior =
      toeplitz_prior(static_cast<int>(bm.jacobian.n()), config.rho);
  const NoiseModel noise = sigma2_from_snr(bm.jacobian, prior, config.snr_db);
  bm.model = build_model(bm.jacobian, prior, noise);
  if (bm.model.ill_conditioned) {
    std::fprintf(stderr, "warning: Sigma_YY condition number %.3e exceeds 1e12\n",
                 bm.model.condition_number);
  }
  return bm;
}

std::string csv_header(const std::string& name, const ExperimentConfig& config) {
  std::ostringstream out;
  out << "# gridsec " << name << " config_hash=" << config_hash(config)
      << " seed=" << config.seed << "\n";
  return out.str();
}

AttackPartition parse_partition(const std::string& spec, int m) {
  if (spec.empty()) {
    throw ConfigError("brd requires a partition (partition=... or --partition)");
  }
  AttackPartition partition;
  for (const std::string& group : split(spec, ';')) {
    const auto at = group.find('@');
    if (at == std::string::npos) {
      throw ConfigError("partition group '" + group + "' missing '@<budget>'");
    }
    std::vector<int> sensors;
    for (const std::string& token : split(group.substr(0, at), ',')) {
      const auto dash = token.find('-');
      try {
        if (dash == std::string::npos) {
          sensors.push_back(std::stoi(token));
        } else {
          const int lo = std::stoi(token.substr(0, dash));
          const int hi = std::stoi(token.substr(dash + 1));
          for (int i = lo; i <= hi; ++i) sensors.push_back(i);
        }
      } catch (const std::exception&) {
        throw ConfigError("bad sensor token '" + token + "' in partition");
      }
    }
    partition.sets.push_back(std::move(sensors));
    partition.budgets.push_back(parse_double(group.substr(at + 1), "partition budget"));
  }
  try {
    partition.validate(m);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("malformed partition: ") + e.what());
  }
  return partition;
}

}  // namespace

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  ExperimentConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        " is not key=value: " + body);
    }
    set_config_value(config, trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
  }
  return config;
}

void set_config_value(ExperimentConfig& config, const std::string& key,
                      const std::string& value) {
  if (key == "case" || key == "case_path") {
    config.case_path = value;
  } else if (key == "rho") {
    config.rho = parse_double(value, key);
  } else if (key == "snr_db") {
    config.snr_db = parse_double(value, key);
  } else if (key == "tau") {
    config.tau = parse_double(value, key);
  } else if (key == "lambda_grid") {
    config.lambda_grid.clear();
    for (const auto& tok : split(value, ',')) {
      config.lambda_grid.push_back(parse_double(tok, key));
    }
  } else if (key == "k_grid") {
    config.k_grid.clear();
    for (const auto& tok : split(value, ',')) {
      config.k_grid.push_back(static_cast<int>(parse_double(tok, key)));
    }
  } else if (key == "mc_trials") {
    config.mc_trials = static_cast<int>(parse_double(value, key));
  } else if (key == "ergodic_trials") {
    config.ergodic_trials = static_cast<int>(parse_double(value, key));
  } else if (key == "seed") {
    config.seed = static_cast<std::uint64_t>(std::strtoull(value.c_str(), nullptr, 10));
  } else if (key == "out" || key == "output_dir") {
    config.output_dir = value;
  } else if (key == "d0") {
    config.d0 = parse_double(value, key);
  } else if (key == "l0_prime") {
    config.l0_prime = parse_double(value, key);
  } else if (key == "partition") {
    config.partition_spec = value;
  } else {
    throw ConfigError("unknown config key: " + key);
  }
}

std::string config_hash(const ExperimentConfig& config) {
  std::ostringstream canon;
  canon << "case=" << config.case_path << "\nrho=" << fmt(config.rho)
        << "\nsnr_db=" << fmt(config.snr_db) << "\ntau=" << fmt(config.tau)
        << "\nlambda_grid=";
  for (double v : config.lambda_grid) canon << fmt(v) << ",";
  canon << "\nk_grid=";
  for (int v : config.k_grid) canon << v << ",";
  canon << "\nmc_trials=" << config.mc_trials
        << "\nergodic_trials=" << config.ergodic_trials << "\nseed=" << config.seed
        << "\nd0=" << (config.d0 ? fmt(*config.d0) : "-")
        << "\nl0_prime=" << (config.l0_prime ? fmt(*config.l0_prime) : "-")
        << "\npartition=" << config.partition_spec << "\n";
  const std::string s = canon.str();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string stealth_sweep_csv(const ExperimentConfig& config) {
  if (config.lambda_grid.empty()) throw ConfigError("lambda_grid is empty");
  for (double l : config.lambda_grid) {
    if (!(l >= 1.0)) throw ConfigError("lambda_grid values must be >= 1");
  }
  const BuiltModel bm = build_from_config(config);
  std::vector<std::string> rows(config.lambda_grid.size());
  parallel_for_indexed(config.lambda_grid.size(), [&](std::size_t i) {
    const double lambda = config.lambda_grid[i];
    const StealthAttack attack = optimal_attack(bm.model, lambda);
    const double mi = mutual_information(bm.model, attack.sigma_aa);
    DetectionOptions opts;
    opts.mc_trials = config.mc_trials;
    opts.seed = derive_seed(config.seed, i);
    const TailResult cf = prob_detection_stealth(bm.model, lambda, config.tau,
                                                 TailMethod::CfInversion, opts);
    const TailResult mc = prob_detection_stealth(bm.model, lambda, config.tau,
                                                 TailMethod::MonteCarlo, opts);
    const double upper =
        config.tau > 1.0
            ? std::exp(-detection_bound_exponent(bm.model, config.tau, lambda))
            : 1.0;
    rows[i] = fmt(lambda) + "," + fmt(mi) + "," + fmt(cf.value) + "," +
              fmt(mc.value) + "," + fmt(upper);
  });
  std::string out = csv_header("stealth-sweep", config);
  out += "lambda,mi_nats,pd_cf,pd_mc,pd_upper_bound\n";
  for (const auto& r : rows) out += r + "\n";
  return out;
}

std::string pd_bound_csv(const ExperimentConfig& config) {
  if (!(config.tau > 1.0)) throw ConfigError("pd-bound requires tau > 1");
  if (config.lambda_grid.empty()) throw ConfigError("lambda_grid is empty");
  const BuiltModel bm = build_from_config(config);
  std::vector<std::string> rows(config.lambda_grid.size());
  parallel_for_indexed(config.lambda_grid.size(), [&](std::size_t i) {
    const double lambda = config.lambda_grid[i];
    if (!(lambda >= 1.0)) throw ConfigError("lambda_grid values must be >= 1");
    const double t = detection_bound_exponent(bm.model, config.tau, lambda);
    DetectionOptions opts;
    opts.mc_trials = config.mc_trials;
    opts.seed = derive_seed(config.seed, i);
    const TailResult mc = prob_detection_stealth(bm.model, lambda, config.tau,
                                                 TailMethod::MonteCarlo, opts);
    rows[i] = fmt(lambda) + "," + fmt(t) + "," + fmt(std::exp(-t)) + "," +
              fmt(mc.value);
  });
  std::string out = csv_header("pd-bound", config);
  out += "lambda,t,bound,pd_mc\n";
  for (const auto& r : rows) out += r + "\n";
  return out;
}

namespace {

std::string attack_row(const std::string& status, int theorem, int branch,
                       const char* sign, double p_nd, double distortion,
                       const Eigen::VectorXd& a) {
  std::string row = status + "," + std::to_string(theorem) + "," +
                    std::to_string(branch) + "," + sign + "," + fmt(p_nd) + "," +
                    fmt(distortion) + "," + fmt(a.squaredNorm());
  for (Eigen::Index i = 0; i < a.size(); ++i) row += "," + fmt(a(i));
  return row;
}

}  // namespace

std::string detattack_csv(const ExperimentConfig& config) {
  if (config.d0.has_value() == config.l0_prime.has_value()) {
    throw ConfigError("detattack requires exactly one of d0= / l0_prime=");
  }
  const BuiltModel bm = build_from_config(config);
  std::string out = csv_header("detattack", config);
  out += "status,theorem,branch,sign,p_nd,distortion,energy";
  for (Eigen::Index i = 0; i < bm.model.m(); ++i) {
    out += ",a" + std::to_string(i);
  }
  out += "\n";
  if (config.d0) {
    DetAttackResult r;
    int theorem;
    if (config.tau <= 1.0) {
      r = min_detect_attack_small_tau(bm.model, *config.d0, config.tau);
      theorem = 1;
    } else {
      r = min_detect_attack_large_tau(bm.model, *config.d0, config.tau);
      theorem = 2;
    }
    out += attack_row("ok", theorem, r.branch, "+", r.p_nd, r.distortion, r.plus.a) +
           "\n";
    out += attack_row("ok", theorem, r.branch, "-", r.p_nd, r.distortion, r.minus.a) +
           "\n";
  } else {
    try {
      const DetAttackResult r =
          max_distortion_attack(bm.model, *config.l0_prime, config.tau);
      out += attack_row("ok", 3, 0, "+", r.p_nd, r.distortion, r.plus.a) + "\n";
      out += attack_row("ok", 3, 0, "-", r.p_nd, r.distortion, r.minus.a) + "\n";
    } catch (const std::domain_error&) {
      Eigen::VectorXd none = Eigen::VectorXd::Zero(bm.model.m());
      out += attack_row("no solution exists", 3, 0, ".", 0.0, 0.0, none) + "\n";
    }
  }
  return out;
}

std::string brd_csv(const ExperimentConfig& config) {
  const BuiltModel bm = build_from_config(config);
  const AttackPartition partition =
      parse_partition(config.partition_spec, static_cast<int>(bm.model.m()));
  GameState init;
  init.attacks.assign(partition.attackers(),
                      Eigen::VectorXd::Zero(bm.model.m()));
  BestResponseConfig cfg;
  cfg.seed = config.seed;
  const BrdTrace trace = run_brd(bm.model, partition, config.tau, init,
                                 /*max_rounds=*/60, /*tol=*/1e-7, cfg);
  std::string out = csv_header("brd", config);
  out += "round,attacker,phi,global_norm\n";
  for (const BrdStep& s : trace.steps) {
    out += std::to_string(s.round) + "," + std::to_string(s.attacker) + "," +
           fmt(s.phi) + "," + fmt(s.global_norm) + "\n";
  }
  const NeReport report =
      verify_ne(bm.model, partition, trace.terminal, config.tau,
                /*n_probes=*/1000, /*tol=*/1e-6, derive_seed(config.seed, 0xBED));
  out += "# converged=" + std::to_string(trace.converged ? 1 : 0) +
         " rounds=" + std::to_string(trace.rounds) + "\n";
  for (std::size_t k = 0; k < report.per_attacker.size(); ++k) {
    out += "# verify_ne attacker=" + std::to_string(k) +
           " best_improvement=" + fmt(report.per_attacker[k].best_improvement) +
           " grad_residual=" + fmt(report.per_attacker[k].grad_residual) + "\n";
  }
  out += "# verify_ne is_ne=" + std::to_string(report.is_ne ? 1 : 0) +
         " max_improvement=" + fmt(report.max_improvement) + "\n";
  return out;
}

std::string ergodic_csv(const ExperimentConfig& config) {
  if (config.k_grid.empty()) throw ConfigError("k_grid is empty");
  const BuiltModel bm = build_from_config(config);
  const int p = bm.model.rank_h_sig_ht();
  for (int k : config.k_grid) {
    if (k - 1 < p) {
      throw ConfigError("k=" + std::to_string(k) +
                        " too small: requires k - 1 >= rank p = " + std::to_string(p));
    }
  }
  std::vector<std::string> rows(config.k_grid.size());
  parallel_for_indexed(config.k_grid.size(), [&](std::size_t i) {
    const int k = config.k_grid[i];
    const ErgodicBoundReport report = ergodic_report(
        bm.model, k, config.ergodic_trials, derive_seed(config.seed, i));
    rows[i] = std::to_string(k) + "," + fmt(report.mc_value) + "," +
              fmt(report.mc_std_error) + "," + fmt(report.bound_value);
  });
  std::string out = csv_header("ergodic", config);
  out += "k,mc_cost,mc_se,upper_bound\n";
  for (const auto& r : rows) out += r + "\n";
  return out;
}

std::string jacobian_csv(const ExperimentConfig& config) {
  const BuiltModel bm = build_from_config(config);
  std::string out = csv_header("jacobian", config);
  out += "# case=" + bm.grid.name + " m=" + std::to_string(bm.jacobian.m()) +
         " n=" + std::to_string(bm.jacobian.n()) + "\n";
  out += "row_label";
  for (int id : bm.jacobian.state_labels) {
    out += ",theta_" + std::to_string(id);
  }
  out += "\n";
  for (Eigen::Index r = 0; r < bm.jacobian.m(); ++r) {
    out += bm.jacobian.row_labels[r];
    for (Eigen::Index c = 0; c < bm.jacobian.n(); ++c) {
      out += "," + fmt(bm.jacobian.matrix(r, c));
    }
    out += "\n";
  }
  return out;
}

std::string run_subcommand(const std::string& name, const ExperimentConfig& config) {
  std::string csv;
  if (name == "stealth-sweep") {
    csv = stealth_sweep_csv(config);
  } else if (name == "pd-bound") {
    csv = pd_bound_csv(config);
  } else if (name == "detattack") {
    csv = detattack_csv(config);
  } else if (name == "brd") {
    csv = brd_csv(config);
  } else if (name == "ergodic") {
    csv = ergodic_csv(config);
  } else if (name == "jacobian") {
    csv = jacobian_csv(config);
  } else {
    throw ConfigError("unknown subcommand: " + name);
  }
  std::filesystem::create_directories(config.output_dir);
  const std::string path = config.output_dir + "/" + name + ".csv";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << csv;
  return path;
}

}  // namespace gridsec

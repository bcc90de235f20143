#include "gridsec/game.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gridsec/detattack.hpp"
#include "gridsec/mathutil.hpp"
#include "gridsec/rng.hpp"

namespace gridsec {

void AttackPartition::validate(int m) const {
  if (sets.size() != budgets.size() || sets.empty()) {
    throw std::invalid_argument("partition: sets/budgets size mismatch or empty");
  }
  std::vector<int> owner(m, -1);
  for (std::size_t k = 0; k < sets.size(); ++k) {
    if (!(budgets[k] > 0.0) || !std::isfinite(budgets[k])) {
      throw std::invalid_argument("partition: budgets must be positive and finite");
    }
    for (int idx : sets[k]) {
      if (idx < 0 || idx >= m) {
        throw std::invalid_argument("partition: sensor index out of range");
      }
      if (owner[idx] != -1) {
        throw std::invalid_argument("partition: sensor " + std::to_string(idx) +
                                    " assigned to two attackers");
      }
      owner[idx] = static_cast<int>(k);
    }
  }
  for (int i = 0; i < m; ++i) {
    if (owner[i] == -1) {
      throw std::invalid_argument("partition: sensor " + std::to_string(i) +
                                  " not covered");
    }
  }
}

Eigen::VectorXd global_attack(const GameState& state) {
  if (state.attacks.empty()) {
    throw std::invalid_argument("global_attack: empty state");
  }
  Eigen::VectorXd a = Eigen::VectorXd::Zero(state.attacks[0].size());
  for (const auto& ak : state.attacks) a += ak;
  return a;
}

namespace {

struct UtilityParts {
  double q = 0.0;      // a^T Syy^-1 a
  double d = 0.0;      // a^T M^T M a
  double g = 0.0;      // erfc argument
  double alpha = 0.0;  // erfc(g)
  double beta = 0.0;
};

UtilityParts utility_parts(const MeasurementModel& model, const Eigen::VectorXd& a,
                           double tau) {
  UtilityParts p;
  p.q = model.whitened_quadratic(a);
  const Eigen::VectorXd c = model.mmse_m * a;
  p.d = c.squaredNorm();
  if (p.q <= 0.0) return p;
  p.g = (0.5 * p.q + std::log(tau)) / std::sqrt(2.0 * p.q);
  p.alpha = std::erfc(p.g);
  p.beta = p.d * (0.5 - std::log(tau) / p.q) * std::exp(-p.g * p.g) /
           std::sqrt(2.0 * M_PI * p.q);
  return p;
}

}  // namespace

double utility(const MeasurementModel& model, const Eigen::VectorXd& a, double tau) {
  if (!(tau > 0.0)) {
    throw std::invalid_argument("utility: tau must be positive");
  }
  if (a.isZero(0.0)) return 0.0;  // limit of the product
  const UtilityParts p = utility_parts(model, a, tau);
  if (p.q <= 0.0) return 0.0;
  return 0.5 * p.alpha * p.d;
}

Eigen::VectorXd utility_gradient(const MeasurementModel& model,
                                 const Eigen::VectorXd& a, double tau) {
  if (a.isZero(0.0)) return Eigen::VectorXd::Zero(a.size());
  const UtilityParts p = utility_parts(model, a, tau);
  if (p.q <= 0.0) return Eigen::VectorXd::Zero(a.size());
  const Eigen::VectorXd mtm_a =
      model.mmse_m.transpose() * (model.mmse_m * a);
  return p.alpha * mtm_a - p.beta * (model.sigma_yy_inv * a);
}

double delta_ratio(const MeasurementModel& model, const Eigen::VectorXd& a,
                   double tau) {
  const UtilityParts p = utility_parts(model, a, tau);
  if (p.q <= 0.0) {
    throw std::domain_error("delta_ratio: undefined at the null attack");
  }
  const double factor = p.d * (0.5 - std::log(tau) / p.q) /
                        std::sqrt(2.0 * M_PI * p.q);
  if (p.g >= 0.0) {
    // beta/alpha = factor * exp(-g^2) / erfc(g) = factor / erfcx(g).
    return factor / erfcx(p.g);
  }
  return factor * std::exp(-p.g * p.g) / p.alpha;
}

namespace {

Eigen::VectorXd embed(const std::vector<int>& support, const Eigen::VectorXd& coords,
                      Eigen::Index m) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
  for (std::size_t i = 0; i < support.size(); ++i) out(support[i]) = coords(i);
  return out;
}

Eigen::VectorXd restrict(const std::vector<int>& support, const Eigen::VectorXd& full) {
  Eigen::VectorXd out(support.size());
  for (std::size_t i = 0; i < support.size(); ++i) out(i) = full(support[i]);
  return out;
}

Eigen::VectorXd project_ball(Eigen::VectorXd x, double radius) {
  const double n = x.norm();
  if (n > radius) x *= radius / n;
  return x;
}

// Projected gradient ascent in the restricted coordinates.
struct AscentResult {
  Eigen::VectorXd coords;
  double phi = 0.0;
  bool converged = false;
};

AscentResult ascend(const MeasurementModel& model, const std::vector<int>& support,
                    double radius, const Eigen::VectorXd& a_minus_k, double tau,
                    Eigen::VectorXd start, const BestResponseConfig& cfg) {
  const Eigen::Index m = model.m();
  auto phi_of = [&](const Eigen::VectorXd& coords) {
    return utility(model, a_minus_k + embed(support, coords, m), tau);
  };
  Eigen::VectorXd x = project_ball(std::move(start), radius);
  double fx = phi_of(x);
  double step = 1.0;
  bool converged = false;
  for (int it = 0; it < cfg.max_iters; ++it) {
    const Eigen::VectorXd grad = restrict(
        support, utility_gradient(model, a_minus_k + embed(support, x, m), tau));
    if (grad.norm() < cfg.grad_tol) {
      converged = true;
      break;
    }
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      Eigen::VectorXd cand = project_ball(x + step * grad, radius);
      const double fc = phi_of(cand);
      if (fc > fx + 1e-4 * grad.dot(cand - x) && fc > fx) {
        const double moved = (cand - x).norm();
        x = std::move(cand);
        fx = fc;
        accepted = true;
        step *= 1.5;
        if (moved < cfg.step_tol * (1.0 + x.norm())) {
          converged = true;
          it = cfg.max_iters;
        }
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      converged = true;  // no ascent direction at working precision
      break;
    }
  }
  return {std::move(x), fx, converged};
}

}  // namespace

BestResponseResult best_response(const MeasurementModel& model,
                                 const AttackPartition& partition, int k,
                                 const Eigen::VectorXd& a_minus_k, double tau,
                                 const BestResponseConfig& cfg,
                                 const std::optional<Eigen::VectorXd>& incumbent) {
  partition.validate(static_cast<int>(model.m()));
  if (k < 0 || k >= partition.attackers()) {
    throw std::invalid_argument("best_response: attacker index out of range");
  }
  const std::vector<int>& support = partition.sets[k];
  for (int idx : support) {
    if (a_minus_k(idx) != 0.0) {
      throw std::invalid_argument("best_response: a_minus_k overlaps C_k");
    }
  }
  const double radius = std::sqrt(partition.budgets[k]);
  const Eigen::Index dim = static_cast<Eigen::Index>(support.size());

  std::vector<Eigen::VectorXd> starts;
  if (incumbent) starts.push_back(restrict(support, *incumbent));
  // Scaled eigen-directions of G mapped back to measurement space.
  const GMatrix gm = build_g_matrix(model);
  const int n_eig = std::min(gm.rank, 2);
  for (int i = 0; i < n_eig; ++i) {
    Eigen::VectorXd dir =
        restrict(support, model.sigma_yy_sqrt * gm.eigvecs.col(i));
    const double n = dir.norm();
    if (n > 1e-14) {
      starts.push_back(dir * (radius / n));
      starts.push_back(dir * (0.3 * radius / n));
    }
  }
  Rng rng(cfg.seed);
  while (static_cast<int>(starts.size()) < cfg.multistarts) {
    Eigen::VectorXd r = rng.normal_vector(dim);
    const double n = r.norm();
    const double u = std::pow(rng.uniform(), 1.0 / std::max<double>(dim, 1.0));
    starts.push_back(n > 0.0 ? Eigen::VectorXd(r * (radius * u / n))
                             : Eigen::VectorXd::Zero(dim));
  }

  BestResponseResult best;
  best.a_k = incumbent ? *incumbent
                       : Eigen::VectorXd::Zero(model.m());
  best.phi = utility(model, a_minus_k + best.a_k, tau);
  best.converged = true;
  for (auto& s : starts) {
    AscentResult r = ascend(model, support, radius, a_minus_k, tau, s, cfg);
    if (r.phi > best.phi) {
      best.phi = r.phi;
      best.a_k = embed(support, r.coords, model.m());
      best.converged = r.converged;
    }
  }
  return best;
}

BrdTrace run_brd(const MeasurementModel& model, const AttackPartition& partition,
                 double tau, const GameState& init, int max_rounds, double tol,
                 const BestResponseConfig& cfg) {
  partition.validate(static_cast<int>(model.m()));
  const int k_count = partition.attackers();
  if (static_cast<int>(init.attacks.size()) != k_count) {
    throw std::invalid_argument("run_brd: init state size != attacker count");
  }
  BrdTrace trace;
  trace.terminal = init;
  trace.terminal.round = 0;
  for (int round = 1; round <= max_rounds; ++round) {
    double max_change = 0.0;
    for (int k = 0; k < k_count; ++k) {
      Eigen::VectorXd a_minus_k = global_attack(trace.terminal) -
                                  trace.terminal.attacks[k];
      // Derive a per-(round, attacker) seed so runs are reproducible.
      BestResponseConfig local = cfg;
      local.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(round) * 1000 + k);
      const BestResponseResult br = best_response(
          model, partition, k, a_minus_k, tau, local, trace.terminal.attacks[k]);
      max_change = std::max(max_change,
                            (br.a_k - trace.terminal.attacks[k]).norm());
      trace.terminal.attacks[k] = br.a_k;
      trace.steps.push_back(BrdStep{round, k, br.phi,
                                    global_attack(trace.terminal).norm()});
    }
    trace.terminal.round = round;
    trace.rounds = round;
    if (max_change < tol) {
      trace.converged = true;
      break;
    }
  }
  return trace;
}

NeReport verify_ne(const MeasurementModel& model, const AttackPartition& partition,
                   const GameState& state, double tau, int n_probes, double tol,
                   std::uint64_t seed) {
  partition.validate(static_cast<int>(model.m()));
  const Eigen::VectorXd a = global_attack(state);
  const double phi0 = utility(model, a, tau);
  const Eigen::VectorXd grad = utility_gradient(model, a, tau);

  NeReport report;
  report.per_attacker.resize(partition.attackers());
  Rng rng(seed);
  for (int k = 0; k < partition.attackers(); ++k) {
    const std::vector<int>& support = partition.sets[k];
    const double radius = std::sqrt(partition.budgets[k]);
    const Eigen::VectorXd a_minus_k = a - state.attacks[k];
    NeAttackerReport& rep = report.per_attacker[k];

    const Eigen::VectorXd ak = restrict(support, state.attacks[k]);
    Eigen::VectorXd gk = restrict(support, grad);
    if (ak.norm() >= radius * (1.0 - 1e-9) && ak.norm() > 0.0) {
      const Eigen::VectorXd unit = ak / ak.norm();
      const double outward = std::max(0.0, gk.dot(unit));
      gk -= outward * unit;
    }
    rep.grad_residual = gk.norm();

    for (int pidx = 0; pidx < n_probes; ++pidx) {
      Eigen::VectorXd r = rng.normal_vector(static_cast<Eigen::Index>(support.size()));
      const double n = r.norm();
      if (n == 0.0) continue;
      const double u = std::pow(
          rng.uniform(), 1.0 / std::max<double>(static_cast<double>(support.size()), 1.0));
      const Eigen::VectorXd probe_coords = r * (radius * u / n);
      const Eigen::VectorXd probe = embed(support, probe_coords, model.m());
      const double gain = utility(model, a_minus_k + probe, tau) - phi0;
      if (gain > rep.best_improvement) {
        rep.best_improvement = gain;
        if (gain > report.max_improvement) {
          report.max_improvement = gain;
          report.improving_attacker = k;
          report.improving_probe = probe;
        }
      }
    }
    report.max_grad_residual = std::max(report.max_grad_residual, rep.grad_residual);
  }
  report.is_ne = report.max_improvement <= tol;
  return report;
}

std::vector<double> log_grid(double lo, double hi, int points) {
  if (!(lo > 0.0 && hi > lo) || points < 2) {
    throw std::invalid_argument("log_grid: need 0 < lo < hi and points >= 2");
  }
  std::vector<double> grid(points);
  const double step = std::log(hi / lo) / (points - 1);
  for (int i = 0; i < points; ++i) grid[i] = lo * std::exp(step * i);
  return grid;
}

StationaryEnumeration enumerate_stationary_attacks(const MeasurementModel& model,
                                                   double tau,
                                                   const std::vector<double>& w_grid) {
  if (w_grid.size() < 2) {
    throw std::invalid_argument("enumerate_stationary_attacks: grid too small");
  }
  const GMatrix gm = build_g_matrix(model);
  StationaryEnumeration out;
  for (int k = 0; k < gm.rank; ++k) {
    const double lambda_k = gm.eigvals(k);
    const Eigen::VectorXd dir = model.sigma_yy_sqrt * gm.eigvecs.col(k);
    auto f = [&](double w) {
      return delta_ratio(model, w * dir, tau) - lambda_k;
    };
    bool found = false;
    double prev_w = w_grid[0];
    double prev_f = f(prev_w);
    for (std::size_t i = 1; i < w_grid.size(); ++i) {
      const double cur_w = w_grid[i];
      const double cur_f = f(cur_w);
      if ((prev_f < 0.0 && cur_f >= 0.0) || (prev_f >= 0.0 && cur_f < 0.0)) {
        double lo = prev_w, hi = cur_w;
        double flo = prev_f;
        while (hi - lo > 1e-10 * std::max(1.0, hi)) {
          const double mid = 0.5 * (lo + hi);
          const double fm = f(mid);
          if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        const double w = 0.5 * (lo + hi);
        const Eigen::VectorXd a = w * dir;
        StationaryPoint sp{k, w, a, utility_gradient(model, a, tau).norm()};
        StationaryPoint sm{k, -w, -a, sp.grad_norm};
        out.points.push_back(std::move(sp));
        out.points.push_back(std::move(sm));
        found = true;
      }
      prev_w = cur_w;
      prev_f = cur_f;
    }
    if (!found) out.no_root_ks.push_back(k);
  }
  return out;
}

}  // namespace gridsec

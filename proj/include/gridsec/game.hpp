#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gridsec/estimation.hpp"

namespace gridsec {

/// Disjoint sensor sets C_k covering {0..m-1} with per-attacker energy
/// budgets E_k. Sensor indices follow the Jacobian row order.
struct AttackPartition {
  std::vector<std::vector<int>> sets;
  std::vector<double> budgets;

  int attackers() const { return static_cast<int>(sets.size()); }
  void validate(int m) const;  // partition + positive finite budgets
};

/// Per-attacker injection vectors; a_k is supported on C_k with
/// a_k^T a_k <= E_k. The global attack is their sum.
struct GameState {
  std::vector<Eigen::VectorXd> attacks;
  int round = 0;
};

Eigen::VectorXd global_attack(const GameState& state);

/// Shared utility phi(a) = P_ND(a) * excess_distortion(a), the potential of
/// the game; phi(0) = 0 by the limit convention.
double utility(const MeasurementModel& model, const Eigen::VectorXd& a, double tau);

/// Analytic gradient (alpha(a) M^T M - beta(a) Syy^-1) a with
///   alpha = erfc(g) = 2 P_ND,
///   beta  = d (1/2 - log tau / q) exp(-g^2) / sqrt(2 pi q),
///   q = a^T Syy^-1 a,  d = a^T M^T M a,  g = (q/2 + log tau)/sqrt(2q).
Eigen::VectorXd utility_gradient(const MeasurementModel& model,
                                 const Eigen::VectorXd& a, double tau);

/// beta(a)/alpha(a), evaluated through the scaled complementary error
/// function so the ratio stays finite where erfc underflows.
double delta_ratio(const MeasurementModel& model, const Eigen::VectorXd& a,
                   double tau);

struct BestResponseConfig {
  int multistarts = 8;  // incumbent + scaled eigen-directions + random
  int max_iters = 400;
  double step_tol = 1e-11;
  double grad_tol = 1e-10;
  std::uint64_t seed = 1;
};

struct BestResponseResult {
  Eigen::VectorXd a_k;
  double phi = 0.0;
  bool converged = true;
};

/// Projected gradient ascent of phi(a_k + a_minus_k) over the ball
/// ||a_k|| <= sqrt(E_k) restricted to the C_k coordinates, best of
/// `multistarts` starts. Never returns a point worse than the incumbent.
BestResponseResult best_response(const MeasurementModel& model,
                                 const AttackPartition& partition, int k,
                                 const Eigen::VectorXd& a_minus_k, double tau,
                                 const BestResponseConfig& cfg = {},
                                 const std::optional<Eigen::VectorXd>& incumbent = {});

struct BrdStep {
  int round = 0;
  int attacker = 0;
  double phi = 0.0;
  double global_norm = 0.0;
};

struct BrdTrace {
  std::vector<BrdStep> steps;
  GameState terminal;
  bool converged = false;
  int rounds = 0;
};

/// Sequential round-robin best-response dynamics. Stops when the largest
/// per-attacker state change over a round drops below `tol` or after
/// `max_rounds`. phi is non-decreasing along the trace (potential game).
BrdTrace run_brd(const MeasurementModel& model, const AttackPartition& partition,
                 double tau, const GameState& init, int max_rounds, double tol,
                 const BestResponseConfig& cfg = {});

struct NeAttackerReport {
  double best_improvement = 0.0;  // max phi gain over the probes
  double grad_residual = 0.0;     // projected-gradient stationarity
};

struct NeReport {
  std::vector<NeAttackerReport> per_attacker;
  double max_improvement = 0.0;
  double max_grad_residual = 0.0;
  bool is_ne = false;
  int improving_attacker = -1;      // attacker with the best probe, if any
  Eigen::VectorXd improving_probe;  // the deviation achieving it
};

/// Empirical equilibrium check: per attacker, `n_probes` random feasible
/// unilateral deviations must not improve phi by more than `tol`.
NeReport verify_ne(const MeasurementModel& model, const AttackPartition& partition,
                   const GameState& state, double tau, int n_probes,
                   double tol = 1e-6, std::uint64_t seed = 7);

struct StationaryPoint {
  int k = 0;  // 0-based eigen index of G
  double w = 0.0;
  Eigen::VectorXd a;
  double grad_norm = 0.0;
};

struct StationaryEnumeration {
  std::vector<StationaryPoint> points;
  std::vector<int> no_root_ks;  // eigen indices where the grid saw no sign change
};

/// Interior stationary points of phi: for each nonzero eigenvalue lambda_k
/// of Syy^{-1/2} H Sxx^2 H^T Syy^{-1/2}, all w on the grid (sign-scan +
/// bisection to 1e-10) with delta(w Syy^{1/2} U e_k) = lambda_k, emitted as
/// +-a pairs.
StationaryEnumeration enumerate_stationary_attacks(const MeasurementModel& model,
                                                   double tau,
                                                   const std::vector<double>& w_grid);

/// Log-spaced grid helper for the scan above.
std::vector<double> log_grid(double lo, double hi, int points);

}  // namespace gridsec

#include "gridsec/imhof.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "gridsec/rng.hpp"

namespace gridsec {

namespace {

struct Integrand {
  const std::vector<double>& w;
  double half_x;  // x / 2

  double theta(double u) const {
    double s = 0.0;
    for (double wi : w) s += std::atan(wi * u);
    return 0.5 * s - half_x * u;
  }
  double theta_prime(double u) const {
    double s = 0.0;
    for (double wi : w) s += wi / (1.0 + wi * wi * u * u);
    return 0.5 * s - half_x;
  }
  double log_rho(double u) const {
    double s = 0.0;
    for (double wi : w) s += std::log1p(wi * wi * u * u);
    return 0.25 * s;
  }
  double operator()(double u) const {
    if (u == 0.0) {
      double sw = 0.0;
      for (double wi : w) sw += wi;
      return 0.5 * sw - half_x;
    }
    return std::sin(theta(u)) * std::exp(-log_rho(u)) / u;
  }
};

// 15-point Gauss-Kronrod pair on [-1, 1].
constexpr double kGkNodes[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898,  0.405845151377397,  0.586087235467691,
    0.741531185599394,  0.864864423359769,  0.949107912342759,
    0.991455371120813};
constexpr double kKronrodW[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
constexpr double kGaussW[7] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870};

void gk15(const std::function<double(double)>& f, double a, double b, double* kronrod,
          double* err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double resk = 0.0, resg = 0.0;
  for (int i = 0; i < 15; ++i) {
    const double fv = f(c + h * kGkNodes[i]);
    resk += kKronrodW[i] * fv;
    if (i % 2 == 1) resg += kGaussW[i / 2] * fv;
  }
  *kronrod = resk * h;
  *err = std::abs((resk - resg) * h);
}

double adaptive_gk(const std::function<double(double)>& f, double a, double b,
                   double tol, int depth = 0) {
  double val, err;
  gk15(f, a, b, &val, &err);
  if (err <= tol || depth >= 28) return val;
  const double c = 0.5 * (a + b);
  return adaptive_gk(f, a, c, 0.5 * tol, depth + 1) +
         adaptive_gk(f, c, b, 0.5 * tol, depth + 1);
}

// Bisection for g(u) = target on [lo, hi]; g must be monotone on the bracket.
double bisect(const std::function<double(double)>& g, double lo, double hi,
              double target) {
  double flo = g(lo) - target;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = g(mid) - target;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-14 * (1.0 + hi)) break;
  }
  return 0.5 * (lo + hi);
}

// Wynn epsilon extrapolation of a partial-sum sequence; returns the best
// even-column estimate.
double wynn_epsilon(const std::vector<double>& partial) {
  const std::size_t n = partial.size();
  std::vector<double> cur = partial;
  std::vector<double> prev(n + 1, 0.0);
  double best = partial.back();
  for (std::size_t col = 1; col < n; ++col) {
    std::vector<double> next(n - col);
    for (std::size_t i = 0; i + col < n; ++i) {
      const double diff = cur[i + 1] - cur[i];
      if (std::abs(diff) < 1e-300) {
        return cur[i + 1];  // converged exactly
      }
      next[i] = prev[i + 1] + 1.0 / diff;
    }
    prev = cur;
    cur = next;
    if (col % 2 == 0 && !cur.empty()) best = cur.back();
  }
  return best;
}

}  // namespace

TailResult weighted_chisq_tail_cf(const std::vector<double>& weights, double x,
                                  double abs_tol) {
  for (double w : weights) {
    if (!(w > 0.0)) {
      throw std::invalid_argument("weighted_chisq_tail_cf: weights must be positive");
    }
  }
  TailResult out;
  out.achieved_tol = 0.0;
  if (weights.empty()) {
    out.value = (x <= 0.0) ? 1.0 : 0.0;
    return out;
  }
  if (x <= 0.0) {
    out.value = 1.0;  // the quadratic form is a.s. positive
    return out;
  }

  const Integrand f{weights, 0.5 * x};

  // Peak of theta: theta' is strictly decreasing, positive at 0 iff
  // sum(w)/2 > x/2. Past u_peak the phase falls at rate -> x/2.
  double u_peak = 0.0;
  if (f.theta_prime(0.0) > 0.0) {
    double hi = 1.0;
    while (f.theta_prime(hi) > 0.0) hi *= 2.0;
    u_peak = bisect([&](double u) { return f.theta_prime(u); }, 0.0, hi, 0.0);
  }
  const double theta_peak = f.theta(u_peak);

  // Ordered zeros of sin(theta): rising crossings before the peak, falling
  // crossings after it.
  std::vector<double> zeros;
  for (int k = 1; k * M_PI < theta_peak; ++k) {
    zeros.push_back(bisect([&](double u) { return f.theta(u); }, 0.0, u_peak,
                           k * M_PI));
  }
  // First falling target: the largest multiple of pi strictly below the
  // peak (theta(0) = 0 itself is not a hump edge).
  int k_top = static_cast<int>(std::ceil(theta_peak / M_PI)) - 1;
  if (theta_peak <= 0.0 || k_top * M_PI >= theta_peak) {
    k_top = static_cast<int>(std::floor(theta_peak / M_PI)) - 1;
  }
  double lo = u_peak;
  int k = k_top;
  auto next_falling_zero = [&]() {
    const double target = k * M_PI;
    double hi = lo + M_PI;  // falling rate approaches x/2
    while (f.theta(hi) > target) hi += (hi - u_peak) + M_PI / (0.5 * x) + 1.0;
    const double z = bisect([&](double u) { return f.theta(u); }, lo, hi, target);
    lo = z;
    --k;
    return z;
  };

  const double hump_tol = abs_tol / 64.0;
  double head = 0.0;
  double prev_edge = 0.0;
  for (double z : zeros) {
    head += adaptive_gk(f, prev_edge, z, hump_tol);
    prev_edge = z;
  }
  // Hump containing the peak.
  const double first_fall = next_falling_zero();
  head += adaptive_gk(f, prev_edge, first_fall, hump_tol);
  prev_edge = first_fall;

  // Alternating tail with epsilon acceleration.
  std::vector<double> partial;
  partial.reserve(64);
  double tail = 0.0;
  double resolved = abs_tol;  // pessimistic until extrapolations stabilize
  bool converged = false;
  double last_extrap = 0.0;
  const int max_humps = 400;
  for (int j = 0; j < max_humps; ++j) {
    const double z = next_falling_zero();
    const double term = adaptive_gk(f, prev_edge, z, hump_tol / (1.0 + j));
    prev_edge = z;
    partial.push_back(partial.empty() ? term : partial.back() + term);
    if (partial.size() >= 6) {
      const std::size_t use = std::min<std::size_t>(partial.size(), 30);
      std::vector<double> window(partial.end() - use, partial.end());
      const double extrap = wynn_epsilon(window);
      if (partial.size() >= 8) {
        resolved = std::abs(extrap - last_extrap);
        if (resolved < 0.25 * abs_tol) {
          tail = extrap;
          converged = true;
          break;
        }
      }
      last_extrap = extrap;
      tail = extrap;
    } else {
      tail = partial.back();
    }
    // Direct convergence: remaining humps bounded by the last term once the
    // series alternates with decreasing magnitude.
    if (std::abs(term) < 0.25 * abs_tol && partial.size() >= 3) {
      tail = partial.back();
      resolved = std::abs(term);
      converged = true;
      break;
    }
  }

  out.value = std::clamp(0.5 + (head + tail) / M_PI, 0.0, 1.0);
  out.achieved_tol = resolved;
  out.converged = converged;
  return out;
}

TailResult weighted_chisq_tail_mc(const std::vector<double>& weights, double x,
                                  int trials, std::uint64_t seed) {
  if (trials < 1) {
    throw std::invalid_argument("weighted_chisq_tail_mc: trials must be >= 1");
  }
  Rng rng(seed);
  long long hits = 0;
  for (int t = 0; t < trials; ++t) {
    double q = 0.0;
    for (double w : weights) {
      const double u = rng.normal();
      q += w * u * u;
    }
    if (q >= x) ++hits;
  }
  TailResult out;
  out.value = static_cast<double>(hits) / trials;
  out.std_error = std::sqrt(out.value * (1.0 - out.value) / trials);
  return out;
}

}  // namespace gridsec

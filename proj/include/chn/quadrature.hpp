#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "chn/errors.hpp"

namespace chn {

struct IntegrationResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;  // engine's own bound on |value - true integral|
  long evaluations = 0;             // integrand evaluations spent
};

struct QuadratureOptions {
  // The acceptance tolerances downstream sit at 1e-6; the quadrature floor
  // stays two orders below so integration error never dominates.
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  // Hard cap on integrand evaluations; keeps pathological configs from
  // hanging a sweep.
  long max_evaluations = 10000;
};

namespace quad_detail {

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule
// (QUADPACK dqk15 constants).
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double lo = 0.0;
  double hi = 0.0;
  double value = 0.0;
  double error = 0.0;
};

struct SegmentWorseError {
  bool operator()(const Segment& a, const Segment& b) const { return a.error < b.error; }
};

// Applies the K15/G7 pair on [lo, hi]. Nodes are interior, so integrable
// endpoint singularities are never evaluated. Sets `nonfinite` when the
// integrand returns NaN or +-inf anywhere in the segment.
template <class F>
Segment kronrod15(F& f, double lo, double hi, bool& nonfinite, bool& nan_seen) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);

  double fv[15];
  const double fc = f(center);
  fv[14] = fc;
  double resg = kWg[3] * fc;
  double resk = kWgk[7] * fc;
  double resabs = kWgk[7] * std::abs(fc);
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    fv[2 * j] = f1;
    fv[2 * j + 1] = f2;
    const double fsum = f1 + f2;
    resk += kWgk[j] * fsum;
    resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * fsum;  // Gauss subset: xgk[1], xgk[3], xgk[5]
  }

  for (double v : fv) {
    if (std::isnan(v)) nan_seen = true;
    if (!std::isfinite(v)) nonfinite = true;
  }

  const double reskh = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fc - reskh);
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (std::abs(fv[2 * j] - reskh) + std::abs(fv[2 * j + 1] - reskh));
  }
  resasc *= half;
  resabs *= half;

  Segment seg;
  seg.lo = lo;
  seg.hi = hi;
  seg.value = resk * half;
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  const double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(err, 50.0 * eps * resabs);
  }
  seg.error = err;
  return seg;
}

// Integrability heuristic on the shrinking right-edge neighborhood: for a
// convergent mapped integrand the edge contributions decay geometrically as
// the edge segment is halved; contributions that hold steady or grow over
// three successive refinements indicate partial sums growing without bound
// (log-divergence yields exactly constant contributions per halving).
inline bool edge_contributions_diverging(const std::vector<double>& history, double floor) {
  const size_t n = history.size();
  if (n < 4) return false;
  int sustained = 0;
  for (size_t i = n - 3; i < n; ++i) {
    if (history[i] >= 0.999 * history[i - 1] && history[i] > floor) ++sustained;
  }
  return sustained == 3;
}

struct AdaptiveState {
  double total = 0.0;
  double total_error = 0.0;
  long evaluations = 0;
  bool nonfinite = false;
  bool nan_seen = false;
  bool divergence_suspected = false;
  // Contributions of successive right-edge segments, used by the
  // semi-infinite divergence heuristic.
  std::vector<double> edge_history;
};

// Adaptive bisection driven by a worst-error-first heap. `track_edge_hi`
// is the mapped right endpoint whose shrinking neighborhood is monitored
// for non-integrable behavior (semi-infinite case); NaN there disables it.
template <class F>
AdaptiveState adapt(F& f, double lo, double hi, const QuadratureOptions& opts,
                    double track_edge_hi) {
  AdaptiveState state;
  std::priority_queue<Segment, std::vector<Segment>, SegmentWorseError> heap;

  auto note_edge = [&state, track_edge_hi](const Segment& seg) {
    if (std::isnan(track_edge_hi) || seg.hi != track_edge_hi) return;
    state.edge_history.push_back(std::abs(seg.value));
    const double floor = std::max(1e-14 * std::abs(state.total), 1e-300);
    if (edge_contributions_diverging(state.edge_history, floor)) {
      state.divergence_suspected = true;
    }
  };

  Segment first = kronrod15(f, lo, hi, state.nonfinite, state.nan_seen);
  state.evaluations += 15;
  state.total = first.value;
  state.total_error = first.error;
  heap.push(first);
  note_edge(first);

  auto tolerance = [&opts](double total) {
    return std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
  };

  while (state.total_error > tolerance(state.total) && !state.nonfinite &&
         !state.divergence_suspected) {
    if (state.evaluations + 30 > opts.max_evaluations || heap.empty()) break;
    Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (mid <= worst.lo || mid >= worst.hi) {
      // Interval no longer splittable in double precision; keep its estimate.
      if (heap.empty()) break;
      continue;
    }
    Segment left = kronrod15(f, worst.lo, mid, state.nonfinite, state.nan_seen);
    Segment right = kronrod15(f, mid, worst.hi, state.nonfinite, state.nan_seen);
    state.evaluations += 30;
    state.total += left.value + right.value - worst.value;
    state.total_error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    note_edge(right);
  }
  return state;
}

}  // namespace quad_detail

// Adaptive Gauss-Kronrod integration of f over the finite interval
// [lo, hi]. Integrable endpoint singularities are fine (no endpoint is ever
// evaluated). Throws Error{NoConvergence} when the evaluation budget is
// exhausted above tolerance and Error{NonFiniteEvaluation} when the
// integrand produces NaN or infinity.
template <class F>
IntegrationResult integrate_finite(F&& f, double lo, double hi,
                                   const QuadratureOptions& opts = {}) {
  if (!(lo < hi)) {
    throw Error(ErrorKind::DomainError, "integrate_finite requires lo < hi");
  }
  auto& fn = f;
  quad_detail::AdaptiveState state =
      quad_detail::adapt(fn, lo, hi, opts, std::numeric_limits<double>::quiet_NaN());
  if (state.nonfinite) {
    throw Error(ErrorKind::NonFiniteEvaluation,
                "integrand returned a non-finite value on a finite interval");
  }
  const double tol = std::max(opts.abs_tol, opts.rel_tol * std::abs(state.total));
  if (state.total_error > tol) {
    throw Error(ErrorKind::NoConvergence,
                "evaluation budget exhausted with error estimate " +
                    std::to_string(state.total_error) + " above tolerance " + std::to_string(tol));
  }
  return IntegrationResult{state.total, state.total_error, state.evaluations};
}

// Integration of f over [lo, inf) via the compactifying substitution
// u = lo + (t/(1-t))^2, t in [0,1), followed by adaptive finite quadrature.
// The quadratic map keeps algebraic tails u^{-s} mild near t = 1 (the mapped
// integrand scales like (1-t)^{2s-3}, smooth for the pathloss tails in use).
// Distinguishes three failure modes: Error{DivergenceSuspected} when the
// tail fails the integrability heuristic (or the mapped integrand overflows
// to infinity, which means the partial sums are unbounded),
// Error{NonFiniteEvaluation} on NaN, and Error{NoConvergence} on budget
// exhaustion for an apparently convergent integral.
template <class F>
IntegrationResult integrate_semi_infinite(F&& f, double lo,
                                          const QuadratureOptions& opts = {}) {
  auto mapped = [&f, lo](double t) {
    const double one_minus = 1.0 - t;
    if (one_minus <= 0.0) return 0.0;  // node rounded onto the endpoint
    const double stretched = t / one_minus;
    const double u = lo + stretched * stretched;
    return f(u) * 2.0 * stretched / (one_minus * one_minus);
  };
  quad_detail::AdaptiveState state = quad_detail::adapt(mapped, 0.0, 1.0, opts, 1.0);
  if (state.nan_seen) {
    throw Error(ErrorKind::NonFiniteEvaluation,
                "integrand returned NaN on a semi-infinite interval");
  }
  if (state.nonfinite || state.divergence_suspected) {
    throw Error(ErrorKind::DivergenceSuspected,
                "partial integrals near the upper limit grow without bound");
  }
  const double tol = std::max(opts.abs_tol, opts.rel_tol * std::abs(state.total));
  if (state.total_error > tol) {
    throw Error(ErrorKind::NoConvergence,
                "evaluation budget exhausted with error estimate " +
                    std::to_string(state.total_error) + " above tolerance " + std::to_string(tol));
  }
  return IntegrationResult{state.total, state.total_error, state.evaluations};
}

}  // namespace chn

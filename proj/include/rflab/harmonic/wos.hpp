#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rflab/core/domain.hpp"
#include "rflab/core/parallel.hpp"
#include "rflab/core/rng.hpp"

// Walk-on-spheres sampling of harmonic measure, shared-walk scoring against
// target balls, pointwise-dimension fits and the singular-candidate sieve.
namespace rflab {

struct WalkBudgetError : GeometryError {
  using GeometryError::GeometryError;
};
struct ZeroMassError : GeometryError {
  using GeometryError::GeometryError;
};

template <int N> struct WosResult {
  Vec<N> exit = Vec<N>::Zero();
  int steps = 0;
  bool trapped = false;
};

// One walk: jump to a uniform point of the inscribed sphere of radius
// dist_lower(x) until the boundary is within tol, then project onto it.
template <int N>
WosResult<N> wos_hit(const DomainRep<N>& dom, const Vec<N>& start, double tol, Philox& rng,
                     std::int64_t max_steps = 100000) {
  WosResult<N> out;
  Vec<N> x = start;
  for (std::int64_t step = 0; step < max_steps; ++step) {
    double r = dom.dist_lower(x);
    if (r < tol) {
      if (dom.boundary_distance(x) < tol) {
        out.exit = dom.nearest_boundary(x);
        out.steps = int(step);
        return out;
      }
      if (r <= 0.0) break;  // stalled off the boundary: conservative radius hit zero
    }
    x += r * unit_sphere_dir<N>(rng);
  }
  out.trapped = true;
  out.steps = int(max_steps);
  out.exit = dom.nearest_boundary(x);
  return out;
}

template <int N> struct MeasureEstimate {
  Vec<N> xi = Vec<N>::Zero();
  double r = 0.0;
  double omega_hat = 0.0;
  double stderr_val = 0.0;
  std::int64_t n = 0;
  std::int64_t hits = 0;
  Vec<N> pole = Vec<N>::Zero();
  std::uint64_t seed = 0;
};

template <int N> struct EstimateRun {
  std::vector<MeasureEstimate<N>> estimates;
  std::int64_t trapped = 0;
  double mean_steps = 0.0;
  double tol = 0.0;
  std::vector<Vec<N>> exits;  // populated when collect_exits is set
};

template <int N> struct WosOptions {
  double tol = 0.0;  // 0: 1e-4 * domain diameter
  std::int64_t max_steps = 100000;
  std::int64_t block = 4096;  // walks per deterministic block
  double max_failure_rate = 1e-3;
  bool collect_exits = false;
};

// Runs n walks once and scores every exit against every target ball.
// Per-walk Philox streams keyed by (seed, walk index) make the result
// independent of the thread schedule.
template <int N>
EstimateRun<N> estimate_omega(const DomainRep<N>& dom, const Vec<N>& pole,
                              const std::vector<Ball<N>>& targets, std::int64_t n,
                              std::uint64_t seed, const WosOptions<N>& opt = {}) {
  if (!dom.inside(pole)) throw GeometryError("estimate_omega: pole is not inside the domain");
  double tol = opt.tol > 0 ? opt.tol : 1e-4 * dom.diameter_hint();

  const std::size_t t = targets.size();
  std::int64_t n_blocks = (n + opt.block - 1) / opt.block;
  std::vector<std::vector<std::int64_t>> hits(n_blocks, std::vector<std::int64_t>(t, 0));
  std::vector<std::int64_t> trapped(n_blocks, 0);
  std::vector<std::int64_t> steps(n_blocks, 0);
  std::vector<std::vector<Vec<N>>> exits(opt.collect_exits ? n_blocks : 0);

  parallel_blocks(n, opt.block, [&](std::int64_t b, std::int64_t begin, std::int64_t end) {
    auto& h = hits[b];
    for (std::int64_t w = begin; w < end; ++w) {
      Philox rng(seed, std::uint64_t(w));
      auto res = wos_hit<N>(dom, pole, tol, rng, opt.max_steps);
      steps[b] += res.steps;
      if (res.trapped) {
        ++trapped[b];
        continue;
      }
      if (opt.collect_exits) exits[b].push_back(res.exit);
      for (std::size_t k = 0; k < t; ++k)
        if ((res.exit - targets[k].center).norm() <= targets[k].radius) ++h[k];
    }
  });

  EstimateRun<N> run;
  run.tol = tol;
  std::int64_t total_steps = 0;
  for (std::int64_t b = 0; b < n_blocks; ++b) {
    run.trapped += trapped[b];
    total_steps += steps[b];
    if (opt.collect_exits)
      run.exits.insert(run.exits.end(), exits[b].begin(), exits[b].end());
  }
  run.mean_steps = n > 0 ? double(total_steps) / double(n) : 0.0;
  if (double(run.trapped) > opt.max_failure_rate * double(n))
    throw WalkBudgetError("estimate_omega: trapped-walk rate " +
                          std::to_string(double(run.trapped) / double(n)) + " exceeds budget");

  for (std::size_t k = 0; k < t; ++k) {
    MeasureEstimate<N> est;
    est.xi = targets[k].center;
    est.r = targets[k].radius;
    est.pole = pole;
    est.seed = seed;
    est.n = n;
    for (std::int64_t b = 0; b < n_blocks; ++b) est.hits += hits[b][k];
    est.omega_hat = double(est.hits) / double(n);
    est.stderr_val = std::sqrt(est.omega_hat * (1.0 - est.omega_hat) / double(n));
    run.estimates.push_back(est);
  }
  return run;
}

// ---------------------------------------------------------------------------
// Pointwise dimension fit over a dyadic radius grid at one boundary point.
// ---------------------------------------------------------------------------

struct DimensionFit {
  std::vector<double> radii;   // ascending, zero-mass radii excluded
  std::vector<double> omega;
  std::vector<double> slopes;  // consecutive two-point log slopes
  double lower_dim = 0.0;
  double upper_dim = 0.0;
  double slope_fit = 0.0;
  double slope_se = 0.0;
  int excluded_zero_mass = 0;
};

template <int N>
DimensionFit dimension_fit(std::vector<MeasureEstimate<N>> ests) {
  std::sort(ests.begin(), ests.end(),
            [](const auto& a, const auto& b) { return a.r < b.r; });
  DimensionFit fit;
  std::vector<double> se;
  for (const auto& e : ests) {
    if (e.omega_hat <= 0.0) {
      ++fit.excluded_zero_mass;
      continue;
    }
    fit.radii.push_back(e.r);
    fit.omega.push_back(e.omega_hat);
    se.push_back(e.stderr_val);
  }
  if (fit.radii.size() < 4)
    throw ZeroMassError("dimension_fit: fewer than 4 radii carry mass");

  for (std::size_t i = 0; i + 1 < fit.radii.size(); ++i) {
    double s = (std::log(fit.omega[i + 1]) - std::log(fit.omega[i])) /
               (std::log(fit.radii[i + 1]) - std::log(fit.radii[i]));
    fit.slopes.push_back(s);
  }
  fit.lower_dim = *std::min_element(fit.slopes.begin(), fit.slopes.end());
  fit.upper_dim = *std::max_element(fit.slopes.begin(), fit.slopes.end());

  // least squares of log omega on log r, stderr propagated from the
  // per-point binomial errors
  std::size_t m = fit.radii.size();
  double xbar = 0.0;
  for (double r : fit.radii) xbar += std::log(r);
  xbar /= double(m);
  double sxx = 0.0;
  for (double r : fit.radii) sxx += (std::log(r) - xbar) * (std::log(r) - xbar);
  double slope = 0.0, var = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double c = (std::log(fit.radii[i]) - xbar) / sxx;
    slope += c * std::log(fit.omega[i]);
    double sigma_log = se[i] / fit.omega[i];
    var += c * c * sigma_log * sigma_log;
  }
  fit.slope_fit = slope;
  fit.slope_se = std::sqrt(var);
  return fit;
}

// ---------------------------------------------------------------------------
// Candidate sieve for the lower-bound set: keep probes whose lower
// confidence bound of omega(B(xi, r)) beats r^{d - alpha} on every resolved
// dyadic radius.
// ---------------------------------------------------------------------------

template <int N> struct SingularCandidateSet {
  std::vector<Vec<N>> points;
  std::vector<double> certificates;  // min over radii of lcb / r^{d-alpha}
  std::vector<double> r_min;         // smallest resolved radius per point
  double alpha = 0.0;
  double r0 = 0.0;
  std::int64_t min_hits = 0;
  double confidence_z = 0.0;
  int probes_tested = 0;
};

template <int N> struct CandidateOptions {
  int dyadic_levels = 6;
  std::int64_t min_hits = 100;
  double confidence_z = 3.0;
  WosOptions<N> wos{};
};

template <int N>
SingularCandidateSet<N> extract_singular_candidates(const DomainRep<N>& dom, const Vec<N>& pole,
                                                    const std::vector<Vec<N>>& probes,
                                                    double alpha, double r0, std::int64_t n,
                                                    std::uint64_t seed,
                                                    const CandidateOptions<N>& opt = {}) {
  const int d = N - 1;
  if (!(alpha > 0.0 && alpha < double(d)))
    throw GeometryError("extract_singular_candidates: alpha outside (0, d)");
  if (!(r0 <= std::min(dom.diameter_hint(), 1.0)))
    throw GeometryError("extract_singular_candidates: r0 above min(diam, 1)");

  std::vector<Ball<N>> targets;
  for (const auto& p : probes)
    for (int j = 0; j < opt.dyadic_levels; ++j)
      targets.push_back({p, r0 * std::ldexp(1.0, -j)});

  auto run = estimate_omega<N>(dom, pole, targets, n, seed, opt.wos);

  SingularCandidateSet<N> out;
  out.alpha = alpha;
  out.r0 = r0;
  out.min_hits = opt.min_hits;
  out.confidence_z = opt.confidence_z;
  out.probes_tested = int(probes.size());
  for (std::size_t p = 0; p < probes.size(); ++p) {
    double cert = kInf;
    double rmin = kInf;
    bool any = false;
    for (int j = 0; j < opt.dyadic_levels; ++j) {
      const auto& est = run.estimates[p * opt.dyadic_levels + j];
      if (est.hits < opt.min_hits) continue;  // below the sample-budget resolution
      any = true;
      rmin = std::min(rmin, est.r);
      double lcb = est.omega_hat - opt.confidence_z * est.stderr_val;
      cert = std::min(cert, lcb / std::pow(est.r, double(d) - alpha));
    }
    if (any && cert > 1.0) {
      out.points.push_back(probes[p]);
      out.certificates.push_back(cert);
      out.r_min.push_back(rmin);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Maximum-principle check: enlarging the domain cannot decrease the measure
// of a shared boundary set.
// ---------------------------------------------------------------------------

template <int N> struct MonotonicityReport {
  struct Row {
    Ball<N> set;
    double omega_small = 0.0, se_small = 0.0;
    double omega_big = 0.0, se_big = 0.0;
    bool ok = false;
  };
  std::vector<Row> rows;
  bool all_ok = true;
};

template <int N>
MonotonicityReport<N> monotonicity_check(const DomainRep<N>& small_dom,
                                         const DomainRep<N>& big_dom, const Vec<N>& pole,
                                         const std::vector<Ball<N>>& sets, std::int64_t n,
                                         std::uint64_t seed_small, std::uint64_t seed_big,
                                         const WosOptions<N>& opt = {}) {
  auto rs = estimate_omega<N>(small_dom, pole, sets, n, seed_small, opt);
  auto rb = estimate_omega<N>(big_dom, pole, sets, n, seed_big, opt);
  MonotonicityReport<N> rep;
  for (std::size_t k = 0; k < sets.size(); ++k) {
    typename MonotonicityReport<N>::Row row;
    row.set = sets[k];
    row.omega_small = rs.estimates[k].omega_hat;
    row.se_small = rs.estimates[k].stderr_val;
    row.omega_big = rb.estimates[k].omega_hat;
    row.se_big = rb.estimates[k].stderr_val;
    double slack = 3.0 * std::sqrt(row.se_small * row.se_small + row.se_big * row.se_big);
    row.ok = row.omega_big >= row.omega_small - slack;
    rep.all_ok = rep.all_ok && row.ok;
    rep.rows.push_back(row);
  }
  return rep;
}

// Kolmogorov-Smirnov distance of a sample against the uniform law on [0,1).
inline double ks_statistic_uniform(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  double d = 0.0;
  std::size_t n = u.size();
  for (std::size_t i = 0; i < n; ++i) {
    d = std::max(d, std::abs(u[i] - double(i) / n));
    d = std::max(d, std::abs(u[i] - double(i + 1) / n));
  }
  return d;
}

}  // namespace rflab

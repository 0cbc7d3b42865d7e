#include <doctest.h>

#include <rflab/enlarge/enlarge.hpp>
#include <rflab/harmonic/wos.hpp>

using namespace rflab;

namespace {

// Poisson-kernel quadrature on the unit circle: the harmonic measure of the
// arc [a0, a1] seen from z, via Simpson's rule. Test-only oracle.
double disk_arc_measure(const Vec<2>& z, double a0, double a1, int panels = 4096) {
  double rho = z.norm();
  double phi = std::atan2(z[1], z[0]);
  auto kernel = [&](double t) {
    return (1.0 - rho * rho) / (1.0 - 2.0 * rho * std::cos(t - phi) + rho * rho);
  };
  double h = (a1 - a0) / (2 * panels);
  double acc = kernel(a0) + kernel(a1);
  for (int i = 1; i < 2 * panels; ++i) acc += kernel(a0 + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0 / (2.0 * M_PI);
}

}  // namespace

TEST_CASE("half-plane walk: exit law is the Cauchy distribution (KS)") {
  HalfSpaceDomain<2> dom;
  const int n = 50000;
  std::vector<double> u;
  u.reserve(n);
  double tol = 1e-4 * dom.diameter_hint();
  for (int w = 0; w < n; ++w) {
    Philox rng(2024, w);
    auto res = wos_hit<2>(dom, Vec<2>(0, 1), tol, rng);
    REQUIRE(!res.trapped);
    u.push_back(0.5 + std::atan(res.exit[0]) / M_PI);
  }
  double d = ks_statistic_uniform(u);
  CHECK(d * std::sqrt(double(n)) < 1.628);  // 1% critical value
}

TEST_CASE("half-plane: omega(B(0,1)) = 1/2 within 3 sigma; start at the boundary is free") {
  HalfSpaceDomain<2> dom;
  auto run = estimate_omega<2>(dom, Vec<2>(0, 1), {Ball<2>{Vec<2>(0, 0), 1.0}}, 200000, 11);
  const auto& est = run.estimates[0];
  CHECK(std::abs(est.omega_hat - 0.5) <= 3.0 * est.stderr_val);

  Philox rng(1, 0);
  auto res = wos_hit<2>(dom, Vec<2>(0.3, 1e-6), 1e-4, rng);
  CHECK(res.steps == 0);
  CHECK((res.exit - Vec<2>(0.3, 0)).norm() <= 1e-4);
}

TEST_CASE("disk from the center: exit angles uniform (KS at 1%)") {
  BallDomain<2> disk;
  const int n = 100000;
  std::vector<double> u;
  u.reserve(n);
  for (int w = 0; w < n; ++w) {
    Philox rng(7, w);
    auto res = wos_hit<2>(disk, Vec<2>(0, 0), 1e-4, rng);
    u.push_back(std::atan2(res.exit[1], res.exit[0]) / (2 * M_PI) + 0.5);
  }
  CHECK(ks_statistic_uniform(u) * std::sqrt(double(n)) < 1.628);
}

TEST_CASE("disk arc from the center: omega = beta / pi") {
  BallDomain<2> disk;
  // ball around (1,0) with chord half-angle beta: radius = 2 sin(beta/2)
  double beta = 0.7;
  double rad = 2.0 * std::sin(beta / 2.0);
  auto run = estimate_omega<2>(disk, Vec<2>(0, 0), {Ball<2>{Vec<2>(1, 0), rad}}, 100000, 3);
  const auto& est = run.estimates[0];
  CHECK(std::abs(est.omega_hat - beta / M_PI) <= 3.0 * est.stderr_val);
}

TEST_CASE("shared-walk scoring: normalization, additivity, nestedness") {
  BallDomain<2> disk;
  std::vector<Ball<2>> targets{
      {Vec<2>(0, 0), 3.0},            // whole boundary
      {Vec<2>(1, 0), 0.4},            // A
      {Vec<2>(-1, 0), 0.4},           // B disjoint from A
      {Vec<2>(1, 0), 0.2},            // nested in A
  };
  auto run = estimate_omega<2>(disk, Vec<2>(0.2, 0.1), targets, 20000, 5);
  CHECK(run.estimates[0].omega_hat == 1.0);
  // additivity of counts for disjoint sets with shared walks: compare with a
  // union ball is not possible geometrically, so check hits directly
  CHECK(run.estimates[3].hits <= run.estimates[1].hits);  // nested, exact
  // disjointness: no exit counted in both A and B
  CHECK(run.estimates[1].hits + run.estimates[2].hits <= 20000);
}

TEST_CASE("seed determinism independent of the thread count") {
  BallDomain<2> disk;
  std::vector<Ball<2>> targets{{Vec<2>(1, 0), 0.3}, {Vec<2>(0, 1), 0.5}};
  int saved = thread_count();
  set_thread_count(1);
  auto a = estimate_omega<2>(disk, Vec<2>(0.3, 0), targets, 30000, 42);
  set_thread_count(2);
  auto b = estimate_omega<2>(disk, Vec<2>(0.3, 0), targets, 30000, 42);
  set_thread_count(saved);
  for (std::size_t k = 0; k < targets.size(); ++k) {
    CHECK(a.estimates[k].hits == b.estimates[k].hits);
    CHECK(a.estimates[k].omega_hat == b.estimates[k].omega_hat);
  }
  // different seed changes the estimate
  auto c = estimate_omega<2>(disk, Vec<2>(0.3, 0), targets, 30000, 43);
  CHECK(c.estimates[0].hits != a.estimates[0].hits);
}

TEST_CASE("harmonicity smoke test: five poles against the Poisson integral") {
  BallDomain<2> disk;
  double a0 = 0.4, a1 = 1.5;  // fixed arc
  // target ball capturing exactly that arc: centered mid-arc through its ends
  double mid = 0.5 * (a0 + a1);
  Vec<2> c(std::cos(mid), std::sin(mid));
  double rad = (c - Vec<2>(std::cos(a0), std::sin(a0))).norm();
  const Vec<2> poles[5] = {{0, 0}, {0.3, 0.2}, {-0.4, 0.1}, {0.1, -0.5}, {0.5, 0.4}};
  for (const auto& pole : poles) {
    auto run = estimate_omega<2>(disk, pole, {Ball<2>{c, rad}}, 50000, 9);
    double exact = disk_arc_measure(pole, a0, a1);
    CHECK(std::abs(run.estimates[0].omega_hat - exact) <=
          3.0 * run.estimates[0].stderr_val + 1e-3);
  }
}

TEST_CASE("tolerance bias: halving tol moves the estimate by less than 3 sigma") {
  HalfSpaceDomain<2> dom;
  WosOptions<2> o1, o2;
  o1.tol = 2e-4;
  o2.tol = 1e-4;
  std::vector<Ball<2>> t{{Vec<2>(0, 0), 1.0}};
  auto a = estimate_omega<2>(dom, Vec<2>(0, 1), t, 100000, 21, o1);
  auto b = estimate_omega<2>(dom, Vec<2>(0, 1), t, 100000, 22, o2);
  double sigma = std::hypot(a.estimates[0].stderr_val, b.estimates[0].stderr_val);
  CHECK(std::abs(a.estimates[0].omega_hat - b.estimates[0].omega_hat) <= 3.0 * sigma);
}

TEST_CASE("dimension_fit: synthetic power law and flat mass") {
  std::vector<MeasureEstimate<2>> ests;
  for (int j = 2; j <= 9; ++j) {
    MeasureEstimate<2> e;
    e.r = std::ldexp(1.0, -j);
    e.omega_hat = std::pow(e.r, 1.5);
    e.stderr_val = 0.0;
    e.n = 1;
    ests.push_back(e);
  }
  auto fit = dimension_fit<2>(ests);
  CHECK(fit.slope_fit == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(fit.lower_dim == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(fit.upper_dim == doctest::Approx(1.5).epsilon(1e-9));

  for (auto& e : ests) e.omega_hat = 0.25;  // point mass nearby: constant mass
  auto flat = dimension_fit<2>(ests);
  CHECK(flat.slope_fit == doctest::Approx(0.0));

  // zero-mass radii are excluded and the fit errors below 4 points
  std::vector<MeasureEstimate<2>> sparse(ests.begin(), ests.begin() + 4);
  sparse[0].omega_hat = 0.0;
  CHECK_THROWS_AS(dimension_fit<2>(sparse), ZeroMassError);
}

TEST_CASE("dimension_fit on the disk boundary: slope near 1") {
  BallDomain<2> disk;
  std::vector<Ball<2>> targets;
  for (int j = 3; j <= 8; ++j) targets.push_back({Vec<2>(1, 0), std::ldexp(1.0, -j)});
  auto run = estimate_omega<2>(disk, Vec<2>(0, 0), targets, 400000, 77);
  auto fit = dimension_fit<2>(run.estimates);
  CHECK(std::abs(fit.slope_fit - 1.0) <= 0.05);
}

TEST_CASE("candidate sieve: half-plane has no singular candidates at alpha = 1/2") {
  HalfSpaceDomain<2> dom;
  std::vector<Vec<2>> probes{Vec<2>(0, 0), Vec<2>(0.5, 0)};
  CandidateOptions<2> opt;
  opt.dyadic_levels = 5;
  auto set = extract_singular_candidates<2>(dom, Vec<2>(0, 1), probes, 0.5, 0.5, 100000, 13, opt);
  CHECK(set.points.empty());
  CHECK(set.probes_tested == 2);
}

TEST_CASE("candidate sieve: near-atomic exit mass is caught for any alpha") {
  // pole squeezed against the boundary: omega(B(0,r)) ~ 1 for every resolved r
  HalfSpaceDomain<2> dom;
  std::vector<Vec<2>> probes{Vec<2>(0, 0)};
  CandidateOptions<2> opt;
  opt.dyadic_levels = 4;
  WosOptions<2> w;
  w.tol = 1e-7;
  opt.wos = w;
  auto set = extract_singular_candidates<2>(dom, Vec<2>(0, 1e-5), probes, 0.5, 0.5, 20000, 29, opt);
  REQUIRE(set.points.size() == 1);
  CHECK(set.certificates[0] > 1.0);
}

TEST_CASE("maximum principle: half-plane vs half-plane with one extra ball") {
  auto base = std::make_shared<HalfSpaceDomain<2>>();
  BallFamily<2> one;
  one.epsilon = 0.04;
  one.entries.push_back({DyadicCube<2>{4, IVec<2>(0, 0)}, Vec<2>(0, 0), 0.1});
  auto bigger = std::make_shared<EnlargedDomain<2>>(base, one, std::vector<Vec<2>>{}, 0.04,
                                                    0.0, 0.125);
  std::vector<Ball<2>> sets{{Vec<2>(2, 0), 0.25}, {Vec<2>(-1.5, 0), 0.3}};
  auto rep = monotonicity_check<2>(*base, *bigger, Vec<2>(0, 1), sets, 40000, 101, 202);
  CHECK(rep.all_ok);

  // same-domain control: equality within 3 sigma on independent seeds
  auto ctrl = monotonicity_check<2>(*base, *base, Vec<2>(0, 1), sets, 40000, 301, 302);
  CHECK(ctrl.all_ok);
  for (const auto& row : ctrl.rows) {
    double sigma = std::hypot(row.se_small, row.se_big);
    CHECK(std::abs(row.omega_big - row.omega_small) <= 3.0 * sigma);
  }

  // oracle for the difference: an independent second run of both domains
  auto rep2 = monotonicity_check<2>(*base, *bigger, Vec<2>(0, 1), sets, 40000, 401, 402);
  for (std::size_t k = 0; k < sets.size(); ++k) {
    double d1 = rep.rows[k].omega_big - rep.rows[k].omega_small;
    double d2 = rep2.rows[k].omega_big - rep2.rows[k].omega_small;
    double sigma = std::hypot(std::hypot(rep.rows[k].se_small, rep.rows[k].se_big),
                              std::hypot(rep2.rows[k].se_small, rep2.rows[k].se_big));
    CHECK(std::abs(d1 - d2) <= 3.0 * sigma);
  }
}

TEST_CASE("walk budget error on an impossible step cap") {
  HalfSpaceDomain<2> dom;
  WosOptions<2> opt;
  opt.max_steps = 1;
  std::vector<Ball<2>> t{{Vec<2>(0, 0), 1.0}};
  CHECK_THROWS_AS(estimate_omega<2>(dom, Vec<2>(0, 1), t, 1000, 1, opt), WalkBudgetError);
}

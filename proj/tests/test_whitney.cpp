#include <doctest.h>

#include <rflab/whitney/whitney.hpp>

#include <map>
#include <set>

using namespace rflab;

namespace {

// Direct maximality oracle: a cube is in W_K iff it is admissible and its
// parent is not, both checked from first principles for the half-plane.
bool half_plane_admissible(const DyadicCube<2>& q, double K, double r0) {
  if (K * q.diam() > r0) return false;
  Box<2> kq = q.dilated_box(K);
  return kq.min()[1] > 0.0;
}

bool half_plane_member(const DyadicCube<2>& q, double K, double r0) {
  return half_plane_admissible(q, K, r0) && !half_plane_admissible(q.parent(), K, r0);
}

// exact pairwise interior-disjointness through integer ancestor walks
template <int N> bool interiors_disjoint(const std::vector<DyadicCube<N>>& cubes) {
  std::set<std::pair<int, std::array<std::int64_t, N>>> seen;
  auto key = [](const DyadicCube<N>& q) {
    std::array<std::int64_t, N> c;
    for (int i = 0; i < N; ++i) c[i] = q.corner[i];
    return std::make_pair(q.level, c);
  };
  int min_level = 1 << 30;
  for (const auto& q : cubes) min_level = std::min(min_level, q.level);
  for (const auto& q : cubes)
    if (!seen.insert(key(q)).second) return false;
  for (const auto& q : cubes) {
    DyadicCube<N> a = q;
    while (a.level > min_level) {
      a = a.parent();
      if (seen.count(key(a))) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("half-plane membership oracle: the two pinned cubes (exact)") {
  HalfSpaceDomain<2> dom;
  DomainOracle<2> oracle(dom);
  WhitneyConfig<2> cfg;
  cfg.K = 4.0;

  DyadicCube<2> in_cube{0, IVec<2>(0, 2)};   // [0,1) x [2,3)
  DyadicCube<2> out_cube{0, IVec<2>(0, 1)};  // [0,1) x [1,2)

  CHECK(whitney_member(oracle, in_cube, cfg));
  CHECK(!whitney_member(oracle, out_cube, cfg));

  // agrees with the first-principles oracle
  CHECK(half_plane_member(in_cube, 4.0, kInf));
  CHECK(!half_plane_member(out_cube, 4.0, kInf));
  // and the reason: 4Q of [0,1)x[1,2) reaches y = -0.5 < 0
  CHECK(out_cube.dilated_box(4.0).min()[1] == -0.5);
}

TEST_CASE("half-plane decomposition: membership matches the direct oracle everywhere") {
  HalfSpaceDomain<2> dom;
  DomainOracle<2> oracle(dom);
  WhitneyConfig<2> cfg;
  cfg.K = 4.0;
  cfg.roots = {DyadicCube<2>{-2, IVec<2>(0, 0)}};  // [0,4)^2
  cfg.max_level = 8;
  cfg.allow_truncation = true;

  auto dec = decompose(oracle, cfg);
  CHECK(dec.cubes.size() > 10);
  CHECK(interiors_disjoint(dec.cubes));
  for (const auto& q : dec.cubes) {
    CHECK(half_plane_member(q, 4.0, kInf));
    CHECK(q.box().min()[1] > 0.0);  // Q subset of the open set
  }
  // truncation near the boundary is expected and recorded
  CHECK(dec.truncated > 0);

  // covering: sampled interior points away from the boundary strip and the
  // region edge lie in exactly one cube
  double finest = kInf;
  for (const auto& q : dec.cubes) finest = std::min(finest, q.side());
  Philox rng(2, 0);
  Box<2> region = cfg.region();
  int tested = 0;
  for (int i = 0; i < 2000; ++i) {
    Vec<2> p = uniform_in_box(region, rng);
    if (p[1] < 4.0 * cfg.K * finest) continue;  // below truncation resolution
    if ((region.max() - p).minCoeff() < finest || (p - region.min()).minCoeff() < finest)
      continue;
    int hits = 0;
    for (const auto& q : dec.cubes) hits += q.contains(p);
    CHECK(hits == 1);
    ++tested;
  }
  CHECK(tested > 100);
}

TEST_CASE("size cap binds exactly for the punctured plane") {
  // Omega = R^2 minus a point, r0 finite: admissibility is only the size cap
  // away from the puncture, and every emitted cube obeys diam KQ <= r0.
  PointComplementOracle<2> oracle({Vec<2>(0.125, 0.125)});
  WhitneyConfig<2> cfg;
  cfg.K = 4.0;
  cfg.r0 = 1.0;
  cfg.roots = centered_roots<2>(-2);  // [-4,4)^2
  cfg.max_level = 10;
  cfg.allow_truncation = true;
  auto dec = decompose(oracle, cfg);
  CHECK(!dec.cubes.empty());
  for (const auto& q : dec.cubes) {
    CHECK(cfg.K * q.diam() <= cfg.r0);
    // maximality: the parent violates one of the two conditions
    auto p = q.parent();
    bool parent_ok = cfg.K * p.diam() <= cfg.r0 && !p.dilated_box(cfg.K).contains(Vec<2>(0.125, 0.125));
    CHECK(!parent_ok);
  }
}

TEST_CASE("verify_properties on the half-plane") {
  HalfSpaceDomain<2> dom;
  DomainOracle<2> oracle(dom);
  WhitneyConfig<2> cfg;
  cfg.K = 4.0;
  cfg.roots = {DyadicCube<2>{-2, IVec<2>(0, 0)}};
  cfg.max_level = 10;
  cfg.allow_truncation = true;
  auto dec = decompose(oracle, cfg);

  auto rep = verify_properties(dec, oracle, &dom, 4000);
  CHECK(rep.pairs_checked > 0);
  // (b) touching (K/4)-dilates have sides within one dyadic factor times 4
  CHECK(rep.prop_b_max_ratio <= 4.0);
  // (a) finite and positive
  CHECK(rep.prop_a_min > 0.0);
  CHECK(rep.prop_a_max < kInf);
  // (c) bounded overlap
  CHECK(rep.prop_c_max_overlap >= 1);
  CHECK(rep.prop_c_max_overlap <= 16);

  // stability under probe doubling (acceptance-style)
  auto rep2 = verify_properties(dec, oracle, &dom, 8000);
  CHECK(rep2.prop_b_max_ratio == rep.prop_b_max_ratio);
  CHECK(std::abs(rep2.prop_a_max - rep.prop_a_max) <= 0.1 * rep.prop_a_max);
}

TEST_CASE("single cube decomposition has overlap count 1") {
  // Ball domain with r0 small relative to the ball: the decomposition near
  // the center contains comfortably separated cubes; a single-cube family
  // trivially has overlap 1.
  HalfSpaceDomain<2> dom;
  DomainOracle<2> oracle(dom);
  WhitneyConfig<2> cfg;
  cfg.K = 4.0;
  WhitneyDecomposition<2> single;
  single.config = cfg;
  single.config.roots = {DyadicCube<2>{-2, IVec<2>(0, 0)}};
  single.cubes = {DyadicCube<2>{0, IVec<2>(1, 2)}};
  auto rep = verify_properties(single, oracle, &dom, 2000);
  CHECK(rep.prop_c_max_overlap == 1);
}

TEST_CASE("boundary_family on the half-plane: power law and covering") {
  HalfSpaceDomain<2> dom;
  std::vector<Vec<2>> e_sample{Vec<2>(0, 0)};
  double eps = 0.05;
  BoundaryFamilyOptions<2> opt;
  opt.roots = centered_roots<2>(-2);  // [-4,4)^2
  opt.max_level = 18;
  auto fam = boundary_family(dom, e_sample, eps, opt);
  REQUIRE(fam.entries.size() > 50);
  CHECK(fam.K == 512.0);  // eps^-2 = 400 rounded up to a power of two

  // interiors pairwise disjoint (exact integer arithmetic)
  std::vector<DyadicCube<2>> cubes;
  for (const auto& e : fam.entries) cubes.push_back(e.cube);
  CHECK(interiors_disjoint(cubes));

  // z_Q in Q and on the boundary; r_Q = eps * dist(z_Q, E) exactly here
  for (const auto& e : fam.entries) {
    CHECK(e.cube.contains(e.z));
    CHECK(std::abs(e.z[1]) <= 1e-12);
    CHECK(e.r == doctest::Approx(eps * e.z.norm()).epsilon(1e-12));
  }

  // log l(Q) vs log dist(z_Q, E): slope 1 across the dyadic scales
  std::map<int, int> per_level;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& e : fam.entries) {
    double x = std::log2(e.z.norm());
    double y = std::log2(e.cube.side());
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
    per_level[e.cube.level]++;
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(per_level.size() >= 6);
  CHECK(slope == doctest::Approx(1.0).epsilon(0.1));

  // l(Q)/(eps r_Q) within a bounded factor band
  CHECK(fam.c_low > 0.0);
  CHECK(fam.c_high / fam.c_low <= 16.0);

  // covering: boundary samples outside E (and above the truncation
  // resolution) lie in some family cube
  double exclusion = fam.K * std::ldexp(1.0, -opt.max_level) * 4.0;
  auto samples = dom.boundary_samples(0.01);
  int covered = 0, tested = 0;
  for (const auto& p : samples) {
    if (p.norm() < exclusion || std::abs(p[0]) > 3.9) continue;
    ++tested;
    for (const auto& e : fam.entries)
      if (e.cube.contains(p)) {
        ++covered;
        break;
      }
  }
  CHECK(tested > 100);
  CHECK(covered == tested);

  // pairwise 1-Lipschitz radius law
  for (std::size_t i = 0; i < fam.entries.size(); i += 7)
    for (std::size_t j = i + 1; j < fam.entries.size(); j += 11) {
      double lhs = std::abs(fam.entries[i].r - fam.entries[j].r);
      double rhs = eps * (fam.entries[i].z - fam.entries[j].z).norm();
      CHECK(lhs <= rhs + 1e-12);
    }
}

TEST_CASE("boundary_family rejects E covering the whole boundary") {
  HalfSpaceDomain<2> dom(1.0);  // working extent 1
  auto e_sample = dom.boundary_samples(0.002);
  BoundaryFamilyOptions<2> opt;
  opt.roots = centered_roots<2>(0);  // [-1,1)^2: E covers the whole boundary here
  opt.max_level = 12;
  CHECK_THROWS_AS(boundary_family(dom, e_sample, 0.04, opt), EmptyFamilyError);
}

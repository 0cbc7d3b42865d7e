#pragma once

#include "rflab/cli/commands.hpp"

// The full desk-scale pipeline: bounded snowflake -> harmonic estimates ->
// candidate sieve -> enlargement -> flatness certificate -> measure bound ->
// maximum-principle check, with everything bundled and hashed.
namespace rflab {

struct PipelineParams {
  SnowflakeParams snowflake{};
  EnlargeParams enlargement{};
  HarmonicParams harmonic{};
  int flatness_probes = 48;
  double flatness_cap_coeff = 1.0;  // pass iff delta_sup <= coeff * sqrt(eps)
  double thm31_slope_cap = 0.1;     // log-log slope of lhs/rhs vs log(1/r)
  double thm31_c_mu = 0.1;
  int monotonicity_sets = 10;
  std::int64_t monotonicity_n = 0;  // 0: harmonic.n
  int candidate_probes = 8;
  bool use_candidates_for_e = false;

  std::string dump(int dim, std::uint64_t seed) const {
    std::ostringstream out;
    out << "[run]\ndim=" << dim << "\nseed=" << seed << "\n";
    snowflake.dump(out);
    enlargement.dump(out);
    harmonic.dump(out);
    out << "[pipeline]\nflatness_probes=" << flatness_probes
        << "\nflatness_cap_coeff=" << fmt_g17(flatness_cap_coeff)
        << "\nthm31_slope_cap=" << fmt_g17(thm31_slope_cap)
        << "\nthm31_c_mu=" << fmt_g17(thm31_c_mu)
        << "\nmonotonicity_sets=" << monotonicity_sets
        << "\nmonotonicity_n=" << monotonicity_n
        << "\ncandidate_probes=" << candidate_probes
        << "\nuse_candidates_for_e=" << use_candidates_for_e << "\n";
    return out.str();
  }
};

template <int N>
bool cmd_pipeline(OutputBundle& bundle, const PipelineParams& pp, std::uint64_t seed) {
  ordered_json stages = ordered_json::array();
  bool all_ok = true;
  auto stage_seed = [&](const char* name) { return seed ^ fnv1a(std::string(name)); };

  // 1. bounded snowflake
  SnowflakeParams sp = pp.snowflake;
  sp.bounded = true;
  cmd_snowflake<N>(bundle, sp);
  auto gens = build_snowflake<N>(sp.template to_config<N>());
  auto base = std::make_shared<MeshDomain<N>>(gens.back().boundary());
  stages.push_back({{"stage", "snowflake"}, {"ok", true}});

  // 2. harmonic estimates at boundary probes near the bottom face
  Vec<N> pole = pp.harmonic.template pole<N>();
  std::vector<Vec<N>> probes;
  {
    auto sites = base->boundary_samples(base->diameter_hint() / 128.0);
    const double golden = 0.6180339887498949;
    double u = 0.0;
    while (int(probes.size()) < pp.candidate_probes && !sites.empty()) {
      u += golden;
      u -= std::floor(u);
      const Vec<N>& p = sites[std::size_t(u * sites.size()) % sites.size()];
      if (p[N - 1] < 0.25 && std::abs(p[0]) < 0.45) probes.push_back(p);
      if (probes.size() >= sites.size()) break;
    }
    if (probes.empty()) probes.push_back(base->nearest_boundary(Vec<N>::Zero()));
  }
  std::vector<Ball<N>> targets;
  for (const auto& p : probes)
    for (int j = 0; j < pp.harmonic.levels; ++j)
      targets.push_back({p, pp.harmonic.r0 * std::ldexp(1.0, -j)});
  WosOptions<N> wopt;
  wopt.tol = pp.harmonic.tol;
  wopt.collect_exits = true;
  auto run = cmd_wos<N>(bundle, *base, pole, targets, pp.harmonic.n, stage_seed("omega"),
                        "omega", wopt);
  stages.push_back({{"stage", "estimate_omega"},
                    {"ok", true},
                    {"trapped", run.trapped},
                    {"mean_steps", run.mean_steps}});

  // 3. candidate sieve per the lower-bound criterion
  CandidateOptions<N> copt;
  copt.dyadic_levels = pp.harmonic.levels;
  copt.wos.tol = pp.harmonic.tol;
  auto candidates = extract_singular_candidates<N>(*base, pole, probes, pp.harmonic.alpha,
                                                   pp.harmonic.r0, pp.harmonic.n,
                                                   stage_seed("candidates"), copt);
  {
    ordered_json cj;
    cj["probes_tested"] = candidates.probes_tested;
    cj["count"] = candidates.points.size();
    ordered_json pts = ordered_json::array();
    for (std::size_t i = 0; i < candidates.points.size(); ++i) {
      ordered_json e;
      ordered_json xs = ordered_json::array();
      for (int k = 0; k < N; ++k) xs.push_back(candidates.points[i][k]);
      e["xi"] = xs;
      e["certificate"] = candidates.certificates[i];
      e["r_min"] = candidates.r_min[i];
      pts.push_back(e);
    }
    cj["points"] = pts;
    bundle.write_json("candidates.json", cj);
    stages.push_back({{"stage", "candidates"}, {"ok", true}, {"count", candidates.points.size()}});
  }

  // 4. enlargement around E (configured points projected to the boundary,
  //    or the sieve output when requested and non-empty)
  EnlargeParams ep = pp.enlargement;
  if (pp.use_candidates_for_e && !candidates.points.empty()) {
    ep.e_flat.clear();
    for (const auto& p : candidates.points)
      for (int k = 0; k < N; ++k) ep.e_flat.push_back(p[k]);
  }
  ep.validate();
  std::vector<Vec<N>> e_pts;
  for (const auto& p : ep.template e_points<N>()) e_pts.push_back(base->nearest_boundary(p));
  EnlargeOptions<N> eopt;
  eopt.family.roots = centered_roots<N>(ep.root_level);
  eopt.family.max_level = ep.max_level;
  eopt.family.r0 = ep.r0;
  eopt.delta_cap = ep.delta_cap;
  eopt.skip_certify = ep.skip_certify;
  eopt.certify.fail_fast = false;
  eopt.certify.r_max = dom_r_max(*base);
  auto enlarged = enlarge<N>(std::static_pointer_cast<const DomainRep<N>>(base), e_pts,
                             ep.epsilon, eopt);
  stages.push_back({{"stage", "enlarge"},
                    {"ok", true},
                    {"entries", enlarged->family().entries.size()},
                    {"base_delta", enlarged->base_delta()}});
  bundle.set_constant("family_entries", double(enlarged->family().entries.size()));

  // 5. flatness certificate of the enlarged domain near E
  Box<N> region;
  region.setEmpty();
  for (const auto& p : e_pts) region.extend(p);
  region.min().array() -= 0.45;
  region.max().array() += 0.45;
  double delta_sup = cmd_flatness<N>(bundle, *enlarged, pp.harmonic.r0, pp.flatness_probes,
                                     "enlarged", false, &region);
  bool flat_ok = delta_sup <= pp.flatness_cap_coeff * std::sqrt(ep.epsilon);
  all_ok = all_ok && flat_ok;
  stages.push_back({{"stage", "flatness"}, {"ok", flat_ok}, {"delta_sup", delta_sup}});

  // 6. measure bound with the empirical harmonic measure
  {
    ExitCloudMeasure<N> mu(run.exits);
    auto cert = lower_bound_cert<N>(mu, e_pts, pp.thm31_c_mu, pp.harmonic.alpha, pp.harmonic.r0,
                                    pp.harmonic.levels);
    Thm31Options<N> topt;
    topt.patch.flatness.spacing_frac = 1.0 / 16.0;
    Thm31Verifier<N> verifier(enlarged, mu, topt);
    std::vector<double> radii;
    for (int j = 2; j <= 6; ++j) radii.push_back(pp.harmonic.r0 * std::ldexp(1.0, -j));
    double slope = 0.0;
    auto sweep = thm31_sweep<N>(verifier, e_pts.front(), pp.harmonic.alpha, radii, &slope);
    ordered_json tj;
    tj["hypothesis_ok"] = cert.ok;
    tj["hypothesis_worst_ratio"] = cert.worst_ratio;
    tj["sweep"] = sweep;
    tj["ratio_loglog_slope"] = slope;
    bundle.write_json("thm31.json", tj);
    bundle.set_constant("thm31_slope", slope);
    bool thm_ok = !cert.ok || slope <= pp.thm31_slope_cap;
    all_ok = all_ok && thm_ok;
    stages.push_back({{"stage", "thm31"},
                      {"ok", thm_ok},
                      {"hypothesis_ok", cert.ok},
                      {"slope", slope}});
  }

  // 7. maximum-principle monotonicity on shared boundary sets around E
  {
    std::vector<Ball<N>> sets;
    const double golden = 0.6180339887498949;
    double u = 0.37;
    for (int s = 0; s < pp.monotonicity_sets; ++s) {
      u += golden;
      u -= std::floor(u);
      const Vec<N>& c = e_pts[s % e_pts.size()];
      sets.push_back({c, 0.04 + 0.08 * u});
    }
    std::int64_t n_mono = pp.monotonicity_n > 0 ? pp.monotonicity_n : pp.harmonic.n;
    WosOptions<N> mopt;
    mopt.tol = pp.harmonic.tol;
    auto rep = monotonicity_check<N>(*base, *enlarged, pole, sets, n_mono,
                                     stage_seed("mono-a"), stage_seed("mono-b"), mopt);
    CsvWriter csv([&] {
      std::vector<std::string> h;
      for (int k = 0; k < N; ++k) h.push_back("c_" + std::to_string(k));
      h.insert(h.end(), {"r", "omega_base", "se_base", "omega_enlarged", "se_enlarged", "ok"});
      return h;
    }());
    for (const auto& row : rep.rows) {
      std::vector<double> r;
      for (int k = 0; k < N; ++k) r.push_back(row.set.center[k]);
      r.insert(r.end(), {row.set.radius, row.omega_small, row.se_small, row.omega_big,
                         row.se_big, double(row.ok)});
      csv.row(r);
    }
    bundle.write_text("monotonicity.csv", csv.str());
    all_ok = all_ok && rep.all_ok;
    stages.push_back({{"stage", "monotonicity"}, {"ok", rep.all_ok}});
  }

  ordered_json pj;
  pj["stages"] = stages;
  pj["all_certificates_passed"] = all_ok;
  bundle.write_json("pipeline.json", pj);
  return all_ok;
}

}  // namespace rflab

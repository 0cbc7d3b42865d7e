#include <CLI11.hpp>

#include <rflab/cli/commands.hpp>
#include <rflab/cli/pipeline.hpp>

#include <cstdio>
#include <string>
#include <vector>

// Command-line laboratory: snowflake construction, Whitney decompositions,
// domain enlargement, flatness certification, harmonic-measure sampling and
// the measure-bound verifier, each writing a hashed, reproducible bundle.

using namespace rflab;

namespace {

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ') {
      if (!cur.empty()) out.push_back(std::stod(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::stod(cur));
  return out;
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  for (double v : parse_doubles(s)) out.push_back(int(v));
  return out;
}

struct GlobalOpts {
  int dim = 2;
  std::string out = "out";
  std::uint64_t seed = 1;
  int threads = 0;
};

template <int N> Vec<N> as_vec(const std::vector<double>& v, const char* what) {
  if (v.size() != N)
    throw ConfigError(std::string(what) + ": expected " + std::to_string(N) + " coordinates");
  Vec<N> p;
  for (int k = 0; k < N; ++k) p[k] = v[k];
  return p;
}

void add_snowflake_flags(CLI::App* cmd, SnowflakeParams& sp) {
  cmd->add_option("--theta", sp.theta, "max profile slope in [0,1)");
  cmd->add_option("--b", sp.b, "tent height fraction");
  cmd->add_option("--freq", sp.freq, "profile frequency N (0: search)");
  cmd->add_option("--depth", sp.depth, "generations to build");
  cmd->add_option("--bounded", sp.bounded, "bounded variant (cube seed)");
  cmd->add_option("--k-max", sp.k_max, "finest face-subdivision level");
  cmd->add_option("--alpha", sp.alpha, "subdivision distance factor");
  cmd->add_option("--box-extent", sp.box_extent, "working box half-width (unbounded)");
  cmd->add_option("--max-faces", sp.max_faces, "face budget");
}

void add_enlarge_flags(CLI::App* cmd, EnlargeParams& ep, std::string& e_spec) {
  cmd->add_option("--epsilon", ep.epsilon, "ball radius fraction");
  cmd->add_option("--e", e_spec, "E sample, flattened coordinates");
  cmd->add_option("--delta-cap", ep.delta_cap, "flatness precondition cap (0: epsilon^2)");
  cmd->add_option("--r0", ep.r0, "scale cap min(r0, dist)");
  cmd->add_option("--max-level", ep.max_level, "finest dyadic level");
  cmd->add_option("--root-level", ep.root_level, "working region level");
  cmd->add_flag("--skip-certify", ep.skip_certify, "skip the flatness precondition");
}

void add_harmonic_flags(CLI::App* cmd, HarmonicParams& hp, std::string& pole_spec) {
  cmd->add_option("--pole", pole_spec, "pole coordinates");
  cmd->add_option("--n", hp.n, "walk count");
  cmd->add_option("--tol", hp.tol, "termination tolerance (0: 1e-4 diam)");
  cmd->add_option("--alpha", hp.alpha, "lower-bound exponent offset");
  cmd->add_option("--r0", hp.r0, "top radius of dyadic sweeps");
  cmd->add_option("--levels", hp.levels, "dyadic levels");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reifenberg flatness laboratory"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file with [section] blocks");

  GlobalOpts g;
  app.add_option("--dim", g.dim, "ambient dimension d+1 (2 or 3)")->check(CLI::Range(2, 3));
  app.add_option("--out", g.out, "output directory");
  app.add_option("--seed", g.seed, "root seed");
  app.add_option("--threads", g.threads, "worker threads (0: REIFENBERG_THREADS or hardware)");

  SnowflakeParams sp;
  EnlargeParams ep;
  HarmonicParams hp;
  PipelineParams pp;
  std::string domain = "halfplane";
  std::string e_spec = "0.31,0";
  std::string pole_spec;
  std::string xi_spec = "0,0";
  std::string region_spec;
  std::string fixture = "koch";
  std::string levels_spec = "2,3,4,5,6,7,8,9";
  std::vector<std::string> target_specs;
  double whitney_k = 4.0;
  double whitney_r0 = kInf;
  int max_level = 12;
  int samples = 4000;
  int probes = 48;
  double r_max = 0.0;
  int patch_probes = 4;
  int bc_depth = 7;
  double thm_alpha = 0.5;
  std::string rlevels_spec = "4,6,8,10,12";

  auto* c_snow = app.add_subcommand("snowflake", "build snowflake generations");
  add_snowflake_flags(c_snow, sp);

  auto* c_whit = app.add_subcommand("whitney", "whitney decomposition of a fixture domain");
  c_whit->add_option("--domain", domain, "halfplane | disk | snowflake");
  c_whit->add_option("--K", whitney_k, "dilation factor");
  c_whit->add_option("--r0", whitney_r0, "size cap");
  c_whit->add_option("--max-level", max_level, "finest dyadic level");
  c_whit->add_option("--samples", samples, "verification probes");
  add_snowflake_flags(c_whit, sp);

  auto* c_enl = app.add_subcommand("enlarge", "build the enlarged domain");
  c_enl->add_option("--base", domain, "halfplane | disk | snowflake");
  c_enl->add_option("--patches", patch_probes, "patches to verify");
  add_enlarge_flags(c_enl, ep, e_spec);
  add_snowflake_flags(c_enl, sp);

  auto* c_flat = app.add_subcommand("flatness", "certify one-scale flatness");
  c_flat->add_option("--domain", domain, "halfplane | disk | snowflake");
  c_flat->add_option("--r-max", r_max, "top probe radius (0: diam/4)");
  c_flat->add_option("--probes", probes, "probe count");
  c_flat->add_option("--region", region_spec, "probe region box, min then max coords");
  add_snowflake_flags(c_flat, sp);

  auto* c_wos = app.add_subcommand("wos", "walk-on-spheres estimates");
  c_wos->add_option("--domain", domain, "halfplane | disk | snowflake");
  c_wos->add_option("--target", target_specs, "target ball `x,y[,z],r` (repeatable)");
  add_harmonic_flags(c_wos, hp, pole_spec);
  add_snowflake_flags(c_wos, sp);

  auto* c_dim = app.add_subcommand("dimension", "pointwise dimension fit at a boundary point");
  c_dim->add_option("--domain", domain, "halfplane | disk | snowflake");
  c_dim->add_option("--xi", xi_spec, "boundary point");
  add_harmonic_flags(c_dim, hp, pole_spec);
  add_snowflake_flags(c_dim, sp);

  auto* c_box = app.add_subcommand("boxcount", "box-counting dimension of a fixture");
  c_box->add_option("--fixture", fixture, "koch | segment");
  c_box->add_option("--depth", bc_depth, "fixture depth");
  c_box->add_option("--levels", levels_spec, "dyadic levels, comma separated");

  auto* c_thm = app.add_subcommand("thm31", "measure bound verifier (point-mass fixture)");
  c_thm->add_option("--epsilon", ep.epsilon, "enlargement epsilon");
  c_thm->add_option("--alpha", thm_alpha, "measure exponent offset");
  c_thm->add_option("--max-level", ep.max_level, "family resolution");
  c_thm->add_option("--r-levels", rlevels_spec, "dyadic r exponents");

  auto* c_pipe = app.add_subcommand("pipeline", "full desk-scale pipeline");
  add_snowflake_flags(c_pipe, pp.snowflake);
  add_enlarge_flags(c_pipe, pp.enlargement, e_spec);
  add_harmonic_flags(c_pipe, pp.harmonic, pole_spec);
  c_pipe->add_option("--flatness-probes", pp.flatness_probes, "flatness probes");
  c_pipe->add_option("--flatness-cap-coeff", pp.flatness_cap_coeff,
                     "pass iff delta_sup <= coeff sqrt(eps)");
  c_pipe->add_option("--thm31-slope-cap", pp.thm31_slope_cap, "ratio slope cap");
  c_pipe->add_option("--monotonicity-sets", pp.monotonicity_sets, "shared boundary sets");
  c_pipe->add_option("--monotonicity-n", pp.monotonicity_n, "walks per monotonicity run");
  c_pipe->add_option("--candidate-probes", pp.candidate_probes, "sieve probes");
  c_pipe->add_flag("--use-candidates", pp.use_candidates_for_e,
                   "take E from the sieve when non-empty");
  // the bounded seed keeps its cube corners, so the pipeline's enlargement
  // precondition defaults to the permissive cap (measured delta still logged)
  pp.enlargement.delta_cap = 1.0;
  pp.enlargement.e_flat = {0.31, 0.0};
  pp.snowflake.theta = 0.001;
  pp.snowflake.depth = 2;
  pp.snowflake.k_max = 1;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (g.threads > 0) set_thread_count(g.threads);

  try {
    const int N = g.dim;
    OutputBundle bundle{g.out};
    bool ok = true;
    std::ostringstream dump;
    dump << "[run]\ndim=" << g.dim << "\nseed=" << g.seed << "\ncmd=";

    auto run2or3 = [&](auto&& fn) {
      if (N == 2)
        fn(std::integral_constant<int, 2>{});
      else
        fn(std::integral_constant<int, 3>{});
    };

    if (*c_snow) {
      dump << "snowflake\n";
      sp.dump(dump);
      run2or3([&](auto nc) { cmd_snowflake<nc()>(bundle, sp); });
    } else if (*c_whit) {
      dump << "whitney\ndomain=" << domain << "\nK=" << fmt_g17(whitney_k)
           << "\nr0=" << fmt_g17(whitney_r0) << "\nmax_level=" << max_level << "\n";
      sp.dump(dump);
      run2or3([&](auto nc) {
        cmd_whitney<nc()>(bundle, domain, sp, whitney_k, whitney_r0, max_level, samples);
      });
    } else if (*c_enl) {
      ep.e_flat = parse_doubles(e_spec);
      dump << "enlarge\nbase=" << domain << "\n";
      ep.dump(dump);
      sp.dump(dump);
      run2or3([&](auto nc) { cmd_enlarge<nc()>(bundle, domain, sp, ep, patch_probes); });
    } else if (*c_flat) {
      dump << "flatness\ndomain=" << domain << "\nr_max=" << fmt_g17(r_max)
           << "\nprobes=" << probes << "\nregion=" << region_spec << "\n";
      sp.dump(dump);
      run2or3([&](auto nc) {
        constexpr int Nd = nc();
        auto dom = make_domain<Nd>(domain, sp);
        if (region_spec.empty()) {
          cmd_flatness<Nd>(bundle, *dom, r_max, probes, "domain");
        } else {
          auto v = parse_doubles(region_spec);
          if (v.size() != 2 * Nd) throw ConfigError("--region needs 2*dim coordinates");
          Box<Nd> region;
          for (int k = 0; k < Nd; ++k) {
            region.min()[k] = v[k];
            region.max()[k] = v[Nd + k];
          }
          cmd_flatness<Nd>(bundle, *dom, r_max, probes, "domain", false, &region);
        }
      });
    } else if (*c_wos) {
      dump << "wos\ndomain=" << domain << "\ntargets=";
      for (const auto& t : target_specs) dump << t << ";";
      dump << "\n";
      if (!pole_spec.empty()) hp.pole_flat = parse_doubles(pole_spec);
      hp.dump(dump);
      sp.dump(dump);
      run2or3([&](auto nc) {
        constexpr int Nd = nc();
        auto dom = make_domain<Nd>(domain, sp);
        std::vector<Ball<Nd>> targets;
        for (const auto& t : target_specs) {
          auto v = parse_doubles(t);
          if (v.size() != Nd + 1) throw ConfigError("--target needs dim+1 numbers");
          Ball<Nd> b;
          for (int k = 0; k < Nd; ++k) b.center[k] = v[k];
          b.radius = v[Nd];
          targets.push_back(b);
        }
        if (targets.empty()) targets.push_back({Vec<Nd>::Zero(), 1.0});
        WosOptions<Nd> opt;
        opt.tol = hp.tol;
        cmd_wos<Nd>(bundle, *dom, as_vec<Nd>(hp.pole_flat, "pole"), targets, hp.n, g.seed,
                    "wos", opt);
      });
    } else if (*c_dim) {
      if (!pole_spec.empty()) hp.pole_flat = parse_doubles(pole_spec);
      dump << "dimension\ndomain=" << domain << "\nxi=" << xi_spec << "\n";
      hp.dump(dump);
      sp.dump(dump);
      run2or3([&](auto nc) {
        constexpr int Nd = nc();
        auto dom = make_domain<Nd>(domain, sp);
        cmd_dimension<Nd>(bundle, *dom, as_vec<Nd>(hp.pole_flat, "pole"),
                          as_vec<Nd>(parse_doubles(xi_spec), "xi"), hp.r0, hp.levels, hp.n,
                          g.seed);
      });
    } else if (*c_box) {
      dump << "boxcount\nfixture=" << fixture << "\ndepth=" << bc_depth
           << "\nlevels=" << levels_spec << "\n";
      cmd_boxcount(bundle, fixture, bc_depth, parse_ints(levels_spec));
    } else if (*c_thm) {
      dump << "thm31\nepsilon=" << fmt_g17(ep.epsilon) << "\nalpha=" << fmt_g17(thm_alpha)
           << "\nmax_level=" << ep.max_level << "\nr_levels=" << rlevels_spec << "\n";
      if (g.dim != 2) throw ConfigError("thm31 fixture is planar");
      auto base = std::make_shared<HalfSpaceDomain<2>>();
      std::vector<Vec<2>> e{Vec<2>(0, 0)};
      EnlargeOptions<2> eopt;
      eopt.family.roots = centered_roots<2>(-2);
      eopt.family.max_level = ep.max_level;
      eopt.certify.r_max = 1.0;
      eopt.certify_probes = 8;
      auto dom = enlarge<2>(base, e, ep.epsilon, eopt);
      PointMassMeasure<2> mu({Vec<2>(0, 0)}, {1.0});
      Thm31Options<2> topt;
      topt.patch.flatness.spacing_frac = 1.0 / 16.0;
      Thm31Verifier<2> verifier(dom, mu, topt);
      std::vector<double> radii;
      for (int k : parse_ints(rlevels_spec)) radii.push_back(std::ldexp(1.0, -k));
      double slope = 0.0;
      auto sweep = thm31_sweep<2>(verifier, Vec<2>(0, 0), thm_alpha, radii, &slope);
      ordered_json j;
      j["sweep"] = sweep;
      j["ratio_loglog_slope"] = slope;
      bundle.write_json("thm31.json", j);
      bundle.set_constant("thm31_slope", slope);
      ok = slope <= 0.0;
    } else if (*c_pipe) {
      pp.enlargement.e_flat = parse_doubles(e_spec);
      if (!pole_spec.empty()) pp.harmonic.pole_flat = parse_doubles(pole_spec);
      dump << "pipeline\n" << pp.dump(g.dim, g.seed);
      run2or3([&](auto nc) { ok = cmd_pipeline<nc()>(bundle, pp, g.seed); });
    }

    bundle.write_manifest(dump.str(), g.seed, ok);
    return ok ? 0 : 1;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

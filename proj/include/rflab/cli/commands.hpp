#pragma once

#include <map>
#include <sstream>
#include <string>

#include "rflab/cli/io.hpp"
#include "rflab/enlarge/enlarge.hpp"
#include "rflab/flatness/flatness.hpp"
#include "rflab/harmonic/wos.hpp"
#include "rflab/measure/boxcount.hpp"
#include "rflab/measure/thm31.hpp"
#include "rflab/snowflake/snowflake.hpp"
#include "rflab/whitney/whitney.hpp"

// Orchestration layer shared by the CLI binary and the acceptance suite:
// plain-struct configs, named fixtures and per-subcommand drivers writing a
// reproducible output bundle.
namespace rflab {

struct ConfigError : GeometryError {
  using GeometryError::GeometryError;
};

struct SnowflakeParams {
  double theta = 0.1;
  double b = 0.05;
  int freq = 0;
  int depth = 2;
  bool bounded = true;
  int k_max = 1;
  double alpha = 1.0;
  double box_extent = 4.0;
  std::int64_t max_faces = 4'000'000;

  void validate() const {
    if (!(theta >= 0.0 && theta < 1.0)) throw ConfigError("theta must lie in [0,1)");
    if (!(b > 0.0 && b < 0.5)) throw ConfigError("b must lie in (0,1/2)");
    if (depth < 0 || depth > 8) throw ConfigError("depth must lie in [0,8]");
    if (k_max < 1 || k_max > 4) throw ConfigError("k_max must lie in [1,4]");
  }

  template <int N> SnowflakeConfig<N> to_config() const {
    validate();
    SnowflakeConfig<N> cfg;
    cfg.theta = theta;
    cfg.b = b;
    cfg.freq = freq;
    cfg.depth = depth;
    cfg.bounded = bounded;
    cfg.subdiv = {k_max, alpha};
    cfg.box_extent = box_extent;
    cfg.max_faces = max_faces;
    return cfg;
  }

  void dump(std::ostringstream& out) const {
    out << "[snowflake]\n"
        << "theta=" << fmt_g17(theta) << "\nb=" << fmt_g17(b) << "\nfreq=" << freq
        << "\ndepth=" << depth << "\nbounded=" << bounded << "\nk_max=" << k_max
        << "\nalpha=" << fmt_g17(alpha) << "\nbox_extent=" << fmt_g17(box_extent)
        << "\nmax_faces=" << max_faces << "\n";
  }
};

struct EnlargeParams {
  double epsilon = 0.04;
  std::vector<double> e_flat;  // flattened E coordinates
  double delta_cap = 0.0;      // 0: epsilon^2
  double r0 = kInf;
  int max_level = 20;
  int root_level = -2;  // roots cover [-2^-root, 2^-root)^N
  bool skip_certify = false;

  void validate() const {
    if (!(epsilon > 0.0 && epsilon < 0.0625)) throw ConfigError("epsilon must lie in (0,1/16)");
    if (e_flat.empty()) throw ConfigError("E must contain at least one point");
  }

  template <int N> std::vector<Vec<N>> e_points() const {
    if (e_flat.size() % N != 0) throw ConfigError("E coordinate count must be a multiple of dim");
    std::vector<Vec<N>> pts;
    for (std::size_t i = 0; i + N <= e_flat.size(); i += N) {
      Vec<N> p;
      for (int k = 0; k < N; ++k) p[k] = e_flat[i + k];
      pts.push_back(p);
    }
    return pts;
  }

  void dump(std::ostringstream& out) const {
    out << "[enlargement]\nepsilon=" << fmt_g17(epsilon) << "\ndelta_cap=" << fmt_g17(delta_cap)
        << "\nr0=" << fmt_g17(r0) << "\nmax_level=" << max_level
        << "\nroot_level=" << root_level << "\nskip_certify=" << skip_certify << "\nE=";
    for (std::size_t i = 0; i < e_flat.size(); ++i) out << (i ? "," : "") << fmt_g17(e_flat[i]);
    out << "\n";
  }
};

struct HarmonicParams {
  std::vector<double> pole_flat{0.0, 0.5};
  std::int64_t n = 20000;
  double tol = 0.0;
  double alpha = 0.5;
  double r0 = 0.25;
  int levels = 5;

  template <int N> Vec<N> pole() const {
    if (pole_flat.size() != N) throw ConfigError("pole coordinate count must equal dim");
    Vec<N> p;
    for (int k = 0; k < N; ++k) p[k] = pole_flat[k];
    return p;
  }

  void dump(std::ostringstream& out) const {
    out << "[harmonic]\npole=";
    for (std::size_t i = 0; i < pole_flat.size(); ++i)
      out << (i ? "," : "") << fmt_g17(pole_flat[i]);
    out << "\nn=" << n << "\ntol=" << fmt_g17(tol) << "\nalpha=" << fmt_g17(alpha)
        << "\nr0=" << fmt_g17(r0) << "\nlevels=" << levels << "\n";
  }
};

// ---------------------------------------------------------------------------
// Named fixture domains.
// ---------------------------------------------------------------------------

template <int N>
std::shared_ptr<const DomainRep<N>> make_domain(const std::string& name,
                                                const SnowflakeParams& sp) {
  if (name == "halfplane" || name == "halfspace") return std::make_shared<HalfSpaceDomain<N>>();
  if (name == "disk" || name == "ball") return std::make_shared<BallDomain<N>>();
  if (name == "snowflake") {
    auto gens = build_snowflake<N>(sp.template to_config<N>());
    return std::make_shared<MeshDomain<N>>(gens.back().boundary());
  }
  throw ConfigError("unknown domain fixture: " + name);
}

// ---------------------------------------------------------------------------
// Subcommand drivers.
// ---------------------------------------------------------------------------

template <int N>
void cmd_snowflake(OutputBundle& bundle, const SnowflakeParams& sp) {
  auto gens = build_snowflake<N>(sp.template to_config<N>());
  std::vector<double> ms, increments;
  for (std::size_t m = 0; m < gens.size(); ++m) {
    auto mesh = gens[m].boundary();
    std::string name = "gen_" + std::to_string(m) + ".off";
    mesh.write_off(bundle.path(name).string());
    bundle.record_file(name);

    CsvWriter cubes(N == 2
                        ? std::vector<std::string>{"cx", "cy", "side", "ox", "oy", "sx", "sy"}
                        : std::vector<std::string>{"cx", "cy", "cz", "side", "ox", "oy", "oz",
                                                   "sx", "sy", "sz"});
    for (const auto& q : gens[m].cubes) {
      std::vector<double> row;
      for (int k = 0; k < N; ++k) row.push_back(q.center[k]);
      row.push_back(q.side);
      for (int k = 0; k < N; ++k) row.push_back(q.outward[k]);
      for (int k = 0; k < N; ++k) row.push_back(q.side_dir[k]);
      cubes.row(row);
    }
    bundle.write_text("cubes_" + std::to_string(m) + ".csv", cubes.str());

    CsvWriter skel([&] {
      std::vector<std::string> h;
      for (int v = 0; v < N - 1; ++v)
        for (int k = 0; k < N; ++k)
          h.push_back("p" + std::to_string(v) + "_" + std::to_string(k));
      return h;
    }());
    for (const auto& e : gens[m].skeleton) {
      std::vector<double> row;
      for (const auto& v : e.v)
        for (int k = 0; k < N; ++k) row.push_back(v[k]);
      skel.row(row);
    }
    bundle.write_text("skeleton_" + std::to_string(m) + ".csv", skel.str());
    ms.push_back(double(m));
    increments.push_back(gens[m].hausdorff_increment);
  }
  ordered_json summary;
  summary["generations"] = gens.size();
  summary["frequency"] = gens.back().freq_used;
  summary["faces_final"] = gens.back().simplices.size();
  summary["cubes_final"] = gens.back().cubes.size();
  summary["boundary_measure_final"] = gens.back().boundary_measure();
  summary["collar_measure_final"] = gens.back().collar_measure;
  ordered_json inc = ordered_json::array();
  for (double v : increments) inc.push_back(v);
  summary["hausdorff_increments"] = inc;
  bundle.write_json("snowflake.json", summary);
  bundle.write_text("increments.dat", plot_data(ms, increments));
  bundle.set_constant("snowflake_frequency", double(gens.back().freq_used));
}

template <int N>
void cmd_whitney(OutputBundle& bundle, const std::string& domain_name, const SnowflakeParams& sp,
                 double K, double r0, int max_level, int samples) {
  auto dom = make_domain<N>(domain_name, sp);
  DomainOracle<N> oracle(*dom);
  WhitneyConfig<N> cfg;
  cfg.K = K;
  cfg.r0 = r0;
  cfg.roots = centered_roots<N>(-2);
  cfg.max_level = max_level;
  cfg.allow_truncation = true;
  auto dec = decompose<N>(oracle, cfg);

  std::string cubes_txt;
  for (const auto& q : dec.cubes) {
    cubes_txt += std::to_string(q.level);
    for (int k = 0; k < N; ++k) cubes_txt += " " + std::to_string(q.corner[k]);
    cubes_txt += "\n";
  }
  bundle.write_text("cubes.txt", cubes_txt);

  auto rep = verify_properties<N>(dec, oracle, dom.get(), samples);
  ordered_json j;
  j["cube_count"] = dec.cubes.size();
  j["truncated_subtrees"] = dec.truncated;
  j["prop_a_min"] = rep.prop_a_min;
  j["prop_a_max"] = rep.prop_a_max;
  j["prop_b_max_ratio"] = rep.prop_b_max_ratio;
  j["prop_c_max_overlap"] = rep.prop_c_max_overlap;
  bundle.write_json("whitney.json", j);
  bundle.set_constant("whitney_overlap", double(rep.prop_c_max_overlap));
}

template <int N> double dom_r_max(const DomainRep<N>& dom) {
  return dom.diameter_hint() / 8.0;
}

template <int N>
std::shared_ptr<EnlargedDomain<N>> build_enlargement(const std::string& base_name,
                                                     const SnowflakeParams& sp,
                                                     const EnlargeParams& ep) {
  ep.validate();
  auto base = make_domain<N>(base_name, sp);
  EnlargeOptions<N> opt;
  opt.family.roots = centered_roots<N>(ep.root_level);
  opt.family.max_level = ep.max_level;
  opt.family.r0 = ep.r0;
  opt.delta_cap = ep.delta_cap;
  opt.skip_certify = ep.skip_certify;
  opt.certify.fail_fast = false;
  opt.certify.r_max = std::min(ep.r0, dom_r_max(*base));
  // project the configured E onto the base boundary
  std::vector<Vec<N>> e;
  for (const auto& p : ep.template e_points<N>()) e.push_back(base->nearest_boundary(p));
  return enlarge<N>(base, e, ep.epsilon, opt);
}

template <int N>
void cmd_enlarge(OutputBundle& bundle, const std::string& base_name, const SnowflakeParams& sp,
                 const EnlargeParams& ep, int patch_probes) {
  auto dom = build_enlargement<N>(base_name, sp, ep);
  const auto& fam = dom->family();

  CsvWriter csv([&] {
    std::vector<std::string> h{"level"};
    for (int k = 0; k < N; ++k) h.push_back("corner_" + std::to_string(k));
    for (int k = 0; k < N; ++k) h.push_back("z_" + std::to_string(k));
    h.push_back("r");
    return h;
  }());
  for (const auto& e : fam.entries) {
    std::vector<double> row{double(e.cube.level)};
    for (int k = 0; k < N; ++k) row.push_back(double(e.cube.corner[k]));
    for (int k = 0; k < N; ++k) row.push_back(e.z[k]);
    row.push_back(e.r);
    csv.row(row);
  }
  bundle.write_text("family.csv", csv.str());

  CsvWriter ecsv([&] {
    std::vector<std::string> h;
    for (int k = 0; k < N; ++k) h.push_back("e_" + std::to_string(k));
    return h;
  }());
  for (const auto& p : dom->e_points()) {
    std::vector<double> row;
    for (int k = 0; k < N; ++k) row.push_back(p[k]);
    ecsv.row(row);
  }
  bundle.write_text("e_sample.csv", ecsv.str());
  if (const auto* mesh = dom->base().mesh()) {
    mesh->write_off(bundle.path("base.off").string());
    bundle.record_file("base.off");
  }

  // patch reports on a deterministic spread of family entries
  ordered_json patches = ordered_json::array();
  double c2_max = 0.0, lip_max = 0.0;
  int band_violations = 0;
  const double golden = 0.6180339887498949;
  double u = 0.0;
  for (int s = 0; s < patch_probes; ++s) {
    u += golden;
    u -= std::floor(u);
    int qi = int(u * double(fam.entries.size()));
    PatchOptions<N> popt;
    auto patch = build_patch<N>(*dom, qi, popt);
    auto rep = verify_lemma23<N>(*dom, patch, 256);
    ordered_json pj;
    pj["Q"] = qi;
    pj["c2_measured"] = rep.c2_measured;
    pj["lip_measured"] = rep.lip_measured;
    pj["lip_over_sqrt_eps"] = rep.lip_over_sqrt_eps;
    pj["band_violations"] = rep.band_violations;
    pj["graph_side_failures"] = rep.graph_side_failures;
    pj["max_cloud_gap"] = rep.max_cloud_gap;
    patches.push_back(pj);
    c2_max = std::max(c2_max, rep.c2_measured);
    lip_max = std::max(lip_max, rep.lip_measured);
    band_violations += rep.band_violations;
  }
  ordered_json j;
  j["entries"] = fam.entries.size();
  j["K"] = fam.K;
  j["epsilon"] = fam.epsilon;
  j["base_delta_measured"] = dom->base_delta();
  j["c_low"] = fam.c_low;
  j["c_high"] = fam.c_high;
  j["truncated"] = fam.truncated;
  j["patches"] = patches;
  bundle.write_json("enlarge.json", j);
  bundle.set_constant("c2_measured_max", c2_max);
  bundle.set_constant("lip_measured_max", lip_max);
  bundle.set_constant("band_violations", double(band_violations));
}

template <int N>
double cmd_flatness(OutputBundle& bundle, const DomainRep<N>& dom, double r_max, int probes,
                    const std::string& tag, bool fail_fast = false,
                    const Box<N>* region = nullptr) {
  CertifyOptions<N> opt;
  opt.r_max = r_max;
  opt.fail_fast = fail_fast;
  if (region) {
    opt.restrict_region = true;
    opt.probe_region = *region;
  }
  auto res = certify_domain<N>(dom, dom.r0(), probes, opt);
  ordered_json j;
  j["probes"] = res.probes;
  j["delta_sup"] = res.delta_sup;
  j["separation_failures"] = res.separation_failures;
  j["worst_r"] = res.worst.r;
  ordered_json wx = ordered_json::array();
  for (int k = 0; k < N; ++k) wx.push_back(res.worst.x[k]);
  j["worst_x"] = wx;
  bundle.write_json("flatness_" + tag + ".json", j);
  bundle.set_constant("delta_sup_" + tag, res.delta_sup);
  return res.delta_sup;
}

template <int N>
EstimateRun<N> cmd_wos(OutputBundle& bundle, const DomainRep<N>& dom, const Vec<N>& pole,
                       const std::vector<Ball<N>>& targets, std::int64_t n, std::uint64_t seed,
                       const std::string& tag, WosOptions<N> opt = {}) {
  auto run = estimate_omega<N>(dom, pole, targets, n, seed, opt);
  CsvWriter csv([&] {
    std::vector<std::string> h;
    for (int k = 0; k < N; ++k) h.push_back("xi_" + std::to_string(k));
    h.insert(h.end(), {"r", "omega_hat", "stderr", "n", "seed"});
    return h;
  }());
  for (const auto& e : run.estimates) {
    std::vector<double> row;
    for (int k = 0; k < N; ++k) row.push_back(e.xi[k]);
    row.insert(row.end(), {e.r, e.omega_hat, e.stderr_val, double(e.n), double(e.seed)});
    csv.row(row);
  }
  bundle.write_text("estimates_" + tag + ".csv", csv.str());
  return run;
}

template <int N>
DimensionFit cmd_dimension(OutputBundle& bundle, const DomainRep<N>& dom, const Vec<N>& pole,
                           const Vec<N>& xi, double r0, int levels, std::int64_t n,
                           std::uint64_t seed) {
  std::vector<Ball<N>> targets;
  for (int j = 0; j < levels; ++j) targets.push_back({xi, r0 * std::ldexp(1.0, -j)});
  auto run = estimate_omega<N>(dom, pole, targets, n, seed);
  auto fit = dimension_fit<N>(run.estimates);
  ordered_json j;
  ordered_json xs = ordered_json::array();
  for (int k = 0; k < N; ++k) xs.push_back(xi[k]);
  j["xi"] = xs;
  j["radii"] = fit.radii;
  j["slopes"] = fit.slopes;
  j["lower_dim"] = fit.lower_dim;
  j["upper_dim"] = fit.upper_dim;
  j["slope_fit"] = fit.slope_fit;
  j["ci"] = {fit.slope_fit - 2 * fit.slope_se, fit.slope_fit + 2 * fit.slope_se};
  j["excluded_zero_mass"] = fit.excluded_zero_mass;
  bundle.write_json("dimension.json", j);
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < fit.radii.size(); ++i) {
    lx.push_back(std::log2(1.0 / fit.radii[i]));
    ly.push_back(std::log2(fit.omega[i]));
  }
  bundle.write_text("dimension.dat", plot_data(lx, ly));
  return fit;
}

inline void cmd_boxcount(OutputBundle& bundle, const std::string& fixture, int depth,
                         const std::vector<int>& levels) {
  std::vector<Vec<2>> pts;
  double covering = 0.0;
  if (fixture == "koch") {
    double spacing = 1e-4;
    pts = koch_sample(depth, spacing);
    covering = spacing / 2.0;
  } else if (fixture == "segment") {
    int m = 1 << 14;
    for (int i = 0; i < m; ++i) pts.push_back(Vec<2>((i + 0.5) / m, 0.0));
    covering = 1.0 / m;
  } else {
    throw ConfigError("unknown boxcount fixture: " + fixture);
  }
  auto bc = box_count<2>(pts, covering, levels, 1);
  CsvWriter csv({"delta", "count", "hd_estimate"});
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < bc.scales.size(); ++i) {
    csv.row({bc.scales[i], double(bc.counts[i]), bc.hd_estimates[i]});
    lx.push_back(std::log2(1.0 / bc.scales[i]));
    ly.push_back(std::log2(double(bc.counts[i])));
  }
  bundle.write_text("boxcount.csv", csv.str());
  bundle.write_text("boxcount.dat", plot_data(lx, ly));
  ordered_json j;
  j["fixture"] = fixture;
  j["dim_fit"] = bc.dim_fit;
  bundle.write_json("boxcount.json", j);
  bundle.set_constant("box_dim", bc.dim_fit);
}

template <int N>
ordered_json thm31_sweep(Thm31Verifier<N>& verifier, const Vec<N>& xi, double alpha,
                         const std::vector<double>& radii, double* slope_out) {
  ordered_json arr = ordered_json::array();
  std::vector<double> lx, ly;
  for (double r : radii) {
    auto rep = verifier.verify(xi, r, alpha);
    ordered_json j;
    ordered_json xs = ordered_json::array();
    for (int k = 0; k < N; ++k) xs.push_back(xi[k]);
    j["xi"] = xs;
    j["r"] = rep.r;
    j["lhs"] = rep.lhs;
    j["rhs"] = rep.rhs;
    j["ratio"] = rep.ratio;
    j["case"] = rep.case_id;
    j["C"] = rep.c_enlargement;
    j["n1"] = rep.n1_max_overlap;
    j["level_spread"] = rep.level_spread;
    ordered_json per = ordered_json::array();
    for (const auto& s : rep.per_scale) {
      ordered_json pj;
      pj["n"] = s.level;
      pj["count"] = s.count;
      pj["overlap"] = s.max_overlap;
      pj["lhs_n"] = s.lhs_n;
      per.push_back(pj);
    }
    j["per_n"] = per;
    arr.push_back(j);
    if (rep.lhs > 0 && rep.rhs > 0) {
      lx.push_back(std::log(1.0 / r));
      ly.push_back(std::log(rep.ratio));
    }
  }
  double slope = 0.0;
  if (lx.size() >= 2) {
    double xb = 0, yb = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      xb += lx[i];
      yb += ly[i];
    }
    xb /= double(lx.size());
    yb /= double(lx.size());
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxx += (lx[i] - xb) * (lx[i] - xb);
      sxy += (lx[i] - xb) * (ly[i] - yb);
    }
    slope = sxy / sxx;
  }
  if (slope_out) *slope_out = slope;
  return arr;
}

}  // namespace rflab

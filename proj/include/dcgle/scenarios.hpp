#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "dcgle/config.hpp"
#include "dcgle/csv.hpp"
#include "dcgle/existence.hpp"
#include "dcgle/parallel.hpp"
#include "dcgle/sim.hpp"
#include "dcgle/stability.hpp"
#include "dcgle/trivial_state.hpp"

namespace dcgle {

struct RunOptions {
  unsigned threads = 1;
  bool certify_roots = false;
};

/// A numerical failure at one grid node of a scenario.
class NodeFailure : public Error {
 public:
  using Error::Error;
};

namespace detail {

template <class F>
void at_node(const std::string& where, F&& body) {
  try {
    body();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw NodeFailure("at " + where + ": " + e.what());
  }
}

inline std::string node_name(std::initializer_list<std::pair<const char*, double>> coords) {
  std::string s;
  for (const auto& [k, v] : coords) {
    if (!s.empty()) s += ", ";
    s += std::string(k) + "=" + format_real(v);
  }
  return s;
}

inline AmplitudeBranch branch_or(const ScanConfig& s, const ModelParams& p,
                                 AmplitudeBranch fallback) {
  if (!s.branch) return fallback;
  if (*s.branch == "plus") return AmplitudeBranch::Plus;
  if (*s.branch == "minus") return AmplitudeBranch::Minus;
  return physical_branch_tag(p);
}

inline std::string branch_label(AmplitudeBranch b) { return std::string(to_string(b)); }

/// Pairs of points: explicit lists of equal length are zipped, anything else is a tensor grid.
inline std::vector<std::pair<double, double>> grid_2d(const AxisSpec& a, std::vector<double> av,
                                                      const AxisSpec& b, std::vector<double> bv,
                                                      const char* an, const char* bn) {
  std::vector<std::pair<double, double>> out;
  if (a.explicit_list() && b.explicit_list()) {
    if (av.size() != bv.size())
      throw RangeError(std::string(an) + "_values",
                       "explicit lists for " + std::string(an) + " and " + bn +
                           " are paired and must have equal length");
    for (std::size_t i = 0; i < av.size(); ++i) out.emplace_back(av[i], bv[i]);
    return out;
  }
  for (double x : av)
    for (double y : bv) out.emplace_back(x, y);
  return out;
}

inline std::vector<double> branch_omega_grid(const ScenarioConfig& c) {
  const auto& p = c.model;
  const auto r = default_frequency_range(p, c.scan.q);
  const double step = p.tau > 0.0 ? two_pi / (40.0 * p.tau) : 1e-3;
  const auto n = static_cast<std::size_t>(std::ceil((r.hi - r.lo) / step)) + 1;
  return c.scan.axis("omega").resolve(r.lo, r.hi, std::max<std::size_t>(n, 2001));
}

inline nlohmann::json axis_json(const std::vector<double>& v) {
  nlohmann::json j;
  j["count"] = v.size();
  if (!v.empty()) {
    j["first"] = v.front();
    j["last"] = v.back();
  }
  return j;
}

struct Context {
  const ScenarioConfig& config;
  const RunOptions& opt;
  std::vector<CsvArtifact>& out;

  CsvArtifact& add(std::string name, std::vector<std::string> columns) {
    out.push_back({});
    out.back().name = std::move(name);
    out.back().columns = std::move(columns);
    return out.back();
  }
};

// --- trivial state -----------------------------------------------------------------------

inline void hopf_curves(Context& ctx) {
  const auto& c = ctx.config;
  const auto omegas = c.scan.axis("omega").resolve(-5.0, 5.0, 2001);
  const auto qs = c.scan.axis("wavenumber").resolve(0.0, 0.0, 1);
  auto& a = ctx.add("hopf-curves", {"omega", "eta", "delta", "q"});
  a.meta["grids"] = {{"omega", axis_json(omegas)}, {"q", axis_json(qs)}};
  nlohmann::json skipped = nlohmann::json::array();
  for (double q : qs) {
    const auto curve = hopf_curve(c.model, q, omegas);
    for (const auto& h : curve.points) a.add_row({h.omega_c, h.eta, h.delta, h.q});
    skipped.push_back({{"q", q}, {"skipped", curve.skipped}});
  }
  a.meta["skipped_points"] = skipped;
}

inline void trivial_dispersion(Context& ctx) {
  const auto& c = ctx.config;
  const auto xis = c.scan.axis("xi").resolve(-10.0, 10.0, 2001);
  const auto qs = c.scan.axis("wavenumber").resolve(-3.0, 3.0, 601);
  auto& a = ctx.add("trivial-dispersion", {"xi", "q", "gamma"});
  a.meta["grids"] = {{"xi", axis_json(xis)}, {"q", axis_json(qs)}};
  a.rows.reserve(xis.size() * qs.size());
  for (double q : qs)
    for (double xi : xis) a.add_row({xi, q, trivial_gamma(c.model, q, xi)});
  const auto cls = classify_trivial(c.model);
  a.meta["classification"] = {{"class", static_cast<int>(cls.kind)},
                              {"two_regions", cls.two_regions},
                              {"xi_c", cls.xi_c},
                              {"q_c", cls.q_c}};
}

inline void trivial_regions(Context& ctx) {
  const auto& c = ctx.config;
  const auto& da = c.scan.axis("delta");
  const auto& ea = c.scan.axis("eta");
  const auto pts = grid_2d(da, da.resolve(-1.0, 1.0, 201), ea, ea.resolve(0.0, 1.0, 101), "delta",
                           "eta");
  auto& a = ctx.add("trivial-regions", {"delta", "eta", "class", "two_regions"});
  for (const auto& [d, e] : pts) {
    ModelParams p = c.model;
    p.delta = d;
    p.eta = e;
    const auto cls = classify_trivial(p);
    a.add_row({d, e, std::int64_t(static_cast<int>(cls.kind)), std::int64_t(cls.two_regions)});
  }
}

// --- plane-wave existence -----------------------------------------------------------------

inline void pw_roots(Context& ctx) {
  const auto& c = ctx.config;
  const auto& ax = c.scan.axis("omega");
  std::optional<FrequencyInterval> range;
  if (ax.min || ax.max) {
    const auto def = default_frequency_range(c.model, c.scan.q);
    range = FrequencyInterval{ax.min.value_or(def.lo), ax.max.value_or(def.hi)};
  }
  SearchOptions so;
  if (ax.count && range && *ax.count > 1)
    so.spacing = (range->hi - range->lo) / static_cast<double>(*ax.count - 1);
  const auto res = find_planewaves(c.model, c.scan.q, range, so);
  auto& a = ctx.add("pw-roots", {"omega", "a0", "theta", "branch"});
  for (const auto& w : res.waves) {
    if (c.scan.branch && w.branch != branch_or(c.scan, c.model, w.branch)) continue;
    a.add_row({w.wave.omega, w.wave.a0, *w.wave.theta, branch_label(w.branch)});
  }
  a.meta["resolution_warnings"] = res.resolution_warnings;
  a.meta["scan_spacing"] = res.spacing;
  const auto r = range.value_or(default_frequency_range(c.model, c.scan.q));
  a.meta["omega_range"] = {r.lo, r.hi};
}

inline Branch trace_configured_branch(const ScenarioConfig& c) {
  const auto tag = branch_or(c.scan, c.model, physical_branch_tag(c.model));
  return branch_trace(c.model, c.scan.q, branch_omega_grid(c), tag);
}

inline void emit_envelope(Context& ctx, const Branch& b, const std::string& name) {
  auto& e = ctx.add(name, {"a0", "delta_in_phase", "delta_out_of_phase"});
  for (std::size_t i = 0; i < b.envelope_in_phase.a0_delta.size(); ++i)
    e.add_row({b.envelope_in_phase.a0_delta[i].first, b.envelope_in_phase.a0_delta[i].second,
               b.envelope_out_of_phase.a0_delta[i].second});
}

inline void pw_branch(Context& ctx) {
  const auto& c = ctx.config;
  const Branch b = trace_configured_branch(c);
  auto& a = ctx.add("pw-branch", {"omega", "a0", "delta", "theta", "segment_id"});
  a.meta["branch"] = branch_label(b.tag);
  a.meta["swaps"] = b.swaps;
  a.meta["gap_points"] = b.gap_points;
  for (std::size_t s = 0; s < b.segments.size(); ++s)
    for (const auto& pt : b.segments[s].points)
      a.add_row({pt.omega, pt.a0, pt.delta, pt.theta, std::int64_t(s)});
  emit_envelope(ctx, b, "pw-branch_envelope");
}

// --- plane-wave stability -----------------------------------------------------------------

inline void pw_stability_finite(Context& ctx) {
  const auto& c = ctx.config;
  const auto& p = c.model;
  if (!(p.tau > 0.0)) throw RangeError("tau", "pw-stability-finite needs tau > 0");
  const Branch b = trace_configured_branch(c);
  const auto ks = c.scan.axis("k").resolve(-3.0, 3.0, 121);
  const auto& da = c.scan.axis("delta");
  const double dlo = da.min.value_or(-std::numeric_limits<double>::infinity());
  const double dhi = da.max.value_or(std::numeric_limits<double>::infinity());

  struct Item {
    BranchPoint pt;
    std::int64_t seg;
    RightmostRoot rr;
  };
  std::vector<Item> items;
  std::size_t counter = 0;
  for (std::size_t s = 0; s < b.segments.size(); ++s)
    for (const auto& pt : b.segments[s].points) {
      if (pt.delta < dlo || pt.delta > dhi) continue;
      if (counter++ % c.scan.stride != 0) continue;
      items.push_back({pt, std::int64_t(s), {}});
    }

  RootSearchOptions ro;
  ro.certify = ctx.opt.certify_roots;
  const double dk = ks.size() > 1 ? std::abs(ks[1] - ks[0]) : 0.0;
  parallel_for(items.size(), ctx.opt.threads, [&](std::size_t i) {
    auto& it = items[i];
    at_node(node_name({{"omega", it.pt.omega}, {"delta", it.pt.delta}}), [&] {
      ModelParams pp = p;
      pp.delta = it.pt.delta;
      const PlaneWave pw = to_planewave(c.scan.q, it.pt);
      it.rr = rightmost_root(pp, pw, ks, ro);
      if (dk > 0.0) {
        auto fine = rightmost_root(pp, pw, linspace(it.rr.argmax_k - dk, it.rr.argmax_k + dk, 11),
                                   ro);
        if (fine.max_re > it.rr.max_re) {
          fine.certification_failures += it.rr.certification_failures;
          it.rr = fine;
        }
      }
    });
  });

  auto& a = ctx.add("pw-stability-finite", {"omega", "a0", "delta", "theta", "segment_id",
                                            "max_re_lambda", "argmax_k", "class"});
  a.meta["class_encoding"] = "0 = stable, 2 = unstable (finite delay does not split weak/strong)";
  a.meta["k_grid"] = axis_json(ks);
  std::size_t warnings = 0, cert = 0;
  for (const auto& it : items) {
    warnings += it.rr.seeding_warning;
    cert += it.rr.certification_failures;
    a.add_row({it.pt.omega, it.pt.a0, it.pt.delta, it.pt.theta, it.seg, it.rr.max_re,
               it.rr.argmax_k, std::int64_t(it.rr.stable() ? 0 : 2)});
  }
  a.meta["seeding_warnings"] = warnings;
  a.meta["certification_failures"] = cert;
  emit_envelope(ctx, b, "pw-stability-finite_envelope");
}

enum class MapValue { Strong, Weak, Class };

inline void pw_map(Context& ctx, MapValue what, const std::string& name) {
  const auto& c = ctx.config;
  const auto& p = c.model;
  const auto& da = c.scan.axis("delta");
  const auto& ta = c.scan.axis("theta");
  const auto deltas = da.resolve(0.0, 1.2, 61);
  const auto thetas = ta.resolve(0.0, two_pi, 91);
  LargeDelayOptions lo;
  lo.k_grid = c.scan.axis("k").resolve(-3.0, 3.0, 121);
  lo.xi_grid = c.scan.axis("xi").resolve(-std::numbers::pi, std::numbers::pi, 126);
  const auto branch = branch_or(c.scan, p, AmplitudeBranch::Plus);
  const double q = c.scan.q;

  struct Node {
    double delta, theta;
    std::optional<PlaneWave> wave;
    double value = std::numeric_limits<double>::quiet_NaN();
    MapClass cls = MapClass::NoSolution;
  };
  std::vector<Node> nodes;
  for (const auto& [d, t] : grid_2d(da, deltas, ta, thetas, "delta", "theta"))
    nodes.push_back({d, t, std::nullopt});

  parallel_for(nodes.size(), ctx.opt.threads, [&](std::size_t i) {
    auto& n = nodes[i];
    at_node(node_name({{"delta", n.delta}, {"theta", n.theta}}), [&] {
      ModelParams pp = p;
      pp.delta = n.delta;
      try {
        n.wave = planewave_from_theta(pp, q, n.theta, branch);
      } catch (const NoRealAmplitude&) {
        return;
      }
      switch (what) {
        case MapValue::Strong:
          n.value = strong_sup(pp, q, n.theta, branch, lo.k_grid).value;
          n.cls = n.value > lo.tol_strong ? MapClass::Strong : MapClass::Stable;
          break;
        case MapValue::Weak:
          n.value = weak_sup(pp, q, n.theta, branch, lo).value;
          n.cls = n.value > lo.tol_weak ? MapClass::Weak : MapClass::Stable;
          break;
        case MapValue::Class: {
          const auto sc = classify_pw_large_delay(pp, q, n.theta, branch, lo);
          n.cls = to_map_class(sc.kind);
          n.value = sc.witness.value;
          break;
        }
      }
    });
  });

  const bool is_class = what == MapValue::Class;
  auto& a = ctx.add(name, is_class ? std::vector<std::string>{"delta", "theta", "class"}
                                   : std::vector<std::string>{"delta", "theta", "value", "class"});
  a.meta["class_encoding"] = "0 = stable, 1 = weak, 2 = strong, 3 = no solution";
  a.meta["branch"] = branch_label(branch);
  a.meta["grids"] = {{"delta", axis_json(deltas)},
                     {"theta", axis_json(thetas)},
                     {"k", axis_json(lo.k_grid)},
                     {"xi", axis_json(lo.xi_grid)}};
  if (what == MapValue::Strong) a.meta["value"] = "max Re lambda of the strong spectrum";
  if (what == MapValue::Weak) a.meta["value"] = "sup gamma of the weak spectrum";
  for (const auto& n : nodes) {
    const auto k = std::int64_t(static_cast<int>(n.cls));
    if (is_class) a.add_row({n.delta, n.theta, k});
    else a.add_row({n.delta, n.theta, n.value, k});
  }
  auto& pr = ctx.add(name + "_projection", {"delta", "a0", "theta", "half", "class", "value"});
  for (const auto& n : nodes) {
    if (!n.wave) continue;
    pr.add_row({n.delta, n.wave->a0, n.theta, std::int64_t(tube_half(n.theta)),
                std::int64_t(static_cast<int>(n.cls)), n.value});
  }
}

// --- simulation ---------------------------------------------------------------------------

struct SimulationSetup {
  Grid grid;
  PlaneWave start;
  AmplitudeBranch branch;
  Perturbation perturbation;
};

/// Picks the discrete plane wave nearest to (start_omega, start_a0), or the largest one when
/// no target is given. Frequencies are those of the discretized system.
inline SimulationSetup simulation_setup(const ScenarioConfig& c) {
  const auto& s = c.simulation;
  SimulationSetup out{Grid(s.n_points, s.length), {}, AmplitudeBranch::Plus, {}};
  if (!out.grid.mode_of(c.scan.q))
    throw InadmissibleWavenumber("q = " + format_real(c.scan.q) + " is not a multiple of 2 pi / " +
                                 format_real(s.length));
  const double qe = effective_wavenumber(out.grid, c.scan.q);
  const auto found = find_planewaves(c.model, qe);
  if (found.waves.empty()) throw NoRealAmplitude("no plane wave with this wavenumber");
  const FoundWave* best = nullptr;
  double score = std::numeric_limits<double>::infinity();
  for (const auto& w : found.waves) {
    double d;
    if (s.start_omega || s.start_a0) {
      const double dw = s.start_omega ? w.wave.omega - *s.start_omega : 0.0;
      const double da = s.start_a0 ? w.wave.a0 - *s.start_a0 : 0.0;
      d = std::hypot(dw, da);
    } else {
      d = -w.wave.a0;
    }
    if (d < score) {
      score = d;
      best = &w;
    }
  }
  out.start = best->wave;
  out.start.q = c.scan.q;
  out.branch = best->branch;
  const double amp = s.perturbation_relative * out.start.a0;
  if (s.perturbation == "modal")
    out.perturbation = Perturbation::modal(s.perturbation_k.value_or(out.grid.wavenumber_step()), amp);
  else if (s.perturbation == "noise")
    out.perturbation = Perturbation::noise(amp, s.seed);
  return out;
}

inline void simulate(Context& ctx) {
  const auto& c = ctx.config;
  const auto& s = c.simulation;
  const auto setup = simulation_setup(c);
  const auto hist = make_initial_history(setup.grid, setup.start, setup.perturbation);
  IntegratorOptions io;
  io.rtol = s.rtol;
  io.atol = s.atol;
  io.snapshot_every = s.snapshot_every;
  io.observe_every = s.observe_every;
  const auto res = integrate(c.model, setup.grid, hist, s.t_end, io);

  auto& snap = ctx.add("simulate_snapshots", {"t", "j", "x", "re", "im"});
  snap.rows.reserve(res.snapshots.size() * setup.grid.n_points);
  for (const auto& st : res.snapshots)
    for (std::size_t j = 0; j < st.values.size(); ++j)
      snap.add_row({st.t, std::int64_t(j), setup.grid.x(j), st.values[j].real(),
                    st.values[j].imag()});
  auto& obs = ctx.add("simulate_observables", {"t", "mean_amp", "max_amp", "dominant_q",
                                               "omega_est", "defect_count"});
  for (const auto& o : res.observables)
    obs.add_row({o.t, o.mean_amp, o.max_amp, o.dominant_q, o.omega_est,
                 std::int64_t(o.defect_count)});

  const double window = s.estimate_window.value_or(c.model.tau > 0.0 ? c.model.tau : 10.0);
  std::vector<FieldState> win;
  for (const auto& st : res.snapshots)
    if (st.t >= res.final_state.t - window) win.push_back(st);
  if (win.empty()) win.push_back(res.final_state);
  const auto est = estimate_planewave(win, setup.grid);
  const nlohmann::json start = {{"q", setup.start.q},
                                {"omega", setup.start.omega},
                                {"a0", setup.start.a0},
                                {"branch", branch_label(setup.branch)}};
  const nlohmann::json fin = {{"q", est.q},
                              {"omega", est.omega},
                              {"a0", est.a0},
                              {"is_planewave", est.is_planewave},
                              {"modulus_variation", est.modulus_variation},
                              {"peak_power", est.peak_power},
                              {"window", window}};
  for (auto* a : {&snap, &obs}) {
    a->meta["start_wave"] = start;
    a->meta["final_estimate"] = fin;
    a->meta["steps"] = {{"accepted", res.accepted}, {"rejected", res.rejected}};
  }
}

}  // namespace detail

/// Runs the configured scenario, appending artifacts to `out` as they are produced so a
/// failure leaves the finished ones in place.
inline void run_scenario(const ScenarioConfig& c, std::vector<CsvArtifact>& out,
                         const RunOptions& opt = {}) {
  validate(c);
  out.reserve(out.size() + 4);  // no scenario emits more; keeps artifact references stable
  detail::Context ctx{c, opt, out};
  const auto& s = c.scenario;
  if (s == "hopf-curves") detail::hopf_curves(ctx);
  else if (s == "trivial-dispersion") detail::trivial_dispersion(ctx);
  else if (s == "trivial-regions") detail::trivial_regions(ctx);
  else if (s == "pw-roots") detail::pw_roots(ctx);
  else if (s == "pw-branch") detail::pw_branch(ctx);
  else if (s == "pw-stability-finite") detail::pw_stability_finite(ctx);
  else if (s == "pw-strong-map") detail::pw_map(ctx, detail::MapValue::Strong, s);
  else if (s == "pw-weak-map") detail::pw_map(ctx, detail::MapValue::Weak, s);
  else if (s == "pw-class-map") detail::pw_map(ctx, detail::MapValue::Class, s);
  else if (s == "simulate") detail::simulate(ctx);
  else throw RangeError("scenario", "unknown scenario '" + s + "'");
}

inline std::vector<CsvArtifact> run_scenario(const ScenarioConfig& c, const RunOptions& opt = {}) {
  std::vector<CsvArtifact> out;
  run_scenario(c, out, opt);
  return out;
}

/// Fills the metadata every artifact carries: resolved config, version, status, wall time.
inline void stamp_metadata(std::vector<CsvArtifact>& arts, const ScenarioConfig& c,
                           const RunOptions& opt, double wall_seconds,
                           const std::optional<std::string>& failure) {
  for (auto& a : arts) {
    a.meta["scenario"] = c.scenario;
    a.meta["config"] = serialize_config(c);
    a.meta["tool"] = "dcgle";
    a.meta["version"] = tool_version;
    a.meta["threads"] = opt.threads;
    a.meta["certify_roots"] = opt.certify_roots;
    a.meta["wall_time_s"] = wall_seconds;
    a.meta["status"] = failure ? "FAILED" : "ok";
    if (failure) a.meta["failure"] = *failure;
  }
}

}  // namespace dcgle

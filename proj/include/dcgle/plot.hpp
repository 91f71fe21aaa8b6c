#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "dcgle/csv.hpp"
#include "dcgle/error.hpp"

namespace dcgle {

namespace detail {

struct PlotSchema {
  const char* tag;
  std::vector<std::string> columns;
  const char* body;  ///< python, with the CSV loaded into `d` (a dict of numpy columns)
};

inline const std::vector<PlotSchema>& plot_schemas() {
  static const std::vector<PlotSchema> s = {
      {"hopf-curves", {"omega", "eta", "delta", "q"}, R"(fig, ax = plt.subplots()
for q in np.unique(d["q"]):
    m = d["q"] == q
    ax.plot(d["delta"][m], d["eta"][m], ".", ms=1, label=f"q={q:g}")
lo, hi = np.min(d["delta"]), np.max(d["delta"])
x = np.linspace(min(lo, -1.0), 0.0, 200)
ax.fill_between(x, -np.abs(x), np.abs(x), color="0.85", label="|eta| < -delta")
ax.set_xlabel("delta")
ax.set_ylabel("eta")
ax.legend()
)"},
      {"trivial-dispersion", {"xi", "q", "gamma"}, R"(xi = np.unique(d["xi"])
q = np.unique(d["q"])
g = d["gamma"].reshape(len(q), len(xi))
fig, ax = plt.subplots()
im = ax.pcolormesh(xi, q, g, shading="auto", cmap="RdBu_r", vmin=-2, vmax=2)
ax.contour(xi, q, g, levels=[0.0], colors="k")
fig.colorbar(im, label="gamma")
ax.set_xlabel("xi")
ax.set_ylabel("q")
)"},
      {"trivial-regions", {"delta", "eta", "class", "two_regions"}, R"(fig, ax = plt.subplots()
sc = ax.scatter(d["delta"], d["eta"], c=d["class"], cmap="viridis", vmin=0, vmax=2, s=4)
fig.colorbar(sc, label="0 stable, 1 weak, 2 strong")
ax.set_xlabel("delta")
ax.set_ylabel("eta")
)"},
      {"pw-roots", {"omega", "a0", "theta", "branch"}, R"(fig, ax = plt.subplots()
ax.plot(d["omega"], d["a0"], "o", ms=3)
ax.set_xlabel("omega")
ax.set_ylabel("a0")
)"},
      {"pw-branch", {"omega", "a0", "delta", "theta", "segment_id"}, R"(fig, ax = plt.subplots()
for s in np.unique(d["segment_id"]):
    m = d["segment_id"] == s
    ax.plot(d["delta"][m], d["a0"][m], "-", lw=0.8)
ax.set_xlabel("delta")
ax.set_ylabel("a0")
)"},
      {"pw-stability-finite",
       {"omega", "a0", "delta", "theta", "segment_id", "max_re_lambda", "argmax_k", "class"},
       R"(fig, ax = plt.subplots()
st = d["class"] == 0
ax.plot(d["delta"][~st], d["a0"][~st], ".", ms=2, color="tab:red", label="unstable")
ax.plot(d["delta"][st], d["a0"][st], ".", ms=2, color="tab:green", label="stable")
ax.set_xlabel("delta")
ax.set_ylabel("a0")
ax.legend()
)"},
      {"pw-strong-map", {"delta", "theta", "value", "class"}, R"(th = np.unique(d["theta"])
de = np.unique(d["delta"])
v = d["value"].reshape(len(de), len(th))
fig, ax = plt.subplots()
im = ax.pcolormesh(th, de, v, shading="auto", cmap="RdBu_r")
ax.contour(th, de, np.nan_to_num(v, nan=-1.0), levels=[0.0], colors="k")
fig.colorbar(im, label="max Re lambda")
ax.set_xlabel("theta")
ax.set_ylabel("delta")
)"},
      {"pw-weak-map", {"delta", "theta", "value", "class"}, R"(th = np.unique(d["theta"])
de = np.unique(d["delta"])
v = d["value"].reshape(len(de), len(th))
fig, ax = plt.subplots()
im = ax.pcolormesh(th, de, v, shading="auto", cmap="RdBu_r")
ax.contour(th, de, np.nan_to_num(v, nan=-1.0), levels=[0.0], colors="k")
fig.colorbar(im, label="sup gamma")
ax.set_xlabel("theta")
ax.set_ylabel("delta")
)"},
      {"pw-class-map", {"delta", "theta", "class"}, R"(th = np.unique(d["theta"])
de = np.unique(d["delta"])
c = d["class"].reshape(len(de), len(th))
cmap = matplotlib.colors.ListedColormap(["0.3", "0.75", "1.0", "tab:blue"])
fig, ax = plt.subplots()
ax.pcolormesh(th, de, c, shading="auto", cmap=cmap, vmin=-0.5, vmax=3.5)
ax.set_xlabel("theta")
ax.set_ylabel("delta")
ax.set_title("dark: stable, light: weak, white: strong, blue: no solution")
)"},
      {"simulate", {"t", "j", "x", "re", "im"}, R"(t = np.unique(d["t"])
x = np.unique(d["x"])
re = d["re"].reshape(len(t), len(x))
fig, ax = plt.subplots()
im = ax.pcolormesh(x, t, re, shading="auto", cmap="RdBu_r")
fig.colorbar(im, label="Re A")
ax.set_xlabel("x")
ax.set_ylabel("t")
)"},
      {"simulate-observables",
       {"t", "mean_amp", "max_amp", "dominant_q", "omega_est", "defect_count"},
       R"(fig, ax = plt.subplots(2, 1, sharex=True)
ax[0].plot(d["t"], d["mean_amp"], label="mean |A|")
ax[0].plot(d["t"], d["max_amp"], label="max |A|")
ax[0].legend()
ax[1].plot(d["t"], d["dominant_q"], ".", ms=2)
ax[1].set_ylabel("dominant q")
ax[1].set_xlabel("t")
)"},
  };
  return s;
}

}  // namespace detail

/// Figure tags with a plot template.
inline std::vector<std::string> plot_tags() {
  std::vector<std::string> out;
  for (const auto& s : detail::plot_schemas()) out.emplace_back(s.tag);
  return out;
}

/// Default figure tag of an artifact, or empty when it has no template.
inline std::string default_plot_tag(const CsvArtifact& a) {
  if (a.name == "simulate_snapshots") return "simulate";
  if (a.name == "simulate_observables") return "simulate-observables";
  for (const auto& s : detail::plot_schemas())
    if (a.name == s.tag) return s.tag;
  return {};
}

/// Self-contained matplotlib script that renders `figure_tag` from the artifact's CSV file.
/// Throws SchemaMismatch when the artifact lacks the columns the figure needs.
inline std::string emit_plot_script(const CsvArtifact& a, const std::string& figure_tag) {
  const detail::PlotSchema* schema = nullptr;
  for (const auto& s : detail::plot_schemas())
    if (figure_tag == s.tag) schema = &s;
  if (!schema) throw SchemaMismatch("no plot template for '" + figure_tag + "'");
  for (const auto& col : schema->columns)
    if (std::find(a.columns.begin(), a.columns.end(), col) == a.columns.end())
      throw SchemaMismatch("artifact '" + a.name + "' has no column '" + col + "' required by '" +
                           figure_tag + "'");
  std::string s;
  s += "import sys\n";
  s += "import numpy as np\n";
  s += "import matplotlib\n";
  s += "matplotlib.use(\"Agg\")\n";
  s += "import matplotlib.pyplot as plt\n\n";
  s += "raw = np.genfromtxt(\"" + a.name + ".csv\", delimiter=\",\", names=True, dtype=None, "
       "encoding=\"utf-8\")\n";
  s += "d = {n: raw[n] for n in raw.dtype.names}\n\n";
  s += schema->body;
  s += "\nfig.savefig(sys.argv[1] if len(sys.argv) > 1 else \"" + a.name +
       ".png\", dpi=150, bbox_inches=\"tight\")\n";
  return s;
}

}  // namespace dcgle

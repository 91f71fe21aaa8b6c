#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dcgle/existence.hpp"
#include "dcgle/sim.hpp"

using namespace dcgle;
constexpr double pi = std::numbers::pi;

namespace {

double l2_norm(const Field& a) {
  double s = 0.0;
  for (const auto& v : a) s += std::norm(v);
  return std::sqrt(s);
}

double max_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

// Continuum plane wave with wavenumber q; exact for the lattice when q is replaced by the
// effective wavenumber.
PlaneWave lattice_wave(const ModelParams& p, const Grid& g, double q, bool largest = true) {
  const auto found = find_planewaves(p, effective_wavenumber(g, q));
  if (found.waves.empty()) throw NoRealAmplitude("no wave");
  PlaneWave best = found.waves.front().wave;
  for (const auto& w : found.waves)
    if ((w.wave.a0 > best.a0) == largest) best = w.wave;
  best.q = q;
  return best;
}

}  // namespace

TEST(Grid, RejectsTooFewPoints) {
  EXPECT_THROW(Grid(8, 1.0), RangeError);
  const Grid g;
  EXPECT_EQ(g.n_points, 500u);
  EXPECT_DOUBLE_EQ(g.length, 32.0 * pi);
  EXPECT_EQ(g.mode_of(0.25), 4);
  EXPECT_EQ(g.mode_of(1.0), 16);
  EXPECT_FALSE(g.mode_of(0.3).has_value());
}

TEST(History, UnperturbedWaveSolvesTheLatticeUpToTruncation) {
  auto residual = [](std::size_t n) {
    const Grid g(n, 32.0 * pi);
    const auto p = ModelParams::quintic(0.66, 0.2, 20.0);
    const auto found = find_planewaves(p, 1.0);
    PlaneWave pw = found.waves.back().wave;
    const auto hist = make_initial_history(g, pw);
    const Field a = hist(0.0), ad = hist(-p.tau);
    Field f;
    rhs(a, ad, p, g, f);
    double m = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      m = std::max(m, std::abs(f[j] - cplx(0.0, pw.omega) * a[j]));
    return m;
  };
  const double r1 = residual(250), r2 = residual(500);
  EXPECT_LT(r2, 0.01);
  EXPECT_NEAR(r1 / r2, 4.0, 0.1);
}

TEST(History, ModalPerturbationHasTwoSideModes) {
  const Grid g;
  const double k = g.wavenumber_step();
  const auto hist = make_initial_history(g, {1.0, 0.5, 1.0}, Perturbation::modal(k, 1e-3));
  const Field f = forward_dft(hist(0.0));
  double total = 0.0;
  for (const auto& v : f) total += std::norm(v);
  std::vector<double> qs;
  for (std::size_t b = 0; b < f.size(); ++b)
    if (std::norm(f[b]) > 1e-20 * total) qs.push_back(g.bin_wavenumber(b));
  ASSERT_EQ(qs.size(), 3u);
  std::sort(qs.begin(), qs.end());
  EXPECT_NEAR(qs[0], 1.0 - k, 1e-12);
  EXPECT_NEAR(qs[1], 1.0, 1e-12);
  EXPECT_NEAR(qs[2], 1.0 + k, 1e-12);
}

TEST(History, NoiseIsReproducible) {
  const Grid g;
  const PlaneWave pw{0.0, 1.0, 1.0};
  const Field a = make_initial_history(g, pw, Perturbation::noise(1e-3, 1))(0.0);
  const Field b = make_initial_history(g, pw, Perturbation::noise(1e-3, 1))(0.0);
  const Field c = make_initial_history(g, pw, Perturbation::noise(1e-3, 2))(0.0);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_LE(max_diff(a, make_initial_history(g, pw)(0.0)), std::sqrt(2.0) * 1e-3);
}

TEST(History, RejectsOffGridWavenumbers) {
  const Grid g;
  EXPECT_THROW(make_initial_history(g, {0.3, 0.0, 1.0}), InadmissibleWavenumber);
  EXPECT_THROW(make_initial_history(g, {1.0, 0.0, 1.0}, Perturbation::modal(0.1, 1e-3)),
               InadmissibleWavenumber);
  EXPECT_THROW(make_initial_history(g, {1.0, 0.0, 1.0}, Perturbation::modal(0.25, -1.0)),
               RangeError);
}

TEST(Rhs, UniformStateIsPointwise) {
  const Grid g(32, 10.0);
  const auto p = ModelParams::quintic(0.3);
  const cplx a0(0.7, -0.4);
  Field a(g.n_points, a0), f;
  rhs(a, a, p, g, f);
  const double m = std::norm(a0);
  const cplx expect = (p.delta + cplx(p.epsilon, 1.0) * m + cplx(p.mu, p.nu) * m * m) * a0;
  for (const auto& v : f) EXPECT_LT(std::abs(v - expect), 1e-15);
}

TEST(Rhs, DiscretePlaneWaveUsesLatticeSymbol) {
  const Grid g;
  const auto p = ModelParams::quintic(0.2, 0.3, 5.0, 0.7);
  const double q = 3.0 * g.wavenumber_step();
  const double a0 = 0.9;
  const double qe2 = 2.0 / (g.spacing() * g.spacing()) * (1.0 - std::cos(q * g.spacing()));
  Field a(g.n_points), ad(g.n_points), f;
  for (std::size_t j = 0; j < g.n_points; ++j) {
    a[j] = std::polar(a0, q * g.x(j));
    ad[j] = 0.5 * a[j];
  }
  rhs(a, ad, p, g, f);
  const double s = a0 * a0;
  const cplx coeff = -cplx(p.beta, 0.5) * qe2 + p.delta + cplx(p.epsilon, 1.0) * s +
                     cplx(p.mu, p.nu) * s * s + 0.5 * p.eta * std::polar(1.0, p.phi);
  for (std::size_t j = 0; j < g.n_points; ++j) EXPECT_LT(std::abs(f[j] - coeff * a[j]), 1e-12);
}

TEST(Rhs, LinearInFeedbackStrength) {
  const Grid g(64, 20.0);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  Field a(g.n_points), ad(g.n_points);
  for (std::size_t j = 0; j < g.n_points; ++j) {
    a[j] = {n(rng), n(rng)};
    ad[j] = {n(rng), n(rng)};
  }
  auto eval = [&](double eta) {
    Field f;
    rhs(a, ad, ModelParams::quintic(0.1, eta, 3.0, 1.2), g, f);
    return f;
  };
  const Field f0 = eval(0.0), f1 = eval(0.3), f2 = eval(0.6);
  for (std::size_t j = 0; j < g.n_points; ++j)
    EXPECT_LT(std::abs((f2[j] - f0[j]) - 2.0 * (f1[j] - f0[j])), 1e-13 * std::max(1.0, std::abs(f0[j])));
}

TEST(HistoryBuffer, HermiteInterpolationIsFourthOrder) {
  const Grid g(16, 1.0);
  const double w = 1.3;
  auto err = [&](double h) {
    HistoryBuffer buf(make_initial_history(g, {0.0, w, 1.0}));
    for (double t = 0.0; t <= 2.0 + 1e-12; t += h)
      buf.push(t, Field(g.n_points, std::polar(1.0, w * t)),
               Field(g.n_points, cplx(0.0, w) * std::polar(1.0, w * t)));
    double m = 0.0;
    Field out;
    for (double t = 0.05; t < 1.9; t += 0.0137) {
      buf.eval(t, out);
      m = std::max(m, std::abs(out[0] - std::polar(1.0, w * t)));
    }
    buf.eval(-0.5, out);
    EXPECT_LT(std::abs(out[0] - std::polar(1.0, -w * 0.5)), 1e-15);
    return m;
  };
  EXPECT_NEAR(err(0.1) / err(0.05), 16.0, 2.0);
}

TEST(Integrate, StablePlaneWaveDoesNotDrift) {
  const Grid g;
  const auto p = ModelParams::quintic(0.4, 0.2, 5.0);
  const auto pw = lattice_wave(p, g, 0.0);
  IntegratorOptions opt;
  opt.observe_every = 1.0;
  const auto res = integrate(p, g, make_initial_history(g, pw), 10.0 * p.tau, opt);
  for (const auto& o : res.observables) {
    EXPECT_LT(std::abs(o.mean_amp - pw.a0) / pw.a0, 1e-4) << "t=" << o.t;
    EXPECT_EQ(o.dominant_q, 0.0);
    EXPECT_EQ(o.defect_count, 0u);
  }
  EXPECT_NEAR(res.observables.back().omega_est, pw.omega, 1e-4);
}

TEST(Integrate, FifthOrderUnderForcedSteps) {
  const Grid g(32, 20.0);
  const ModelParams p = ModelParams::quintic(0.1);
  const auto hist = make_initial_history(g, {0.0, 0.0, 0.1},
                                         Perturbation::modal(g.wavenumber_step(), 0.02));
  auto run = [&](double h) {
    IntegratorOptions opt;
    opt.fixed_step = h;
    return integrate(p, g, hist, 2.0, opt).final_state.values;
  };
  const Field ref = run(0.0125);
  const double e1 = max_diff(run(0.4), ref);
  const double e2 = max_diff(run(0.2), ref);
  EXPECT_NEAR(e1 / e2, 32.0, 8.0);
}

TEST(Integrate, ErrorFollowsTolerance) {
  const Grid g(32, 20.0);
  const ModelParams p = ModelParams::quintic(0.1);
  const auto hist = make_initial_history(g, {0.0, 0.0, 0.1},
                                         Perturbation::modal(g.wavenumber_step(), 0.02));
  auto run = [&](double tol) {
    IntegratorOptions opt;
    opt.rtol = tol;
    opt.atol = 1e-3 * tol;
    return integrate(p, g, hist, 20.0, opt).final_state.values;
  };
  const Field ref = run(1e-12);
  const double e6 = max_diff(run(1e-6), ref);
  const double e8 = max_diff(run(1e-8), ref);
  EXPECT_GT(e6 / e8, 10.0);
  EXPECT_LT(e6, 1e-4);
}

TEST(Integrate, PureDispersionConservesNormToTolerance) {
  const Grid g(64, 20.0);
  ModelParams p{};
  p.beta = 0.0;
  p.epsilon = 0.0;
  p.mu = 0.0;
  p.nu = 0.0;
  const auto hist = make_initial_history(g, {0.0, 0.0, 1.0}, Perturbation::noise(0.5, 3));
  const double n0 = l2_norm(hist(0.0));
  auto drift = [&](double tol) {
    IntegratorOptions opt;
    opt.rtol = tol;
    opt.atol = 1e-3 * tol;
    opt.snapshot_every = 5.0;
    const auto res = integrate(p, g, hist, 50.0, opt);
    double m = 0.0;
    for (const auto& s : res.snapshots) m = std::max(m, std::abs(l2_norm(s.values) / n0 - 1.0));
    return m;
  };
  const double d6 = drift(1e-6), d7 = drift(1e-7);
  EXPECT_LT(d6, 100.0 * 1e-6);
  EXPECT_LT(d7, 100.0 * 1e-7);
  EXPECT_GT(d6 / d7, 8.0);
}

TEST(Integrate, RejectsBadArguments) {
  const Grid g(32, 10.0);
  const auto hist = make_initial_history(g, {0.0, 0.0, 1.0});
  EXPECT_THROW(integrate(ModelParams::quintic(), g, hist, 0.0), RangeError);
  IntegratorOptions opt;
  opt.rtol = 0.0;
  EXPECT_THROW(integrate(ModelParams::quintic(), g, hist, 1.0, opt), RangeError);
}

TEST(Integrate, BlowupIsReported) {
  const Grid g(32, 10.0);
  ModelParams p = ModelParams::quintic(1.0);
  p.mu = 1.0;
  const auto hist = make_initial_history(g, {0.0, 0.0, 2.0});
  try {
    integrate(p, g, hist, 100.0);
    FAIL() << "expected a failure";
  } catch (const StepSizeUnderflow&) {
  } catch (const NonFiniteFieldAt& e) {
    EXPECT_TRUE(detail::all_finite(e.last_good().values));
  }
}

TEST(Integrate, SnapshotCadence) {
  const Grid g(32, 10.0);
  const auto p = ModelParams::quintic(0.3, 0.2, 2.0);
  IntegratorOptions opt;
  opt.snapshot_every = 1.0;
  opt.observe_every = 0.5;
  const auto res = integrate(p, g, make_initial_history(g, lattice_wave(p, g, 0.0)), 5.0, opt);
  ASSERT_GE(res.snapshots.size(), 6u);
  for (std::size_t i = 1; i < res.snapshots.size(); ++i)
    EXPECT_GT(res.snapshots[i].t, res.snapshots[i - 1].t);
  EXPECT_EQ(res.final_state.t, 5.0);
  EXPECT_EQ(res.snapshots.back().t, 5.0);
  for (const auto& o : res.observables) {
    EXPECT_GE(o.mean_amp, 0.0);
    EXPECT_TRUE(g.mode_of(o.dominant_q).has_value());
  }
}

TEST(Defects, CountsDeepMinima) {
  Field a(100, cplx(1.0));
  EXPECT_EQ(count_defects(a), 0u);
  a[10] = 0.01;
  a[60] = cplx(0.0, 0.05);
  EXPECT_EQ(count_defects(a), 2u);
}

TEST(EstimatePlaneWave, RecoversExactWave) {
  const Grid g;
  const PlaneWave pw{0.75, 0.4321, 1.234};
  const auto hist = make_initial_history(g, pw);
  std::vector<FieldState> window;
  for (int i = 0; i <= 40; ++i) window.push_back({0.5 * i, hist(0.5 * i)});
  const auto e = estimate_planewave(window, g);
  EXPECT_NEAR(e.q, pw.q, 1e-12);
  EXPECT_NEAR(e.omega, pw.omega, 1e-8);
  EXPECT_NEAR(e.a0, pw.a0, 1e-8);
  EXPECT_TRUE(e.is_planewave);
}

TEST(EstimatePlaneWave, ToleratesOnePercentNoise) {
  const Grid g;
  const PlaneWave pw{1.0, 0.626, 1.11};
  const auto hist = make_initial_history(g, pw);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<FieldState> window;
    for (int i = 0; i <= 40; ++i) {
      Field f = hist(0.5 * i);
      for (auto& v : f) v += 0.01 * pw.a0 * cplx(u(rng), u(rng));
      window.push_back({0.5 * i, f});
    }
    const auto e = estimate_planewave(window, g);
    EXPECT_EQ(e.q, pw.q);
    EXPECT_NEAR(e.omega, pw.omega, 0.02 * pw.omega) << "seed " << seed;
    EXPECT_NEAR(e.a0, pw.a0, 0.02 * pw.a0) << "seed " << seed;
  }
}

TEST(EstimatePlaneWave, FlagsModulatedStates) {
  const Grid g;
  const auto hist = make_initial_history(g, {1.0, 0.5, 1.0},
                                         Perturbation::modal(g.wavenumber_step(), 0.1));
  const auto e = estimate_planewave({{0.0, hist(0.0)}}, g);
  EXPECT_FALSE(e.is_planewave);
  EXPECT_THROW(estimate_planewave({}, g), RangeError);
}

TEST(Integrate, WeaklyUnstableWaveStaysCloseForTenDelays) {
  const Grid g;
  const double theta = 3.94, q = 1.0;
  auto p = ModelParams::quintic(0.56, 0.2, 50.0);
  PlaneWave pw = planewave_from_theta(p, effective_wavenumber(g, q), theta, AmplitudeBranch::Plus);
  p.phi = wrap_angle(pw.omega * p.tau + pi - theta);
  pw.q = q;
  IntegratorOptions opt;
  opt.snapshot_every = 0.5 * p.tau;
  const auto res = integrate(p, g, make_initial_history(g, pw, Perturbation::noise(1e-6, 1)),
                             10.0 * p.tau, opt);
  for (const auto& s : res.snapshots) {
    Field dev = s.values;
    for (std::size_t j = 0; j < g.n_points; ++j)
      dev[j] -= pw.a0 * std::polar(1.0, q * g.x(j) + pw.omega * s.t);
    EXPECT_LT(max_modulus(dev), 1e-3) << "t=" << s.t;
  }
}

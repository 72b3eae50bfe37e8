// Acceptance suite: one criterion per section, each printing a PASS/FAIL
// line with the measured quantity against its pinned tolerance. The binary
// exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "thermoshift/config.hpp"
#include "thermoshift/counting.hpp"
#include "thermoshift/fuchsian.hpp"
#include "thermoshift/manhattan.hpp"
#include "thermoshift/thermo.hpp"

using namespace thermoshift;

namespace {

int failures = 0;

void report(int criterion, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %2d: %-28s %s\n", ok ? "PASS" : "FAIL", criterion, name,
              detail.c_str());
  if (!ok) ++failures;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

TruncatedShift full2() {
  static auto spec = ShiftSpec::full_shift(2);
  return build_truncation(spec, TruncationRule::first_k(2));
}

TruncatedShift noaa() {
  static auto spec = ShiftSpec::no_aa();
  return build_truncation(spec, TruncationRule::first_k(2));
}

PotentialPtr letters(double a, double b) {
  return std::make_shared<LetterPotential>(std::unordered_map<Letter, double>{{0, a}, {1, b}});
}

double delta_one_sqrt2 = 0.0;  // filled by criterion 2, used downstream

// 1. Pressure exactness: spectral and periodic both hit the closed forms.
void criterion1() {
  auto t = full2();
  auto g = letters(0.5, 1.25);
  double expect = std::log(std::exp(0.5) + std::exp(1.25));
  auto pp = pressure_periodic(t, *g, 0, 12);
  auto eq = spectral_pressure(build_transfer(t, g, 1), 1e-13);
  double err_full = std::max(std::abs(pp.value - expect), std::abs(eq.pressure - expect));

  auto tn = noaa();
  auto zero = std::make_shared<ConstantPotential>(0.0);
  double golden = std::log((1.0 + std::sqrt(5.0)) / 2.0);
  auto ppn = pressure_periodic(tn, *zero, 0, 24);
  auto eqn = spectral_pressure(build_transfer(tn, zero, 1), 1e-13);
  double err_noaa = std::max(std::abs(ppn.value - golden), std::abs(eqn.pressure - golden));

  bool ok = err_full <= 1e-10 && err_noaa <= 1e-8;
  report(1, "pressure exactness", ok,
         fmt("full-shift err %.2e (tol 1e-10), no-aa err %.2e (tol 1e-8)", err_full,
             err_noaa));
}

// 2. Bowen root: solve_delta against closed forms and the scalar oracle.
void criterion2() {
  auto t = full2();
  PotentialPtr fc = std::make_shared<ConstantPotential>(1.0);
  auto dc = solve_delta(fc, t, -std::numeric_limits<double>::infinity(), {.tol = 1e-12});
  double err_const = std::abs(dc.delta - std::log(2.0));

  auto f = letters(1.0, std::sqrt(2.0));
  auto dr = solve_delta(f, t, -std::numeric_limits<double>::infinity(), {.tol = 1e-12});
  double oracle = oracles::bisect(
      [](double d) { return std::exp(-d) + std::exp(-std::sqrt(2.0) * d) - 1.0; }, 0.1, 2.0);
  double err_mixed = std::abs(dr.delta - oracle);
  delta_one_sqrt2 = dr.delta;

  bool ok = err_const <= 1e-10 && err_mixed <= 1e-8;
  report(2, "Bowen root", ok,
         fmt("constant err %.2e (tol 1e-10), (1,sqrt2) err %.2e (tol 1e-8)", err_const,
             err_mixed));
}

// 3. Entropy gap on the countable shift with the zeta-type potential.
void criterion3() {
  auto spec = ShiftSpec::full_countable();
  auto t = build_truncation(spec, TruncationRule::first_k(100000));
  PotentialPtr f = std::make_shared<LogLetterPotential>(2.0, 1.0);
  auto gap = critical_exponent(*f, t, {0.05, 8.0});
  double err_d = std::abs(gap.d_f - 0.5);

  SolveDeltaOptions opts;
  opts.tol = 1e-11;
  opts.tail = gap.fitted_tail;
  auto dr = solve_delta(f, t, gap.d_f, opts);
  double oracle = oracles::bisect([](double d) { return oracles::zeta(2.0 * d) - 2.0; },
                                  0.55, 1.5);
  double err_delta = std::abs(dr.delta - oracle);

  bool ok = err_d <= 1e-3 && gap.diverges_at_d && err_delta <= 1e-4;
  report(3, "entropy gap (zeta)", ok,
         fmt("d err %.2e (tol 1e-3), diverges %g, delta err %.2e (tol 1e-4)", err_d,
             gap.diverges_at_d ? 1.0 : 0.0, err_delta));
}

std::vector<CountRecord> count_records;  // criterion 4 grid incl. half points

// 4. Theorem A trend plus the arithmetic negative control.
void criterion4() {
  auto t = full2();
  auto f = letters(1.0, std::sqrt(2.0));
  double delta = delta_one_sqrt2;
  // grid {4,8,...,24} plus the half points needed by criterion 5
  std::vector<double> grid;
  for (double tt : {2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 16.0, 20.0, 24.0}) grid.push_back(tt);
  count_records = count_orbits(*f, t, grid, delta);

  bool in_band = true;
  double dev_first = -1.0, dev_last = -1.0;
  for (const auto& r : count_records) {
    bool qualifying = std::exp(r.t * delta) >= 1e5;
    if (!qualifying) continue;
    if (r.ratio_M < 0.7 || r.ratio_M > 1.3) in_band = false;
    if (dev_first < 0) dev_first = std::abs(r.ratio_M - 1.0);
    dev_last = std::abs(r.ratio_M - 1.0);
  }
  bool trend = dev_first >= 0 && dev_last < dev_first;

  // negative control: f = 1 oscillates, spread of ratio_M > 0.1
  PotentialPtr one = std::make_shared<ConstantPotential>(1.0);
  auto ctl = count_orbits(*one, t, {4, 8, 12, 16, 20, 24}, std::log(2.0));
  double lo = 1e9, hi = -1e9;
  for (const auto& r : ctl) {
    lo = std::min(lo, r.ratio_M);
    hi = std::max(hi, r.ratio_M);
  }
  bool control = (hi - lo) > 0.1;

  bool ok = in_band && trend && control;
  report(4, "Theorem A trend", ok,
         fmt("band ok %g, |ratio-1| %.3f -> %.3f", in_band ? 1.0 : 0.0, dev_first,
             dev_last) +
             fmt(", control spread %.3f (tol > 0.1)", hi - lo));
}

// 5. Prime-orbit sandwich, exactly, at the criterion-4 grid points.
void criterion5() {
  bool ok = true;
  int checked = 0;
  for (const auto& r : count_records) {
    // find the record at t/2 (grid was chosen to contain it)
    const CountRecord* half = nullptr;
    for (const auto& h : count_records)
      if (std::abs(h.t - r.t / 2.0) < 1e-9) half = &h;
    if (!half) continue;
    ++checked;
    if (!exact_sandwich_holds(r, *half)) ok = false;
  }
  ok = ok && checked >= 6;
  report(5, "prime-orbit sandwich", ok, fmt("checked %g grid points exactly", checked));
}

// 6. Renewal equation (20 random queries) and the Lemma 4.2 bound.
void criterion6() {
  auto t = full2();
  auto f = letters(1.0, std::sqrt(2.0));
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> tdist(1.0, 6.0);
  bool eq_ok = true;
  for (int trial = 0; trial < 20; ++trial) {
    auto shift = (trial % 2 == 0) ? full2() : noaa();
    std::vector<std::int32_t> base{static_cast<std::int32_t>(trial % 2)};
    auto x = aperiodic_extension(shift, base);
    double tt = tdist(rng);
    Word cyl;
    if (trial % 3 == 0) cyl.idx = {1};
    auto weight = cyl.idx.empty() ? RenewalQuery::Weight::one : RenewalQuery::Weight::cylinder;
    auto lhs = renewal_count_at(*f, x, weight, cyl, tt, shift);
    double rhs = 0.0;
    for (std::size_t c = 0; c < shift.size(); ++c) {
      if (!shift.allowed(c, static_cast<std::size_t>(x.at(0)))) continue;
      EventuallyPeriodicWord y;
      y.head.push_back(static_cast<std::int32_t>(c));
      y.head.insert(y.head.end(), x.head.begin(), x.head.end());
      y.cycle = x.cycle;
      std::int32_t cw = static_cast<std::int32_t>(c);
      double fc = f->eval(shift, std::span<const std::int32_t>(&cw, 1)).value;
      rhs += renewal_count_at(*f, y, weight, cyl, tt - fc, shift).value;
    }
    if (tt >= 0.0) rhs += cyl.idx.empty() ? 1.0 : (x.at(0) == cyl.idx[0] ? 1.0 : 0.0);
    if (std::abs(lhs.value - rhs) > 1e-9) eq_ok = false;
  }

  // Lemma 4.2: the recursion G(x,t) <= G_hat(t-c) + e^{-t delta}/h(x) turns
  // the small-t window into the constant
  //   C = max_{t <= 6} N e^{-t delta} + H_hat e^{-(6+c) delta}/(1 - e^{-c delta})
  // which must then hold unviolated out to t = 14.
  double delta = delta_one_sqrt2;
  std::vector<std::int32_t> base{0};
  auto x = aperiodic_extension(t, base);
  double window_max = 0.0;
  double c_f = certified_inf(*f, t);
  auto eq_delta = spectral_pressure(build_transfer(t, scale(-delta, f), 1), 1e-13);
  double h_min = *std::min_element(eq_delta.h.begin(), eq_delta.h.end());
  double H_hat = 1.0 / h_min;
  bool bound_ok = true;
  double worst = 0.0;
  std::vector<std::pair<double, double>> scaled_values;
  for (double tt = 0.5; tt <= 14.0 + 1e-9; tt += 0.5) {
    auto r = renewal_count_at(*f, x, RenewalQuery::Weight::one, {}, tt, t);
    double scaled = r.value * std::exp(-tt * delta);
    scaled_values.push_back({tt, scaled});
    if (tt <= 6.0 + 1e-9) window_max = std::max(window_max, scaled);
  }
  double C_fit = window_max + H_hat * std::exp(-(6.0 + c_f) * delta) /
                                  (1.0 - std::exp(-c_f * delta));
  for (auto [tt, scaled] : scaled_values) {
    if (tt <= 6.0 + 1e-9) continue;
    worst = std::max(worst, scaled);
    if (scaled > C_fit * (1.0 + 1e-9)) bound_ok = false;
  }
  bool ok = eq_ok && bound_ok;
  report(6, "renewal equation + bound", ok,
         fmt("equation exact %g, C_fit %.4f, worst beyond fit %.4f", eq_ok ? 1.0 : 0.0,
             C_fit, worst));
}

// 7. Equidistribution at the largest affordable horizon.
void criterion7() {
  auto t = full2();
  auto f = letters(1.0, std::sqrt(2.0));
  auto g = letters(std::sqrt(2.0), 1.0);
  double delta = delta_one_sqrt2;
  auto r = equidistribution_ratio(f, g, t, 20.0, delta);
  double rel = std::abs(r.lhs / r.predicted - 1.0);

  auto same = equidistribution_ratio(f, f, t, 12.0, delta);
  auto recs = count_orbits(*f, t, {12.0}, delta);
  double exact_branch = std::abs(same.lhs - recs[0].M);
  bool ok = rel <= 0.15 && exact_branch <= 1e-10 &&
            std::abs(same.mean_g - same.mean_f) <= 1e-12;
  report(7, "equidistribution", ok,
         fmt("relative error %.3f (tol 0.15), g=f branch err %.2e", rel, exact_branch));
}

// 8. Manhattan suite: endpoints, convexity, the proportional line, and J.
void criterion8() {
  auto t = full2();
  auto f = letters(1.0, std::sqrt(2.0));
  auto g = letters(std::sqrt(2.0), 1.0);

  auto dr_f = solve_delta(f, t, -std::numeric_limits<double>::infinity(), {.tol = 1e-12});
  auto dr_g = solve_delta(g, t, -std::numeric_limits<double>::infinity(), {.tol = 1e-12});
  TraceOptions topts;
  topts.tol = 1e-11;
  auto pts = trace_curve(f, g, t, 17, topts);
  bool endpoints = std::abs(pts.front().a - dr_f.delta) <= 2e-8 &&
                   std::abs(pts.back().b - dr_g.delta) <= 2e-8;

  bool convex = true;
  for (std::size_t i = 0; i + 2 < pts.size(); ++i) {
    double chord = pts[i].b + (pts[i + 2].b - pts[i].b) * (pts[i + 1].a - pts[i].a) /
                                  (pts[i + 2].a - pts[i].a);
    if (pts[i + 1].b > chord + 1e-6) convex = false;
  }

  auto g2 = scale(2.0, f);
  auto line = trace_curve(f, g2, t, 9, topts);
  bool straight = true;
  for (const auto& p : line)
    if (!p.ok || std::abs(p.slope + 0.5) > 1e-8) straight = false;

  auto rep_pair = intersection(f, g, t);
  auto rep_prop = intersection(f, g2, t);
  bool jbounds = rep_pair.J >= 1.0 - 1e-8 && rep_prop.J >= 1.0 - 1e-8 &&
                 std::abs(rep_prop.J - 1.0) <= 1e-6 && (rep_pair.J - 1.0) > 1e-3;

  bool ok = endpoints && convex && straight && jbounds;
  report(8, "Manhattan suite", ok,
         fmt("endpoints %g, convex %g, line slope -1/2 %g", endpoints ? 1 : 0,
             convex ? 1 : 0, straight ? 1 : 0) +
             fmt(", J_pair-1 %.4f, |J_prop-1| %.1e", rep_pair.J - 1.0,
                 std::abs(rep_prop.J - 1.0)));
}

// 9. Roof-function identities on the default group.
void criterion9() {
  auto coding = build_coding(GroupPresentation::default_group());
  auto spec = coding.shift_spec();
  auto shift = build_truncation(spec, TruncationRule::first_k(8));

  bool periodic_ok = true;
  double worst = 0.0;
  for (int d : {2, 3}) {
    auto rep = Representation::sym(coding, d);
    std::vector<double> alpha1(static_cast<std::size_t>(d - 1), 0.0);
    alpha1[0] = 1.0;
    std::vector<double> hilbert(static_cast<std::size_t>(d - 1), 1.0);
    std::vector<Eigen::VectorXd> functionals{phi_from_alpha(alpha1, d),
                                             phi_from_alpha(hilbert, d)};
    for (const auto& phi : functionals) {
      RoofPotential roof(coding, rep, phi);
      for (std::size_t n = 1; n <= 4; ++n) {
        for_each_fix(shift, n, [&](std::span<const std::int32_t> w) {
          auto s = eval_birkhoff(roof, shift, w, {.depth = 48, .cyclic = true});
          // oracle: the SL(2) product is exact to machine precision and the
          // symmetric power has weights (m, m-2, ..., -m) over its log
          // eigenvalue (the 3x3 eigensolver would lose ~eps |A| absolutely)
          MobiusMap prod2;
          for (auto c : w)
            prod2 = prod2 * coding.letter(shift.letter(static_cast<std::size_t>(c))).G;
          double log_lam = prod2.translation_length() / 2.0;
          Eigen::VectorXd ell(d);
          for (int j = 0; j < d; ++j)
            ell(j) = static_cast<double>(d - 1 - 2 * j) * log_lam;
          double expect = roof.phi(ell);
          double err = std::abs(s.value - expect);
          worst = std::max(worst, err - s.error);
          if (err > s.error + 1e-7) periodic_ok = false;
        });
      }
    }
  }

  // Random checks: cocycle law, loxodromic anchor, norm bound.
  std::mt19937 rng(31337);
  std::normal_distribution<double> n01(0.0, 1.0);
  auto rand_sl3 = [&]() {
    while (true) {
      Eigen::MatrixXd m(3, 3);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = n01(rng);
      double det = m.determinant();
      if (std::abs(det) < 0.05) continue;
      if (det < 0) m.col(0) *= -1.0;
      return Eigen::MatrixXd(m / std::pow(m.determinant(), 1.0 / 3.0));
    }
  };
  bool random_ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    auto S = rand_sl3();
    auto T = rand_sl3();
    auto F = orthonormal_frame(rand_sl3());
    auto lhs = iwasawa_cocycle(S * T, F);
    Eigen::VectorXd rhs = iwasawa_cocycle(S, orthonormal_frame(T * F)) + iwasawa_cocycle(T, F);
    if ((lhs - rhs).cwiseAbs().maxCoeff() > 1e-9) random_ok = false;

    if (iwasawa_cocycle(S, F).norm() > cartan_projection(S).norm() + 1e-9)
      random_ok = false;

    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(3, 3);
    D(0, 0) = std::exp(1.2 + 0.3 * n01(rng));
    D(1, 1) = std::exp(0.1 * n01(rng));
    D(2, 2) = 1.0 / (D(0, 0) * D(1, 1));
    if (D(0, 0) > 1.3 * D(1, 1) && D(1, 1) > 1.3 * D(2, 2)) {
      Eigen::MatrixXd R =
          orthonormal_frame(rand_sl3()) + 0.25 * Eigen::MatrixXd::Identity(3, 3);
      Eigen::MatrixXd A = R * D * R.inverse();
      auto B = iwasawa_cocycle(A, attracting_frame(A));
      if ((B - jordan_projection(A)).cwiseAbs().maxCoeff() > 1e-9) random_ok = false;
    }
  }
  bool ok = periodic_ok && random_ok;
  report(9, "roof identities", ok,
         fmt("periodic worst excess %.2e, random checks %g", std::max(worst, 0.0),
             random_ok ? 1.0 : 0.0));
}

// 10. Hitchin gap formula and roof comparability for Sym^2.
void criterion10() {
  auto coding = build_coding(GroupPresentation::default_group());
  auto spec = coding.shift_spec();
  auto shift = build_truncation(spec, TruncationRule::first_k(600));
  auto rep3 = Representation::sym(coding, 3);
  RoofPotential roof(coding, rep3, phi_from_alpha({1.0, 1.0}, 3));
  CriticalExponentOptions copts;
  copts.bound_depth = 2;
  auto gap = critical_exponent(roof, shift, {0.02, 8.0}, copts);
  double err_d = std::abs(gap.d_f - 0.25);

  auto coding_eta = build_coding(GroupPresentation::second_group());
  RoofPotential eta(coding_eta, Representation::sym(coding_eta, 3),
                    phi_from_alpha({1.0, 1.0}, 3));
  // 10^3 sampled cylinders: every letter, extended to depth 2 canonically
  std::size_t samples = 0;
  double small_max = 0.0, large_max = 0.0;
  bool finite = true;
  for (std::size_t i = 0; i < shift.size() && samples < 1000; ++i) {
    std::vector<std::int32_t> w{static_cast<std::int32_t>(i)};
    auto ext = pinned_extension(shift, w, 2);
    for (auto pref : {w, ext}) {
      double diff = std::abs(roof.eval(shift, pref).value - eta.eval(shift, pref).value);
      if (!std::isfinite(diff)) finite = false;
      auto l = coding.letter(shift.letter(i));
      if (l.r <= 4)
        small_max = std::max(small_max, diff);
      else
        large_max = std::max(large_max, diff);
      ++samples;
    }
  }
  bool bounded = finite && large_max <= small_max + 1.0;
  bool ok = err_d <= 0.0125 && gap.diverges_at_d && bounded && samples >= 1000;
  report(10, "Hitchin gap formula", ok,
         fmt("d err %.4f (tol 0.0125), diff small %.3f / large %.3f", err_d, small_max,
             large_max));
}

}  // namespace

int main() {
  auto t0 = std::chrono::steady_clock::now();
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d/10 criteria passed in %.1f s\n", 10 - failures, dt);
  return failures == 0 ? 0 : 1;
}

#include "thermoshift/manhattan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace thermoshift {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

std::vector<ManhattanPoint> trace_curve(const PotentialPtr& f, const PotentialPtr& g,
                                        const TruncatedShift& shift, int rays,
                                        const TraceOptions& opts) {
  if (rays < 2) throw ConfigError("need at least two rays (the axes)");
  std::vector<ManhattanPoint> out;

  double theta_lo = 0.0, theta_hi = kPi / 2.0;
  if (opts.extended_domain) {
    // One coefficient may go negative while a c(f) + b c(g) > 0. The angular
    // margin comes from the certified infima.
    double cf = certified_inf(*f, shift, opts.bound_depth);
    double cg = certified_inf(*g, shift, opts.bound_depth);
    if (cf > 0.0 && cg > 0.0) {
      double margin_lo = std::atan(cf / cg);  // b < 0 while a cf + b cg > 0
      double margin_hi = std::atan(cg / cf);
      theta_lo = -margin_lo * 0.9;
      theta_hi = kPi / 2.0 + margin_hi * 0.9;
    }
  }

  out.resize(static_cast<std::size_t>(rays));
  auto solve_ray = [&](int j) {
    ManhattanPoint pt;
    pt.theta = theta_lo + (theta_hi - theta_lo) * static_cast<double>(j) /
                              static_cast<double>(rays - 1);
    double ca = std::cos(pt.theta);
    double cb = std::sin(pt.theta);
    // Snap the axes exactly.
    if (std::abs(ca) < 1e-15) ca = 0.0;
    if (std::abs(cb) < 1e-15) cb = 0.0;

    auto dir = combine(ca, f, cb, g);
    SolveDeltaOptions dopts;
    dopts.depth = opts.depth;
    dopts.tol = opts.tol;
    dopts.spectral_tol = opts.spectral_tol;
    double d_dir = std::isfinite(opts.d_f) ? opts.d_f / (ca + cb)
                                           : -std::numeric_limits<double>::infinity();
    try {
      auto dr = solve_delta(dir, shift, d_dir, dopts);
      pt.a = dr.delta * ca;
      pt.b = dr.delta * cb;
      auto op = build_transfer(shift, scale(-dr.delta, dir), opts.depth);
      auto mf = cylinder_mean(op, dr.eq, *f);
      auto mg = cylinder_mean(op, dr.eq, *g);
      // tangent db/da from the pressure gradient (dP = -mean_f da - mean_g db)
      pt.slope = -mf.value / mg.value;
      pt.residual = std::abs(dr.trace.empty() ? 0.0 : dr.trace.back().second);
      pt.ok = true;
    } catch (const NoSignChange&) {
      pt.ok = false;
    } catch (const NoConvergence&) {
      pt.ok = false;
    }
    out[static_cast<std::size_t>(j)] = pt;
  };

  int threads = std::max(1, opts.threads);
  if (threads == 1) {
    for (int j = 0; j < rays; ++j) solve_ray(j);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&]() {
        for (int j = next.fetch_add(1); j < rays; j = next.fetch_add(1)) solve_ray(j);
      });
    for (auto& th : pool) th.join();
  }
  return out;
}

IntersectionReport intersection(const PotentialPtr& f, const PotentialPtr& g,
                                const TruncatedShift& shift,
                                const IntersectionOptions& opts) {
  IntersectionReport rep;
  SolveDeltaOptions dopts;
  dopts.depth = opts.depth;
  dopts.tol = opts.delta_tol;
  dopts.spectral_tol = opts.spectral_tol;
  double ninf = -std::numeric_limits<double>::infinity();

  auto dr_f = solve_delta(f, shift, ninf, dopts);
  auto dr_g = solve_delta(g, shift, ninf, dopts);
  rep.delta_f = dr_f.delta;
  rep.delta_g = dr_g.delta;

  auto op = build_transfer(shift, scale(-rep.delta_f, f), opts.depth);
  auto mf = cylinder_mean(op, dr_f.eq, *f);
  auto mg = cylinder_mean(op, dr_f.eq, *g);
  rep.I = mg.value / mf.value;
  rep.J = (rep.delta_g / rep.delta_f) * rep.I;
  rep.margin = rep.J - 1.0;

  // Exact periodic-data proportionality: S_n f = (delta_g/delta_f) S_n g on
  // Fix^n up to n = livsic_n_max. Periods are exact for locally constant
  // data, so this complements the noisy |J-1| margin.
  auto scaled_f = scale(rep.delta_f, f);
  auto scaled_g = scale(rep.delta_g, g);
  auto livsic = livsic_test(*scaled_f, *scaled_g, shift, opts.livsic_n_max, opts.livsic_tol);
  rep.periods_proportional = livsic.cohomologous_up_to_tol;
  rep.rigid = std::abs(rep.J - 1.0) <= opts.tol && rep.periods_proportional;
  return rep;
}

GeometricIntersection geometric_intersection_check(const PotentialPtr& f,
                                                   const PotentialPtr& g,
                                                   const TruncatedShift& shift, double t,
                                                   double delta_f,
                                                   const IntersectionOptions& opts) {
  GeometricIntersection res;

  double c_f = certified_inf(*f, shift, 6);
  if (!(c_f > 0.0)) throw CutoffTooSmall("f not certified strictly positive");
  std::size_t n_max = static_cast<std::size_t>(std::floor(t / c_f + 1e-9));

  double sum = 0.0;
  std::size_t count = 0;
  BirkhoffOptions bo{.depth = 24, .cyclic = true};
  for_each_orbit_rep(*f, shift, t, n_max, [&](std::span<const std::int32_t> w, double sf) {
    double sg = eval_birkhoff(*g, shift, w, bo).value;
    sum += sg / sf;
    ++count;
  });
  res.orbits = count;
  res.empirical = count ? sum / static_cast<double>(count) : 0.0;

  auto op = build_transfer(shift, scale(-delta_f, f), opts.depth);
  auto eq = spectral_pressure(op, opts.spectral_tol);
  auto mf = cylinder_mean(op, eq, *f);
  auto mg = cylinder_mean(op, eq, *g);
  res.thermodynamic = mg.value / mf.value;
  return res;
}

}  // namespace thermoshift

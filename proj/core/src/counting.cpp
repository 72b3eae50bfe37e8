#include "thermoshift/counting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace thermoshift {

namespace {

// Per-letter certified lower bounds, the pruning certificates.
std::vector<double> letter_lowers(const Potential& f, const TruncatedShift& shift,
                                  int depth) {
  std::vector<double> lo(shift.size());
  for (std::size_t i = 0; i < shift.size(); ++i)
    lo[i] = letter_bounds_at(f, i, shift, depth).lower;
  return lo;
}

// Letter-value cache for depth-1 locally constant potentials (exact).
std::optional<std::vector<double>> letter_values(const Potential& f,
                                                 const TruncatedShift& shift) {
  auto m0 = f.locally_constant_depth();
  if (!m0 || *m0 > 1) return std::nullopt;
  std::vector<double> v(shift.size());
  for (std::size_t i = 0; i < shift.size(); ++i) {
    std::int32_t w = static_cast<std::int32_t>(i);
    v[i] = f.eval(shift, std::span<const std::int32_t>(&w, 1)).value;
  }
  return v;
}

// w is a proper power iff it is fixed by a rotation of n/p for some prime
// divisor p of n.
bool is_proper_power(std::span<const std::int32_t> w) {
  const std::size_t n = w.size();
  auto has_period = [&](std::size_t period) {
    for (std::size_t i = period; i < n; ++i)
      if (w[i] != w[i - period]) return false;
    return true;
  };
  std::size_t m = n;
  for (std::size_t p = 2; p * p <= m; ++p) {
    if (m % p != 0) continue;
    while (m % p == 0) m /= p;
    if (has_period(n / p)) return true;
  }
  if (m > 1 && n > 1 && has_period(n / m)) return true;  // last prime factor
  return false;
}

bool is_canonical_rotation(std::span<const std::int32_t> w) {
  const std::size_t n = w.size();
  for (std::size_t r = 1; r < n; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      auto a = w[(r + i) % n];
      auto b = w[i];
      if (a != b) {
        if (a < b) return false;
        break;
      }
    }
  }
  return true;
}

}  // namespace

// ---- Renewal function ---------------------------------------------------------

RenewalResult renewal_count_at(const Potential& f, const EventuallyPeriodicWord& x,
                               RenewalQuery::Weight weight, const Word& cylinder, double t,
                               const TruncatedShift& shift, const RenewalOptions& opts) {
  RenewalResult res;
  const std::size_t k = shift.size();
  auto lowers = letter_lowers(f, shift, opts.bound_depth);
  auto fast = letter_values(f, shift);

  const std::size_t cyl_len = cylinder.idx.size();
  auto phi = [&](const std::vector<std::int32_t>& stack) -> double {
    if (weight == RenewalQuery::Weight::one) return 1.0;
    // y = stack + x; compare the first cyl_len letters against the cylinder.
    for (std::size_t i = 0; i < cyl_len; ++i) {
      std::int32_t yi = i < stack.size() ? stack[i]
                                         : x.at(i - stack.size());
      if (yi != cylinder.idx[i]) return 0.0;
    }
    return 1.0;
  };

  // n = 0 root: phi(x) 1_{t >= 0}
  std::vector<std::int32_t> stack;
  if (t >= 0.0) res.value += phi(stack);
  ++res.nodes;

  // DFS over prepended letters. value_sum/err_sum track certified S_n f(y);
  // lower_sum tracks sum of per-letter I(f, letter) lower bounds.
  std::vector<std::int32_t> buf(opts.eval_depth);
  double value_sum = 0.0, err_sum = 0.0, lower_sum = 0.0;
  auto term_at_front = [&](double& val, double& err) {
    if (fast) {
      val = (*fast)[static_cast<std::size_t>(stack.back())];
      err = 0.0;
      return;
    }
    // y' = stack(reversed order: stack.back() is the front letter) + x
    for (std::size_t j = 0; j < buf.size(); ++j) {
      std::size_t pos = j;  // position in y'
      std::size_t sl = stack.size();
      buf[j] = pos < sl ? stack[sl - 1 - pos] : x.at(pos - sl);
    }
    auto v = f.eval(shift, buf);
    val = v.value;
    err = v.error;
  };

  // stack holds prepended letters, innermost (closest to x) first.
  std::vector<double> dval, derr, dlow;  // per-level deltas for unwinding
  auto rec = [&](auto&& self) -> void {
    std::int32_t against = stack.empty() ? x.at(0) : stack.back();
    for (std::size_t c = 0; c < k; ++c) {
      if (!shift.allowed(c, static_cast<std::size_t>(against))) continue;
      if (lower_sum + lowers[c] > t) continue;  // certified prune, no valid branch cut
      if (++res.nodes > opts.node_limit)
        throw BudgetExplosion("renewal preimage tree exceeded node limit", res.value,
                              res.nodes);
      stack.push_back(static_cast<std::int32_t>(c));
      double dv, de;
      term_at_front(dv, de);
      value_sum += dv;
      err_sum += de;
      lower_sum += lowers[c];
      if (value_sum <= t) {
        if (weight == RenewalQuery::Weight::one) {
          res.value += 1.0;
        } else {
          // phi over the reversed stack: first letters of y are the outermost
          std::vector<std::int32_t> front(stack.rbegin(), stack.rend());
          res.value += phi(front);
        }
        if (std::abs(value_sum - t) <= err_sum) res.ambiguous += 1.0;
      } else if (std::abs(value_sum - t) <= err_sum) {
        res.ambiguous += 1.0;
      }
      self(self);
      value_sum -= dv;
      err_sum -= de;
      lower_sum -= lowers[c];
      stack.pop_back();
    }
  };
  rec(rec);
  return res;
}

RenewalResult renewal_count(const Potential& f, const RenewalQuery& q,
                            const TruncatedShift& shift, const RenewalOptions& opts) {
  auto x = aperiodic_extension(shift, q.base_prefix.idx);
  return renewal_count_at(f, x, q.weight, q.cylinder, q.t, shift, opts);
}

// ---- Orbit counting -------------------------------------------------------------

std::vector<CountRecord> count_orbits(const Potential& f, const TruncatedShift& shift,
                                      std::vector<double> t_grid, double delta,
                                      const CountOptions& opts) {
  std::sort(t_grid.begin(), t_grid.end());
  if (t_grid.empty()) return {};
  const double t_max = t_grid.back();

  auto lowers = letter_lowers(f, shift, opts.bound_depth);
  double c_f = *std::min_element(lowers.begin(), lowers.end());
  if (!(c_f > 0.0))
    throw CutoffTooSmall("potential is not certified strictly positive; regularize first");
  const std::size_t n_max =
      static_cast<std::size_t>(std::floor(t_max / c_f + 1e-9));
  if (n_max > opts.max_n)
    throw CutoffTooSmall("n_max = " + std::to_string(n_max) + " exceeds enumeration budget");

  auto fast = letter_values(f, shift);
  const std::size_t g = t_grid.size();
  // counts[n-1][j] = # words of length n with first qualifying grid index j
  std::vector<std::vector<std::int64_t>> counts(n_max, std::vector<std::int64_t>(g, 0));
  std::vector<std::vector<std::int64_t>> prim(n_max, std::vector<std::int64_t>(g, 0));
  std::uint64_t nodes = 0;

  for (std::size_t n = 1; n <= n_max; ++n) {
    // Residual letters each contribute at least c_f.
    auto prune = [&](std::span<const std::int32_t> w) {
      if (++nodes > opts.node_limit)
        throw BudgetExplosion("orbit enumeration exceeded node limit", 0.0, nodes);
      double lo = 0.0;
      for (auto c : w) lo += lowers[static_cast<std::size_t>(c)];
      lo += static_cast<double>(n - w.size()) * c_f;
      return lo > t_max;
    };
    auto visit = [&](std::span<const std::int32_t> w) {
      double s;
      if (fast) {
        s = 0.0;
        for (auto c : w) s += (*fast)[static_cast<std::size_t>(c)];
      } else {
        s = eval_birkhoff(f, shift, w, {.depth = opts.eval_depth, .cyclic = true}).value;
      }
      if (s > t_max) return;
      auto it = std::lower_bound(t_grid.begin(), t_grid.end(), s);
      if (it == t_grid.end()) return;
      std::size_t j = static_cast<std::size_t>(it - t_grid.begin());
      ++counts[n - 1][j];
      if (!is_proper_power(w)) ++prim[n - 1][j];
    };
    for_each_fix(shift, n, visit, prune);
  }

  std::vector<CountRecord> out(g);
  for (std::size_t j = 0; j < g; ++j) {
    CountRecord& r = out[j];
    r.t = t_grid[j];
    r.nodes = nodes;
    r.fix_counts.resize(n_max);
    r.prim_counts.resize(n_max);
    for (std::size_t n = 1; n <= n_max; ++n) {
      std::int64_t cf = 0, cp = 0;
      for (std::size_t i = 0; i <= j; ++i) {
        cf += counts[n - 1][i];
        cp += prim[n - 1][i];
      }
      r.fix_counts[n - 1] = cf;
      r.prim_counts[n - 1] = cp;
      r.M += static_cast<double>(cf) / static_cast<double>(n);
      r.R += static_cast<double>(cp) / static_cast<double>(n);
    }
    double td = r.t * delta;
    r.predicted = std::exp(td) / td;
    r.ratio_M = r.M / r.predicted;
    r.ratio_R = r.R / r.predicted;
  }
  return out;
}

bool exact_sandwich_holds(const CountRecord& at_t, const CountRecord& at_half) {
  // Compare sums of c_n / n exactly: scale by L = lcm(1..n_max) in 128-bit.
  const std::size_t n_max = at_t.fix_counts.size();
  long long lcm = 1;
  for (std::size_t n = 1; n <= n_max; ++n)
    lcm = std::lcm(lcm, static_cast<long long>(n));
  __int128 m_t = 0, m_half = 0, r_t = 0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    __int128 w = lcm / static_cast<long long>(n);
    m_t += w * at_t.fix_counts[n - 1];
    r_t += w * at_t.prim_counts[n - 1];
    if (n <= at_half.fix_counts.size()) m_half += w * at_half.fix_counts[n - 1];
  }
  return (m_t - m_half) <= r_t && r_t <= m_t;
}

// ---- Equidistribution -----------------------------------------------------------

EquidistResult equidistribution_ratio(const PotentialPtr& f, const PotentialPtr& g,
                                      const TruncatedShift& shift, double t, double delta,
                                      const EquidistOptions& opts) {
  EquidistResult res;

  auto lowers = letter_lowers(*f, shift, opts.count.bound_depth);
  double c_f = *std::min_element(lowers.begin(), lowers.end());
  if (!(c_f > 0.0)) throw CutoffTooSmall("f not certified strictly positive");
  const std::size_t n_max = static_cast<std::size_t>(std::floor(t / c_f + 1e-9));
  if (n_max > opts.count.max_n) throw CutoffTooSmall("enumeration budget exceeded");

  auto fast_f = letter_values(*f, shift);
  auto fast_g = letter_values(*g, shift);
  std::uint64_t nodes = 0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    auto prune = [&](std::span<const std::int32_t> w) {
      if (++nodes > opts.count.node_limit)
        throw BudgetExplosion("equidistribution enumeration exceeded node limit", res.lhs,
                              nodes);
      double lo = 0.0;
      for (auto c : w) lo += lowers[static_cast<std::size_t>(c)];
      lo += static_cast<double>(n - w.size()) * c_f;
      return lo > t;
    };
    auto visit = [&](std::span<const std::int32_t> w) {
      double sf, sg;
      if (fast_f && fast_g) {
        sf = sg = 0.0;
        for (auto c : w) {
          sf += (*fast_f)[static_cast<std::size_t>(c)];
          sg += (*fast_g)[static_cast<std::size_t>(c)];
        }
      } else {
        BirkhoffOptions bo{.depth = opts.count.eval_depth, .cyclic = true};
        sf = eval_birkhoff(*f, shift, w, bo).value;
        sg = eval_birkhoff(*g, shift, w, bo).value;
      }
      if (sf <= t) res.lhs += (sg / sf) / static_cast<double>(n);
    };
    for_each_fix(shift, n, visit, prune);
  }

  auto neg_df = scale(-delta, f);
  auto op = build_transfer(shift, neg_df, opts.depth);
  auto eq = spectral_pressure(op, opts.spectral_tol);
  res.mean_f = cylinder_mean(op, eq, *f).value;
  res.mean_g = cylinder_mean(op, eq, *g).value;
  double td = t * delta;
  res.predicted = (res.mean_g / res.mean_f) * std::exp(td) / td;
  return res;
}

// ---- Sample-point bijection -------------------------------------------------------

BijectionReport validate_sample_bijection(const Potential& f, const TruncatedShift& shift,
                                          std::size_t k, std::size_t n, double t,
                                          std::size_t eval_depth) {
  if (n < k || k == 0) throw ConfigError("need n >= k >= 1");
  BijectionReport rep;
  auto hb = f.holder();
  auto m0 = f.locally_constant_depth();
  rep.eps_k = (m0 && static_cast<std::size_t>(*m0) <= k) ? 0.0 : hb.tail(k);

  // Enumerate the k-cylinders.
  std::vector<std::vector<std::int32_t>> cyls;
  {
    std::vector<std::int32_t> w;
    auto rec = [&](auto&& self) -> void {
      if (w.size() == k) {
        cyls.push_back(w);
        return;
      }
      for (std::size_t c = 0; c < shift.size(); ++c) {
        if (!w.empty() && !shift.allowed(static_cast<std::size_t>(w.back()), c)) continue;
        w.push_back(static_cast<std::int32_t>(c));
        self(self);
        w.pop_back();
      }
    };
    rec(rec);
  }
  rep.cylinders = cyls.size();
  rep.bijective = true;

  BirkhoffOptions bo{.depth = eval_depth, .cyclic = true};
  for (const auto& p : cyls) {
    auto z = aperiodic_extension(shift, p);

    // Side one: Fix^n cap p, with S_n f (cyclic).
    std::vector<std::vector<std::int32_t>> fix_side;
    std::vector<double> fix_s;
    {
      std::vector<std::int32_t> w(p.begin(), p.end());
      auto rec = [&](auto&& self) -> void {
        if (w.size() == n) {
          if (shift.allowed(static_cast<std::size_t>(w.back()),
                            static_cast<std::size_t>(w.front()))) {
            fix_side.push_back(w);
            fix_s.push_back(eval_birkhoff(f, shift, w, bo).value);
          }
          return;
        }
        for (std::size_t c = 0; c < shift.size(); ++c) {
          if (!shift.allowed(static_cast<std::size_t>(w.back()), c)) continue;
          w.push_back(static_cast<std::int32_t>(c));
          self(self);
          w.pop_back();
        }
      };
      rec(rec);
    }

    // Side two (independent walk): u of length n in p with u z_p admissible.
    std::vector<std::vector<std::int32_t>> pre_side;
    {
      std::vector<std::int32_t> u(p.begin(), p.end());
      auto rec = [&](auto&& self) -> void {
        if (u.size() == n) {
          if (shift.allowed(static_cast<std::size_t>(u.back()),
                            static_cast<std::size_t>(z.at(0))))
            pre_side.push_back(u);
          return;
        }
        for (std::size_t c = 0; c < shift.size(); ++c) {
          if (!shift.allowed(static_cast<std::size_t>(u.back()), c)) continue;
          u.push_back(static_cast<std::int32_t>(c));
          self(self);
          u.pop_back();
        }
      };
      rec(rec);
    }

    if (fix_side.size() != pre_side.size()) rep.bijective = false;

    for (std::size_t i = 0; i < fix_side.size(); ++i) {
      // Psi(y) = y z_p; injectivity holds because y is recovered from the
      // first n letters. Surjectivity: the image must appear on side two.
      if (!std::binary_search(pre_side.begin(), pre_side.end(), fix_side[i]))
        rep.bijective = false;
      EventuallyPeriodicWord img;
      img.head = fix_side[i];
      img.head.insert(img.head.end(), z.head.begin(), z.head.end());
      img.cycle = z.cycle;
      double s_img = eval_birkhoff_at(f, shift, img, n, eval_depth).value;
      rep.max_discrepancy = std::max(rep.max_discrepancy, std::abs(fix_s[i] - s_img));
      // M count and W counts at the shifted thresholds.
      if (fix_s[i] <= t) ++rep.m_count;
      if (s_img <= t - rep.eps_k) ++rep.w_lower;
      if (s_img <= t + rep.eps_k) ++rep.w_upper;
    }
  }
  rep.sandwich_ok = rep.w_lower <= rep.m_count && rep.m_count <= rep.w_upper;
  return rep;
}

void for_each_orbit_rep(const Potential& f, const TruncatedShift& shift, double t_max,
                        std::size_t n_max,
                        const std::function<void(std::span<const std::int32_t>, double)>& visit,
                        const CountOptions& opts) {
  auto lowers = letter_lowers(f, shift, opts.bound_depth);
  auto fast = letter_values(f, shift);
  double c_f = *std::min_element(lowers.begin(), lowers.end());
  std::uint64_t nodes = 0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    auto prune = [&](std::span<const std::int32_t> w) {
      if (++nodes > opts.node_limit)
        throw BudgetExplosion("orbit enumeration exceeded node limit", 0.0, nodes);
      double lo = 0.0;
      for (auto c : w) lo += lowers[static_cast<std::size_t>(c)];
      lo += static_cast<double>(n - w.size()) * std::max(c_f, 0.0);
      return lo > t_max;
    };
    for_each_fix(shift, n,
                 [&](std::span<const std::int32_t> w) {
                   if (!is_canonical_rotation(w)) return;
                   double s;
                   if (fast) {
                     s = 0.0;
                     for (auto c : w) s += (*fast)[static_cast<std::size_t>(c)];
                   } else {
                     s = eval_birkhoff(f, shift, w,
                                       {.depth = opts.eval_depth, .cyclic = true})
                             .value;
                   }
                   if (s <= t_max) visit(w, s);
                 },
                 prune);
  }
}

}  // namespace thermoshift

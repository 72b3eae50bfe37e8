#include "thermoshift/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace thermoshift {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// ---- Tail models -------------------------------------------------------------

std::string TailModel::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::finite_alphabet:
      os << "finite_alphabet";
      break;
    case Kind::log_letter:
      os << "log_letter(c=" << c << ", b=" << b;
      if (loglog_e != 0.0) os << ", loglog=" << loglog_e;
      os << (fitted ? ", fitted" : "") << ")";
      break;
    case Kind::exp_letter:
      os << "exp_letter(c=" << c << ", b=" << b << (fitted ? ", fitted" : "") << ")";
      break;
  }
  return os.str();
}

bool TailModel::tail_converges(double s) const {
  constexpr double eps = 1e-12;
  switch (kind) {
    case Kind::finite_alphabet:
      return true;
    case Kind::exp_letter:
      return s * c > eps;
    case Kind::log_letter: {
      double e1 = s * c;  // exponent of the power factor
      if (e1 > 1.0 + eps) return true;
      if (e1 < 1.0 - eps) return false;
      return s * loglog_e > 1.0 + eps;
    }
  }
  return false;
}

double TailModel::log_tail(double s, double K) const {
  if (!tail_converges(s)) return kInf;
  switch (kind) {
    case Kind::finite_alphabet:
      return -kInf;
    case Kind::exp_letter: {
      // sum_{a > K} e^{-s(c a + b)} = e^{-s b} e^{-s c (K+1)} / (1 - e^{-s c})
      return -s * b - s * c * (K + 1.0) - std::log1p(-std::exp(-s * c));
    }
    case Kind::log_letter: {
      double p = s * c;
      if (loglog_e == 0.0) {
        // midpoint-rule integral: e^{-s b} (K + 1/2)^{1-p} / (p - 1)
        return -s * b + (1.0 - p) * std::log(K + 0.5) - std::log(p - 1.0);
      }
      // numeric tail on a geometric grid (trapezoid in log-x)
      double q = s * loglog_e;
      LogSumAccumulator acc;
      double x = K + 0.5;
      const double r = 1.0009765625;  // 1 + 2^-10
      const double logr = std::log(r);
      for (int i = 0; i < 200000; ++i) {
        // integrand x^{-p} (log x)^{-q}, weight x * logr (du with u = log x)
        double lg = std::log(x);
        double term = -p * lg - q * std::log(lg) + lg + std::log(logr);
        acc.add(term);
        if (term < acc.value() - 40.0) break;
        x *= r;
      }
      return -s * b + acc.value();
    }
  }
  return -kInf;
}

TailModel fit_log_tail_model(const std::vector<std::pair<double, double>>& size_and_sup) {
  // Least squares S ~ c log(size) + b over the supplied points.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (auto [sz, sup] : size_and_sup) {
    if (sz <= 1.0) continue;
    double x = std::log(sz);
    sx += x;
    sy += sup;
    sxx += x * x;
    sxy += x * sup;
    ++n;
  }
  if (n < 4) throw TailModelUnavailable("too few letters to fit a tail model");
  double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-12) throw TailModelUnavailable("degenerate letter sizes");
  TailModel m;
  m.kind = TailModel::Kind::log_letter;
  m.c = (n * sxy - sx * sy) / denom;
  m.b = (sy - m.c * sx) / static_cast<double>(n);
  m.fitted = true;
  double res = 0;
  for (auto [sz, sup] : size_and_sup) {
    if (sz <= 1.0) continue;
    double pred = m.c * std::log(sz) + m.b;
    res = std::max(res, std::abs(pred - sup));
  }
  m.fit_residual = res;
  if (m.c <= 0.0) throw TailModelUnavailable("fitted tail exponent is not positive");
  return m;
}

// ---- Transfer discretization --------------------------------------------------

namespace {

std::vector<std::vector<std::int32_t>> enumerate_cylinders(const TruncatedShift& shift,
                                                           int depth,
                                                           std::size_t max_cylinders) {
  std::vector<std::vector<std::int32_t>> out;
  const std::size_t k = shift.size();
  std::vector<std::int32_t> w;
  auto rec = [&](auto&& self) -> void {
    if (w.size() == static_cast<std::size_t>(depth)) {
      if (out.size() >= max_cylinders)
        throw TooManyCylinders("cylinder count exceeds limit", max_cylinders);
      out.push_back(w);
      return;
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (!w.empty() && !shift.allowed(static_cast<std::size_t>(w.back()), c)) continue;
      w.push_back(static_cast<std::int32_t>(c));
      self(self);
      w.pop_back();
    }
  };
  rec(rec);
  return out;
}

std::size_t find_cylinder(const std::vector<std::vector<std::int32_t>>& cyls,
                          const std::vector<std::int32_t>& w) {
  auto it = std::lower_bound(cyls.begin(), cyls.end(), w);
  return static_cast<std::size_t>(it - cyls.begin());
}

}  // namespace

TransferDiscretization build_transfer(const TruncatedShift& shift, PotentialPtr g_ptr,
                                      int depth, const TransferOptions& opts) {
  if (depth < 1) throw ConfigError("transfer depth must be >= 1");
  if (!g_ptr) throw ConfigError("null potential");
  const Potential& g = *g_ptr;
  TransferDiscretization op;
  op.depth = depth;
  op.shift = &shift;
  op.potential = std::move(g_ptr);

  auto m0 = g.locally_constant_depth();
  if (depth == 1 && m0 && *m0 <= 1) {
    // Weight depends on the source letter only.
    op.factored = true;
    op.cylinders.reserve(shift.size());
    op.log_w_src.reserve(shift.size());
    for (std::size_t q = 0; q < shift.size(); ++q) {
      op.cylinders.push_back({static_cast<std::int32_t>(q)});
      auto v = g.eval(shift, op.cylinders.back());
      op.log_w_src.push_back(v.value);
      op.max_entry_error = std::max(op.max_entry_error, v.error);
    }
    if (opts.tail && shift.transition.is_full() && shift.spec &&
        shift.spec->kind == ShiftSpec::AlphabetKind::countable) {
      double max_size = 0.0;
      for (Letter a : shift.letters) max_size = std::max(max_size, shift.spec->size_of(a));
      double lt = opts.tail->log_tail(opts.tail_scale, max_size);
      if (std::isfinite(lt)) {
        op.tail_log_weight = lt;
        op.tail_error = std::exp(lt) * 0.01;  // integral-estimate slack, recorded
      }
    }
    return op;
  }

  op.cylinders = enumerate_cylinders(shift, depth, opts.max_cylinders);
  const std::size_t n = op.cylinders.size();
  if (n == 0) throw EmptyTruncation("no admissible cylinders at this depth");

  // One branch per (source cylinder q, continuation letter c): the branch
  // maps q into the target (q_2..q_k c) with weight g on the (k+1)-prefix.
  struct Branch {
    std::int32_t target, source;
    double logw;
  };
  std::vector<Branch> branches;
  std::vector<std::int32_t> ext;
  for (std::size_t q = 0; q < n; ++q) {
    const auto& w = op.cylinders[q];
    for (std::size_t c = 0; c < shift.size(); ++c) {
      if (!shift.allowed(static_cast<std::size_t>(w.back()), c)) continue;
      ext.assign(w.begin(), w.end());
      ext.push_back(static_cast<std::int32_t>(c));
      std::vector<std::int32_t> target(ext.begin() + 1, ext.end());
      std::size_t p = find_cylinder(op.cylinders, target);
      auto v = g.eval(shift, ext);
      op.max_entry_error = std::max(op.max_entry_error, v.error);
      branches.push_back({static_cast<std::int32_t>(p), static_cast<std::int32_t>(q), v.value});
      if (branches.size() > opts.max_branches)
        throw TooManyCylinders("branch count exceeds limit", opts.max_branches);
    }
  }

  // CSR by source is the generation order.
  op.col_ptr.assign(n + 1, 0);
  op.dst.reserve(branches.size());
  op.log_w_by_src.reserve(branches.size());
  for (const auto& b : branches) ++op.col_ptr[static_cast<std::size_t>(b.source) + 1];
  for (std::size_t i = 0; i < n; ++i) op.col_ptr[i + 1] += op.col_ptr[i];
  for (const auto& b : branches) {
    op.dst.push_back(b.target);
    op.log_w_by_src.push_back(b.logw);
  }

  // CSR by target, stable so same-target branches keep source order.
  std::stable_sort(branches.begin(), branches.end(),
                   [](const Branch& a, const Branch& b) { return a.target < b.target; });
  op.row_ptr.assign(n + 1, 0);
  for (const auto& b : branches) ++op.row_ptr[static_cast<std::size_t>(b.target) + 1];
  for (std::size_t i = 0; i < n; ++i) op.row_ptr[i + 1] += op.row_ptr[i];
  op.src.reserve(branches.size());
  op.log_w.reserve(branches.size());
  for (const auto& b : branches) {
    op.src.push_back(b.source);
    op.log_w.push_back(b.logw);
  }
  return op;
}

void TransferDiscretization::apply_log(const std::vector<double>& x, std::vector<double>& y,
                                       bool adjoint) const {
  const std::size_t n = size();
  y.assign(n, -kInf);
  if (factored) {
    const auto& t = shift->transition;
    if (!adjoint) {
      if (t.is_full()) {
        LogSumAccumulator acc;
        for (std::size_t q = 0; q < n; ++q) acc.add(log_w_src[q] + x[q]);
        if (tail_log_weight) acc.add(*tail_log_weight);  // h == 1 off-truncation
        std::fill(y.begin(), y.end(), acc.value());
        return;
      }
      for (std::size_t p = 0; p < n; ++p) {
        LogSumAccumulator acc;
        for (std::size_t q = 0; q < n; ++q)
          if (t.allowed(q, p)) acc.add(log_w_src[q] + x[q]);
        y[p] = acc.value();
      }
      return;
    }
    // adjoint: y_q = log w_q + LSE over targets p of x_p
    if (t.is_full()) {
      LogSumAccumulator acc;
      for (std::size_t p = 0; p < n; ++p) acc.add(x[p]);
      double s = acc.value();
      for (std::size_t q = 0; q < n; ++q) y[q] = log_w_src[q] + s;
      return;
    }
    for (std::size_t q = 0; q < n; ++q) {
      LogSumAccumulator acc;
      t.for_each_in_row(q, [&](std::size_t p) { acc.add(x[p]); });
      y[q] = log_w_src[q] + acc.value();
    }
    return;
  }
  if (!adjoint) {
    for (std::size_t p = 0; p < n; ++p) {
      LogSumAccumulator acc;
      for (std::size_t i = row_ptr[p]; i < row_ptr[p + 1]; ++i)
        acc.add(log_w[i] + x[static_cast<std::size_t>(src[i])]);
      y[p] = acc.value();
    }
    return;
  }
  for (std::size_t q = 0; q < n; ++q) {
    LogSumAccumulator acc;
    for (std::size_t i = col_ptr[q]; i < col_ptr[q + 1]; ++i)
      acc.add(log_w_by_src[i] + x[static_cast<std::size_t>(dst[i])]);
    y[q] = acc.value();
  }
}

// ---- Spectral pressure --------------------------------------------------------

namespace {

struct IterationResult {
  std::vector<double> log_vec;  // max-normalized
  double log_lambda = 0.0;
  double bracket = 0.0;  // Collatz-Wielandt width at exit
  int iterations = 0;
};

IterationResult power_iterate(const TransferDiscretization& op, bool adjoint, double tol,
                              int max_iter) {
  const std::size_t n = op.size();
  IterationResult res;
  res.log_vec.assign(n, 0.0);
  std::vector<double> y;
  for (int it = 1; it <= max_iter; ++it) {
    op.apply_log(res.log_vec, y, adjoint);
    double lo = kInf, hi = -kInf;
    for (std::size_t i = 0; i < n; ++i) {
      double r = y[i] - res.log_vec[i];
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    double ymax = *std::max_element(y.begin(), y.end());
    for (std::size_t i = 0; i < n; ++i) res.log_vec[i] = y[i] - ymax;
    res.iterations = it;
    res.bracket = hi - lo;
    res.log_lambda = 0.5 * (lo + hi);
    if (!std::isfinite(res.bracket))
      throw NoConvergence("transfer iteration produced empty rows", res.bracket);
    if (res.bracket <= tol) return res;
  }
  throw NoConvergence("power iteration did not reach tolerance", res.bracket);
}

}  // namespace

EquilibriumData spectral_pressure(const TransferDiscretization& op, double tol, int max_iter) {
  const std::size_t n = op.size();
  if (n == 0) throw EmptyTruncation("empty transfer discretization");
  EquilibriumData eq;
  eq.depth = op.depth;
  eq.tol = tol;

  auto right = power_iterate(op, false, 0.5 * tol, max_iter);
  auto left = power_iterate(op, true, 0.5 * tol, max_iter);
  eq.pressure = right.log_lambda;
  eq.iterations = right.iterations + left.iterations;

  eq.h.resize(n);
  for (std::size_t i = 0; i < n; ++i) eq.h[i] = std::exp(right.log_vec[i]);
  eq.nu.resize(n);
  double nu_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    eq.nu[i] = std::exp(left.log_vec[i]);
    nu_sum += eq.nu[i];
  }
  for (auto& v : eq.nu) v /= nu_sum;
  eq.mu.resize(n);
  double mu_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    eq.mu[i] = eq.h[i] * eq.nu[i];
    mu_sum += eq.mu[i];
  }
  for (auto& v : eq.mu) v /= mu_sum;

  // Linear-space residuals at the returned vectors. The adjoint iteration
  // carries no tail term, so its residual is measured at its own eigenvalue.
  std::vector<double> y;
  std::vector<double> logh(n), lognu(n);
  for (std::size_t i = 0; i < n; ++i) logh[i] = std::log(eq.h[i]);
  op.apply_log(logh, y, false);
  double lam = std::exp(eq.pressure);
  for (std::size_t i = 0; i < n; ++i)
    eq.residual_h = std::max(eq.residual_h, std::abs(std::exp(y[i]) - lam * eq.h[i]));
  double lam_left = std::exp(left.log_lambda);
  for (std::size_t i = 0; i < n; ++i) lognu[i] = std::log(eq.nu[i]);
  op.apply_log(lognu, y, true);
  for (std::size_t i = 0; i < n; ++i)
    eq.residual_nu += std::abs(std::exp(y[i]) - lam_left * eq.nu[i]);

  // Mean of the operator's own potential against mu.
  if (op.potential && op.shift) {
    for (std::size_t i = 0; i < n; ++i) {
      auto v = op.potential->eval(*op.shift, op.cylinders[i]);
      eq.mean_f += eq.mu[i] * v.value;
      eq.mean_f_error += eq.mu[i] * v.error;
    }
  }

  // Observed Gibbs constant over the discretization cylinders and a capped
  // batch of longer words.
  if (op.potential && op.shift) {
    double worst = 1.0;
    auto record = [&](double log_mu_w, std::span<const std::int32_t> w) {
      auto s = eval_birkhoff(*op.potential, *op.shift, w, {.depth = 24, .cyclic = false});
      double log_gibbs = s.value - static_cast<double>(w.size()) * eq.pressure;
      double ratio = std::exp(log_mu_w - log_gibbs);
      if (ratio > 0.0 && std::isfinite(ratio))
        worst = std::max({worst, ratio, 1.0 / ratio});
    };
    for (std::size_t i = 0; i < n; ++i)
      if (eq.mu[i] > 0.0) record(std::log(eq.mu[i]), op.cylinders[i]);
    if (!op.factored) {
      std::size_t budget = 512;
      for (std::size_t i = 0; i < n && budget > 0; ++i) {
        std::vector<std::int32_t> w = op.cylinders[i];
        // extend by two letters, lexicographic
        for (std::size_t c1 = 0; c1 < op.shift->size() && budget > 0; ++c1) {
          if (!op.shift->allowed(static_cast<std::size_t>(w.back()), c1)) continue;
          w.push_back(static_cast<std::int32_t>(c1));
          for (std::size_t c2 = 0; c2 < op.shift->size() && budget > 0; ++c2) {
            if (!op.shift->allowed(c1, c2)) continue;
            w.push_back(static_cast<std::int32_t>(c2));
            double lm = std::log(cylinder_measure(op, eq, w));
            record(lm, w);
            --budget;
            w.pop_back();
          }
          w.pop_back();
        }
      }
    }
    eq.gibbs_constant = worst;
  }
  return eq;
}

CylinderValue cylinder_mean(const TransferDiscretization& op, const EquilibriumData& eq,
                            const Potential& g) {
  CylinderValue out;
  for (std::size_t i = 0; i < op.size(); ++i) {
    auto v = g.eval(*op.shift, op.cylinders[i]);
    out.value += eq.mu[i] * v.value;
    out.error += eq.mu[i] * v.error;
  }
  return out;
}

double cylinder_measure(const TransferDiscretization& op, const EquilibriumData& eq,
                        std::span<const std::int32_t> word) {
  const std::size_t k = static_cast<std::size_t>(op.depth);
  if (word.size() < k) throw InadmissibleWord("word shorter than discretization depth");
  const std::size_t m = word.size();
  auto cyl_index = [&](std::size_t i) {
    std::vector<std::int32_t> w(word.begin() + static_cast<std::ptrdiff_t>(i),
                                word.begin() + static_cast<std::ptrdiff_t>(i + k));
    std::size_t p = find_cylinder(op.cylinders, w);
    if (p >= op.cylinders.size() || op.cylinders[p] != w)
      throw InadmissibleWord("word leaves the cylinder set");
    return p;
  };
  std::size_t first = cyl_index(0);
  std::size_t last = cyl_index(m - k);
  // mu[w] = mu(c_last) * h(c_first)/h(c_last) * lambda^{-(m-k)} * prod weights,
  // the weight of step i being e^{g} on the (k+1)-window at i.
  double log_mu = std::log(eq.mu[last]) + std::log(eq.h[first]) - std::log(eq.h[last]) -
                  static_cast<double>(m - k) * eq.pressure;
  for (std::size_t i = 0; i + k < m; ++i) {
    std::span<const std::int32_t> window(word.data() + i, k + 1);
    log_mu += op.potential->eval(*op.shift, window).value;
  }
  return std::exp(log_mu);
}

// ---- Periodic-orbit pressure ----------------------------------------------------

PeriodicPressure pressure_periodic(const TruncatedShift& shift, const Potential& g,
                                   std::size_t first_letter_index, std::size_t n_max) {
  if (first_letter_index >= shift.size()) throw LetterAbsent("first letter outside truncation");
  PeriodicPressure out;
  for (std::size_t n = 1; n <= n_max; ++n) {
    LogSumAccumulator acc;
    for_each_fix(
        shift, n,
        [&](std::span<const std::int32_t> w) {
          acc.add(eval_birkhoff(g, shift, w).value);
        },
        {}, first_letter_index);
    if (acc.empty()) {
      out.p_n.push_back(-kInf);
      continue;
    }
    out.p_n.push_back(acc.value() / static_cast<double>(n));
  }
  // First differences of n p_n telescope the 1/n bias away.
  double prev = 0.0;
  for (std::size_t n = 1; n <= out.p_n.size(); ++n) {
    double cur = static_cast<double>(n) * out.p_n[n - 1];
    out.ratio_n.push_back(cur - prev);
    prev = cur;
  }
  out.last = out.p_n.empty() ? -kInf : out.p_n.back();
  out.value = out.ratio_n.empty() ? -kInf : out.ratio_n.back();
  double s = 0.0;
  for (double p : out.p_n) s += p;
  out.cesaro = out.p_n.empty() ? -kInf : s / static_cast<double>(out.p_n.size());
  return out;
}

// ---- Critical exponent / entropy gap -------------------------------------------

std::string to_string(GapClass g) {
  switch (g) {
    case GapClass::strong: return "strong";
    case GapClass::weak: return "weak";
    case GapClass::none: return "none";
    case GapClass::undetermined: return "undetermined";
    case GapClass::finite_alphabet: return "finite_alphabet";
  }
  return "?";
}

EntropyGapReport critical_exponent(const Potential& f, const TruncatedShift& shift,
                                   std::pair<double, double> s_bracket,
                                   const CriticalExponentOptions& opts) {
  EntropyGapReport rep;
  if (!shift.spec || shift.spec->kind == ShiftSpec::AlphabetKind::finite) {
    rep.d_f = -kInf;
    rep.diverges_at_d = false;
    rep.gap = GapClass::finite_alphabet;
    rep.tail_model = "finite_alphabet";
    rep.notes = "Z_1 is a finite sum for every s; gap conditions are vacuous";
    return rep;
  }

  TailModel model;
  try {
    if (opts.tail) {
      model = *opts.tail;
    } else {
      std::vector<std::pair<double, double>> pts;
      double max_size = 0.0;
      for (std::size_t i = 0; i < shift.size(); ++i)
        max_size = std::max(max_size, shift.spec->size_of(shift.letter(i)));
      double cutoff = std::max(opts.fit_min_size, 0.01 * max_size);
      for (std::size_t i = 0; i < shift.size(); ++i) {
        double sz = shift.spec->size_of(shift.letter(i));
        if (sz < cutoff) continue;
        pts.push_back({sz, letter_bounds_at(f, i, shift, opts.bound_depth).upper});
      }
      if (pts.size() < 16) {
        pts.clear();
        for (std::size_t i = 0; i < shift.size(); ++i) {
          double sz = shift.spec->size_of(shift.letter(i));
          if (sz < opts.fit_min_size) continue;
          pts.push_back({sz, letter_bounds_at(f, i, shift, opts.bound_depth).upper});
        }
      }
      model = fit_log_tail_model(pts);
    }
  } catch (const TailModelUnavailable& e) {
    rep.gap = GapClass::undetermined;
    rep.tail_model = "unavailable";
    rep.notes = e.what();
    rep.d_f = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  rep.tail_model = model.describe();
  rep.fitted_tail = model;

  // Bisection on the convergence predicate of Z_1(f,s): partial sums are
  // finite, so the tail model decides.
  double lo = s_bracket.first, hi = s_bracket.second;
  for (int i = 0; i < 60 && model.tail_converges(lo); ++i) lo *= 0.5;
  for (int i = 0; i < 60 && !model.tail_converges(hi); ++i) hi *= 2.0;
  if (model.tail_converges(lo) || !model.tail_converges(hi)) {
    rep.gap = GapClass::undetermined;
    rep.notes = "could not bracket the critical exponent";
    rep.d_f = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  while (hi - lo > opts.bisect_tol) {
    double mid = 0.5 * (lo + hi);
    if (model.tail_converges(mid))
      hi = mid;
    else
      lo = mid;
  }
  rep.d_f = 0.5 * (lo + hi);
  // Divergence at the critical point itself is a structural property of the
  // model (the float midpoint straddles the boundary): for the log model the
  // series at s = 1/c diverges iff the loglog exponent stays <= 1 there.
  rep.diverges_at_d = model.loglog_e <= model.c * (1.0 + 1e-9);
  if (model.kind == TailModel::Kind::exp_letter) {
    // Z_1 converges for every s > 0; d(f) degenerates to 0.
    rep.d_f = 0.0;
    rep.diverges_at_d = false;
  }
  return rep;
}

DeltaResult solve_delta(const PotentialPtr& f, const TruncatedShift& shift, double d_f,
                        const SolveDeltaOptions& opts) {
  DeltaResult res;
  auto eval_p = [&](double t) -> std::pair<double, EquilibriumData> {
    auto neg_tf = scale(-t, f);
    TransferOptions topts;
    topts.tail = opts.tail;
    topts.tail_scale = t;
    auto op = build_transfer(shift, neg_tf, opts.depth, topts);
    auto eq = spectral_pressure(op, opts.spectral_tol, opts.max_iter);
    res.trace.push_back({t, eq.pressure});
    return {eq.pressure, eq};
  };

  double t_lo = (std::isfinite(d_f) && d_f > 0.0) ? d_f * (1.0 + 1e-4) : 0.01;
  double p_lo = eval_p(t_lo).first;
  for (int i = 0; i < 60 && !(p_lo > 0.0); ++i) {
    if (std::isfinite(d_f) && d_f > 0.0)
      t_lo = d_f + 0.5 * (t_lo - d_f);
    else
      t_lo *= 0.5;
    p_lo = eval_p(t_lo).first;
  }
  if (!(p_lo > 0.0))
    throw NoSignChange("P(-t f) never positive near d(f); truncation too small?");

  double t_hi = std::max(t_lo * 2.0, t_lo + 1.0);
  double p_hi = eval_p(t_hi).first;
  int doublings = 0;
  while (!(p_hi < 0.0)) {
    t_hi *= 2.0;
    p_hi = eval_p(t_hi).first;
    if (++doublings > 60)
      throw NoSignChange("P(-t f) never becomes negative; no weak gap at this truncation");
  }

  EquilibriumData eq_mid;
  double t_mid = 0.5 * (t_lo + t_hi);
  for (int i = 0; i < 200; ++i) {
    t_mid = 0.5 * (t_lo + t_hi);
    auto [p, eq] = eval_p(t_mid);
    eq_mid = std::move(eq);
    if (std::abs(p) <= opts.tol || (t_hi - t_lo) < 1e-15 * std::max(1.0, t_mid)) break;
    if (p > 0.0)
      t_lo = t_mid;
    else
      t_hi = t_mid;
  }
  res.delta = t_mid;
  res.eq = std::move(eq_mid);

  // Monotonicity check over the traced evaluations.
  auto sorted = res.trace;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    if (sorted[i + 1].second > sorted[i].second + 1e-6)
      throw Error("pressure failed to decrease in t (t=" + std::to_string(sorted[i].first) +
                  " -> t=" + std::to_string(sorted[i + 1].first) + ")");
  }
  return res;
}

EntropyGapReport entropy_gap_report(const PotentialPtr& f, const TruncatedShift& shift,
                                    const EntropyGapOptions& opts) {
  EntropyGapReport rep = critical_exponent(*f, shift, {1e-3, 64.0}, opts.exponent);
  bool finite = rep.gap == GapClass::finite_alphabet;
  if (!finite && std::isnan(rep.d_f)) return rep;  // exponent undetermined

  SolveDeltaOptions dopts = opts.delta;
  if (!dopts.tail && rep.fitted_tail) dopts.tail = rep.fitted_tail;
  try {
    auto dr = solve_delta(f, shift, finite ? -kInf : rep.d_f, dopts);
    rep.delta = dr.delta;
  } catch (const NoSignChange& e) {
    rep.notes += std::string(rep.notes.empty() ? "" : "; ") + e.what();
    rep.gap = finite ? GapClass::finite_alphabet : GapClass::none;
    return rep;
  } catch (const Error& e) {
    rep.notes += std::string(rep.notes.empty() ? "" : "; ") + e.what();
    if (!finite) rep.gap = GapClass::undetermined;
    return rep;
  }

  if (finite) return rep;  // gap conditions vacuous, delta attached
  if (*rep.delta > rep.d_f) {
    rep.gap = rep.diverges_at_d ? GapClass::strong : GapClass::weak;
  } else {
    rep.gap = GapClass::undetermined;
    rep.notes += std::string(rep.notes.empty() ? "" : "; ") +
                 "delta <= d(f): truncation bias suspected";
  }
  return rep;
}

}  // namespace thermoshift

#include "thermoshift/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace thermoshift {

namespace {

// Spread-based Hölder certificate for depth-m0 locally constant functions:
// any alpha works as long as A e^{-alpha n} covers the spread for n < m0.
HolderBounds locally_constant_holder(double spread, int m0) {
  if (spread <= 0.0) return {0.0, 1.0};
  return {spread * std::exp(static_cast<double>(m0)), 1.0};
}

}  // namespace

LetterPotential::LetterPotential(std::unordered_map<Letter, double> values)
    : values_(std::move(values)) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& [k, v] : values_) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  spread_ = values_.empty() ? 0.0 : hi - lo;
}

CylinderValue LetterPotential::eval(const TruncatedShift& shift,
                                    std::span<const std::int32_t> prefix) const {
  if (prefix.empty()) throw InadmissibleWord("empty prefix");
  auto it = values_.find(shift.letter(static_cast<std::size_t>(prefix[0])));
  if (it == values_.end()) throw LetterAbsent("letter has no assigned value");
  return {it->second, 0.0};
}

HolderBounds LetterPotential::holder() const { return locally_constant_holder(spread_, 1); }

PairPotential::PairPotential(std::map<std::pair<Letter, Letter>, double> values)
    : values_(std::move(values)) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& [k, v] : values_) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  spread_ = values_.empty() ? 0.0 : hi - lo;
}

CylinderValue PairPotential::eval(const TruncatedShift& shift,
                                  std::span<const std::int32_t> prefix) const {
  if (prefix.empty()) throw InadmissibleWord("empty prefix");
  std::int32_t a = prefix[0];
  std::int32_t b;
  if (prefix.size() >= 2) {
    b = prefix[1];
  } else {
    auto ext = pinned_extension(shift, prefix, 2);
    b = ext[1];
  }
  auto it = values_.find({shift.letter(static_cast<std::size_t>(a)),
                          shift.letter(static_cast<std::size_t>(b))});
  if (it == values_.end()) throw LetterAbsent("pair has no assigned value");
  // Radius covers the whole 1-cylinder when only one letter was given.
  return {it->second, prefix.size() >= 2 ? 0.0 : spread_};
}

HolderBounds PairPotential::holder() const { return locally_constant_holder(spread_, 2); }

CylinderValue LogLetterPotential::eval(const TruncatedShift& shift,
                                       std::span<const std::int32_t> prefix) const {
  if (prefix.empty()) throw InadmissibleWord("empty prefix");
  Letter a = shift.letter(static_cast<std::size_t>(prefix[0]));
  double x = static_cast<double>(a) + offset_;
  if (x <= 0.0) throw LetterAbsent("log_letter undefined for letter id " + std::to_string(a));
  return {coeff_ * std::log(x), 0.0};
}

GeometricMarkPotential::GeometricMarkPotential(Letter mark, double base, double scale)
    : mark_(mark), base_(base), scale_(scale) {
  if (base <= 0.0 || base >= 1.0) throw ConfigError("geometric base must be in (0,1)");
}

CylinderValue GeometricMarkPotential::eval(const TruncatedShift& shift,
                                           std::span<const std::int32_t> prefix) const {
  if (prefix.empty()) throw InadmissibleWord("empty prefix");
  // Value at the pinned extension; radius = worst-case tail beyond the prefix.
  const std::size_t extra = 48;
  auto ext = pinned_extension(shift, prefix, prefix.size() + extra);
  double v = 0.0;
  double w = scale_;
  for (std::size_t i = 0; i < ext.size(); ++i) {
    w *= base_;
    if (shift.letter(static_cast<std::size_t>(ext[i])) == mark_) v += w;
  }
  // Terms at positions <= len are fixed by the prefix; the rest vary over the
  // cylinder (plus the truncated tail of the pinned point itself).
  double tail_all = scale_ * std::pow(base_, static_cast<double>(prefix.size())) /
                        (1.0 - base_) * base_ +
                    scale_ * std::pow(base_, static_cast<double>(ext.size())) /
                        (1.0 - base_) * base_;
  return {v, tail_all};
}

HolderBounds GeometricMarkPotential::holder() const {
  // |f(x)-f(y)| <= scale * sum_{i>n} base^i = scale*base/(1-base) * base^n
  return {scale_ * base_ / (1.0 - base_), -std::log(base_)};
}

LinearCombinationPotential::LinearCombinationPotential(
    std::vector<std::pair<double, PotentialPtr>> terms)
    : terms_(std::move(terms)) {}

CylinderValue LinearCombinationPotential::eval(const TruncatedShift& shift,
                                               std::span<const std::int32_t> prefix) const {
  CylinderValue out;
  for (const auto& [c, f] : terms_) {
    auto v = f->eval(shift, prefix);
    out.value += c * v.value;
    out.error += std::abs(c) * v.error;
  }
  return out;
}

HolderBounds LinearCombinationPotential::holder() const {
  double A = 0.0, alpha = std::numeric_limits<double>::infinity();
  for (const auto& [c, f] : terms_) {
    auto h = f->holder();
    if (h.A > 0.0) {
      A += std::abs(c) * h.A;
      alpha = std::min(alpha, h.alpha);
    }
  }
  if (A == 0.0) return {0.0, 1.0};
  return {A, alpha};
}

std::optional<int> LinearCombinationPotential::locally_constant_depth() const {
  int m0 = 0;
  for (const auto& [c, f] : terms_) {
    auto m = f->locally_constant_depth();
    if (!m) return std::nullopt;
    m0 = std::max(m0, *m);
  }
  return m0;
}

std::string LinearCombinationPotential::describe() const {
  std::string s = "combination(";
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(terms_[i].first) + "*" + terms_[i].second->describe();
  }
  return s + ")";
}

PotentialPtr scale(double c, PotentialPtr f) {
  return std::make_shared<LinearCombinationPotential>(
      std::vector<std::pair<double, PotentialPtr>>{{c, std::move(f)}});
}

PotentialPtr combine(double a, PotentialPtr f, double b, PotentialPtr g) {
  return std::make_shared<LinearCombinationPotential>(
      std::vector<std::pair<double, PotentialPtr>>{{a, std::move(f)}, {b, std::move(g)}});
}

CoboundaryShiftedPotential::CoboundaryShiftedPotential(PotentialPtr f, PotentialPtr h)
    : f_(std::move(f)), h_(std::move(h)) {}

CylinderValue CoboundaryShiftedPotential::eval(const TruncatedShift& shift,
                                               std::span<const std::int32_t> prefix) const {
  auto vf = f_->eval(shift, prefix);
  auto vh = h_->eval(shift, prefix);
  std::vector<std::int32_t> shifted;
  if (prefix.size() >= 2) {
    shifted.assign(prefix.begin() + 1, prefix.end());
  } else {
    auto ext = pinned_extension(shift, prefix, 2);
    shifted.assign(ext.begin() + 1, ext.end());
  }
  auto vhs = h_->eval(shift, shifted);
  return {vf.value + vh.value - vhs.value, vf.error + vh.error + vhs.error};
}

HolderBounds CoboundaryShiftedPotential::holder() const {
  auto hf = f_->holder();
  auto hh = h_->holder();
  double alpha = std::min(hf.alpha, hh.alpha);
  // h o sigma loses one agreeing letter: constant inflated by e^{alpha}.
  double A = hf.A + hh.A * (1.0 + std::exp(alpha));
  return {A, alpha};
}

std::optional<int> CoboundaryShiftedPotential::locally_constant_depth() const {
  auto mf = f_->locally_constant_depth();
  auto mh = h_->locally_constant_depth();
  if (!mf || !mh) return std::nullopt;
  return std::max(*mf, *mh + 1);
}

// ---- Birkhoff sums ----------------------------------------------------------

CylinderValue eval_birkhoff(const Potential& f, const TruncatedShift& shift,
                            std::span<const std::int32_t> word,
                            const BirkhoffOptions& opts) {
  const std::size_t n = word.size();
  if (n == 0) return {0.0, 0.0};
  if (!(opts.cyclic ? is_cyclically_admissible(shift, word) : is_admissible(shift, word)))
    throw InadmissibleWord("word is not admissible");

  std::size_t depth = opts.depth;
  if (auto m0 = f.locally_constant_depth()) depth = std::max<std::size_t>(depth, static_cast<std::size_t>(*m0));

  CylinderValue out;
  std::vector<std::int32_t> buf;
  buf.reserve(n + depth);
  for (std::size_t i = 0; i < n; ++i) {
    buf.clear();
    if (opts.cyclic) {
      for (std::size_t j = 0; j < depth; ++j) buf.push_back(word[(i + j) % n]);
    } else {
      for (std::size_t j = i; j < n; ++j) buf.push_back(word[j]);
      if (buf.size() < depth) buf = pinned_extension(shift, buf, depth);
    }
    auto v = f.eval(shift, buf);
    out.value += v.value;
    out.error += v.error;
  }
  return out;
}

CylinderValue eval_birkhoff_at(const Potential& f, const TruncatedShift& shift,
                               const EventuallyPeriodicWord& w, std::size_t n,
                               std::size_t depth) {
  if (auto m0 = f.locally_constant_depth())
    depth = std::max<std::size_t>(depth, static_cast<std::size_t>(*m0));
  CylinderValue out;
  std::vector<std::int32_t> buf(depth);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < depth; ++j) buf[j] = w.at(i + j);
    auto v = f.eval(shift, buf);
    out.value += v.value;
    out.error += v.error;
  }
  return out;
}

// ---- Letter bounds ----------------------------------------------------------

LetterBounds letter_bounds_at(const Potential& f, std::size_t index,
                              const TruncatedShift& shift, int depth) {
  if (index >= shift.size()) throw LetterAbsent("letter index outside truncation");
  // f only sees the first m0 letters, so exhausting depth-m0 cylinders is
  // already exact.
  if (auto m0 = f.locally_constant_depth()) depth = std::min(depth, *m0);
  depth = std::max(depth, 1);

  // Each eval's error already covers its cylinder, so [v-e, v+e] over a
  // partition of [a] into depth-d cylinders certifies inf/sup of f on [a].
  // A leaf budget keeps wide alphabets from exploding: once exhausted, the
  // current shorter prefix is evaluated instead (still a valid cover).
  constexpr std::size_t kLeafBudget = 200000;
  std::size_t leaves = 0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  const std::size_t k = shift.size();
  std::vector<std::int32_t> w{static_cast<std::int32_t>(index)};
  w.reserve(static_cast<std::size_t>(depth));
  auto rec = [&](auto&& self) -> void {
    if (w.size() == static_cast<std::size_t>(depth) || leaves >= kLeafBudget) {
      auto v = f.eval(shift, w);
      lo = std::min(lo, v.value - v.error);
      hi = std::max(hi, v.value + v.error);
      ++leaves;
      return;
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (!shift.allowed(static_cast<std::size_t>(w.back()), c)) continue;
      w.push_back(static_cast<std::int32_t>(c));
      self(self);
      w.pop_back();
    }
  };
  rec(rec);

  LetterBounds out;
  out.letter = shift.letter(index);
  out.lower = lo;
  out.upper = hi;
  out.certificate_depth = depth;
  return out;
}

LetterBounds letter_bounds(const Potential& f, Letter a, const TruncatedShift& shift,
                           int depth) {
  auto idx = shift.index_of(a);
  if (!idx) throw LetterAbsent("letter " + std::to_string(a) + " not in truncation");
  return letter_bounds_at(f, *idx, shift, depth);
}

double certified_inf(const Potential& f, const TruncatedShift& shift, int depth) {
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < shift.size(); ++i)
    lo = std::min(lo, letter_bounds_at(f, i, shift, depth).lower);
  return lo;
}

// ---- Regularization ---------------------------------------------------------

RegularizedPotential::RegularizedPotential(PotentialPtr f, int N, double B,
                                           const TruncatedShift& shift, int bound_depth)
    : f_(std::move(f)), N_(N), B_(B), shift_(&shift) {
  if (N < 1) throw ConfigError("regularize: N must be >= 1");
  if (B <= 0.0) throw ConfigError("regularize: B must be > 0");

  std::vector<LetterBounds> bounds(shift.size());
  double inf_lower = std::numeric_limits<double>::infinity();
  double sup_in_f = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < shift.size(); ++i) {
    bounds[i] = letter_bounds_at(*f_, i, shift, bound_depth);
    inf_lower = std::min(inf_lower, bounds[i].lower);
  }
  R_ = std::abs(inf_lower);
  threshold_ = R_ * static_cast<double>(N_) + B_;
  in_f_.assign(shift.size(), false);
  for (std::size_t i = 0; i < shift.size(); ++i) {
    // Borderline letters (within certificate radius) are included in F.
    if (bounds[i].lower <= threshold_) {
      in_f_[i] = true;
      sup_in_f = std::max(sup_in_f, bounds[i].upper);
    }
  }
  T_ = std::isfinite(sup_in_f) ? sup_in_f : 0.0;
  closeness_ = 2.0 * (threshold_ + T_);

  // Eventual-positivity witness check at n = N over cyclic words. Boundary
  // equality S_N = B is accepted: the construction's conclusions only need
  // S_N >= B, and the common parameter choice (N=1, B=inf f) sits exactly
  // there.
  auto fixN = enumerate_fix(shift, static_cast<std::size_t>(N_));
  for (const auto& w : fixN) {
    auto s = eval_birkhoff(*f_, shift, w.idx);
    if (s.value + s.error < B_ - 1e-15 * std::abs(B_))
      throw NotEventuallyPositive("S_N f < B on a length-N cyclic word");
  }

  auto hb = f_->holder();
  // Certified constants. For n >= N the averaged terms lose at most N
  // agreeing letters. For n < N the censoring bounds every summand of C_N
  // into [-R, max(T, RN+B)], so the variation over any 1-cylinder is finite.
  double deep = hb.A * (2.0 + std::exp(hb.alpha * static_cast<double>(N_)));
  double shallow = (T_ + threshold_ + R_ + hb.A) *
                   std::exp(hb.alpha * static_cast<double>(N_ + 1));
  holder_ = {std::max(deep, shallow), hb.alpha};
}

std::optional<int> RegularizedPotential::locally_constant_depth() const {
  // g sees the F-membership of x_1..x_N and the depth-m0 windows of the first
  // N shifts, hence the first N - 1 + m0 letters.
  auto m0 = f_->locally_constant_depth();
  if (!m0) return std::nullopt;
  return *m0 + N_ - 1;
}

CylinderValue RegularizedPotential::eval(const TruncatedShift& shift,
                                         std::span<const std::int32_t> prefix) const {
  if (prefix.empty()) throw InadmissibleWord("empty prefix");
  std::size_t need;
  if (auto m0 = f_->locally_constant_depth())
    need = static_cast<std::size_t>(N_ - 1 + *m0);
  else
    need = static_cast<std::size_t>(N_) + 9;

  std::vector<std::int32_t> w(prefix.begin(), prefix.end());
  if (w.size() < need) w = pinned_extension(shift, w, need);

  CylinderValue out;
  // (1/N) C_N f
  for (int i = 0; i < N_; ++i) {
    std::span<const std::int32_t> sub(w.data() + i, w.size() - static_cast<std::size_t>(i));
    if (in_f_[static_cast<std::size_t>(w[static_cast<std::size_t>(i)])]) {
      auto v = f_->eval(shift, sub);
      out.value += v.value / N_;
      out.error += v.error / N_;
    } else {
      out.value += threshold_ / N_;
    }
  }
  // (f - threshold) 1_{x1 not in F}
  if (!in_f_[static_cast<std::size_t>(w[0])]) {
    auto v = f_->eval(shift, w);
    out.value += v.value - threshold_;
    out.error += v.error;
  }
  // Letters beyond the given prefix were pinned; the variation of g over the
  // original (wider) cylinder is covered by g's own Hölder certificate.
  if (prefix.size() < need) out.error += holder_.radius(prefix.size());
  return out;
}

PotentialPtr regularize(PotentialPtr f, int N, double B, const TruncatedShift& shift,
                        int bound_depth) {
  return std::make_shared<RegularizedPotential>(std::move(f), N, B, shift, bound_depth);
}

// ---- Livsic and arithmetic tests --------------------------------------------

LivsicReport livsic_test(const Potential& f, const Potential& g,
                         const TruncatedShift& shift, std::size_t n_max, double tol) {
  LivsicReport rep;
  rep.cohomologous_up_to_tol = true;
  for (std::size_t n = 1; n <= n_max; ++n) {
    for (const auto& w : enumerate_fix(shift, n)) {
      auto sf = eval_birkhoff(f, shift, w.idx);
      auto sg = eval_birkhoff(g, shift, w.idx);
      double violation = std::abs(sf.value - sg.value) - (sf.error + sg.error);
      if (violation > rep.worst_violation) {
        rep.worst_violation = violation;
        rep.worst_n = n;
        rep.worst_word = w;
      }
    }
  }
  rep.worst_violation = std::max(rep.worst_violation, 0.0);
  rep.cohomologous_up_to_tol = rep.worst_violation <= tol;
  return rep;
}

namespace {

double near_gcd(double a, double b, double tol) {
  a = std::abs(a);
  b = std::abs(b);
  if (a < b) std::swap(a, b);
  while (b > tol) {
    double r = std::fmod(a, b);
    // Pull residues close to 0 or b onto the lattice.
    if (r > b - tol) r = 0.0;
    a = b;
    b = r;
  }
  return a;
}

}  // namespace

ArithmeticReport arithmetic_test(const Potential& f, const TruncatedShift& shift,
                                 std::size_t n_max, double tol) {
  // Collect periods over canonical orbits (rotations repeat the same value).
  std::set<double> periods;
  for (std::size_t n = 1; n <= n_max; ++n) {
    for (const auto& w : enumerate_fix(shift, n)) {
      if (canonical_rotation(w) == w) {
        auto s = eval_birkhoff(f, shift, w.idx);
        if (std::abs(s.value) > 100 * tol) periods.insert(std::abs(s.value));
      }
    }
  }
  ArithmeticReport rep;
  rep.periods_examined = periods.size();
  if (periods.empty()) return rep;

  double g = 0.0;
  for (double v : periods) g = (g == 0.0) ? v : near_gcd(g, v, tol);

  if (g > 100 * tol) {
    // Verify every period is close to a multiple of g.
    bool ok = true;
    for (double v : periods) {
      double m = std::round(v / g);
      if (std::abs(v - m * g) > tol * std::max(1.0, m)) ok = false;
    }
    if (ok) {
      rep.arithmetic_suspected = true;
      rep.generator = g;
      return rep;
    }
  }
  auto it = periods.begin();
  double w0 = *it;
  double w1 = w0;
  for (++it; it != periods.end(); ++it) {
    if (std::abs(*it - w0) > 100 * tol) {
      w1 = *it;
      break;
    }
  }
  rep.arithmetic_suspected = false;
  rep.witness = {w0, w1};
  return rep;
}

}  // namespace thermoshift

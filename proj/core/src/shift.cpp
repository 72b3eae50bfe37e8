#include "thermoshift/shift.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <queue>

namespace thermoshift {

ShiftSpec ShiftSpec::full_shift(std::int64_t k) {
  ShiftSpec s;
  s.kind = AlphabetKind::finite;
  s.finite_letters.resize(static_cast<std::size_t>(k));
  std::iota(s.finite_letters.begin(), s.finite_letters.end(), Letter{0});
  s.allowed = [](Letter, Letter) { return true; };
  s.known_full = true;
  s.name = "full_" + std::to_string(k);
  return s;
}

ShiftSpec ShiftSpec::full_countable() {
  ShiftSpec s;
  s.kind = AlphabetKind::countable;
  s.allowed = [](Letter, Letter) { return true; };
  s.known_full = true;
  s.name = "full_countable";
  return s;
}

ShiftSpec ShiftSpec::from_matrix(const std::vector<std::vector<int>>& m,
                                 std::vector<Letter> letters) {
  const std::size_t n = m.size();
  for (const auto& row : m)
    if (row.size() != n) throw ConfigError("transition matrix is not square");
  if (letters.empty()) {
    letters.resize(n);
    std::iota(letters.begin(), letters.end(), Letter{0});
  } else if (letters.size() != n) {
    throw ConfigError("letter list size does not match transition matrix");
  }
  bool full = true;
  for (const auto& row : m)
    for (int v : row)
      if (v == 0) full = false;

  ShiftSpec s;
  s.kind = AlphabetKind::finite;
  s.finite_letters = letters;
  // Capture a dense copy; ids outside the list are never queried.
  std::vector<Letter> ids = letters;
  s.allowed = [m, ids](Letter a, Letter b) {
    auto ia = std::find(ids.begin(), ids.end(), a);
    auto ib = std::find(ids.begin(), ids.end(), b);
    if (ia == ids.end() || ib == ids.end()) return false;
    return m[static_cast<std::size_t>(ia - ids.begin())]
            [static_cast<std::size_t>(ib - ids.begin())] != 0;
  };
  s.known_full = full;
  s.name = "matrix_" + std::to_string(n);
  return s;
}

ShiftSpec ShiftSpec::no_aa() {
  ShiftSpec s = from_matrix({{0, 1}, {1, 1}});
  s.name = "no_aa";
  return s;
}

TransitionMatrix TransitionMatrix::make_full(std::size_t n) {
  TransitionMatrix t;
  t.n_ = n;
  t.full_ = true;
  return t;
}

TransitionMatrix TransitionMatrix::make_dense(std::size_t n) {
  TransitionMatrix t;
  t.n_ = n;
  t.words_ = (n + 63) / 64;
  t.bits_.assign(n * t.words_, 0);
  return t;
}

std::size_t TransitionMatrix::row_degree(std::size_t i) const {
  if (full_) return n_;
  std::size_t d = 0;
  for (std::size_t w = 0; w < words_; ++w) d += __builtin_popcountll(bits_[i * words_ + w]);
  return d;
}

std::size_t TransitionMatrix::col_degree(std::size_t j) const {
  if (full_) return n_;
  std::size_t d = 0;
  for (std::size_t i = 0; i < n_; ++i) d += allowed(i, j) ? 1 : 0;
  return d;
}

std::optional<std::size_t> TruncatedShift::index_of(Letter a) const {
  auto it = std::find(letters.begin(), letters.end(), a);
  if (it == letters.end()) return std::nullopt;
  return static_cast<std::size_t>(it - letters.begin());
}

namespace {

constexpr std::size_t kDenseLimit = 1 << 14;
constexpr std::size_t kScanCap = 2'000'000;

std::vector<Letter> select_letters(const ShiftSpec& spec, const TruncationRule& rule,
                                   std::string& note) {
  std::vector<Letter> out;
  if (spec.kind == ShiftSpec::AlphabetKind::finite) {
    out = spec.finite_letters;
    if (rule.kind == TruncationRule::Kind::first_k) {
      if (rule.k < static_cast<std::int64_t>(out.size()))
        out.resize(static_cast<std::size_t>(std::max<std::int64_t>(rule.k, 0)));
      note = "finite alphabet, first_k(" + std::to_string(rule.k) + ")";
    } else {
      std::vector<Letter> kept;
      for (Letter a : out) {
        double w = spec.letter_weight_hint ? spec.letter_weight_hint(a)
                                           : static_cast<double>(a);
        if (w <= rule.w) kept.push_back(a);
      }
      out = kept;
      note = "finite alphabet, weight_below(" + std::to_string(rule.w) + ")";
    }
    return out;
  }
  // Countable alphabet: ids 1, 2, 3, ...
  if (rule.kind == TruncationRule::Kind::first_k) {
    for (std::int64_t a = 1; a <= rule.k; ++a) out.push_back(a);
    note = "countable alphabet, first_k(" + std::to_string(rule.k) + ")";
    return out;
  }
  int consecutive_over = 0;
  for (std::int64_t a = 1; a <= static_cast<std::int64_t>(kScanCap); ++a) {
    double w = spec.letter_weight_hint ? spec.letter_weight_hint(a)
                                       : static_cast<double>(a);
    if (w <= rule.w) {
      out.push_back(a);
      consecutive_over = 0;
    } else if (++consecutive_over >= 64) {
      break;
    }
  }
  note = "countable alphabet, weight_below(" + std::to_string(rule.w) + ")";
  return out;
}

}  // namespace

TruncatedShift build_truncation(const ShiftSpec& spec, const TruncationRule& rule) {
  TruncatedShift t;
  t.spec = std::make_shared<ShiftSpec>(spec);
  t.letters = select_letters(spec, rule, t.cutoff_note);
  if (t.letters.empty()) throw EmptyTruncation("truncation rule selected no letters");

  if (spec.known_full) {
    t.transition = TransitionMatrix::make_full(t.letters.size());
    return t;
  }
  if (t.letters.size() > kDenseLimit)
    throw TooManyCylinders(
        "truncation too large for an explicit transition matrix (" +
            std::to_string(t.letters.size()) + " letters)",
        kDenseLimit);

  // Build the restricted matrix, then prune letters with an empty row or
  // column until stable; the restriction must stay exactly spec.allowed.
  std::vector<Letter> live = t.letters;
  while (true) {
    const std::size_t n = live.size();
    if (n == 0) throw Disconnected("pruning dead letters emptied the truncation");
    std::vector<std::size_t> rowdeg(n, 0), coldeg(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (spec.allowed(live[i], live[j])) {
          ++rowdeg[i];
          ++coldeg[j];
        }
    std::vector<Letter> kept;
    for (std::size_t i = 0; i < n; ++i) {
      if (rowdeg[i] > 0 && coldeg[i] > 0)
        kept.push_back(live[i]);
      else
        t.dropped.push_back(live[i]);
    }
    if (kept.size() == live.size()) break;
    live = kept;
  }
  t.letters = live;
  const std::size_t n = live.size();
  t.transition = TransitionMatrix::make_dense(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (spec.allowed(live[i], live[j])) t.transition.set(i, j);
  if (!t.dropped.empty())
    t.cutoff_note += ", pruned " + std::to_string(t.dropped.size()) + " dead letters";
  return t;
}

bool is_admissible(const TruncatedShift& shift, std::span<const std::int32_t> w) {
  for (std::size_t i = 0; i + 1 < w.size(); ++i)
    if (!shift.allowed(static_cast<std::size_t>(w[i]), static_cast<std::size_t>(w[i + 1])))
      return false;
  return true;
}

bool is_cyclically_admissible(const TruncatedShift& shift, std::span<const std::int32_t> w) {
  if (w.empty()) return false;
  return is_admissible(shift, w) &&
         shift.allowed(static_cast<std::size_t>(w.back()), static_cast<std::size_t>(w.front()));
}

Word canonical_rotation(const Word& w) {
  const std::size_t n = w.size();
  if (n == 0) return w;
  std::size_t best = 0;
  for (std::size_t r = 1; r < n; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      auto a = w.idx[(r + i) % n];
      auto b = w.idx[(best + i) % n];
      if (a != b) {
        if (a < b) best = r;
        break;
      }
    }
  }
  Word out;
  out.idx.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.idx[i] = w.idx[(best + i) % n];
  return out;
}

std::size_t minimal_period(std::span<const std::int32_t> w) {
  const std::size_t n = w.size();
  for (std::size_t p = 1; p < n; ++p) {
    if (n % p != 0) continue;
    bool ok = true;
    for (std::size_t i = p; i < n && ok; ++i) ok = (w[i] == w[i - p]);
    if (ok) return p;
  }
  return n;
}

bool is_primitive(const Word& w) { return minimal_period(w.idx) == w.size(); }

PeriodicOrbit PeriodicOrbit::from_word(const Word& w) {
  PeriodicOrbit o;
  o.representative = canonical_rotation(w);
  o.period = w.size();
  o.primitive = is_primitive(w);
  return o;
}

void for_each_fix(const TruncatedShift& shift, std::size_t n,
                  const std::function<void(std::span<const std::int32_t>)>& visit,
                  const std::function<bool(std::span<const std::int32_t>)>& prune,
                  std::optional<std::size_t> first_letter) {
  if (n == 0) return;
  const std::size_t k = shift.size();
  std::vector<std::int32_t> w(n);
  // Iterative DFS in lexicographic order.
  std::size_t depth = 0;
  std::int32_t next = first_letter ? static_cast<std::int32_t>(*first_letter) : 0;
  const std::int32_t first_hi =
      first_letter ? static_cast<std::int32_t>(*first_letter) + 1 : static_cast<std::int32_t>(k);
  while (true) {
    bool descended = false;
    std::int32_t hi = (depth == 0) ? first_hi : static_cast<std::int32_t>(k);
    for (std::int32_t c = next; c < hi; ++c) {
      if (depth > 0 && !shift.allowed(static_cast<std::size_t>(w[depth - 1]),
                                      static_cast<std::size_t>(c)))
        continue;
      w[depth] = c;
      std::span<const std::int32_t> pref(w.data(), depth + 1);
      if (prune && prune(pref)) continue;
      if (depth + 1 == n) {
        if (shift.allowed(static_cast<std::size_t>(c), static_cast<std::size_t>(w[0])))
          visit(std::span<const std::int32_t>(w.data(), n));
        continue;
      }
      ++depth;
      next = 0;
      descended = true;
      break;
    }
    if (descended) continue;
    if (depth == 0) break;
    --depth;
    next = w[depth] + 1;
  }
}

std::vector<Word> enumerate_fix(const TruncatedShift& shift, std::size_t n,
                                std::optional<std::size_t> first_letter) {
  std::vector<Word> out;
  for_each_fix(
      shift, n,
      [&](std::span<const std::int32_t> w) {
        Word word;
        word.idx.assign(w.begin(), w.end());
        out.push_back(std::move(word));
      },
      {}, first_letter);
  return out;
}

namespace {

// Strong connectivity + period (gcd of cycle lengths) via BFS levels.
struct GraphInfo {
  bool irreducible = false;
  std::int64_t period = 0;
};

GraphInfo analyze(const TransitionMatrix& t) {
  const std::size_t n = t.size();
  GraphInfo info;
  if (n == 0) return info;
  if (t.is_full()) {
    info.irreducible = true;
    info.period = 1;
    return info;
  }
  auto reach = [&](bool forward) {
    std::vector<char> seen(n, 0);
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = 1;
    while (!q.empty()) {
      std::size_t u = q.front();
      q.pop();
      for (std::size_t v = 0; v < n; ++v) {
        bool edge = forward ? t.allowed(u, v) : t.allowed(v, u);
        if (edge && !seen[v]) {
          seen[v] = 1;
          q.push(v);
        }
      }
    }
    return seen;
  };
  auto fwd = reach(true);
  auto bwd = reach(false);
  info.irreducible = true;
  for (std::size_t i = 0; i < n; ++i)
    if (!fwd[i] || !bwd[i]) info.irreducible = false;
  if (!info.irreducible) return info;

  std::vector<std::int64_t> level(n, -1);
  std::queue<std::size_t> q;
  q.push(0);
  level[0] = 0;
  std::int64_t g = 0;
  while (!q.empty()) {
    std::size_t u = q.front();
    q.pop();
    t.for_each_in_row(u, [&](std::size_t v) {
      if (level[v] < 0) {
        level[v] = level[u] + 1;
        q.push(v);
      } else {
        g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
      }
    });
  }
  info.period = g == 0 ? 0 : g;
  return info;
}

}  // namespace

BipMixingReport check_bip_mixing(const TruncatedShift& shift) {
  BipMixingReport r;
  const std::size_t n = shift.size();
  auto info = analyze(shift.transition);
  r.irreducible = info.irreducible;
  r.period = info.period;
  r.mixing = info.irreducible && info.period == 1;

  // Greedy witness: pick letters until every letter has an in- and out-
  // neighbor inside the witness set. Any set works once rows/columns are
  // nonempty, so this terminates.
  std::vector<char> in_cov(n, 0), out_cov(n, 0);
  std::vector<char> chosen(n, 0);
  auto covered = [&]() {
    for (std::size_t a = 0; a < n; ++a)
      if (!in_cov[a] || !out_cov[a]) return false;
    return true;
  };
  while (!covered()) {
    std::size_t best = n, best_gain = 0;
    for (std::size_t b = 0; b < n; ++b) {
      if (chosen[b]) continue;
      std::size_t gain = 0;
      for (std::size_t a = 0; a < n; ++a) {
        if (!in_cov[a] && shift.allowed(b, a)) ++gain;
        if (!out_cov[a] && shift.allowed(a, b)) ++gain;
      }
      if (gain > best_gain) {
        best_gain = gain;
        best = b;
      }
    }
    if (best == n) break;  // cannot cover (some empty row/col slipped through)
    chosen[best] = 1;
    for (std::size_t a = 0; a < n; ++a) {
      if (shift.allowed(best, a)) in_cov[a] = 1;
      if (shift.allowed(a, best)) out_cov[a] = 1;
    }
  }
  r.has_witness = covered();
  if (r.has_witness)
    for (std::size_t b = 0; b < n; ++b)
      if (chosen[b]) r.bip_witness.push_back(shift.letter(b));
  return r;
}

std::vector<std::int32_t> pinned_extension(const TruncatedShift& shift,
                                           std::span<const std::int32_t> prefix,
                                           std::size_t len) {
  std::vector<std::int32_t> out(prefix.begin(), prefix.end());
  const std::size_t k = shift.size();
  while (out.size() < len) {
    std::size_t last = static_cast<std::size_t>(out.back());
    std::int32_t next = -1;
    for (std::size_t c = 0; c < k; ++c)
      if (shift.allowed(last, c)) {
        next = static_cast<std::int32_t>(c);
        break;
      }
    if (next < 0) throw Disconnected("letter with no continuation inside truncation");
    out.push_back(next);
  }
  return out;
}

bool EventuallyPeriodicWord::is_periodic_word() const {
  // An eventually (b0 b1)-periodic word is periodic iff the head already
  // follows the alternation with matching phase: head[i] must equal
  // cycle[(i - head.size()) mod 2] = cycle[(i + head.size()) mod 2].
  if (cycle[0] == cycle[1]) {
    for (std::int32_t h : head)
      if (h != cycle[0]) return false;
    return true;
  }
  for (std::size_t i = 0; i < head.size(); ++i)
    if (head[i] != cycle[(i + head.size()) & 1]) return false;
  return true;
}

EventuallyPeriodicWord aperiodic_extension(const TruncatedShift& shift,
                                           std::span<const std::int32_t> prefix) {
  if (prefix.empty()) throw InadmissibleWord("empty prefix");
  const std::size_t k = shift.size();

  // The two lex-least distinct letters forming an admissible 2-cycle;
  // self-loops are a fallback when no distinct pair exists.
  std::int32_t b0 = -1, b1 = -1;
  for (std::size_t i = 0; i < k && b0 < 0; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      if (shift.allowed(i, j) && shift.allowed(j, i)) {
        b0 = static_cast<std::int32_t>(i);
        b1 = static_cast<std::int32_t>(j);
        break;
      }
  if (b0 < 0) {
    for (std::size_t i = 0; i < k && b0 < 0; ++i)
      if (shift.allowed(i, i)) b0 = b1 = static_cast<std::int32_t>(i);
  }
  if (b0 < 0) throw SamplePointPeriodic("no 2-cycle available for the aperiodic tail");

  // Shortest lex-least connector from last(prefix) to b0 (BFS on letters).
  std::vector<std::int32_t> parent(k, -2);
  std::queue<std::int32_t> q;
  std::int32_t start = prefix.back();
  parent[static_cast<std::size_t>(start)] = -1;
  q.push(start);
  while (!q.empty() && parent[static_cast<std::size_t>(b0)] == -2) {
    std::int32_t u = q.front();
    q.pop();
    for (std::size_t v = 0; v < k; ++v)
      if (shift.allowed(static_cast<std::size_t>(u), v) && parent[v] == -2) {
        parent[v] = u;
        q.push(static_cast<std::int32_t>(v));
      }
  }
  if (parent[static_cast<std::size_t>(b0)] == -2)
    throw SamplePointPeriodic("cycle letters unreachable from prefix");
  std::vector<std::int32_t> connector;  // path excluding start, ending in b0
  for (std::int32_t v = b0; v != start; v = parent[static_cast<std::size_t>(v)])
    connector.push_back(v);
  std::reverse(connector.begin(), connector.end());

  std::vector<std::int32_t> head_base(prefix.begin(), prefix.end());
  if (!connector.empty())
    head_base.insert(head_base.end(), connector.begin(), connector.end() - 1);

  // Try short detours before the alternation, shortest and lex-least first,
  // until the word is admissible and genuinely aperiodic.
  std::vector<std::vector<std::int32_t>> detours{{}};
  for (std::size_t d = 0; d < k; ++d) detours.push_back({static_cast<std::int32_t>(d)});
  for (std::size_t d1 = 0; d1 < k; ++d1)
    for (std::size_t d2 = 0; d2 < k; ++d2)
      detours.push_back({static_cast<std::int32_t>(d1), static_cast<std::int32_t>(d2)});

  for (const auto& detour : detours) {
    for (auto phase : {std::array<std::int32_t, 2>{b0, b1}, {b1, b0}}) {
      EventuallyPeriodicWord z;
      z.head = head_base;
      z.head.insert(z.head.end(), detour.begin(), detour.end());
      z.cycle = phase;
      bool ok = true;
      for (std::size_t i = 0; i + 1 < z.head.size() && ok; ++i)
        ok = shift.allowed(static_cast<std::size_t>(z.head[i]),
                           static_cast<std::size_t>(z.head[i + 1]));
      if (ok && !z.head.empty())
        ok = shift.allowed(static_cast<std::size_t>(z.head.back()),
                           static_cast<std::size_t>(phase[0]));
      if (ok && b0 == b1 && phase[0] != phase[1]) ok = false;
      if (ok && !z.is_periodic_word()) return z;
    }
  }
  throw SamplePointPeriodic("no aperiodic extension found");
}

}  // namespace thermoshift

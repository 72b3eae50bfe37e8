#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thermoshift/errors.hpp"

namespace thermoshift {

// Letters are opaque integer ids. Countable alphabets are indexed by the
// positive integers 1, 2, 3, ...; finite alphabets may use any ids.
using Letter = std::int64_t;

// A countable (or finite) Markov shift: alphabet plus a total, deterministic
// transition predicate. Geometry modules map their data onto letter ids; this
// type stays independent of where the letters came from.
struct ShiftSpec {
  enum class AlphabetKind { finite, countable };

  AlphabetKind kind = AlphabetKind::finite;
  std::vector<Letter> finite_letters;                 // kind == finite
  std::function<bool(Letter, Letter)> allowed;        // total on alphabet^2
  std::function<double(Letter)> letter_weight_hint;   // optional, monotone for weight_below
  std::function<double(Letter)> letter_size;          // optional, used by tail-model fits
  bool known_full = false;  // transition constant 1 (lets large truncations stay implicit)
  std::string name;

  static ShiftSpec full_shift(std::int64_t k);
  static ShiftSpec full_countable();
  static ShiftSpec from_matrix(const std::vector<std::vector<int>>& m,
                               std::vector<Letter> letters = {});
  // 2-letter shift {0,1} forbidding the pair (0,0).
  static ShiftSpec no_aa();

  double size_of(Letter a) const {
    if (letter_size) return letter_size(a);
    return a >= 1 ? static_cast<double>(a) : 1.0;
  }
};

// 0-1 transition matrix over truncation indices. "full" stays implicit so
// large full alphabets never materialize k^2 bits.
class TransitionMatrix {
 public:
  static TransitionMatrix make_full(std::size_t n);
  static TransitionMatrix make_dense(std::size_t n);

  bool allowed(std::size_t i, std::size_t j) const {
    if (full_) return true;
    return (bits_[i * words_ + (j >> 6)] >> (j & 63)) & 1u;
  }
  void set(std::size_t i, std::size_t j) {
    bits_[i * words_ + (j >> 6)] |= std::uint64_t{1} << (j & 63);
  }
  std::size_t size() const { return n_; }
  bool is_full() const { return full_; }

  std::size_t row_degree(std::size_t i) const;
  std::size_t col_degree(std::size_t j) const;

  template <class F>
  void for_each_in_row(std::size_t i, F&& f) const {
    if (full_) {
      for (std::size_t j = 0; j < n_; ++j) f(j);
      return;
    }
    for (std::size_t w = 0; w < words_; ++w) {
      std::uint64_t bits = bits_[i * words_ + w];
      while (bits) {
        unsigned b = static_cast<unsigned>(__builtin_ctzll(bits));
        f(w * 64 + b);
        bits &= bits - 1;
      }
    }
  }

 private:
  std::size_t n_ = 0;
  std::size_t words_ = 0;
  bool full_ = false;
  std::vector<std::uint64_t> bits_;
};

struct TruncationRule {
  enum class Kind { first_k, weight_below };
  Kind kind = Kind::first_k;
  std::int64_t k = 0;
  double w = 0.0;

  static TruncationRule first_k(std::int64_t k) { return {Kind::first_k, k, 0.0}; }
  static TruncationRule weight_below(double w) { return {Kind::weight_below, 0, w}; }
};

// Finite restriction of a ShiftSpec. Rows and columns of the transition
// matrix are nonempty (dead letters are pruned and recorded). Owns a copy of
// the spec so the truncation never dangles.
struct TruncatedShift {
  std::shared_ptr<const ShiftSpec> spec;
  std::vector<Letter> letters;   // ordered; index in this vector is the working id
  TransitionMatrix transition;
  std::string cutoff_note;
  std::vector<Letter> dropped;   // pruned to restore row/column nonemptiness

  std::size_t size() const { return letters.size(); }
  Letter letter(std::size_t idx) const { return letters[idx]; }
  std::optional<std::size_t> index_of(Letter a) const;
  bool allowed(std::size_t i, std::size_t j) const { return transition.allowed(i, j); }
};

TruncatedShift build_truncation(const ShiftSpec& spec, const TruncationRule& rule);

// Finite admissible word over truncation indices.
struct Word {
  std::vector<std::int32_t> idx;

  std::size_t size() const { return idx.size(); }
  bool operator==(const Word&) const = default;
};

bool is_admissible(const TruncatedShift& shift, std::span<const std::int32_t> w);
// True when additionally allowed(last, first) holds (the word closes up).
bool is_cyclically_admissible(const TruncatedShift& shift, std::span<const std::int32_t> w);

// Lexicographically least rotation (canonical representative of the orbit).
Word canonical_rotation(const Word& w);
// Minimal period p (p divides w.size(); p == size() iff primitive).
std::size_t minimal_period(std::span<const std::int32_t> w);
bool is_primitive(const Word& w);

struct PeriodicOrbit {
  Word representative;  // canonical rotation
  std::size_t period = 0;
  bool primitive = false;

  static PeriodicOrbit from_word(const Word& w);
};

// All admissible cyclic words of length n (x in Fix^n), in lexicographic
// order of the raw word; optionally filtered by first letter (by index).
std::vector<Word> enumerate_fix(const TruncatedShift& shift, std::size_t n,
                                std::optional<std::size_t> first_letter = {});

// Depth-first walk over Fix^n without materializing the list. visit receives
// the full word; prune(prefix) may cut a subtree (return true to prune).
void for_each_fix(const TruncatedShift& shift, std::size_t n,
                  const std::function<void(std::span<const std::int32_t>)>& visit,
                  const std::function<bool(std::span<const std::int32_t>)>& prune = {},
                  std::optional<std::size_t> first_letter = {});

struct BipMixingReport {
  std::vector<Letter> bip_witness;
  bool has_witness = false;
  bool irreducible = false;
  bool mixing = false;
  std::int64_t period = 0;  // gcd of cycle lengths (0 if no cycle)
};

BipMixingReport check_bip_mixing(const TruncatedShift& shift);

// Lex-least admissible infinite continuation, materialized to `len` letters.
std::vector<std::int32_t> pinned_extension(const TruncatedShift& shift,
                                           std::span<const std::int32_t> prefix,
                                           std::size_t len);

// Eventually 2-periodic infinite word with O(1) letter access: head then the
// cycle (b0 b1)^inf. Used for sample points z_p and renewal base points.
struct EventuallyPeriodicWord {
  std::vector<std::int32_t> head;
  std::array<std::int32_t, 2> cycle{0, 0};

  std::int32_t at(std::size_t i) const {
    if (i < head.size()) return head[i];
    return cycle[(i - head.size()) & 1];
  }
  bool is_periodic_word() const;  // true iff globally periodic as infinite word
};

// Lex-least admissible aperiodic extension of `prefix` (spec'd sample point
// construction). Throws SamplePointPeriodic if none is found.
EventuallyPeriodicWord aperiodic_extension(const TruncatedShift& shift,
                                           std::span<const std::int32_t> prefix);

}  // namespace thermoshift

#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "thermoshift/shift.hpp"

namespace thermoshift {

// Value of f at the pinned point of a cylinder, with a radius valid over the
// whole cylinder. The pinned point is the lex-least admissible infinite
// extension of the prefix.
struct CylinderValue {
  double value = 0.0;
  double error = 0.0;
};

// |f(x) - f(y)| <= A e^{-alpha n} whenever x_i = y_i for i <= n.
struct HolderBounds {
  double A = 0.0;
  double alpha = 1.0;

  double radius(std::size_t prefix_len) const {
    return A * std::exp(-alpha * static_cast<double>(prefix_len));
  }
  // A * sum_{l >= k} e^{-alpha l}
  double tail(std::size_t k) const {
    return A * std::exp(-alpha * static_cast<double>(k)) / (1.0 - std::exp(-alpha));
  }
};

// Locally Hölder potential evaluated on finite word prefixes. Evaluation is
// deterministic; the reported error never exceeds holder().radius(len).
class Potential {
 public:
  virtual ~Potential() = default;

  virtual CylinderValue eval(const TruncatedShift& shift,
                             std::span<const std::int32_t> prefix) const = 0;
  virtual HolderBounds holder() const = 0;
  // Depth m0 such that the error is exactly 0 for prefixes of length >= m0.
  virtual std::optional<int> locally_constant_depth() const { return std::nullopt; }
  virtual std::string describe() const = 0;
};

using PotentialPtr = std::shared_ptr<const Potential>;

// f == c.
class ConstantPotential final : public Potential {
 public:
  explicit ConstantPotential(double c) : c_(c) {}
  CylinderValue eval(const TruncatedShift&, std::span<const std::int32_t>) const override {
    return {c_, 0.0};
  }
  HolderBounds holder() const override { return {0.0, 1.0}; }
  std::optional<int> locally_constant_depth() const override { return 1; }
  std::string describe() const override { return "constant(" + std::to_string(c_) + ")"; }

 private:
  double c_;
};

// Depth-1 locally constant: f(x) depends on x_1 only, by letter id.
class LetterPotential final : public Potential {
 public:
  explicit LetterPotential(std::unordered_map<Letter, double> values);
  CylinderValue eval(const TruncatedShift& shift,
                     std::span<const std::int32_t> prefix) const override;
  HolderBounds holder() const override;
  std::optional<int> locally_constant_depth() const override { return 1; }
  std::string describe() const override { return "letter"; }

 private:
  std::unordered_map<Letter, double> values_;
  double spread_ = 0.0;
};

// Depth-2 locally constant: f(x) depends on (x_1, x_2), by letter id pair.
class PairPotential final : public Potential {
 public:
  explicit PairPotential(std::map<std::pair<Letter, Letter>, double> values);
  CylinderValue eval(const TruncatedShift& shift,
                     std::span<const std::int32_t> prefix) const override;
  HolderBounds holder() const override;
  std::optional<int> locally_constant_depth() const override { return 2; }
  std::string describe() const override { return "pair"; }

 private:
  std::map<std::pair<Letter, Letter>, double> values_;
  double spread_ = 0.0;
};

// f(x) = coeff * log(x_1 + offset), letters as positive integers.
class LogLetterPotential final : public Potential {
 public:
  LogLetterPotential(double coeff, double offset) : coeff_(coeff), offset_(offset) {}
  CylinderValue eval(const TruncatedShift& shift,
                     std::span<const std::int32_t> prefix) const override;
  HolderBounds holder() const override { return {0.0, 1.0}; }
  std::optional<int> locally_constant_depth() const override { return 1; }
  std::string describe() const override {
    return "log_letter(" + std::to_string(coeff_) + "," + std::to_string(offset_) + ")";
  }
  double coeff() const { return coeff_; }
  double offset() const { return offset_; }

 private:
  double coeff_, offset_;
};

// f(x) = scale * sum_{i>=1} base^i [x_i == mark]; genuinely Hölder, not
// locally constant at any depth.
class GeometricMarkPotential final : public Potential {
 public:
  GeometricMarkPotential(Letter mark, double base = 0.5, double scale = 1.0);
  CylinderValue eval(const TruncatedShift& shift,
                     std::span<const std::int32_t> prefix) const override;
  HolderBounds holder() const override;
  std::string describe() const override { return "geometric_mark"; }

 private:
  Letter mark_;
  double base_, scale_;
};

// sum_i c_i * f_i. Used for -t f, a f + b g and coboundary tests.
class LinearCombinationPotential final : public Potential {
 public:
  explicit LinearCombinationPotential(std::vector<std::pair<double, PotentialPtr>> terms);
  CylinderValue eval(const TruncatedShift& shift,
                     std::span<const std::int32_t> prefix) const override;
  HolderBounds holder() const override;
  std::optional<int> locally_constant_depth() const override;
  std::string describe() const override;

 private:
  std::vector<std::pair<double, PotentialPtr>> terms_;
};

PotentialPtr scale(double c, PotentialPtr f);
PotentialPtr combine(double a, PotentialPtr f, double b, PotentialPtr g);

// f + h - h o sigma for a given h (explicit coboundary, test support).
class CoboundaryShiftedPotential final : public Potential {
 public:
  CoboundaryShiftedPotential(PotentialPtr f, PotentialPtr h);
  CylinderValue eval(const TruncatedShift& shift,
                     std::span<const std::int32_t> prefix) const override;
  HolderBounds holder() const override;
  std::optional<int> locally_constant_depth() const override;
  std::string describe() const override { return "coboundary_shifted"; }

 private:
  PotentialPtr f_, h_;
};

// ---- Operations ------------------------------------------------------------

struct BirkhoffOptions {
  std::size_t depth = 24;   // working prefix length per term
  bool cyclic = true;       // extend the word periodically (else pinned)
};

// S_n f along the word: for cyclic words the periodic extension, otherwise
// the pinned continuation. error = sum of per-term radii.
CylinderValue eval_birkhoff(const Potential& f, const TruncatedShift& shift,
                            std::span<const std::int32_t> word,
                            const BirkhoffOptions& opts = {});

// S_n f at the infinite word w (head + cycle), terms i = 0..n-1.
CylinderValue eval_birkhoff_at(const Potential& f, const TruncatedShift& shift,
                               const EventuallyPeriodicWord& w, std::size_t n,
                               std::size_t depth = 24);

struct LetterBounds {
  Letter letter = 0;
  double lower = 0.0;  // certified lower bound for I(f,a)
  double upper = 0.0;  // certified upper bound for S(f,a)
  int certificate_depth = 0;
};

LetterBounds letter_bounds(const Potential& f, Letter a, const TruncatedShift& shift,
                           int depth);
// Same, addressed by truncation index.
LetterBounds letter_bounds_at(const Potential& f, std::size_t index,
                              const TruncatedShift& shift, int depth);

// Strictly positive potential cohomologous to an eventually positive one.
// Construction: F = {a : I(f,a) <= R N + B}, C_N f as the F-censored Birkhoff
// sum, g = (1/N) C_N f + (f - (RN+B)) 1_{x1 not in F}. Certified letter lower
// bounds decide membership (borderline letters land in F).
class RegularizedPotential final : public Potential {
 public:
  RegularizedPotential(PotentialPtr f, int N, double B, const TruncatedShift& shift,
                       int bound_depth = 6);

  CylinderValue eval(const TruncatedShift& shift,
                     std::span<const std::int32_t> prefix) const override;
  HolderBounds holder() const override { return holder_; }
  std::optional<int> locally_constant_depth() const override;
  std::string describe() const override { return "regularized"; }

  double threshold() const { return threshold_; }        // R N + B
  double lower_bound() const { return B_ / N_; }          // g >= B/N
  double closeness_bound() const { return closeness_; }   // |f-g| <= 2(RN+B+T)
  const std::vector<bool>& in_f_set() const { return in_f_; }

 private:
  PotentialPtr f_;
  int N_;
  double B_;
  double R_, T_, threshold_, closeness_;
  std::vector<bool> in_f_;  // per truncation index
  HolderBounds holder_;
  const TruncatedShift* shift_;
};

PotentialPtr regularize(PotentialPtr f, int N, double B, const TruncatedShift& shift,
                        int bound_depth = 6);

struct LivsicReport {
  bool cohomologous_up_to_tol = false;
  double worst_violation = 0.0;
  std::size_t worst_n = 0;
  Word worst_word;
};

// Checks S_n f = S_n g over Fix^n, n <= n_max, within tol plus accumulated
// evaluation radii.
LivsicReport livsic_test(const Potential& f, const Potential& g,
                         const TruncatedShift& shift, std::size_t n_max, double tol);

struct ArithmeticReport {
  bool arithmetic_suspected = false;
  double generator = 0.0;                  // when arithmetic_suspected
  std::pair<double, double> witness{0, 0};  // two periods with irrational-looking ratio
  std::size_t periods_examined = 0;
};

// Heuristic near-gcd classification of the period group. Never a proof.
ArithmeticReport arithmetic_test(const Potential& f, const TruncatedShift& shift,
                                 std::size_t n_max, double tol);

// Certified infimum of f over the truncation: min_a lower(I(f,a)).
double certified_inf(const Potential& f, const TruncatedShift& shift, int depth = 6);

}  // namespace thermoshift

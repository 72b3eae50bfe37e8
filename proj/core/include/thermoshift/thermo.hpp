#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "thermoshift/potential.hpp"
#include "thermoshift/shift.hpp"

namespace thermoshift {

// Streaming log-sum-exp with a deterministic, order-dependent state.
class LogSumAccumulator {
 public:
  void add(double x) {
    if (!std::isfinite(m_) && s_ == 0.0) {
      m_ = x;
      s_ = 1.0;
      return;
    }
    if (x <= m_) {
      s_ += std::exp(x - m_);
    } else {
      s_ = s_ * std::exp(m_ - x) + 1.0;
      m_ = x;
    }
  }
  double value() const {
    if (s_ == 0.0) return -std::numeric_limits<double>::infinity();
    return m_ + std::log(s_);
  }
  bool empty() const { return s_ == 0.0; }

 private:
  double m_ = -std::numeric_limits<double>::infinity();
  double s_ = 0.0;
};

// Remainder model for the letter series Z_1(f,s) = sum_a e^{-s S(f,a)} of a
// countable alphabet.
struct TailModel {
  enum class Kind { finite_alphabet, log_letter, exp_letter };
  Kind kind = Kind::finite_alphabet;
  // log_letter: S(f,a) ~ c log(size(a)) + e loglog(size(a)) + b
  // exp_letter: S(f,a) ~ c size(a) + b
  double c = 0.0;
  double b = 0.0;
  double loglog_e = 0.0;
  bool fitted = false;
  double fit_residual = 0.0;

  std::string describe() const;
  // Does sum_{size > K} e^{-s S} converge?
  bool tail_converges(double s) const;
  // log of the remainder sum beyond size K (integral estimate); requires
  // tail_converges(s).
  double log_tail(double s, double K) const;
};

TailModel fit_log_tail_model(const std::vector<std::pair<double, double>>& size_and_sup);

// Discretized transfer operator on depth-k cylinders, weights in log-space.
// Explicit mode stores one branch per (source cylinder, continuation letter);
// factored mode (depth 1, potential locally constant at depth 1) keeps one
// weight per source letter and walks the transition structure.
class TransferDiscretization {
 public:
  int depth = 1;
  std::vector<std::vector<std::int32_t>> cylinders;  // lexicographic order
  double max_entry_error = 0.0;
  const TruncatedShift* shift = nullptr;  // must outlive the discretization
  PotentialPtr potential;

  bool factored = false;
  std::vector<double> log_w_src;  // factored: per source cylinder (= letter)

  // explicit mode, CSR grouped by target cylinder
  std::vector<std::size_t> row_ptr;
  std::vector<std::int32_t> src;
  std::vector<double> log_w;
  // CSR grouped by source (for the adjoint iteration)
  std::vector<std::size_t> col_ptr;
  std::vector<std::int32_t> dst;
  std::vector<double> log_w_by_src;

  // factored full-countable mode: log of the tail sum beyond the truncation
  std::optional<double> tail_log_weight;
  double tail_error = 0.0;

  std::size_t size() const { return cylinders.size(); }
  // y_p = log sum_q exp(log M(p,q) + x_q); adjoint sums over targets instead.
  void apply_log(const std::vector<double>& x, std::vector<double>& y, bool adjoint) const;
};

struct TransferOptions {
  std::size_t max_cylinders = 200000;
  std::size_t max_branches = 20000000;
  // Optional tail model for full countable shifts with first-letter
  // potentials: folds the Z_1 remainder into the leading eigenvalue.
  std::optional<TailModel> tail;
  double tail_scale = 1.0;  // weights use e^{tail_scale * (-S model)}; see solve_delta
};

TransferDiscretization build_transfer(const TruncatedShift& shift, PotentialPtr g,
                                      int depth, const TransferOptions& opts = {});

struct EquilibriumData {
  double pressure = 0.0;
  std::vector<double> h;    // right eigenfunction, sup-normalized
  std::vector<double> nu;   // left eigenmeasure, l1-normalized
  std::vector<double> mu;   // h nu renormalized
  double mean_f = 0.0;      // integral of the operator's own potential
  double mean_f_error = 0.0;
  double gibbs_constant = 1.0;
  double residual_h = 0.0;
  double residual_nu = 0.0;
  int iterations = 0;
  int depth = 1;
  double tol = 0.0;
};

EquilibriumData spectral_pressure(const TransferDiscretization& op, double tol = 1e-12,
                                  int max_iter = 20000);

// Integral of another potential against mu over the discretization cylinders.
CylinderValue cylinder_mean(const TransferDiscretization& op, const EquilibriumData& eq,
                            const Potential& g);

// mu-measure of a longer cylinder word (length >= depth) through the induced
// cylinder chain; exact for locally constant weights.
double cylinder_measure(const TransferDiscretization& op, const EquilibriumData& eq,
                        std::span<const std::int32_t> word);

struct PeriodicPressure {
  std::vector<double> p_n;      // (1/n) log sum_{Fix^n, x1=a} e^{S_n g}
  std::vector<double> ratio_n;  // n p_n - (n-1) p_{n-1}, first-difference estimates
  double value = 0.0;           // ratio_n.back(): the converged estimate
  double last = 0.0;            // p_n.back()
  double cesaro = 0.0;
};

PeriodicPressure pressure_periodic(const TruncatedShift& shift, const Potential& g,
                                   std::size_t first_letter_index, std::size_t n_max);

enum class GapClass { strong, weak, none, undetermined, finite_alphabet };

std::string to_string(GapClass g);

struct EntropyGapReport {
  double d_f = 0.0;  // -inf sentinel for finite alphabets
  bool diverges_at_d = false;
  std::optional<double> delta;
  GapClass gap = GapClass::undetermined;
  std::string tail_model;
  std::optional<TailModel> fitted_tail;  // model actually used (fitted or supplied)
  std::string notes;
};

struct CriticalExponentOptions {
  int bound_depth = 1;           // depth for per-letter S(f,a) bounds
  double bisect_tol = 1e-10;
  std::optional<TailModel> tail;  // fitted from letter data when absent
  double fit_min_size = 8.0;      // letters with size below this are skipped in the fit
};

// d(f) of Z_1(f,s) by bisection on the convergence predicate (partial sums
// plus tail-model remainder); fills d_f, diverges_at_d and tail_model.
EntropyGapReport critical_exponent(const Potential& f, const TruncatedShift& shift,
                                   std::pair<double, double> s_bracket,
                                   const CriticalExponentOptions& opts = {});

struct SolveDeltaOptions {
  int depth = 1;
  double tol = 1e-10;           // |P(-delta f)| <= tol
  double spectral_tol = 1e-12;
  int max_iter = 20000;
  std::optional<TailModel> tail;  // per-letter sup model, forwarded to build_transfer
};

struct DeltaResult {
  double delta = 0.0;
  EquilibriumData eq;                              // equilibrium data at -delta f
  std::vector<std::pair<double, double>> trace;    // (t, P(-t f)) evaluations
};

// Unique root of t -> P(-t f) on (d_f, infinity). Monotonicity of the traced
// evaluations is asserted.
DeltaResult solve_delta(const PotentialPtr& f, const TruncatedShift& shift, double d_f,
                        const SolveDeltaOptions& opts = {});

struct EntropyGapOptions {
  CriticalExponentOptions exponent;
  SolveDeltaOptions delta;
};

EntropyGapReport entropy_gap_report(const PotentialPtr& f, const TruncatedShift& shift,
                                    const EntropyGapOptions& opts = {});

}  // namespace thermoshift

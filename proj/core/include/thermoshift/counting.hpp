#pragma once

#include <cstdint>
#include <vector>

#include "thermoshift/potential.hpp"
#include "thermoshift/shift.hpp"
#include "thermoshift/thermo.hpp"

namespace thermoshift {

// Query for the renewal function N_f(phi, x, t): x is pinned by base_prefix
// (extended to an aperiodic point), phi is 1 or a cylinder indicator.
struct RenewalQuery {
  Word base_prefix;
  enum class Weight { one, cylinder };
  Weight weight = Weight::one;
  Word cylinder;  // used when weight == cylinder
  double t = 0.0;
};

struct RenewalOptions {
  std::uint64_t node_limit = 50000000;
  int bound_depth = 4;       // certified letter lower bounds used for pruning
  std::size_t eval_depth = 24;
};

struct RenewalResult {
  double value = 0.0;          // exact count up to evaluation radii
  double ambiguous = 0.0;      // mass of terms with |S_n - t| within radius
  std::uint64_t nodes = 0;
};

RenewalResult renewal_count(const Potential& f, const RenewalQuery& q,
                            const TruncatedShift& shift, const RenewalOptions& opts = {});

// Same, with the base point given explicitly (lets callers shift the point by
// one preimage step and keep the identical tail, e.g. for the renewal
// equation check).
RenewalResult renewal_count_at(const Potential& f, const EventuallyPeriodicWord& x,
                               RenewalQuery::Weight weight, const Word& cylinder, double t,
                               const TruncatedShift& shift, const RenewalOptions& opts = {});

struct CountRecord {
  double t = 0.0;
  double M = 0.0;          // sum_n (1/n) #M_f(n,t)
  double R = 0.0;          // prime-orbit analogue
  double predicted = 0.0;  // e^{t delta} / (t delta)
  double ratio_M = 0.0;
  double ratio_R = 0.0;
  std::uint64_t nodes = 0;
  // exact per-n word counts (index n-1), enabling exact sandwich checks
  std::vector<std::int64_t> fix_counts;
  std::vector<std::int64_t> prim_counts;
};

struct CountOptions {
  std::uint64_t node_limit = 800000000;
  int bound_depth = 6;
  std::size_t eval_depth = 24;
  std::size_t max_n = 64;
};

// Exact orbit counts M_f(t), R_f(t) on the truncation for each grid point;
// delta comes from thermo::solve_delta and is never recomputed here.
std::vector<CountRecord> count_orbits(const Potential& f, const TruncatedShift& shift,
                                      std::vector<double> t_grid, double delta,
                                      const CountOptions& opts = {});

// Exact comparison M(t) - M(t/2) <= R(t) <= M(t) in integer arithmetic,
// using the per-n counts of records at t and t/2.
bool exact_sandwich_holds(const CountRecord& at_t, const CountRecord& at_half);

struct EquidistOptions {
  int depth = 1;             // transfer depth for the equilibrium state
  double spectral_tol = 1e-12;
  CountOptions count;
};

struct EquidistResult {
  double lhs = 0.0;        // sum_k (1/k) sum_{M_f(k,t)} S_k g / S_k f
  double predicted = 0.0;  // (mean_g / mean_f) e^{t delta}/(t delta)
  double mean_f = 0.0;
  double mean_g = 0.0;
};

EquidistResult equidistribution_ratio(const PotentialPtr& f, const PotentialPtr& g,
                                      const TruncatedShift& shift, double t, double delta,
                                      const EquidistOptions& opts = {});

struct BijectionReport {
  std::size_t cylinders = 0;
  bool bijective = false;
  double max_discrepancy = 0.0;  // max |S_n f(y) - S_n f(Psi(y))|
  double eps_k = 0.0;            // A sum_{l>=k} e^{-alpha l} (0 if locally constant)
  std::int64_t m_count = 0;      // #M_f(n,t)
  std::int64_t w_lower = 0;      // sum_p W(n,p,t-eps_k)
  std::int64_t w_upper = 0;      // sum_p W(n,p,t+eps_k)
  bool sandwich_ok = false;
};

// Constructs the tail-replacement bijection Fix^n cap p -> sigma^{-n}(z_p)
// cap p for every k-cylinder p, checks cardinalities, the Birkhoff
// discrepancy bound and the W(n,p,t) sandwich.
BijectionReport validate_sample_bijection(const Potential& f, const TruncatedShift& shift,
                                          std::size_t k, std::size_t n, double t,
                                          std::size_t eval_depth = 24);

// One representative per closed orbit (canonical rotation, all periods
// n <= n_max) with certified S_n f <= t_max; visit(word, S_f value).
void for_each_orbit_rep(const Potential& f, const TruncatedShift& shift, double t_max,
                        std::size_t n_max,
                        const std::function<void(std::span<const std::int32_t>, double)>& visit,
                        const CountOptions& opts = {});

}  // namespace thermoshift

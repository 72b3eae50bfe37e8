#pragma once

#include <vector>

#include "thermoshift/counting.hpp"
#include "thermoshift/potential.hpp"
#include "thermoshift/thermo.hpp"

namespace thermoshift {

struct ManhattanPoint {
  double theta = 0.0;     // ray angle in [0, pi/2]
  double a = 0.0, b = 0.0;
  double slope = 0.0;     // tangent slope, always negative on valid points
  double residual = 0.0;  // |P(-af - bg)| at acceptance
  bool ok = false;        // false = NoCrossing on this ray (flagged, not fabricated)
};

struct TraceOptions {
  int depth = 1;
  double tol = 1e-10;
  double spectral_tol = 1e-12;
  double d_f = -std::numeric_limits<double>::infinity();
  // Trace into the enlarged domain (one negative coefficient allowed while
  // a c(f) + b c(g) > 0). Default: the closed positive quadrant only.
  bool extended_domain = false;
  int bound_depth = 6;
  // Rays are independent; results are per-ray deterministic and identical
  // for any thread count.
  int threads = 1;
};

// Traces {P(-af - bg) = 0} on `rays` ray directions (a,b) = (cos t, sin t),
// axes included. Each ray carries a unique crossing; the slope comes from the
// equilibrium means at the crossing.
std::vector<ManhattanPoint> trace_curve(const PotentialPtr& f, const PotentialPtr& g,
                                        const TruncatedShift& shift, int rays,
                                        const TraceOptions& opts = {});

struct IntersectionReport {
  double I = 0.0;        // pressure intersection
  double J = 0.0;        // renormalized
  double delta_f = 0.0;
  double delta_g = 0.0;
  bool rigid = false;
  double margin = 0.0;   // J - 1
  bool periods_proportional = false;  // exact periodic-data test up to n = 6
};

struct IntersectionOptions {
  int depth = 1;
  double tol = 1e-6;          // |J-1| threshold used in the rigidity call
  double delta_tol = 1e-10;
  double spectral_tol = 1e-12;
  std::size_t livsic_n_max = 6;
  double livsic_tol = 1e-9;
};

IntersectionReport intersection(const PotentialPtr& f, const PotentialPtr& g,
                                const TruncatedShift& shift,
                                const IntersectionOptions& opts = {});

// Conjugacy-class average of S_n g / S_n f over closed orbits with
// S_n f <= t, against the thermodynamic intersection I.
struct GeometricIntersection {
  double empirical = 0.0;
  double thermodynamic = 0.0;
  std::size_t orbits = 0;
};

GeometricIntersection geometric_intersection_check(const PotentialPtr& f,
                                                   const PotentialPtr& g,
                                                   const TruncatedShift& shift, double t,
                                                   double delta_f,
                                                   const IntersectionOptions& opts = {});

}  // namespace thermoshift

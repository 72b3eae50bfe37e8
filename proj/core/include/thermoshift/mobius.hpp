#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "thermoshift/errors.hpp"

namespace thermoshift {

// Boundary circle RP^1, parametrized by the angle of the direction vector
// (cos theta, sin theta), theta in [0, pi). The real line embeds via
// x -> atan2(1, x) mod pi; infinity sits at theta = 0.
namespace rp1 {

constexpr double kPi = 3.14159265358979323846;

double normalize_angle(double theta);             // into [0, pi)
double from_real(double x);                       // boundary point of the x-line
double infinity_angle();                          // 0
std::optional<double> to_real(double theta);      // nullopt at infinity
double distance(double t1, double t2);            // circle metric, <= pi/2

}  // namespace rp1

// Determinant-one 2x2 real matrix acting projectively on RP^1.
class MobiusMap {
 public:
  enum class Kind { hyperbolic, parabolic, elliptic, identity };

  MobiusMap() : m_(Eigen::Matrix2d::Identity()) {}
  explicit MobiusMap(const Eigen::Matrix2d& m);

  const Eigen::Matrix2d& matrix() const { return m_; }
  Kind kind(double tol = 1e-9) const;
  double trace() const { return m_.trace(); }

  MobiusMap inverse() const;
  MobiusMap operator*(const MobiusMap& o) const { return MobiusMap(m_ * o.m_); }
  MobiusMap pow(std::int64_t n) const;

  double apply(double theta) const;  // action on RP^1 angles
  // Attracting/repelling fixed angles (hyperbolic) or the single fixed angle
  // (parabolic/identity: attracting == repelling).
  std::pair<double, double> fixed_points() const;
  // 2 log |larger eigenvalue|; 0 for parabolic/elliptic.
  double translation_length() const;

  bool approx_equal(const MobiusMap& o, double tol = 1e-12) const;
  std::string describe() const;

 private:
  Eigen::Matrix2d m_;
};

// Closed arc from lo to hi in the +theta direction (mod pi). Arcs never cover
// the whole circle.
struct CircleArc {
  double lo = 0.0;
  double hi = 0.0;

  static CircleArc from_angles(double lo, double hi);
  // The x-interval [a, b] on the real line (a < b, both finite).
  static CircleArc from_real_interval(double a, double b);

  double length() const;  // in [0, pi)
  double midpoint() const;
  bool contains(double theta, double tol = 0.0) const;
  bool contains(const CircleArc& other, double tol = 0.0) const;
  bool intersects(const CircleArc& other, double tol = 0.0) const;
  CircleArc image(const MobiusMap& g) const;  // endpoint image, orientation kept
  // Smallest arc containing both; fails (nullopt) when no arc shorter than
  // pi - margin contains them.
  static std::optional<CircleArc> hull(const CircleArc& a, const CircleArc& b,
                                       double margin = 0.05);
};

}  // namespace thermoshift

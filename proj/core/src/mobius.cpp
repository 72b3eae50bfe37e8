#include "thermoshift/mobius.hpp"

#include <cmath>
#include <sstream>

namespace thermoshift {

namespace rp1 {

double normalize_angle(double theta) {
  double t = std::fmod(theta, kPi);
  if (t < 0) t += kPi;
  if (t >= kPi) t -= kPi;
  return t;
}

double from_real(double x) { return normalize_angle(std::atan2(1.0, x)); }

double infinity_angle() { return 0.0; }

std::optional<double> to_real(double theta) {
  double t = normalize_angle(theta);
  double s = std::sin(t);
  if (std::abs(s) < 1e-300) return std::nullopt;
  return std::cos(t) / s;
}

double distance(double t1, double t2) {
  double d = std::abs(normalize_angle(t1) - normalize_angle(t2));
  return std::min(d, kPi - d);
}

}  // namespace rp1

MobiusMap::MobiusMap(const Eigen::Matrix2d& m) : m_(m) {
  double det = m_.determinant();
  if (det <= 0.0) throw NumericallySingular("Mobius matrix needs positive determinant");
  m_ /= std::sqrt(det);
}

MobiusMap::Kind MobiusMap::kind(double tol) const {
  if ((m_ - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < tol ||
      (m_ + Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < tol)
    return Kind::identity;
  double t = std::abs(trace());
  if (t > 2.0 + tol) return Kind::hyperbolic;
  if (t < 2.0 - tol) return Kind::elliptic;
  return Kind::parabolic;
}

MobiusMap MobiusMap::inverse() const {
  Eigen::Matrix2d inv;
  inv << m_(1, 1), -m_(0, 1), -m_(1, 0), m_(0, 0);
  return MobiusMap(inv);
}

MobiusMap MobiusMap::pow(std::int64_t n) const {
  if (n == 0) return MobiusMap();
  MobiusMap base = n > 0 ? *this : inverse();
  std::uint64_t e = static_cast<std::uint64_t>(n > 0 ? n : -n);
  MobiusMap acc;
  while (e) {
    if (e & 1) acc = acc * base;
    base = base * base;
    e >>= 1;
  }
  return acc;
}

double MobiusMap::apply(double theta) const {
  Eigen::Vector2d v(std::cos(theta), std::sin(theta));
  Eigen::Vector2d w = m_ * v;
  return rp1::normalize_angle(std::atan2(w(1), w(0)));
}

std::pair<double, double> MobiusMap::fixed_points() const {
  Eigen::EigenSolver<Eigen::Matrix2d> es(m_);
  auto vals = es.eigenvalues();
  auto vecs = es.eigenvectors();
  double a0 = std::abs(vals(0)), a1 = std::abs(vals(1));
  int att = a0 >= a1 ? 0 : 1;
  int rep = 1 - att;
  auto angle_of = [&](int i) {
    double re0 = vecs(0, i).real(), re1 = vecs(1, i).real();
    return rp1::normalize_angle(std::atan2(re1, re0));
  };
  return {angle_of(att), angle_of(rep)};
}

double MobiusMap::translation_length() const {
  double t = std::abs(trace());
  if (t <= 2.0) return 0.0;
  double lam = (t + std::sqrt(t * t - 4.0)) / 2.0;
  return 2.0 * std::log(lam);
}

bool MobiusMap::approx_equal(const MobiusMap& o, double tol) const {
  return (m_ - o.m_).cwiseAbs().maxCoeff() < tol ||
         (m_ + o.m_).cwiseAbs().maxCoeff() < tol;  // same element of PSL(2,R)
}

std::string MobiusMap::describe() const {
  std::ostringstream os;
  os << "[[" << m_(0, 0) << "," << m_(0, 1) << "],[" << m_(1, 0) << "," << m_(1, 1) << "]]";
  return os.str();
}

CircleArc CircleArc::from_angles(double lo, double hi) {
  return {rp1::normalize_angle(lo), rp1::normalize_angle(hi)};
}

CircleArc CircleArc::from_real_interval(double a, double b) {
  if (!(a < b)) throw ConfigError("interval needs a < b");
  // x decreases as theta increases, so [a,b] runs from theta(b) to theta(a).
  return from_angles(rp1::from_real(b), rp1::from_real(a));
}

double CircleArc::length() const {
  double d = hi - lo;
  d = std::fmod(d, rp1::kPi);
  if (d < 0) d += rp1::kPi;
  return d;
}

double CircleArc::midpoint() const { return rp1::normalize_angle(lo + 0.5 * length()); }

bool CircleArc::contains(double theta, double tol) const {
  double off = rp1::normalize_angle(theta) - lo;
  off = std::fmod(off, rp1::kPi);
  if (off < 0) off += rp1::kPi;
  if (off <= length() + tol) return true;
  return off >= rp1::kPi - tol;  // wrapped just below lo
}

bool CircleArc::contains(const CircleArc& other, double tol) const {
  double off = rp1::normalize_angle(other.lo) - lo;
  off = std::fmod(off, rp1::kPi);
  if (off < 0) off += rp1::kPi;
  if (off > length() + tol && off < rp1::kPi - tol) return false;
  if (off >= rp1::kPi - tol) off = 0.0;
  return off + other.length() <= length() + tol;
}

bool CircleArc::intersects(const CircleArc& other, double tol) const {
  return contains(other.lo, tol) || contains(other.hi, tol) || other.contains(lo, tol) ||
         other.contains(hi, tol);
}

CircleArc CircleArc::image(const MobiusMap& g) const {
  // Orientation-preserving on RP^1 (angle derivative det/|Av|^2 > 0), so
  // endpoints map to endpoints in the same sweep direction.
  return {g.apply(lo), g.apply(hi)};
}

std::optional<CircleArc> CircleArc::hull(const CircleArc& a, const CircleArc& b,
                                         double margin) {
  // Try both sweep orders; keep the shorter covering arc.
  CircleArc c1{a.lo, b.hi};
  CircleArc c2{b.lo, a.hi};
  std::optional<CircleArc> best;
  for (const CircleArc& c : {c1, c2}) {
    if (c.contains(a, 1e-12) && c.contains(b, 1e-12)) {
      if (!best || c.length() < best->length()) best = c;
    }
  }
  if (best && best->length() < rp1::kPi - margin) return best;
  return std::nullopt;
}

}  // namespace thermoshift

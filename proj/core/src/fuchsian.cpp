#include "thermoshift/fuchsian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace thermoshift {

// ---- Cartan-space linear algebra -----------------------------------------------

namespace {

Eigen::VectorXd project_sum_zero(Eigen::VectorXd v) {
  v.array() -= v.mean();
  return v;
}

}  // namespace

Eigen::VectorXd jordan_projection(const Eigen::MatrixXd& A) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw NumericallySingular("eigen decomposition failed");
  Eigen::VectorXd mods = es.eigenvalues().cwiseAbs();
  std::sort(mods.data(), mods.data() + mods.size(), std::greater<double>());
  for (int i = 0; i < mods.size(); ++i) {
    if (!(mods(i) > 0.0)) throw NumericallySingular("zero eigenvalue modulus");
    mods(i) = std::log(mods(i));
  }
  return project_sum_zero(mods);
}

Eigen::VectorXd cartan_projection(const Eigen::MatrixXd& A) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  Eigen::VectorXd s = svd.singularValues();
  for (int i = 0; i < s.size(); ++i) {
    if (!(s(i) > 0.0)) throw NumericallySingular("zero singular value");
    s(i) = std::log(s(i));
  }
  return project_sum_zero(s);
}

Projections projections(const Eigen::MatrixXd& A) {
  double det = A.determinant();
  if (!(std::abs(std::abs(det) - 1.0) < 1e-6))
    throw NumericallySingular("matrix determinant is not +-1");
  return {jordan_projection(A), cartan_projection(A)};
}

double simple_root(const Eigen::VectorXd& v, int k) {
  if (k < 1 || k >= v.size()) throw ConfigError("simple root index out of range");
  return v(k - 1) - v(k);
}

double fundamental_weight(const Eigen::VectorXd& v, int k) {
  if (k < 1 || k >= v.size()) throw ConfigError("fundamental weight index out of range");
  double s = 0.0;
  for (int i = 0; i < k; ++i) s += v(i);
  return s;
}

Eigen::VectorXd phi_from_alpha(const std::vector<double>& a, int d) {
  if (static_cast<int>(a.size()) != d - 1) throw ConfigError("need d-1 alpha coefficients");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(d);
  for (int k = 1; k <= d - 1; ++k) {
    c(k - 1) += a[static_cast<std::size_t>(k - 1)];
    c(k) -= a[static_cast<std::size_t>(k - 1)];
  }
  return c;
}

Eigen::VectorXd phi_from_omega(const std::vector<double>& b, int d) {
  if (static_cast<int>(b.size()) != d - 1) throw ConfigError("need d-1 omega coefficients");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(d);
  for (int k = 1; k <= d - 1; ++k)
    for (int i = 0; i < k; ++i) c(i) += b[static_cast<std::size_t>(k - 1)];
  return c;
}

Eigen::MatrixXd orthonormal_frame(const Eigen::MatrixXd& basis) {
  Eigen::MatrixXd q = basis;
  const int n = static_cast<int>(q.cols());
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < j; ++i) q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
    // second pass for stability
    for (int i = 0; i < j; ++i) q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
    double nrm = q.col(j).norm();
    if (nrm < 1e-12) throw DegenerateFlag("flag basis is rank deficient");
    q.col(j) /= nrm;
  }
  return q;
}

Eigen::VectorXd iwasawa_cocycle(const Eigen::MatrixXd& A, const Eigen::MatrixXd& frame) {
  const int d = static_cast<int>(A.rows());
  if (frame.rows() != d || frame.cols() != d) throw ConfigError("frame has wrong shape");
  if ((frame.transpose() * frame - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() >
      1e-8)
    throw DegenerateFlag("frame is not orthonormal");
  Eigen::MatrixXd AK = A * frame;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(AK);
  Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  Eigen::VectorXd out(d);
  double scale = AK.cwiseAbs().maxCoeff();
  for (int i = 0; i < d; ++i) {
    double z = std::abs(R(i, i));
    if (!(z > 1e-14 * std::max(scale, 1.0)))
      throw DegenerateFlag("Iwasawa diagonal collapsed (flag nearly degenerate)");
    out(i) = std::log(z);
  }
  return project_sum_zero(out);
}

Eigen::MatrixXd attracting_frame(const Eigen::MatrixXd& A) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw NumericallySingular("eigen decomposition failed");
  const int d = static_cast<int>(A.rows());
  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  auto vals = es.eigenvalues();
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return std::abs(vals(i)) > std::abs(vals(j)); });
  for (int i = 0; i + 1 < d; ++i) {
    double hi = std::abs(vals(order[static_cast<std::size_t>(i)]));
    double lo = std::abs(vals(order[static_cast<std::size_t>(i + 1)]));
    if (!(hi > lo * (1.0 + 1e-12)))
      throw DegenerateFlag("eigenvalue moduli are not distinct");
  }
  Eigen::MatrixXd basis(d, d);
  for (int i = 0; i < d; ++i) {
    Eigen::VectorXcd v = es.eigenvectors().col(order[static_cast<std::size_t>(i)]);
    if (v.imag().norm() > 1e-9 * v.norm())
      throw DegenerateFlag("complex eigenvector in attracting flag");
    basis.col(i) = v.real();
  }
  return orthonormal_frame(basis);
}

namespace {

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

}  // namespace

Eigen::MatrixXd sym_power(const Eigen::Matrix2d& A, int d) {
  if (d < 2) throw ConfigError("symmetric power needs d >= 2");
  const int m = d - 1;
  const double a = A(0, 0), b = A(0, 1), c = A(1, 0), dd = A(1, 1);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d, d);
  // Column j is the image of X^{m-j} Y^j under X -> aX + cY, Y -> bX + dY,
  // row index i = Y-degree.
  for (int j = 0; j <= m; ++j) {
    for (int s = 0; s <= m - j; ++s) {
      for (int t = 0; t <= j; ++t) {
        int i = s + t;
        M(i, j) += binom(m - j, s) * std::pow(a, m - j - s) * std::pow(c, s) *
                   binom(j, t) * std::pow(b, j - t) * std::pow(dd, t);
      }
    }
  }
  double det = M.determinant();
  if (!(det > 0.0)) {
    // det Sym^m = (det A)^{m(m+1)/2}; negative only for improper input.
    throw NumericallySingular("symmetric power has non-positive determinant");
  }
  M /= std::pow(det, 1.0 / static_cast<double>(d));
  return M;
}

Eigen::MatrixXd veronese_frame(double theta, int d) {
  const int m = d - 1;
  const double u1 = std::cos(theta), u2 = std::sin(theta);
  const double w1 = -u2, w2 = u1;
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(d, d);
  // Column j: the s^j coefficient of ver(u + s w), component i = Y-degree:
  // C(m,i) (u1+s w1)^{m-i} (u2+s w2)^i.
  for (int i = 0; i <= m; ++i) {
    for (int r = 0; r <= m - i; ++r) {
      for (int t = 0; t <= i; ++t) {
        int j = r + t;
        if (j > m) continue;
        basis(i, j) += binom(m, i) * binom(m - i, r) * std::pow(w1, r) *
                       std::pow(u1, m - i - r) * binom(i, t) * std::pow(w2, t) *
                       std::pow(u2, i - t);
      }
    }
  }
  return orthonormal_frame(basis);
}

// ---- Presentations ----------------------------------------------------------------

GroupPresentation GroupPresentation::default_group() {
  GroupPresentation p;
  Eigen::Matrix2d h, par;
  h << 2, 1, 1, 1;
  par << 1, 8, 0, 1;
  p.hyperbolic.push_back({"h", MobiusMap(h), false,
                          CircleArc::from_real_interval(1.2, 2.7),
                          CircleArc::from_real_interval(-1.3, -0.4)});
  p.parabolic.push_back({"p", MobiusMap(par), true, {}, {}});
  return p;
}

GroupPresentation GroupPresentation::second_group() {
  GroupPresentation p;
  Eigen::Matrix2d h, par;
  h << 3, 1, 2, 1;
  par << 1, 8, 0, 1;
  p.hyperbolic.push_back({"h", MobiusMap(h), false,
                          CircleArc::from_real_interval(1.0, 2.6),
                          CircleArc::from_real_interval(-0.75, -0.2)});
  p.parabolic.push_back({"p", MobiusMap(par), true, {}, {}});
  return p;
}

// ---- Coding table -----------------------------------------------------------------

struct CodingTable::Impl {
  std::vector<MobiusMap> gens;  // hyperbolic 0..H-1, parabolic H..H+P-1
  std::vector<std::string> names;
  std::vector<CircleArc> arc_plus, arc_minus;  // hyperbolic generators only
  std::vector<CircleArc> hull_x;               // X_j per parabolic family
  std::vector<CircleArc> region;               // R_j: all power arcs plus the fixed point
  std::vector<double> fixed;                   // parabolic fixed angles
  std::size_t H = 0, P = 0;
  int Q = 0;
};

namespace {

CodingLetter decode_letter(const CodingTable::Impl& im, Letter id) {
  if (id < 1) throw LetterAbsent("letter ids start at 1");
  CodingLetter out;
  const std::size_t H = im.H, P = im.P;
  std::size_t u = static_cast<std::size_t>(id - 1);
  if (u < 2 * H) {
    out.gen = static_cast<int>(u / 2);
    out.exponent = (u % 2 == 0) ? 1 : -1;
    out.parabolic = false;
    out.r = 1;
    out.G = (out.exponent == 1) ? im.gens[static_cast<std::size_t>(out.gen)]
                                : im.gens[static_cast<std::size_t>(out.gen)].inverse();
    out.arc = (out.exponent == 1) ? im.arc_plus[static_cast<std::size_t>(out.gen)]
                                  : im.arc_minus[static_cast<std::size_t>(out.gen)];
    out.display = im.names[static_cast<std::size_t>(out.gen)] +
                  (out.exponent == 1 ? "" : "^-1");
    return out;
  }
  u -= 2 * H;
  std::size_t n = u / (2 * P) + 1;
  std::size_t rem = u % (2 * P);
  std::size_t family = rem / 2;
  int sign = (rem % 2 == 0) ? 1 : -1;
  out.gen = static_cast<int>(H + family);
  out.exponent = sign * static_cast<std::int64_t>(n);
  out.parabolic = true;
  out.r = static_cast<int>(n) + 1;
  out.G = im.gens[static_cast<std::size_t>(out.gen)].pow(out.exponent);
  out.arc = im.hull_x[family].image(out.G);
  out.display = im.names[static_cast<std::size_t>(out.gen)] + "^" +
                std::to_string(out.exponent);
  return out;
}

bool letters_allowed(const CodingTable::Impl& im, Letter a, Letter b) {
  CodingLetter la = decode_letter(im, a);
  CodingLetter lb = decode_letter(im, b);
  if (la.parabolic && lb.parabolic && la.gen == lb.gen) return false;
  if (la.gen == lb.gen && la.exponent == -lb.exponent) return false;  // G(b) = G(a)^{-1}
  return true;
}

// Shortest arc containing both arcs and the given point.
CircleArc hull_with_point(const CircleArc& a, const CircleArc& b, double point,
                          const std::string& what) {
  CircleArc c1{a.lo, b.hi}, c2{b.lo, a.hi};
  std::optional<CircleArc> best;
  for (const CircleArc& c : {c1, c2}) {
    if (c.contains(a, 1e-12) && c.contains(b, 1e-12) && c.contains(point, 1e-12)) {
      if (!best || c.length() < best->length()) best = c;
    }
  }
  if (!best || best->length() > rp1::kPi - 0.02)
    throw PingPongFailure("cannot form the parabolic cluster region for " + what);
  return *best;
}

// Smallest covering arc that stays clear of `avoid` (the family's own fixed
// point must lie outside X).
CircleArc fold_hull(const std::vector<CircleArc>& arcs, double avoid,
                    const std::string& what) {
  if (arcs.empty()) throw PingPongFailure("no arcs to hull for " + what);
  CircleArc acc = arcs[0];
  for (std::size_t i = 1; i < arcs.size(); ++i) {
    CircleArc c1{acc.lo, arcs[i].hi}, c2{arcs[i].lo, acc.hi};
    std::optional<CircleArc> best;
    for (const CircleArc& c : {c1, c2}) {
      if (!c.contains(acc, 1e-12) || !c.contains(arcs[i], 1e-12)) continue;
      if (c.contains(avoid, 1e-9)) continue;
      if (c.length() > rp1::kPi - 0.02) continue;
      if (!best || c.length() < best->length()) best = c;
    }
    if (!best) throw PingPongFailure("arc hull degenerates for " + what);
    acc = *best;
  }
  return acc;
}

}  // namespace

CodingTable CodingTable::build(const GroupPresentation& pres) {
  auto im = std::make_shared<Impl>();
  im->H = pres.hyperbolic.size();
  im->P = pres.parabolic.size();
  if (im->P == 0)
    throw PingPongFailure(
        "presentation has no parabolic generator (convex cocompact); this coding "
        "requires at least one cusp");
  if (im->H == 0)
    throw PingPongFailure("presentation needs at least one hyperbolic generator");

  for (const auto& g : pres.hyperbolic) {
    if (g.g.kind() != MobiusMap::Kind::hyperbolic)
      throw PingPongFailure("generator " + g.name + " is not hyperbolic");
    im->gens.push_back(g.g);
    im->names.push_back(g.name);
    im->arc_plus.push_back(g.arc_plus);
    im->arc_minus.push_back(g.arc_minus);
  }
  for (const auto& g : pres.parabolic) {
    if (g.g.kind() != MobiusMap::Kind::parabolic)
      throw PingPongFailure("generator " + g.name + " is not parabolic");
    im->gens.push_back(g.g);
    im->names.push_back(g.name);
    auto [att, rep] = g.g.fixed_points();
    (void)rep;
    im->fixed.push_back(att);
  }

  // Hyperbolic arcs: pairwise disjoint, never touching a parabolic fixed point.
  std::vector<CircleArc> hyp_arcs;
  for (std::size_t i = 0; i < im->H; ++i) {
    hyp_arcs.push_back(im->arc_plus[i]);
    hyp_arcs.push_back(im->arc_minus[i]);
  }
  for (std::size_t i = 0; i < hyp_arcs.size(); ++i)
    for (std::size_t j = i + 1; j < hyp_arcs.size(); ++j)
      if (hyp_arcs[i].intersects(hyp_arcs[j]))
        throw PingPongFailure("hyperbolic ping-pong arcs overlap");
  for (double fp : im->fixed)
    for (const auto& arc : hyp_arcs)
      if (arc.contains(fp, 1e-9))
        throw PingPongFailure("a hyperbolic arc contains a parabolic fixed point");

  // X_j = hull of everything a power of p_j may be followed by; the cluster
  // regions of the other parabolic families enter, so iterate to a fixed
  // point (single-family presentations stabilize immediately).
  im->hull_x.assign(im->P, CircleArc{});
  im->region.assign(im->P, CircleArc{});
  for (std::size_t j = 0; j < im->P; ++j)
    im->region[j] = CircleArc::from_angles(im->fixed[j] - 1e-3, im->fixed[j] + 1e-3);
  for (int pass = 0; pass < 8; ++pass) {
    for (std::size_t j = 0; j < im->P; ++j) {
      std::vector<CircleArc> pieces = hyp_arcs;
      for (std::size_t j2 = 0; j2 < im->P; ++j2)
        if (j2 != j) pieces.push_back(im->region[j2]);
      im->hull_x[j] = fold_hull(pieces, im->fixed[j], "X_" + im->names[im->H + j]);
    }
    for (std::size_t j = 0; j < im->P; ++j) {
      const MobiusMap& p = im->gens[im->H + j];
      CircleArc plus = im->hull_x[j].image(p);
      CircleArc minus = im->hull_x[j].image(p.inverse());
      im->region[j] = hull_with_point(plus, minus, im->fixed[j], im->names[im->H + j]);
    }
  }

  // Ping-pong verification on arc endpoints.
  auto check_inside = [&](const CircleArc& img, const CircleArc& target,
                          const std::string& what) {
    if (!target.contains(img, 1e-12))
      throw PingPongFailure("ping-pong inclusion fails: " + what);
  };
  for (std::size_t i = 0; i < im->H; ++i) {
    for (int sign : {1, -1}) {
      MobiusMap g = sign == 1 ? im->gens[i] : im->gens[i].inverse();
      const CircleArc& target = sign == 1 ? im->arc_plus[i] : im->arc_minus[i];
      for (std::size_t i2 = 0; i2 < im->H; ++i2) {
        for (int sign2 : {1, -1}) {
          if (i2 == i && sign2 == -sign) continue;  // successor excluded by the rule
          const CircleArc& sarc = sign2 == 1 ? im->arc_plus[i2] : im->arc_minus[i2];
          check_inside(sarc.image(g), target,
                       im->names[i] + (sign > 0 ? "" : "^-1") + " on " + im->names[i2]);
        }
      }
      for (std::size_t j = 0; j < im->P; ++j)
        check_inside(im->region[j].image(g), target,
                     im->names[i] + (sign > 0 ? "" : "^-1") + " on cluster of " +
                         im->names[im->H + j]);
    }
  }
  // Parabolic letter arcs p^{+-n}(X_j): contained in the cluster region,
  // pairwise disjoint, marching monotonically into the fixed point.
  for (std::size_t j = 0; j < im->P; ++j) {
    const MobiusMap& p = im->gens[im->H + j];
    // successor arcs must sit inside X_j
    for (const auto& arc : hyp_arcs)
      if (!im->hull_x[j].contains(arc, 1e-12))
        throw PingPongFailure("successor arc escapes X of " + im->names[im->H + j]);
    for (std::size_t j2 = 0; j2 < im->P; ++j2)
      if (j2 != j && !im->hull_x[j].contains(im->region[j2], 1e-12))
        throw PingPongFailure("cluster region escapes X of " + im->names[im->H + j]);
    std::vector<CircleArc> arcs;
    double prev_dist = rp1::kPi;
    for (int n = 1; n <= 16; ++n) {
      for (int sign : {1, -1}) {
        CircleArc a = im->hull_x[j].image(p.pow(sign * n));
        if (!im->region[j].contains(a, 1e-9))
          throw PingPongFailure("parabolic power arc escapes its cluster region");
        for (const auto& other : arcs)
          if (a.intersects(other))
            throw PingPongFailure("parabolic power arcs overlap");
        for (const auto& arc : hyp_arcs)
          if (a.intersects(arc))
            throw PingPongFailure("parabolic power arc meets a hyperbolic arc");
        arcs.push_back(a);
      }
      double dist = rp1::distance(arcs[arcs.size() - 2].midpoint(), im->fixed[j]);
      if (dist > prev_dist + 1e-12)
        throw PingPongFailure("parabolic power arcs fail to approach the fixed point");
      prev_dist = dist;
    }
  }
  // Infinite covolume: the arcs must leave boundary uncovered.
  double covered = 0.0;
  for (const auto& a : hyp_arcs) covered += a.length();
  for (std::size_t j = 0; j < im->P; ++j) covered += im->region[j].length();
  if (covered > rp1::kPi - 0.01)
    throw PingPongFailure("arcs nearly cover the circle (covolume not infinite?)");

  im->Q = static_cast<int>(std::max(2 * im->H, 2 * im->P));
  CodingTable t;
  t.impl_ = im;
  return t;
}

CodingTable build_coding(const GroupPresentation& pres) { return CodingTable::build(pres); }

CodingLetter CodingTable::letter(Letter id) const { return decode_letter(*impl_, id); }

bool CodingTable::allowed_letters(Letter a, Letter b) const {
  return letters_allowed(*impl_, a, b);
}

std::size_t CodingTable::base_letter_count() const { return 2 * impl_->H + 2 * impl_->P; }
std::size_t CodingTable::hyperbolic_count() const { return impl_->H; }
std::size_t CodingTable::parabolic_count() const { return impl_->P; }
MobiusMap CodingTable::generator(int gen) const {
  return impl_->gens[static_cast<std::size_t>(gen)];
}
double CodingTable::parabolic_fixed_angle(int family) const {
  return impl_->fixed[static_cast<std::size_t>(family)];
}
int CodingTable::multiplicity_bound() const { return impl_->Q; }

ShiftSpec CodingTable::shift_spec() const {
  ShiftSpec s;
  s.kind = ShiftSpec::AlphabetKind::countable;
  auto im = impl_;
  s.allowed = [im](Letter a, Letter b) { return letters_allowed(*im, a, b); };
  s.letter_weight_hint = [im](Letter a) {
    return static_cast<double>(decode_letter(*im, a).r);
  };
  s.letter_size = [im](Letter a) {
    auto l = decode_letter(*im, a);
    return l.parabolic ? static_cast<double>(l.r - 1) : 1.0;
  };
  s.name = "dalbo_peigne";
  return s;
}

OmegaEndpoint omega_endpoint(const CodingTable& coding, const TruncatedShift& shift,
                             std::span<const std::int32_t> prefix, std::size_t depth) {
  if (prefix.empty()) throw InadmissibleWord("empty prefix");
  if (!is_admissible(shift, prefix)) throw InadmissibleWord("prefix not admissible");
  std::vector<std::int32_t> w(prefix.begin(), prefix.end());
  if (w.size() < depth) w = pinned_extension(shift, w, depth);
  CircleArc arc = coding.letter(shift.letter(static_cast<std::size_t>(w.back()))).arc;
  for (std::size_t i = w.size() - 1; i-- > 0;) {
    auto l = coding.letter(shift.letter(static_cast<std::size_t>(w[i])));
    arc = arc.image(l.G);
  }
  OmegaEndpoint out;
  out.angle = arc.midpoint();
  out.radius = 0.5 * arc.length();
  return out;
}

// ---- Representations ----------------------------------------------------------------

Representation Representation::sym(const CodingTable& coding, int d) {
  if (d < 2) throw ConfigError("representation dimension must be >= 2");
  Representation r;
  r.d_ = d;
  std::size_t total = coding.hyperbolic_count() + coding.parabolic_count();
  for (std::size_t g = 0; g < total; ++g) {
    r.base_.push_back(coding.generator(static_cast<int>(g)).matrix());
    r.is_parabolic_.push_back(g >= coding.hyperbolic_count());
  }
  return r;
}

Eigen::MatrixXd Representation::image_of_gen_power(int gen, std::int64_t e) const {
  // Compute the power in SL(2) first; the symmetric power then stays exact
  // for parabolic blocks.
  MobiusMap m{base_[static_cast<std::size_t>(gen)]};
  Eigen::Matrix2d powered = m.pow(e).matrix();
  return sym_power(powered, d_);
}

Eigen::MatrixXd Representation::image_of_letter(const CodingLetter& a) const {
  return image_of_gen_power(a.gen, a.exponent);
}

bool Representation::parabolics_unipotent_single_block(double tol) const {
  for (std::size_t g = 0; g < base_.size(); ++g) {
    if (!is_parabolic_[g]) continue;
    Eigen::MatrixXd M = image_of_gen_power(static_cast<int>(g), 1);
    Eigen::MatrixXd N = M - Eigen::MatrixXd::Identity(d_, d_);
    Eigen::MatrixXd Nk = Eigen::MatrixXd::Identity(d_, d_);
    for (int k = 0; k < d_ - 1; ++k) Nk = Nk * N;
    if (Nk.cwiseAbs().maxCoeff() < tol) return false;  // (M-I)^{d-1} vanished too early
    Nk = Nk * N;
    if (Nk.cwiseAbs().maxCoeff() > tol) return false;  // (M-I)^d must vanish
  }
  return true;
}

// ---- Roof functions -----------------------------------------------------------------

RoofPotential::RoofPotential(CodingTable coding, Representation rep,
                             Eigen::VectorXd phi_dual, RoofOptions opts)
    : coding_(std::move(coding)),
      rep_(std::move(rep)),
      phi_dual_(std::move(phi_dual)),
      opts_(opts) {
  if (phi_dual_.size() != rep_.dim()) throw ConfigError("phi dimension mismatch");
  fit_holder();
}

double RoofPotential::value_at(const CodingLetter& a, double omega_angle) const {
  // B(G, G^{-1} xi) = -B(G^{-1}, xi) by the cocycle law; the right side works
  // directly on the orthonormal Veronese frame (no ill-conditioned solve) and
  // the inverse image is exact as a generator power.
  Eigen::MatrixXd Minv = rep_.image_of_gen_power(a.gen, -a.exponent);
  Eigen::MatrixXd xi = veronese_frame(omega_angle, rep_.dim());
  Eigen::VectorXd B = iwasawa_cocycle(Minv, xi);
  return -phi_dual_.dot(B);
}

CylinderValue RoofPotential::eval(const TruncatedShift& shift,
                                  std::span<const std::int32_t> prefix) const {
  if (prefix.empty()) throw InadmissibleWord("empty prefix");
  auto letter0 = coding_.letter(shift.letter(static_cast<std::size_t>(prefix[0])));

  std::size_t want = std::max<std::size_t>(prefix.size(), opts_.radius_depth);
  for (int attempt = 0; attempt < 2; ++attempt) {
    try {
      auto deep = omega_endpoint(coding_, shift, prefix, want);
      // Every point of the cylinder [prefix] has its omega inside the arc of
      // the unextended prefix; sample that arc to bound the tau variation.
      auto cyl = omega_endpoint(coding_, shift, prefix, prefix.size());
      double v = value_at(letter0, deep.angle);
      double lo = value_at(letter0, cyl.angle - cyl.radius);
      double hi = value_at(letter0, cyl.angle + cyl.radius);
      double mid = value_at(letter0, cyl.angle);
      double spread = std::max({std::abs(v - lo), std::abs(v - hi), std::abs(v - mid)});
      double err = 1.5 * spread + 1e-12;
      return {v, err};
    } catch (const DegenerateFlag&) {
      if (attempt == 1) throw;
      want += 24;  // deepen the word until the flag chart is transverse
    }
  }
  throw DegenerateFlag("unreachable");
}

void RoofPotential::fit_holder() {
  // Empirical constants: contraction rate of the omega arcs along canonical
  // words, amplitude from the variation at depth two.
  auto spec = coding_.shift_spec();
  auto shift = build_truncation(spec, TruncationRule::first_k(
                                          static_cast<std::int64_t>(
                                              coding_.base_letter_count() + 6)));
  double rate = 0.0;
  int samples = 0;
  double amp = 1e-3;
  for (std::size_t i = 0; i < shift.size() && samples < 8; ++i) {
    std::int32_t start = static_cast<std::int32_t>(i);
    std::vector<std::int32_t> w{start};
    auto prev = omega_endpoint(coding_, shift, w, 4);
    auto next = omega_endpoint(coding_, shift, w, 8);
    if (prev.radius > 1e-14 && next.radius > 1e-16) {
      rate += std::log(prev.radius / next.radius) / 4.0;
      ++samples;
    }
    try {
      auto l = coding_.letter(shift.letter(i));
      auto sh = omega_endpoint(coding_, shift, w, 2);
      double v0 = value_at(l, sh.angle - sh.radius);
      double v1 = value_at(l, sh.angle + sh.radius);
      amp = std::max(amp, std::abs(v1 - v0));
    } catch (const DegenerateFlag&) {
    }
  }
  double alpha = samples ? std::clamp(rate / samples, 1e-2, 8.0) : 0.5;
  holder_ = HolderBounds{amp * std::exp(2.0 * alpha) * 2.0, alpha};
}

std::string RoofPotential::describe() const {
  std::ostringstream os;
  os << "roof(" << rep_.kind() << ", phi=[";
  for (int i = 0; i < phi_dual_.size(); ++i) os << (i ? "," : "") << phi_dual_(i);
  os << "])";
  return os.str();
}

}  // namespace thermoshift

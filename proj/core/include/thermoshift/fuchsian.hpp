#pragma once

#include <Eigen/Dense>
#include <memory>

#include "thermoshift/mobius.hpp"
#include "thermoshift/potential.hpp"
#include "thermoshift/shift.hpp"

namespace thermoshift {

// ---- Cartan-space linear algebra -----------------------------------------------

// Jordan projection: sorted log moduli of eigenvalues, projected to sum zero.
Eigen::VectorXd jordan_projection(const Eigen::MatrixXd& A);
// Cartan projection: log singular values, projected to sum zero.
Eigen::VectorXd cartan_projection(const Eigen::MatrixXd& A);

struct Projections {
  Eigen::VectorXd jordan;
  Eigen::VectorXd cartan;
};
Projections projections(const Eigen::MatrixXd& A);

// alpha_k(v) = v_k - v_{k+1} and omega_k(v) = v_1 + ... + v_k, 1-based k.
double simple_root(const Eigen::VectorXd& v, int k);
double fundamental_weight(const Eigen::VectorXd& v, int k);

// Dual vector c with phi(v) = c . v, from coefficients over the simple roots
// or the fundamental weights.
Eigen::VectorXd phi_from_alpha(const std::vector<double>& a, int d);
Eigen::VectorXd phi_from_omega(const std::vector<double>& b, int d);

// Gram-Schmidt on columns, preserving the nested spans. Throws DegenerateFlag
// on rank deficiency.
Eigen::MatrixXd orthonormal_frame(const Eigen::MatrixXd& basis);

// Iwasawa cocycle B(A, F): with F = K(F_0) and A K = Q Z U (Q special
// orthogonal, Z positive diagonal, U unit upper triangular), returns log Z.
Eigen::VectorXd iwasawa_cocycle(const Eigen::MatrixXd& A, const Eigen::MatrixXd& frame);

// Frame of the attracting flag of a matrix with distinct eigenvalue moduli.
Eigen::MatrixXd attracting_frame(const Eigen::MatrixXd& A);

// (d-1)-st symmetric power of a 2x2 matrix on degree-(d-1) binary forms in
// the monomial basis, rescaled to determinant one.
Eigen::MatrixXd sym_power(const Eigen::Matrix2d& A, int d);

// Frame of the Veronese (osculating) flag at a boundary angle.
Eigen::MatrixXd veronese_frame(double theta, int d);

// ---- Schottky presentations ------------------------------------------------------

struct SchottkyGenerator {
  std::string name;
  MobiusMap g;
  bool parabolic = false;
  // Ping-pong target arcs for g and g^{-1}; supplied for hyperbolic
  // generators, derived for parabolic ones.
  CircleArc arc_plus{};
  CircleArc arc_minus{};
};

struct GroupPresentation {
  std::vector<SchottkyGenerator> hyperbolic;
  std::vector<SchottkyGenerator> parabolic;

  // h = [[2,1],[1,1]], p = [[1,8],[0,1]] with verified intervals.
  static GroupPresentation default_group();
  // h2 = [[3,1],[2,1]] with the same parabolic; type-preserving partner of
  // default_group().
  static GroupPresentation second_group();
};

// One letter of the coding: a group element G(a) = s(a)^{r(a)-2} g_a with its
// ping-pong target arc.
struct CodingLetter {
  int gen = 0;               // generator index: hyperbolic first, then parabolic
  std::int64_t exponent = 1;  // +-1 for hyperbolic letters, +-n for parabolic powers
  bool parabolic = false;
  int r = 1;                 // n + 1 for parabolic powers, 1 otherwise
  MobiusMap G;
  CircleArc arc;
  std::string display;
};

// Countable-alphabet coding of the recurrent geodesic flow of a Schottky
// group with parabolics: alphabet A_0 union {p^n, n >= 2}, one letter per
// power, transition rule G(x_{i+1}) != G(x_i)^{-1} plus the
// parabolic-successor exclusion.
class CodingTable {
 public:
  static CodingTable build(const GroupPresentation& pres);

  ShiftSpec shift_spec() const;  // countable; weight hint r(a), size r(a)-1
  CodingLetter letter(Letter id) const;
  bool allowed_letters(Letter a, Letter b) const;
  std::size_t base_letter_count() const;  // #A_0 = 2H + 2P
  std::size_t hyperbolic_count() const;
  std::size_t parabolic_count() const;
  MobiusMap generator(int gen) const;
  double parabolic_fixed_angle(int family) const;
  int multiplicity_bound() const;  // Q with #r^{-1}(n) <= Q

  struct Impl;

 private:
  std::shared_ptr<const Impl> impl_;
};

CodingTable build_coding(const GroupPresentation& pres);

struct OmegaEndpoint {
  double angle = 0.0;
  double radius = 0.0;
};

// Nested-arc endpoint: the limit point of the cylinder [prefix], extended
// canonically to `depth` letters; radius is half the final arc length.
OmegaEndpoint omega_endpoint(const CodingTable& coding, const TruncatedShift& shift,
                             std::span<const std::int32_t> prefix, std::size_t depth);

// ---- Representations and roof functions -------------------------------------------

// Symmetric-power representation of the presentation underlying a coding;
// d = 2 is the inclusion itself.
class Representation {
 public:
  static Representation sym(const CodingTable& coding, int d);

  int dim() const { return d_; }
  std::string kind() const { return d_ == 2 ? "sl2" : "sym_power(" + std::to_string(d_) + ")"; }
  Eigen::MatrixXd image_of_letter(const CodingLetter& a) const;
  Eigen::MatrixXd image_of_gen_power(int gen, std::int64_t e) const;
  // (rho(p) - I)^{d-1} != 0 and (rho(p) - I)^d == 0 for every parabolic
  // generator p.
  bool parabolics_unipotent_single_block(double tol = 1e-8) const;

 private:
  int d_ = 2;
  std::vector<Eigen::Matrix2d> base_;  // 2x2 generators, hyperbolic then parabolic
  std::vector<bool> is_parabolic_;
};

struct RoofOptions {
  std::size_t base_depth = 20;     // minimum word length used for omega
  std::size_t radius_depth = 44;   // extension used to pin the value
  double degenerate_tol = 1e-13;   // diagonal floor before FlagDegenerate
};

// The phi-roof function tau^phi(x) = phi(B(rho(G(x1)), rho(G(x1))^{-1}
// xi(omega(x)))), exposed through the Potential contract with certified
// cylinder radii from the omega arcs.
class RoofPotential final : public Potential {
 public:
  RoofPotential(CodingTable coding, Representation rep, Eigen::VectorXd phi_dual,
                RoofOptions opts = {});

  CylinderValue eval(const TruncatedShift& shift,
                     std::span<const std::int32_t> prefix) const override;
  HolderBounds holder() const override { return holder_; }
  std::string describe() const override;

  // tau at an explicit boundary angle (test hook).
  double value_at(const CodingLetter& a, double omega_angle) const;
  double phi(const Eigen::VectorXd& v) const { return phi_dual_.dot(v); }
  const Representation& representation() const { return rep_; }
  const CodingTable& coding() const { return coding_; }

 private:
  void fit_holder();

  CodingTable coding_;
  Representation rep_;
  Eigen::VectorXd phi_dual_;
  RoofOptions opts_;
  HolderBounds holder_{1.0, 0.5};
};

}  // namespace thermoshift

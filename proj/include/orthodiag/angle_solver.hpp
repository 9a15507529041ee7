#pragma once

// Exact solution of the one-dimensional rotation subproblem
//
//   max_{theta in [-pi/4, pi/4]}  h(theta) - delta0 * gamma(theta),
//   gamma(theta) = 2 sin^2(theta) cos^2(theta),
//
// where h(theta) is the objective after rotating coordinates (i, j) of every
// tensor by theta.  With x = tan(theta) the critical points are roots of a
// degree-2d polynomial omega(x) which is invariant under x -> -1/x; the
// substitution xi = x - 1/x halves its degree to Omega(xi).

#include <array>
#include <vector>

#include "orthodiag/symtensor.hpp"

namespace orthodiag {

/// The 2 x ... x 2 restriction of each rotated tensor to coordinates {i, j}.
/// Block entry t[k] is the entry with k indices equal to j and d - k equal to
/// i (t[0] = W_{i..i}, t[d] = W_{j..j}).  Only these entries influence the
/// subproblem; the rest of f is a theta-independent constant.
struct SubproblemView {
  using Block = std::array<double, kMaxOrder + 1>;

  int order = 3;
  std::vector<Block> blocks;
  double delta0 = 0.0;

  static SubproblemView extract(const TensorSet& rotated, int i, int j, double delta0 = 0.0);

  /// Sum over blocks of t_0(theta)^2 + t_d(theta)^2, minus delta0 * gamma.
  double objective(double theta) const;

  /// objective(theta) - objective(0), evaluated without cancellation so that
  /// tiny gains near convergence keep their relative accuracy.
  double gain(double theta) const;

  /// View of the tensors after rotating by theta.
  SubproblemView rotated(double theta) const;
};

/// gamma(theta) = 2 sin^2 cos^2.
double proximal_gamma(double theta);

struct HDerivatives {
  double first = 0.0;
  double second = 0.0;
};

/// h'(0) and h''(0) of the unpenalized objective (closed forms for d = 2, 3, 4).
HDerivatives h_derivatives_at_zero(const SubproblemView& view);

/// Omega(xi) with ascending coefficients; nominal degree 2 for d in {2, 3}
/// and 4 for d = 4.
struct XiPolynomial {
  std::array<double, 5> coeffs{};
  int degree = 0;

  double operator()(double xi) const;
};

XiPolynomial omega_xi_coeffs(const SubproblemView& view);

struct XiRoots {
  std::vector<double> roots;
  /// Omega is identically zero: the subproblem objective is constant.
  bool constant = false;
};

/// Real roots of Omega, ascending, repeated roots collapsed.  Leading
/// coefficients below 1e-13 * max|coeff| are dropped; quadratics use the
/// stable closed form, cubics and quartics companion-matrix eigenvalues
/// refined by Newton steps.  A root is real when |Im| <= imag_tol * (1 + |Re|).
XiRoots solve_xi_roots(const XiPolynomial& poly, double imag_tol = 1e-10);

/// Tangent(s) in [-1, 1] solving x^2 - xi x - 1 = 0 (both +-1 when xi = 0).
std::vector<double> xi_to_x_candidates(double xi);

struct AngleCandidate {
  double theta = 0.0;
  double gain = 0.0;
};

struct AngleResult {
  double theta = 0.0;
  double gain = 0.0;
  std::vector<AngleCandidate> candidates;
};

/// Global maximizer on [-pi/4, pi/4] from the candidate set {0, +-pi/4} and
/// the tangents of all real Omega roots.  Ties go to the smaller |theta|, then
/// to the positive angle.
AngleResult best_angle(const SubproblemView& view);

/// Dense grid over [-pi/4, pi/4] and golden-section refinement of the best
/// cell, wrapping around at the endpoints since the objective has period
/// pi/2.  Reference maximizer; grid_points must be at least 1000.
AngleResult brute_force_angle(const SubproblemView& view, int grid_points = 2000);

struct IdentityResidual {
  double value = 0.0;       ///< |tau(x) - tau(0) - closed form|
  double derivative = 0.0;  ///< |tau'(x) - closed form|
};

/// Residuals of the closed forms of tau(x) - tau(0) and tau'(x) in terms of
/// h'(0), h''(0).  Only valid for d in {2, 3} and delta0 = 0.
IdentityResidual tau_identity_check(const SubproblemView& view, double x);

}  // namespace orthodiag

#include "orthodiag/angle_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "orthodiag/errors.hpp"

namespace orthodiag {
namespace {

constexpr double kQuarterPi = std::numbers::pi / 4.0;

// Candidate generation accepts slightly complex roots as well: an extra
// candidate costs one evaluation, a missing one can lose the maximizer when
// two real roots nearly coincide.
constexpr double kCandidateImagTol = 1e-6;

constexpr std::array<std::array<double, 5>, 5> kBinomial{{
    {1, 0, 0, 0, 0},
    {1, 1, 0, 0, 0},
    {1, 2, 1, 0, 0},
    {1, 3, 3, 1, 0},
    {1, 4, 6, 4, 1},
}};

void require_supported(int order, const char* what) {
  if (order < kMinOrder || order > kMaxOrder) {
    throw ContractViolation(std::string(what) + ": unsupported order " + std::to_string(order));
  }
}

double horner(std::span<const double> ascending, double x) {
  double acc = 0.0;
  for (auto it = ascending.rbegin(); it != ascending.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double horner_derivative(std::span<const double> ascending, double x) {
  double acc = 0.0;
  for (std::size_t k = ascending.size(); k-- > 1;) acc = acc * x + static_cast<double>(k) * ascending[k];
  return acc;
}

double newton_polish(std::span<const double> ascending, double root) {
  double value = std::abs(horner(ascending, root));
  for (int iter = 0; iter < 4 && value > 0.0; ++iter) {
    const double slope = horner_derivative(ascending, root);
    if (slope == 0.0) break;
    const double next = root - horner(ascending, root) / slope;
    const double next_value = std::abs(horner(ascending, next));
    if (!(next_value < value)) break;
    root = next;
    value = next_value;
  }
  return root;
}

bool accept_real(double re, double im, double imag_tol) {
  return std::abs(im) <= imag_tol * (1.0 + std::abs(re));
}

// Real roots of the quadratic c2 x^2 + c1 x + c0 with c2 != 0.
void quadratic_roots(double c0, double c1, double c2, double imag_tol, std::vector<double>& out) {
  const double disc = c1 * c1 - 4.0 * c2 * c0;
  if (disc >= 0.0) {
    const double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
    if (q == 0.0) {
      out.push_back(0.0);
      return;
    }
    out.push_back(q / c2);
    out.push_back(c0 / q);
    return;
  }
  const double re = -c1 / (2.0 * c2);
  const double im = std::sqrt(-disc) / (2.0 * std::abs(c2));
  if (accept_real(re, im, imag_tol)) out.push_back(re);
}

void companion_roots(std::span<const double> ascending, double imag_tol, std::vector<double>& out) {
  const int deg = static_cast<int>(ascending.size()) - 1;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
  for (int k = 0; k < deg; ++k) companion(0, k) = -ascending[deg - 1 - k] / ascending[deg];
  for (int k = 1; k < deg; ++k) companion(k, k - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
  const auto& eig = solver.eigenvalues();
  for (int k = 0; k < deg; ++k) {
    if (accept_real(eig[k].real(), eig[k].imag(), imag_tol)) {
      out.push_back(newton_polish(ascending, eig[k].real()));
    }
  }
}

// Rotated extreme entries t_0(theta) - t_0 and t_d(theta) - t_d of one block.
std::pair<double, double> block_deltas(const SubproblemView::Block& t, int d, double c, double s,
                                       double c_pow_d_minus_one) {
  double delta_first = t[0] * c_pow_d_minus_one;
  double delta_last = t[d] * c_pow_d_minus_one;
  for (int k = 1; k <= d; ++k) {
    delta_first += kBinomial[d][k] * t[k] * std::pow(c, d - k) * std::pow(s, k);
  }
  for (int k = 0; k < d; ++k) {
    delta_last += kBinomial[d][k] * t[k] * std::pow(-s, d - k) * std::pow(c, k);
  }
  return {delta_first, delta_last};
}

AngleCandidate pick_better(const AngleCandidate& best, const AngleCandidate& cand) {
  const double scale = std::max(std::abs(best.gain), std::abs(cand.gain));
  if (std::abs(cand.gain - best.gain) <= 1e-12 * scale) {
    const double a = std::abs(cand.theta);
    const double b = std::abs(best.theta);
    if (a < b) return cand;
    if (a == b && cand.theta > best.theta) return cand;
    return best;
  }
  return cand.gain > best.gain ? cand : best;
}

}  // namespace

SubproblemView SubproblemView::extract(const TensorSet& rotated, int i, int j, double delta0) {
  if (i < 0 || j >= rotated.dim() || i >= j) {
    throw ContractViolation("SubproblemView: need 0 <= i < j < n");
  }
  if (!(delta0 >= 0.0)) throw ContractViolation("SubproblemView: delta0 must be >= 0");
  SubproblemView view;
  view.order = rotated.order();
  view.delta0 = delta0;
  view.blocks.reserve(rotated.size());
  for (const auto& w : rotated) {
    Block block{};
    for (int k = 0; k <= view.order; ++k) block[k] = w.near(i, j, k);
    view.blocks.push_back(block);
  }
  return view;
}

double proximal_gamma(double theta) {
  const double sc = std::sin(theta) * std::cos(theta);
  return 2.0 * sc * sc;
}

double SubproblemView::objective(double theta) const {
  const int d = order;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  double total = 0.0;
  for (const auto& t : blocks) {
    double first = 0.0;
    double last = 0.0;
    for (int k = 0; k <= d; ++k) {
      first += kBinomial[d][k] * t[k] * std::pow(c, d - k) * std::pow(s, k);
      last += kBinomial[d][k] * t[k] * std::pow(-s, d - k) * std::pow(c, k);
    }
    total += first * first + last * last;
  }
  return total - delta0 * proximal_gamma(theta);
}

double SubproblemView::gain(double theta) const {
  if (theta == 0.0) return 0.0;
  const int d = order;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double half_sin = std::sin(0.5 * theta);
  const double c_minus_one = -2.0 * half_sin * half_sin;
  double geometric = 0.0;
  for (int k = 0; k < d; ++k) geometric += std::pow(c, k);
  const double c_pow_d_minus_one = c_minus_one * geometric;

  double total = 0.0;
  for (const auto& t : blocks) {
    const auto [df, dl] = block_deltas(t, d, c, s, c_pow_d_minus_one);
    total += df * (2.0 * t[0] + df) + dl * (2.0 * t[d] + dl);
  }
  return total - delta0 * proximal_gamma(theta);
}

SubproblemView SubproblemView::rotated(double theta) const {
  require_supported(order, "SubproblemView::rotated");
  SubproblemView out = *this;
  std::array<int, kMaxOrder> idx{};
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    SymTensor local(order, 2);
    for (int k = 0; k <= order; ++k) {
      for (int p = 0; p < order; ++p) idx[p] = (p < order - k) ? 0 : 1;
      local.set_symmetric(std::span<const int>(idx.data(), static_cast<std::size_t>(order)),
                          blocks[b][k]);
    }
    rotate_all_modes_givens(local, 0, 1, theta);
    for (int k = 0; k <= order; ++k) out.blocks[b][k] = local.near(0, 1, k);
  }
  return out;
}

HDerivatives h_derivatives_at_zero(const SubproblemView& view) {
  require_supported(view.order, "h_derivatives_at_zero");
  HDerivatives out;
  for (const auto& t : view.blocks) {
    switch (view.order) {
      case 2:
        out.first += 4.0 * (t[0] * t[1] - t[1] * t[2]);
        out.second += -4.0 * (t[0] * t[0] + t[2] * t[2] - 2.0 * t[0] * t[2] - 4.0 * t[1] * t[1]);
        break;
      case 3:
        out.first += 6.0 * (t[0] * t[1] - t[2] * t[3]);
        out.second += -6.0 * (t[0] * t[0] + t[3] * t[3] - 3.0 * t[1] * t[1] - 3.0 * t[2] * t[2] -
                              2.0 * t[0] * t[2] - 2.0 * t[1] * t[3]);
        break;
      case 4:
        out.first += 8.0 * (t[0] * t[1] - t[3] * t[4]);
        out.second += 8.0 * (4.0 * t[1] * t[1] + 4.0 * t[3] * t[3] + 3.0 * t[0] * t[2] +
                             3.0 * t[2] * t[4] - t[0] * t[0] - t[4] * t[4]);
        break;
    }
  }
  return out;
}

double XiPolynomial::operator()(double xi) const {
  return horner(std::span<const double>(coeffs.data(), static_cast<std::size_t>(degree) + 1), xi);
}

XiPolynomial omega_xi_coeffs(const SubproblemView& view) {
  require_supported(view.order, "omega_xi_coeffs");
  const double prox = 4.0 * view.delta0;
  XiPolynomial poly;
  if (view.order == 2 || view.order == 3) {
    // Omega(xi) = a xi^2 + b xi - 4a with a = h'(0), b = -h''(0) + 4 delta0.
    double a = 0.0;
    double b = 0.0;
    for (const auto& t : view.blocks) {
      if (view.order == 3) {
        a += 6.0 * (t[0] * t[1] - t[2] * t[3]);
        b += 6.0 * (t[0] * t[0] + t[3] * t[3] - 3.0 * t[1] * t[1] - 3.0 * t[2] * t[2] -
                    2.0 * t[0] * t[2] - 2.0 * t[1] * t[3]);
      } else {
        a += 4.0 * (t[0] * t[1] - t[1] * t[2]);
        b += 4.0 * (t[0] * t[0] + t[2] * t[2] - 2.0 * t[0] * t[2] - 4.0 * t[1] * t[1]);
      }
    }
    b += prox;
    poly.coeffs = {-4.0 * a, b, a, 0.0, 0.0};
    poly.degree = 2;
    return poly;
  }

  double a = 0.0, b = 0.0, c = 0.0, d = 0.0, e = 0.0;
  for (const auto& t : view.blocks) {
    const double w1111 = t[0], w1112 = t[1], w1122 = t[2], w1222 = t[3], w2222 = t[4];
    a += 8.0 * (w1111 * w1112 - w1222 * w2222);
    b += 8.0 * (w1111 * w1111 - 3.0 * w1122 * w1111 - 4.0 * w1112 * w1112 -
                4.0 * w1222 * w1222 + w2222 * w2222 - 3.0 * w1122 * w2222);
    c += 8.0 * (18.0 * w1112 * w1122 - 7.0 * w1111 * w1112 + 3.0 * w1111 * w1222 -
                18.0 * w1122 * w1222 - 3.0 * w1112 * w2222 + 7.0 * w1222 * w2222);
    d += 8.0 * (9.0 * w1111 * w1122 - 32.0 * w1112 * w1222 - 2.0 * w1111 * w2222 +
                9.0 * w1122 * w2222 + 12.0 * w1112 * w1112 - 36.0 * w1122 * w1122 +
                12.0 * w1222 * w1222);
    e += 80.0 * (6.0 * w1122 * w1222 - w1111 * w1222 - 6.0 * w1112 * w1122 + w1112 * w2222);
  }
  b += prox;
  d += prox;
  poly.coeffs = {2.0 * a + 2.0 * c + e, 3.0 * b + d, 4.0 * a + c, b, a};
  poly.degree = 4;
  return poly;
}

XiRoots solve_xi_roots(const XiPolynomial& poly, double imag_tol) {
  XiRoots out;
  double max_coeff = 0.0;
  for (int k = 0; k <= poly.degree; ++k) max_coeff = std::max(max_coeff, std::abs(poly.coeffs[k]));
  if (max_coeff == 0.0) {
    out.constant = true;
    return out;
  }
  int deg = poly.degree;
  while (deg > 0 && std::abs(poly.coeffs[deg]) <= 1e-13 * max_coeff) --deg;
  const std::span<const double> active(poly.coeffs.data(), static_cast<std::size_t>(deg) + 1);

  if (deg == 1) {
    out.roots.push_back(-active[0] / active[1]);
  } else if (deg == 2) {
    quadratic_roots(active[0], active[1], active[2], imag_tol, out.roots);
  } else if (deg >= 3) {
    companion_roots(active, imag_tol, out.roots);
  }

  std::sort(out.roots.begin(), out.roots.end());
  auto same = [](double x, double y) { return std::abs(x - y) <= 1e-12 * (1.0 + std::abs(x)); };
  out.roots.erase(std::unique(out.roots.begin(), out.roots.end(), same), out.roots.end());
  return out;
}

std::vector<double> xi_to_x_candidates(double xi) {
  if (xi == 0.0) return {-1.0, 1.0};
  // Roots of x^2 - xi x - 1 have product -1; return the one inside [-1, 1]
  // in the form that avoids cancellation.
  const double root = std::sqrt(xi * xi + 4.0);
  if (xi > 0.0) return {-2.0 / (xi + root)};
  return {2.0 / (root - xi)};
}

AngleResult best_angle(const SubproblemView& view) {
  require_supported(view.order, "best_angle");
  AngleResult result;
  const XiRoots roots = solve_xi_roots(omega_xi_coeffs(view), kCandidateImagTol);
  if (roots.constant) {
    result.candidates.push_back({0.0, 0.0});
    return result;
  }

  std::vector<double> thetas{0.0, kQuarterPi, -kQuarterPi};
  for (double xi : roots.roots) {
    if (!std::isfinite(xi)) continue;
    for (double x : xi_to_x_candidates(xi)) thetas.push_back(std::atan(x));
  }

  AngleCandidate best{0.0, 0.0};
  result.candidates.reserve(thetas.size());
  for (double theta : thetas) {
    const AngleCandidate cand{theta, view.gain(theta)};
    result.candidates.push_back(cand);
    best = pick_better(best, cand);
  }
  result.theta = best.theta;
  result.gain = best.gain;
  return result;
}

AngleResult brute_force_angle(const SubproblemView& view, int grid_points) {
  require_supported(view.order, "brute_force_angle");
  if (grid_points < 1000) throw ContractViolation("brute_force_angle: need >= 1000 grid points");
  if (grid_points % 2 == 1) ++grid_points;  // keep theta = 0 on the grid

  const double step = 2.0 * kQuarterPi / grid_points;
  auto theta_at = [&](int k) { return -kQuarterPi + step * k; };
  const double base = view.objective(0.0);

  int best_k = grid_points / 2;
  double best_value = base;
  for (int k = 0; k <= grid_points; ++k) {
    const double value = view.objective(theta_at(k));
    if (value > best_value) {
      best_value = value;
      best_k = k;
    }
  }

  // The objective has period pi/2, so the cells next to an endpoint wrap
  // around to the other end of the interval.
  double lo = theta_at(best_k - 1);
  double hi = theta_at(best_k + 1);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = view.objective(x1);
  double f2 = view.objective(x2);
  while (hi - lo > 1e-12) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = view.objective(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = view.objective(x1);
    }
  }

  AngleResult result;
  double refined = 0.5 * (lo + hi);
  refined -= 2.0 * kQuarterPi * std::round(refined / (2.0 * kQuarterPi));
  const double refined_value = view.objective(refined);
  result.candidates = {{0.0, 0.0},
                       {theta_at(best_k), best_value - base},
                       {refined, refined_value - base}};
  AngleCandidate best{0.0, 0.0};
  for (const auto& cand : result.candidates) {
    if (cand.gain > best.gain) best = cand;
  }
  result.theta = best.theta;
  result.gain = best.gain;
  return result;
}

IdentityResidual tau_identity_check(const SubproblemView& view, double x) {
  if (view.order != 2 && view.order != 3) {
    throw ContractViolation("tau_identity_check: only orders 2 and 3 are supported");
  }
  if (view.delta0 != 0.0) throw ContractViolation("tau_identity_check: requires delta0 = 0");

  const HDerivatives h = h_derivatives_at_zero(view);
  const double theta = std::atan(x);
  const double x2 = x * x;
  const double denom = 1.0 + x2;

  const double lhs_value = view.objective(theta) - view.objective(0.0);
  const double rhs_value = (h.first * (x - x * x2) + 0.5 * h.second * x2) / (denom * denom);

  // tau'(x) = h'(theta) / (1 + x^2), with h'(theta) read off the rotated view.
  const double lhs_derivative = h_derivatives_at_zero(view.rotated(theta)).first / denom;
  const double rhs_derivative =
      (h.first * (1.0 - 6.0 * x2 + x2 * x2) + h.second * (x - x * x2)) / (denom * denom * denom);

  return {std::abs(lhs_value - rhs_value), std::abs(lhs_derivative - rhs_derivative)};
}

}  // namespace orthodiag

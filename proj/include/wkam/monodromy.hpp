#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <vector>

#include "wkam/errors.hpp"
#include "wkam/lagrangian.hpp"

namespace wkam {

struct MonodromyReport {
  Eigen::VectorXd position;  // x*
  Eigen::VectorXd velocity;  // v*
  Eigen::MatrixXd matrix;    // A = D phi_{1,0}, 2m x 2m
  std::vector<std::complex<double>> eigenvalues;
  double lambda_max = 0.0;  // largest |lambda| with |lambda| < 1 (0 if none)
  double mu = 0.0;          // -log lambda_max (0 if none)
  bool hyperbolic = false;
  double det = 0.0;
  /// max over eigenvalues of the distance from 1/lambda to the nearest eigenvalue.
  double pairing_defect = 0.0;
  int newton_iterations = 0;
};

namespace detail {

inline Eigen::VectorXd potential_gradient(const LagrangianSpec& s, const Eigen::VectorXd& x, double t) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(s.dim);
  const double scale = s.kind == SystemKind::forced_pendulum_1d
                           ? s.amplitude * (1.0 + s.eps * std::cos(two_pi * t))
                           : 1.0;
  g[0] = scale * two_pi * std::sin(two_pi * x[0]);
  return g;
}

inline Eigen::MatrixXd potential_hessian(const LagrangianSpec& s, const Eigen::VectorXd& x, double t) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(s.dim, s.dim);
  const double scale = s.kind == SystemKind::forced_pendulum_1d
                           ? s.amplitude * (1.0 + s.eps * std::cos(two_pi * t))
                           : 1.0;
  h(0, 0) = scale * two_pi * two_pi * std::cos(two_pi * x[0]);
  return h;
}

/// State (x, v) and its 2m x 2m variational matrix, flattened together.
struct FlowState {
  Eigen::VectorXd z;
  Eigen::MatrixXd phi;
};

inline FlowState flow_rhs(const LagrangianSpec& s, const FlowState& st, double t) {
  const int m = s.dim;
  FlowState d{Eigen::VectorXd(2 * m), Eigen::MatrixXd::Zero(2 * m, 2 * m)};
  const Eigen::VectorXd x = st.z.head(m);
  d.z.head(m) = st.z.tail(m);
  d.z.tail(m) = potential_gradient(s, x, t);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  jac.topRightCorner(m, m).setIdentity();
  jac.bottomLeftCorner(m, m) = potential_hessian(s, x, t);
  d.phi = jac * st.phi;
  return d;
}

}  // namespace detail

/// Time-one map of x'' = dV/dx and its derivative, classical RK4 with `steps` steps.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> poincare_map(const LagrangianSpec& s, const Eigen::VectorXd& z0,
                                                               int steps) {
  using detail::FlowState;
  if (steps < 1) throw ArgumentError("poincare_map: steps must be >= 1");
  const int m = s.dim;
  FlowState st{z0, Eigen::MatrixXd::Identity(2 * m, 2 * m)};
  const double h = 1.0 / steps;
  auto axpy = [](const FlowState& a, const FlowState& b, double c) {
    return FlowState{a.z + c * b.z, a.phi + c * b.phi};
  };
  for (int i = 0; i < steps; ++i) {
    const double t = i * h;
    FlowState k1 = detail::flow_rhs(s, st, t);
    FlowState k2 = detail::flow_rhs(s, axpy(st, k1, h / 2), t + h / 2);
    FlowState k3 = detail::flow_rhs(s, axpy(st, k2, h / 2), t + h / 2);
    FlowState k4 = detail::flow_rhs(s, axpy(st, k3, h), t + h);
    st.z += h / 6 * (k1.z + 2 * k2.z + 2 * k3.z + k4.z);
    st.phi += h / 6 * (k1.phi + 2 * k2.phi + 2 * k3.phi + k4.phi);
  }
  return {st.z, st.phi};
}

/// Refines the 1-periodic orbit near `x_guess` and returns the spectral data
/// of its monodromy matrix. Coordinates without potential (the y axis of
/// example_4_1) drift freely; only the (x, vx) block enters the root solve.
inline MonodromyReport monodromy(const LagrangianSpec& s, std::span<const double> x_guess, int ode_steps = 2048) {
  const int m = s.dim;
  if (static_cast<int>(x_guess.size()) != m) throw ArgumentError("monodromy: guess has wrong dimension");
  const ReferencePoint ref = s.reference();
  Eigen::VectorXd z(2 * m);
  for (int i = 0; i < m; ++i) {
    z[i] = x_guess[i];
    z[m + i] = ref.velocity[i];
  }
  // Newton on phi(z) - z restricted to (x0, v0).
  const std::array<int, 2> idx{0, m};
  MonodromyReport r;
  std::pair<Eigen::VectorXd, Eigen::MatrixXd> map;
  for (int it = 0;; ++it) {
    map = poincare_map(s, z, ode_steps);
    Eigen::Vector2d f(map.first[idx[0]] - z[idx[0]], map.first[idx[1]] - z[idx[1]]);
    if (f.norm() < 1e-13) break;
    if (it >= 50 || !f.allFinite()) throw NumericalError("monodromy: periodic-point root solve diverged");
    Eigen::Matrix2d j;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) j(a, b) = map.second(idx[a], idx[b]) - (a == b ? 1.0 : 0.0);
    const Eigen::Vector2d dz = j.fullPivLu().solve(-f);
    z[idx[0]] += dz[0];
    z[idx[1]] += dz[1];
    r.newton_iterations = it + 1;
    if (dz.norm() < 1e-15) {
      map = poincare_map(s, z, ode_steps);
      break;
    }
  }
  r.position = z.head(m);
  r.velocity = z.tail(m);
  r.matrix = map.second;
  r.det = r.matrix.determinant();
  Eigen::EigenSolver<Eigen::MatrixXd> es(r.matrix, false);
  r.hyperbolic = true;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const std::complex<double> l = es.eigenvalues()[i];
    r.eigenvalues.push_back(l);
    const double a = std::abs(l);
    if (std::abs(a - 1.0) <= 1e-6) r.hyperbolic = false;
    if (a < 1.0 - 1e-6) r.lambda_max = std::max(r.lambda_max, a);
  }
  if (r.lambda_max > 0.0) r.mu = -std::log(r.lambda_max);
  for (const auto& l : r.eigenvalues) {
    double best = 1e300;
    const std::complex<double> inv = 1.0 / l;
    for (const auto& k : r.eigenvalues) best = std::min(best, std::abs(inv - k) / std::max(1.0, std::abs(inv)));
    r.pairing_defect = std::max(r.pairing_defect, best);
  }
  return r;
}

}  // namespace wkam

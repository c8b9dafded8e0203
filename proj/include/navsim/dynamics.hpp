// dynamics.hpp - non-dimensional translational dynamics and propagation.
//
// State (12): position, velocity, and two first-order Gauss-Markov
// acceleration processes (residual-acceleration and SRP-uncertainty channels).
// All filter-side propagation runs in canonical units DU = 1 AU,
// TU = sqrt(DU^3 / mu_sun), which puts mu at exactly 1 and keeps the
// covariance ODE well conditioned.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <json.hpp>

#include "navsim/core.hpp"
#include "navsim/ephemeris.hpp"
#include "navsim/rng.hpp"

namespace navsim {

using State12 = Eigen::Matrix<double, 12, 1>;
using Matrix12d = Eigen::Matrix<double, 12, 12>;

// Canonical unit system anchored at a dimensional epoch t0 (s past J2000):
// t_dim = t0 + t_nd * tu.
struct ScaleSet {
  double du_km = constants::kAuKm;
  double tu_s = 0.0;
  double t0_s = 0.0;

  static ScaleSet standard(double t0_s, double mu = constants::kMuSun,
                           double du_km = constants::kAuKm) {
    ScaleSet s;
    s.du_km = du_km;
    s.tu_s = std::sqrt(du_km * du_km * du_km / mu);
    s.t0_s = t0_s;
    return s;
  }

  double vu_kms() const { return du_km / tu_s; }
  double au_kms2() const { return du_km / (tu_s * tu_s); }  // acceleration unit

  double time_to_dim(double t_nd) const { return t0_s + t_nd * tu_s; }
  double time_to_nd(double t_s) const { return (t_s - t0_s) / tu_s; }

  State12 state_to_nd(const State12& x_dim) const {
    State12 x;
    x.segment<3>(0) = x_dim.segment<3>(0) / du_km;
    x.segment<3>(3) = x_dim.segment<3>(3) / vu_kms();
    x.segment<6>(6) = x_dim.segment<6>(6) / au_kms2();
    return x;
  }

  State12 state_to_dim(const State12& x_nd) const {
    State12 x;
    x.segment<3>(0) = x_nd.segment<3>(0) * du_km;
    x.segment<3>(3) = x_nd.segment<3>(3) * vu_kms();
    x.segment<6>(6) = x_nd.segment<6>(6) * au_kms2();
    return x;
  }

  // Diagonal similarity scaling for the covariance: P_nd = D^-1 P D^-1.
  State12 unit_diagonal() const {
    State12 d;
    d.segment<3>(0).setConstant(du_km);
    d.segment<3>(3).setConstant(vu_kms());
    d.segment<6>(6).setConstant(au_kms2());
    return d;
  }

  Matrix12d cov_to_nd(const Matrix12d& p_dim) const {
    const State12 d = unit_diagonal();
    return d.cwiseInverse().asDiagonal() * p_dim * d.cwiseInverse().asDiagonal();
  }

  Matrix12d cov_to_dim(const Matrix12d& p_nd) const {
    const State12 d = unit_diagonal();
    return d.asDiagonal() * p_nd * d.asDiagonal();
  }
};

struct DynamicsParams {
  double mu = constants::kMuSun;        // km^3/s^2
  bool include_srp = true;
  double cr = 1.3;                      // coefficient of reflection
  double p0_w_m2 = 1361.0;              // solar flux at r0
  double r0_km = constants::kAuKm;      // flux reference distance
  double area_m2 = 10.0;                // exposed spacecraft area
  double mass_kg = 1000.0;
  std::vector<PlanetId> third_bodies;   // perturbing bodies
  const EphemerisSet* ephemerides = nullptr;
  double xi_hz = 1.0 / 86400.0;         // Gauss-Markov inverse correlation time
  double sigma_r_kms2 = 1e-10;          // residual-acceleration PSD root
  double sigma_srp_kms2 = 1e-10;        // SRP-uncertainty PSD root

  // a_srp = CR (P0 R0^2 / c)(A/m) r / |r|^3; the returned value is the
  // km^3/s^2 coefficient multiplying r/|r|^3 with r in km.
  double srp_coefficient() const {
    const double p_over_c =
        p0_w_m2 / (constants::kSpeedOfLightKmS * 1e3);  // N/m^2
    return include_srp
               ? cr * p_over_c * (area_m2 / mass_kg) * 1e-3 * r0_km * r0_km
               : 0.0;
  }
};

inline DynamicsParams dynamics_from_json(const nlohmann::json& j,
                                         const EphemerisSet* eph,
                                         const char* third_body_key =
                                             "third_bodies") {
  DynamicsParams p;
  p.ephemerides = eph;
  p.mu = j.value("mu_sun", constants::kMuSun);
  p.include_srp = j.value("include_srp", true);
  p.cr = j.value("CR", 1.3);
  p.p0_w_m2 = j.value("P0", 1361.0);
  p.r0_km = j.value("R0", constants::kAuKm);
  p.area_m2 = j.at("area_m2").get<double>();
  p.mass_kg = j.at("mass_kg").get<double>();
  p.xi_hz = j.at("xi_inv_s").get<double>();
  p.sigma_r_kms2 = j.at("sigma_R").get<double>();
  p.sigma_srp_kms2 = j.at("sigma_SRP").get<double>();
  for (const auto& name : j.at(third_body_key)) {
    const auto id = planet_from_name(name.get<std::string>());
    if (!id) throw ConfigError("unknown third body: " + name.get<std::string>());
    p.third_bodies.push_back(*id);
  }
  return p;
}

// Non-dimensional state derivative at non-dimensional time t_nd.
inline State12 state_derivative(const State12& x, double t_nd,
                                const DynamicsParams& params,
                                const ScaleSet& scales) {
  const Vector3d r = x.segment<3>(0);
  const Vector3d v = x.segment<3>(3);
  const Vector3d eta_r = x.segment<3>(6);
  const Vector3d eta_srp = x.segment<3>(9);
  const double rn = r.norm();

  Vector3d acc = -r / (rn * rn * rn);  // mu = 1 in canonical units

  const double acc_unit = scales.au_kms2();
  if (params.include_srp) {
    // Dimensional SRP, rescaled; direction is anti-sunward.
    const Vector3d r_km = r * scales.du_km;
    const double rkn = r_km.norm();
    acc += params.srp_coefficient() * r_km / (rkn * rkn * rkn) / acc_unit;
  }
  if (!params.third_bodies.empty()) {
    const double t_s = scales.time_to_dim(t_nd);
    const Vector3d r_km = r * scales.du_km;
    Vector3d a3 = Vector3d::Zero();
    for (PlanetId id : params.third_bodies) {
      const Vector3d r_j = params.ephemerides->planet_state(id, t_s).first;
      const Vector3d d = r_j - r_km;
      const double dn = d.norm(), rjn = r_j.norm();
      a3 += planet_mu(id) * (d / (dn * dn * dn) - r_j / (rjn * rjn * rjn));
    }
    acc += a3 / acc_unit;
  }
  acc += eta_r + eta_srp;

  const double xi_nd = params.xi_hz * scales.tu_s;
  State12 dx;
  dx.segment<3>(0) = v;
  dx.segment<3>(3) = acc;
  dx.segment<3>(6) = -xi_nd * eta_r;
  dx.segment<3>(9) = -xi_nd * eta_srp;
  return dx;
}

// Analytic Jacobian of state_derivative with respect to the state.
inline Matrix12d dynamics_jacobian(const State12& x, double t_nd,
                                   const DynamicsParams& params,
                                   const ScaleSet& scales) {
  const Vector3d r = x.segment<3>(0);
  const double rn = r.norm();

  // d/dr of c r/|r|^3 = c (I/|r|^3 - 3 r r^T / |r|^5).
  auto inv_cube_grad = [](const Vector3d& p) {
    const double n = p.norm();
    return Matrix3d(Matrix3d::Identity() / (n * n * n) -
                    3.0 * p * p.transpose() / (n * n * n * n * n));
  };

  Matrix3d dadr = -inv_cube_grad(r);
  const double acc_unit = scales.au_kms2();
  if (params.include_srp) {
    // Chain through r_km = r * du: grad wrt r_nd = grad_km * du / acc_unit.
    const Vector3d r_km = r * scales.du_km;
    dadr += params.srp_coefficient() * inv_cube_grad(r_km) * scales.du_km /
            acc_unit;
  }
  if (!params.third_bodies.empty()) {
    const double t_s = scales.time_to_dim(t_nd);
    const Vector3d r_km = r * scales.du_km;
    Matrix3d d3 = Matrix3d::Zero();
    for (PlanetId id : params.third_bodies) {
      const Vector3d d = params.ephemerides->planet_state(id, t_s).first - r_km;
      d3 += planet_mu(id) * inv_cube_grad(d);  // d(d/|d|^3)/dr = -grad * (-1)
    }
    dadr += d3 * scales.du_km / acc_unit;
  }

  const double xi_nd = params.xi_hz * scales.tu_s;
  Matrix12d f = Matrix12d::Zero();
  f.block<3, 3>(0, 3).setIdentity();
  f.block<3, 3>(3, 0) = dadr;
  f.block<3, 3>(3, 6).setIdentity();
  f.block<3, 3>(3, 9).setIdentity();
  f.block<3, 3>(6, 6) = -xi_nd * Matrix3d::Identity();
  f.block<3, 3>(9, 9) = -xi_nd * Matrix3d::Identity();
  return f;
}

// Continuous process-noise PSD in canonical units:
// Q = diag(0, Q_a, Q_R, Q_SRP), Q_a = (Q_R + Q_SRP) / (2 xi),
// Q_R = sigma_R^2 I, Q_SRP = sigma_SRP^2 I.
inline Matrix12d process_noise(const DynamicsParams& params,
                               const ScaleSet& scales) {
  // Gauss-Markov driving PSD 2 xi sigma^2 (sigma is the stationary standard
  // deviation of the channel), (km/s^2)^2 * s -> nd via tu / acc_unit^2.
  const double gm_scale =
      scales.tu_s / (scales.au_kms2() * scales.au_kms2());
  const double q_r = 2.0 * params.xi_hz * params.sigma_r_kms2 *
                     params.sigma_r_kms2 * gm_scale;
  const double q_srp = 2.0 * params.xi_hz * params.sigma_srp_kms2 *
                       params.sigma_srp_kms2 * gm_scale;
  // Velocity PSD Q_a = (sigma_R^2 + sigma_SRP^2) / (2 xi) is km^2/s^3 and
  // carries the velocity scale tu / vu^2, not the acceleration one.
  const double vel_scale =
      scales.tu_s / (scales.vu_kms() * scales.vu_kms());
  const double q_a = (params.sigma_r_kms2 * params.sigma_r_kms2 +
                      params.sigma_srp_kms2 * params.sigma_srp_kms2) /
                     (2.0 * params.xi_hz) * vel_scale;
  Matrix12d q = Matrix12d::Zero();
  q.block<3, 3>(3, 3) = q_a * Matrix3d::Identity();
  q.block<3, 3>(6, 6) = q_r * Matrix3d::Identity();
  q.block<3, 3>(9, 9) = q_srp * Matrix3d::Identity();
  return q;
}

namespace detail {
// Dormand-Prince 5(4) embedded pair, adaptive step.
template <typename Deriv>
void rk45(VectorXd& y, double t0, double t1, const Deriv& f,
          double rtol = 1e-11, double atol = 1e-13) {
  static const double a21 = 1.0 / 5.0;
  static const double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static const double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static const double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                      a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
  static const double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                      a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                      a65 = -5103.0 / 18656.0;
  static const double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0,
                      b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                      b6 = 11.0 / 84.0;
  static const double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0,
                      e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                      e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
  static const double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0,
                      c5 = 8.0 / 9.0;

  const double dir = t1 >= t0 ? 1.0 : -1.0;
  double t = t0;
  double h = dir * std::max(1e-8, std::abs(t1 - t0) / 100.0);
  VectorXd k1 = f(y, t);
  int guard = 0;
  while (dir * (t1 - t) > 0.0 && ++guard < 200000) {
    if (dir * (t + h - t1) > 0.0) h = t1 - t;
    const VectorXd k2 = f(y + h * a21 * k1, t + c2 * h);
    const VectorXd k3 = f(y + h * (a31 * k1 + a32 * k2), t + c3 * h);
    const VectorXd k4 = f(y + h * (a41 * k1 + a42 * k2 + a43 * k3), t + c4 * h);
    const VectorXd k5 =
        f(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), t + c5 * h);
    const VectorXd k6 = f(
        y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), t + h);
    const VectorXd y5 =
        y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const VectorXd k7 = f(y5, t + h);
    const VectorXd err_vec =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double scale =
          atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
      err = std::max(err, std::abs(err_vec[i]) / scale);
    }
    if (err <= 1.0) {
      t += h;
      y = y5;
      k1 = k7;  // FSAL
    }
    const double factor =
        err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    h *= std::clamp(factor, 0.2, 5.0);
  }
}
}  // namespace detail

// Propagates the non-dimensional mean state and covariance from t0_nd to
// t1_nd: x' = f(x), P' = F P + P F^T + Q. P is re-symmetrized on exit.
inline void propagate_with_covariance(State12& x, Matrix12d& p, double t0_nd,
                                      double t1_nd,
                                      const DynamicsParams& params,
                                      const ScaleSet& scales,
                                      double rtol = 1e-11) {
  const Matrix12d q = process_noise(params, scales);
  VectorXd y(12 + 144);
  y.head<12>() = x;
  Eigen::Map<Matrix12d>(y.data() + 12) = p;

  const auto deriv = [&](const VectorXd& yy, double t) {
    const State12 xs = yy.head<12>();
    const Eigen::Map<const Matrix12d> ps(yy.data() + 12);
    const Matrix12d f = dynamics_jacobian(xs, t, params, scales);
    VectorXd dy(12 + 144);
    dy.head<12>() = state_derivative(xs, t, params, scales);
    Eigen::Map<Matrix12d>(dy.data() + 12) =
        f * ps + ps * f.transpose() + q;
    return dy;
  };
  detail::rk45(y, t0_nd, t1_nd, deriv, rtol);

  x = y.head<12>();
  p = Eigen::Map<Matrix12d>(y.data() + 12);
  p = 0.5 * (p + p.transpose()).eval();
}

// Mean-state-only propagation (used by oracles and the truth model when the
// stochastic channels are off).
inline void propagate_state(State12& x, double t0_nd, double t1_nd,
                            const DynamicsParams& params,
                            const ScaleSet& scales, double rtol = 1e-12) {
  VectorXd y = x;
  const auto deriv = [&](const VectorXd& yy, double t) {
    return VectorXd(state_derivative(yy.head<12>(), t, params, scales));
  };
  detail::rk45(y, t0_nd, t1_nd, deriv, rtol);
  x = y.head<12>();
}

// Truth propagation in dimensional units between sample epochs. When rng is
// non-null the Gauss-Markov acceleration channels are simulated as stochastic
// processes (exact discrete transition per substep, held constant within it);
// otherwise they decay deterministically.
inline void propagate_truth(Vector3d& r_km, Vector3d& v_kms, State12& gm_state,
                            double t0_s, double t1_s,
                            const DynamicsParams& params,
                            const ScaleSet& scales, Rng* rng,
                            double substep_s = 600.0) {
  double t = t0_s;
  const double xi = params.xi_hz;
  while (t < t1_s - 1e-9) {
    const double h = std::min(substep_s, t1_s - t);
    State12 x = gm_state;
    x.segment<3>(0) = r_km;
    x.segment<3>(3) = v_kms;
    State12 x_nd = scales.state_to_nd(x);
    propagate_state(x_nd, scales.time_to_nd(t), scales.time_to_nd(t + h),
                    params, scales);
    x = scales.state_to_dim(x_nd);
    r_km = x.segment<3>(0);
    v_kms = x.segment<3>(3);
    gm_state.segment<6>(6) = x.segment<6>(6);
    if (rng) {
      // Exact stationary Gauss-Markov discrete noise over the substep.
      // sigma_R / sigma_SRP are the stationary standard deviations of the
      // acceleration channels, so the driving PSD is 2 xi sigma^2 and the
      // discrete-step variance is sigma^2 (1 - phi^2).
      const double phi = std::exp(-xi * h);
      const double var_fac = 1.0 - phi * phi;
      const double sd_r = params.sigma_r_kms2 * std::sqrt(var_fac);
      const double sd_srp = params.sigma_srp_kms2 * std::sqrt(var_fac);
      gm_state.segment<3>(6) += rng->normal3(sd_r);
      gm_state.segment<3>(9) += rng->normal3(sd_srp);
    }
    t += h;
  }
}

}  // namespace navsim

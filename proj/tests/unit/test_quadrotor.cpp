#include <doctest.h>

#include <cmath>
#include <random>

#include "formation/errors.hpp"
#include "formation/quadrotor.hpp"

using namespace formation;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Translational accelerations of the rigid-body model, written out separately.
Eigen::Vector3d translational_accel(double phi, double theta, double psi, double uz_total,
                                    const QuadParams& p) {
  const double a = uz_total / p.mass;
  return {(std::cos(phi) * std::sin(theta) * std::cos(psi) + std::sin(phi) * std::sin(psi)) * a,
          (std::cos(phi) * std::sin(theta) * std::sin(psi) - std::sin(phi) * std::cos(psi)) * a,
          -p.gravity + std::cos(phi) * std::cos(theta) * a};
}

Vec pack(const QuadState& s) {
  const auto a = s.to_array();
  return Eigen::Map<const Vec>(a.data(), QuadState::kSize);
}

double sat(double x) { return std::max(-1.0, std::min(1.0, x)); }

}  // namespace

TEST_CASE("parameters and derived coefficients") {
  const QuadParams p;
  CHECK(p.mass == 0.486);
  CHECK(p.gravity == 9.81);
  CHECK(p.ixx == 3.827e-3);
  CHECK(p.iyy == 3.827e-3);
  CHECK(p.izz == 7.6566e-3);
  CHECK(p.arm == 0.1);
  CHECK(p.a1() == doctest::Approx((3.827e-3 - 7.6566e-3) / 3.827e-3));
  CHECK(p.a3() == 0.0);
  CHECK(p.b1() == doctest::Approx(0.1 / 3.827e-3));
  CHECK(p.b3() == doctest::Approx(1.0 / 7.6566e-3));
  QuadParams bad;
  bad.mass = 0.0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("hover, free fall and yaw torque") {
  const QuadParams p;
  QuadState s;
  s.position = {1, 2, 3};
  const QuadState hover = quad_deriv(s, {0, 0, 0, p.mass * p.gravity}, p);
  CHECK(hover.velocity.norm() < 1e-15);
  CHECK(hover.rates.norm() == 0.0);

  const QuadState fall = quad_deriv(s, {0, 0, 0, 0}, p);
  CHECK(fall.velocity.z() == -9.81);

  const QuadState yaw = quad_deriv(s, {0, 0, 0.02, p.mass * p.gravity}, p);
  CHECK(yaw.rates.z() == doctest::Approx(0.02 / 7.6566e-3).epsilon(1e-14));
  CHECK(yaw.rates.x() == 0.0);
  CHECK(yaw.rates.y() == 0.0);
}

TEST_CASE("rigid-body model against the written-out equations") {
  const QuadParams p;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    QuadState s;
    s.velocity = {u(rng), u(rng), u(rng)};
    s.attitude = {u(rng), u(rng), 3 * u(rng)};
    s.rates = {u(rng), u(rng), u(rng)};
    const QuadInputs in{0.1 * u(rng), 0.1 * u(rng), 0.1 * u(rng), 5 + u(rng)};
    const QuadState d = quad_deriv(s, in, p);
    CHECK(d.position == s.velocity);
    CHECK((d.velocity - translational_accel(s.attitude.x(), s.attitude.y(), s.attitude.z(), in.u_z, p))
              .norm() < 1e-14);
    CHECK(d.attitude == s.rates);
    CHECK(d.rates.x() == doctest::Approx(p.a1() * s.rates.y() * s.rates.z() + p.b1() * in.u_phi));
    CHECK(d.rates.y() == doctest::Approx(p.a2() * s.rates.x() * s.rates.z() + p.b2() * in.u_theta));
    CHECK(d.rates.z() == doctest::Approx(p.a3() * s.rates.x() * s.rates.y() + p.b3() * in.u_psi));
  }
}

TEST_CASE("state array round trip") {
  QuadState s;
  s.position = {1, 2, 3};
  s.velocity = {4, 5, 6};
  s.attitude = {7, 8, 9};
  s.rates = {10, 11, 12};
  const auto a = s.to_array();
  CHECK(a[0] == 1);
  CHECK(a[11] == 12);
  const QuadState b = QuadState::from_array(a.data());
  CHECK(b.position == s.position);
  CHECK(b.rates == s.rates);
}

TEST_CASE("desired attitude") {
  const double g = 9.81;
  DesiredAttitude d = desired_attitude(0, 0, 1.5, 0.0, g);
  CHECK(d.phi == 0.0);
  CHECK(d.theta == 0.0);
  d = desired_attitude(1.5 + g, 0, 1.5, 0.0, g);
  CHECK(d.theta == doctest::Approx(kPi / 4).epsilon(1e-15));
  CHECK(std::abs(d.phi) < 1e-15);
  d = desired_attitude(0, 1.5 + g, 1.5, 0.0, g);
  CHECK(d.theta == 0.0);
  CHECK(d.phi == doctest::Approx(-kPi / 4).epsilon(1e-15));
  CHECK_THROWS_AS(desired_attitude(1.0, 0.0, -g, 0.0, g), NumericError);
}

TEST_CASE("total thrust") {
  const QuadParams p;
  CHECK(std::abs(total_thrust(0, 0, 0, p.mass, p.gravity) - 4.76766) < 1e-10);
  CHECK(total_thrust(0, 0, -p.gravity, p.mass, p.gravity) == 0.0);
  const Eigen::Vector3d u(0.7, -1.3, 2.1);
  for (double a : {0.25, 2.0, 3.5}) {
    const Eigen::Vector3d scaled = a * (u + Eigen::Vector3d(0, 0, p.gravity)) - Eigen::Vector3d(0, 0, p.gravity);
    CHECK(total_thrust(scaled.x(), scaled.y(), scaled.z(), p.mass, p.gravity) ==
          doctest::Approx(a * total_thrust(u.x(), u.y(), u.z(), p.mass, p.gravity)).epsilon(1e-14));
  }
}

TEST_CASE("attitude and thrust invert the translational model") {
  const QuadParams p;
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      for (int k = 0; k < 10; ++k) {
        const double ux = -5.0 + 10.0 * i / 9.0;
        const double uy = -5.0 + 10.0 * j / 9.0;
        const double uz = -5.0 + 10.0 * k / 9.0;
        const DesiredAttitude d = desired_attitude(ux, uy, uz, 0.0, p.gravity);
        const double thrust = total_thrust(ux, uy, uz, p.mass, p.gravity);
        const Eigen::Vector3d acc = translational_accel(d.phi, d.theta, 0.0, thrust, p);
        worst = std::max(worst, (acc - Eigen::Vector3d(ux, uy, uz)).cwiseAbs().maxCoeff());
      }
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("sliding law zero case") {
  const QuadParams p;
  const AttitudeGains g;
  const Eigen::Vector3d m = sliding_attitude_control(QuadState{}, AttitudeReference{}, g, p);
  CHECK(m.isZero());
}

TEST_CASE("sliding law makes the surface obey its reaching law") {
  const QuadParams p;
  AttitudeGains g;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (bool use_sign : {false, true}) {
    g.use_sign = use_sign;
    for (int trial = 0; trial < 100; ++trial) {
      QuadState s;
      s.attitude = {u(rng), u(rng), u(rng)};
      s.rates = {u(rng), u(rng), u(rng)};
      AttitudeReference ref;
      ref.angle = {u(rng), u(rng), u(rng)};
      ref.rate = {u(rng), u(rng), u(rng)};
      ref.accel = {u(rng), u(rng), u(rng)};
      const Eigen::Vector3d m = sliding_attitude_control(s, ref, g, p);
      const QuadState d = quad_deriv(s, {m.x(), m.y(), m.z(), 4.0}, p);
      const Eigen::Vector3d surf = sliding_surfaces(s, ref, g);
      for (int a = 0; a < 3; ++a) {
        const double e_dot = s.rates[a] - ref.rate[a];
        const double e = s.attitude[a] - ref.angle[a];
        CHECK(surf[a] == doctest::Approx(e_dot + g.lambda[a] * e).epsilon(1e-14));
        const double switching = use_sign ? (surf[a] > 0 ? 1.0 : (surf[a] < 0 ? -1.0 : 0.0))
                                          : sat(surf[a] / g.boundary_layer);
        // s_dot = e_ddot + lambda e_dot = -k switching
        const double s_dot = (d.rates[a] - ref.accel[a]) + g.lambda[a] * e_dot;
        CHECK(s_dot == doctest::Approx(-g.k[a] * switching).epsilon(1e-9));
      }
    }
  }
}

namespace {

struct ReachResult {
  double reach_time = -1.0;  // first time all |s| < eps
  bool decreasing_outside = true;
};

// Attitude subsystem alone, constant reference, from rest.
ReachResult reach(const Eigen::Vector3d& target, double t_end) {
  const QuadParams p;
  const AttitudeGains g;
  AttitudeReference ref;
  ref.angle = target;
  auto f = [&](double, const Vec& x) {
    const QuadState s = QuadState::from_array(x.data());
    const Eigen::Vector3d m = sliding_attitude_control(s, ref, g, p);
    return pack(quad_deriv(s, {m.x(), m.y(), m.z(), p.mass * p.gravity}, p));
  };
  Vec x = pack(QuadState{});
  const double dt = 1e-3;
  ReachResult r;
  Eigen::Vector3d prev = sliding_surfaces(QuadState::from_array(x.data()), ref, g);
  for (int k = 1; k * dt <= t_end + 1e-12; ++k) {
    x = rk4_step(f, x, (k - 1) * dt, dt);
    const Eigen::Vector3d s = sliding_surfaces(QuadState::from_array(x.data()), ref, g);
    for (int a = 0; a < 3; ++a) {
      if (std::abs(prev[a]) > g.boundary_layer && !(s[a] * s[a] < prev[a] * prev[a])) {
        r.decreasing_outside = false;
      }
    }
    if (r.reach_time < 0 && s.cwiseAbs().maxCoeff() < g.boundary_layer) r.reach_time = k * dt;
    prev = s;
  }
  return r;
}

}  // namespace

TEST_CASE("attitude loop reaches the boundary layer") {
  // |s(0)| = lambda * 0.03 = 3, reached after about 3/k = 0.6 s
  const ReachResult small = reach({0.03, -0.03, 0.02}, 1.0);
  CHECK(small.reach_time > 0.0);
  CHECK(small.reach_time <= 1.0);
  CHECK(small.decreasing_outside);
  // larger steps take (|s(0)| - eps) / k
  const ReachResult big = reach({0.2, 0.0, 0.0}, 5.0);
  CHECK(big.decreasing_outside);
  CHECK(big.reach_time == doctest::Approx((100 * 0.2 - 0.01) / 5.0).epsilon(1e-2));
}

TEST_CASE("free flight conserves energy") {
  const QuadParams p;
  QuadState s;
  s.position = {0, 0, 10};
  s.velocity = {1, -2, 3};
  auto energy = [&](const Vec& x) {
    return 0.5 * p.mass * x.segment<3>(3).squaredNorm() + p.mass * p.gravity * x[2];
  };
  auto f = [&](double, const Vec& x) { return pack(quad_deriv(QuadState::from_array(x.data()), {}, p)); };
  Vec x = pack(s);
  const double e0 = energy(x);
  for (int k = 0; k < 1000; ++k) x = rk4_step(f, x, k * 1e-3, 1e-3);
  CHECK(std::abs(energy(x) - e0) / std::abs(e0) < 1e-8);
}

TEST_CASE("an ideal attitude loop reduces the quad to a double integrator") {
  const QuadParams p;
  const Eigen::Vector3d target(2, -1, 5);
  auto command = [&](const Eigen::Vector3d& pos, const Eigen::Vector3d& vel) -> Eigen::Vector3d {
    return -1.5 * (pos - target) - 2.0 * vel;
  };
  // quad: attitude and thrust set from the command at every evaluation
  auto quad = [&](double, const Vec& x) {
    const Eigen::Vector3d u = command(x.head<3>(), x.segment<3>(3));
    const DesiredAttitude d = desired_attitude(u.x(), u.y(), u.z(), 0.0, p.gravity);
    QuadState s = QuadState::from_array(x.data());
    s.attitude = {d.phi, d.theta, 0.0};
    s.rates.setZero();
    const QuadState ds = quad_deriv(s, {0, 0, 0, total_thrust(u.x(), u.y(), u.z(), p.mass, p.gravity)}, p);
    Vec out = Vec::Zero(QuadState::kSize);
    out.head<3>() = ds.position;
    out.segment<3>(3) = ds.velocity;
    return out;
  };
  auto plain = [&](double, const Vec& x) {
    Vec out(6);
    out << x.segment<3>(3), command(x.head<3>(), x.segment<3>(3));
    return out;
  };
  Vec xq = Vec::Zero(QuadState::kSize);
  Vec xd = Vec::Zero(6);
  for (int k = 0; k < 3000; ++k) {
    xq = rk4_step(quad, xq, k * 1e-3, 1e-3);
    xd = rk4_step(plain, xd, k * 1e-3, 1e-3);
  }
  CHECK((xq.head<6>() - xd).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("reference filter") {
  const ReferenceFilter filter;
  const Eigen::Vector3d raw(0.1, -0.2, 0.0);
  FilterState f;
  const AttitudeReference r = filter_output(f, raw, filter);
  CHECK(r.accel.isApprox(2500.0 * raw));
  const FilterState d = filter_deriv(f, raw, filter);
  CHECK(d.angle == f.rate);
  CHECK(d.rate == r.accel);
  // settled filter has no acceleration
  f.angle = raw;
  CHECK(filter_output(f, raw, filter).accel.isZero());
}

TEST_CASE("outer loop at the goal commands hover") {
  QuadLoopConfig cfg;
  const int n = 3;
  EstimatorState est{Mat::Random(n, 3), Mat::Random(n, 3), Mat::Zero(n, 3)};
  const GoalMap goals(Mat::Random(n, 3));
  std::vector<QuadState> quads(n);
  for (int i = 0; i < n; ++i) {
    quads[i].position = (est.p_hat.row(i) + goals.goals().row(i)).transpose();
    quads[i].velocity = est.v_hat.row(i).transpose();
  }
  const std::vector<FilterState> filters(n);
  const auto cmds = quad_outer_loop(quads, filters, est, goals, ControlGains::uniform(n, 0.01, 5), cfg);
  REQUIRE(cmds.size() == 3);
  for (const QuadCommand& c : cmds) {
    CHECK(c.inputs.u_z == doctest::Approx(cfg.params.mass * cfg.params.gravity).epsilon(1e-12));
    CHECK(std::abs(c.inputs.u_phi) < 1e-10);
    CHECK(std::abs(c.inputs.u_theta) < 1e-10);
    CHECK(std::abs(c.inputs.u_psi) < 1e-10);
    CHECK(c.raw_attitude.norm() < 1e-12);
  }
}

TEST_CASE("outer loop feeds the formation command through the inversion") {
  QuadLoopConfig cfg;
  const int n = 2;
  EstimatorState est{Mat::Random(n, 3), Mat::Random(n, 3), Mat::Random(n, 3)};
  const GoalMap goals(Mat::Random(n, 3));
  std::vector<QuadState> quads(n);
  quads[0].position = {1, 2, 3};
  quads[1].velocity = {0.5, 0, -0.5};
  const ControlGains gains = ControlGains::uniform(n, 0.01, 5);
  const auto cmds = quad_outer_loop(quads, std::vector<FilterState>(n), est, goals, gains, cfg);
  const Mat u = formation_controls(translational_fleet(quads), est, goals, gains);
  for (int i = 0; i < n; ++i) {
    CHECK((cmds[i].virtual_input - u.row(i).transpose()).norm() < 1e-14);
    const DesiredAttitude d = desired_attitude(u(i, 0), u(i, 1), u(i, 2), 0.0, cfg.params.gravity);
    CHECK(cmds[i].raw_attitude.x() == d.phi);
    CHECK(cmds[i].raw_attitude.y() == d.theta);
    CHECK(cmds[i].raw_attitude.z() == 0.0);
  }
}

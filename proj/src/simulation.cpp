#include "formation/simulation.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "formation/errors.hpp"

namespace formation {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Mat read_block(const Vec& x, Eigen::Index offset, int n, int d) {
  return Eigen::Map<const RowMat>(x.data() + offset, n, d);
}

void write_block(Vec& x, Eigen::Index offset, const Mat& m) {
  Eigen::Map<RowMat>(x.data() + offset, m.rows(), m.cols()) = m;
}

std::string at_time(double t) {
  std::ostringstream os;
  os << "t=" << t << "s: ";
  return os.str();
}

// Packs plant, reference filters (quadrotor only) and estimator into one
// vector so the whole closed loop advances on a single RK4 grid.
class ClosedLoop {
 public:
  explicit ClosedLoop(const ScenarioConfig& cfg)
      : cfg_(cfg), n_(cfg.size()), d_(cfg.dim), quad_(cfg.plant == PlantKind::Quadrotor) {
    plant_size_ = quad_ ? n_ * (QuadState::kSize + 6) : 2 * n_ * d_;
    est_offset_ = plant_size_;
  }

  Eigen::Index size() const { return plant_size_ + 3 * n_ * d_; }

  Vec initial_state() const {
    Vec x = Vec::Zero(size());
    if (quad_) {
      for (int i = 0; i < n_; ++i) {
        QuadState q;
        q.position = cfg_.initial_positions.row(i).transpose();
        q.velocity = cfg_.initial_velocities.row(i).transpose();
        const auto arr = q.to_array();
        for (int k = 0; k < QuadState::kSize; ++k) x[quad_offset(i) + k] = arr[k];
      }
    } else {
      write_block(x, 0, cfg_.initial_positions);
      write_block(x, n_ * d_, cfg_.initial_velocities);
    }
    write_estimator(x, initial_estimator(cfg_));
    return x;
  }

  FleetState fleet(const Vec& x) const {
    if (quad_) return translational_fleet(quads(x));
    return {read_block(x, 0, n_, d_), read_block(x, n_ * d_, n_, d_)};
  }

  EstimatorState estimator(const Vec& x) const {
    const Eigen::Index block = n_ * d_;
    return {read_block(x, est_offset_, n_, d_), read_block(x, est_offset_ + block, n_, d_),
            read_block(x, est_offset_ + 2 * block, n_, d_)};
  }

  Mat attitude(const Vec& x) const {
    if (!quad_) return {};
    Mat att(n_, 3);
    for (int i = 0; i < n_; ++i) att.row(i) = x.segment<3>(quad_offset(i) + 6).transpose();
    return att;
  }

  Vec derivative(double t, const Vec& x, const ControlGraph& ctrl, const GoalMap& goals) const {
    const LeaderSignal leader = leader_signal(cfg_.leader, t);
    const EstimatorState est = estimator(x);
    Vec dx(size());
    if (quad_) {
      const std::vector<QuadState> qs = quads(x);
      const std::vector<FilterState> fs = filters(x);
      const std::vector<QuadCommand> cmds =
          quad_outer_loop(qs, fs, est, goals, cfg_.control_gains, cfg_.quad);
      for (int i = 0; i < n_; ++i) {
        const auto dq = quad_deriv(qs[i], cmds[i].inputs, cfg_.quad.params).to_array();
        for (int k = 0; k < QuadState::kSize; ++k) dx[quad_offset(i) + k] = dq[k];
        const FilterState df = filter_deriv(fs[i], cmds[i].raw_attitude, cfg_.quad.filter);
        dx.segment<3>(filter_offset(i)) = df.angle;
        dx.segment<3>(filter_offset(i) + 3) = df.rate;
      }
    } else {
      const FleetState f = fleet(x);
      const Mat u = formation_controls(f, est, goals, cfg_.control_gains);
      write_block(dx, 0, f.v);
      write_block(dx, n_ * d_, u);
    }
    write_estimator(dx, estimator_deriv(est, ctrl, leader, cfg_.estimator_gains));
    return dx;
  }

 private:
  Eigen::Index quad_offset(int i) const { return static_cast<Eigen::Index>(i) * QuadState::kSize; }
  Eigen::Index filter_offset(int i) const {
    return static_cast<Eigen::Index>(n_) * QuadState::kSize + static_cast<Eigen::Index>(i) * 6;
  }

  std::vector<QuadState> quads(const Vec& x) const {
    std::vector<QuadState> out;
    out.reserve(n_);
    for (int i = 0; i < n_; ++i) out.push_back(QuadState::from_array(x.data() + quad_offset(i)));
    return out;
  }

  std::vector<FilterState> filters(const Vec& x) const {
    std::vector<FilterState> out(n_);
    for (int i = 0; i < n_; ++i) {
      out[i].angle = x.segment<3>(filter_offset(i));
      out[i].rate = x.segment<3>(filter_offset(i) + 3);
    }
    return out;
  }

  void write_estimator(Vec& x, const EstimatorState& est) const {
    const Eigen::Index block = n_ * d_;
    write_block(x, est_offset_, est.p_hat);
    write_block(x, est_offset_ + block, est.v_hat);
    write_block(x, est_offset_ + 2 * block, est.u_hat);
  }

  const ScenarioConfig& cfg_;
  int n_;
  int d_;
  bool quad_;
  Eigen::Index plant_size_ = 0;
  Eigen::Index est_offset_ = 0;
};

LogRecord make_record(double t, const ClosedLoop& loop, const Vec& x, const ScenarioConfig& cfg,
                      const GoalMap& goals) {
  LogRecord r;
  r.t = t;
  r.fleet = loop.fleet(x);
  r.est = loop.estimator(x);
  r.surfaces = error_surfaces(r.fleet, r.est, goals, cfg.control_gains);
  r.goals = goals.goals();
  const LeaderSignal leader = leader_signal(cfg.leader, t);
  r.delta = global_formation_error(r.fleet, leader, goals);
  r.p_tilde = estimation_errors(r.est, leader).p_tilde;
  r.V = lyapunov_V(r.surfaces);
  r.attitude = loop.attitude(x);
  return r;
}

}  // namespace

std::vector<EventRecord> RunLog::accepted_events() const {
  std::vector<EventRecord> out;
  for (const EventRecord& e : events) {
    if (e.event.accepted) out.push_back(e);
  }
  return out;
}

EstimatorState initial_estimator(const ScenarioConfig& cfg) {
  const int n = cfg.size();
  const int d = cfg.dim;
  EstimatorState est{Mat::Zero(n, d), Mat::Zero(n, d), Mat::Zero(n, d)};
  switch (cfg.estimator_init) {
    case EstimatorInit::OwnPosition:
      est.p_hat = cfg.initial_positions;
      break;
    case EstimatorInit::Zero:
      break;
    case EstimatorInit::LeaderInitial: {
      const LeaderSignal s = leader_signal(cfg.leader, 0.0);
      est.p_hat.rowwise() = s.p.transpose();
      est.v_hat.rowwise() = s.v.transpose();
      est.u_hat.rowwise() = s.u.transpose();
      break;
    }
  }
  return est;
}

RunLog run_scenario(const ScenarioConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const int n = cfg.size();
  const ClosedLoop loop(cfg);

  const bool assignment_on = options.assignment.value_or(cfg.assignment.has_value()) &&
                             cfg.assignment.has_value() && n >= 2;
  const int log_every = options.log_every > 0 ? options.log_every : cfg.effective_log_every();
  const long steps = std::lround(cfg.t_end / cfg.dt);
  const long steps_per_instant =
      assignment_on ? std::lround(cfg.assignment->period / cfg.dt) : 0;

  RunLog log;
  log.scenario = cfg.name;
  log.assignment_enabled = assignment_on;
  log.k_min = cfg.control_gains.k_min();

  ControlGraph ctrl = cfg.control_graph;
  GoalMap goals(cfg.initial_goals);
  Vec x = loop.initial_state();
  log.records.push_back(make_record(0.0, loop, x, cfg, goals));

  std::set<Edge> stretched_now;
  bool attitude_warned = false;
  bool bounds_warned = false;
  std::uint64_t instant = 0;

  for (long step = 0; step < steps; ++step) {
    const double t = static_cast<double>(step) * cfg.dt;
    const double t_next = static_cast<double>(step + 1) * cfg.dt;

    const CommGraph comm = build_comm_graph(loop.fleet(x).p, cfg.comm_range);
    std::set<Edge> stretched;
    for (const Edge& e : stretched_edges(ctrl, comm)) {
      stretched.insert(e);
      if (!stretched_now.count(e)) {
        log.warnings.push_back(at_time(t) + "control edge (" + std::to_string(e.first) + "," +
                               std::to_string(e.second) + ") exceeds the communication range");
      }
    }
    stretched_now = std::move(stretched);

    try {
      x = rk4_step([&](double tau, const Vec& s) { return loop.derivative(tau, s, ctrl, goals); },
                   x, t, cfg.dt);
    } catch (const NumericError& e) {
      throw RuntimeAbort(at_time(t) + "integration failed: " + e.what());
    }

    if (assignment_on && (step + 1) % steps_per_instant == 0) {
      const FleetState fleet = loop.fleet(x);
      const EstimatorState est = loop.estimator(x);
      const CommGraph comm_left = build_comm_graph(fleet.p, cfg.comm_range);
      const auto pair = select_pair(*cfg.assignment, instant++, n);
      const double v_before = lyapunov_V(error_surfaces(fleet, est, goals, cfg.control_gains));
      AssignmentOutcome outcome;
      try {
        outcome = assignment_step(t_next, comm_left, ctrl, goals, fleet, est, cfg.control_gains, pair);
      } catch (const InvariantError& e) {
        throw RuntimeAbort(at_time(t_next) + "goal exchange rolled back: " + e.what());
      }
      EventRecord rec{outcome.event, v_before, v_before};
      if (outcome.event.accepted) {
        if (!has_spanning_tree(outcome.ctrl)) {
          throw RuntimeAbort(at_time(t_next) + "control graph lost its spanning tree after exchanging (" +
                             std::to_string(pair.first) + "," + std::to_string(pair.second) + ")");
        }
        ctrl = std::move(outcome.ctrl);
        goals = std::move(outcome.goals);
        rec.v_after = lyapunov_V(error_surfaces(fleet, est, goals, cfg.control_gains));
      }
      log.events.push_back(rec);
    }

    if (cfg.leader_bounds && !bounds_warned) {
      const LeaderSignal s = leader_signal(cfg.leader, t_next);
      if (s.u.norm() > cfg.leader_bounds->accel || s.u_dot.norm() > cfg.leader_bounds->jerk) {
        log.warnings.push_back(at_time(t_next) + "leader exceeds its declared acceleration/jerk bounds");
        bounds_warned = true;
      }
    }

    if (cfg.plant == PlantKind::Quadrotor && !attitude_warned) {
      const Mat att = loop.attitude(x);
      if (att.leftCols(2).cwiseAbs().maxCoeff() >= std::numbers::pi / 2) {
        log.warnings.push_back(at_time(t_next) + "roll or pitch reached ±π/2");
        attitude_warned = true;
      }
    }

    if ((step + 1) % log_every == 0 || step + 1 == steps) {
      log.records.push_back(make_record(t_next, loop, x, cfg, goals));
    }
  }

  log.final_graph = ctrl;
  log.final_goals = goals;
  return log;
}

RunMetrics compute_metrics(const RunLog& log, double v_threshold) {
  RunMetrics m;
  m.v_threshold = v_threshold;
  m.proposal_count = log.events.size();
  for (const EventRecord& e : log.events) {
    if (e.event.accepted) ++m.exchange_count;
  }
  if (log.records.empty()) return m;

  const LogRecord& last = log.records.back();
  m.final_V = last.V;
  for (Eigen::Index i = 0; i < last.delta.rows(); ++i) {
    m.final_delta_norm.push_back(last.delta.row(i).norm());
  }
  m.final_max_delta = last.delta.rowwise().norm().maxCoeff();
  m.final_max_p_tilde = last.p_tilde.rowwise().norm().maxCoeff();

  for (std::size_t k = 0; k < log.records.size(); ++k) {
    const LogRecord& r = log.records[k];
    if (!m.time_to_threshold && r.V < v_threshold) m.time_to_threshold = r.t;
    if (k > 0) {
      const LogRecord& prev = log.records[k - 1];
      m.integral_V += 0.5 * (r.V + prev.V) * (r.t - prev.t);
    }
    const Mat& p = r.fleet.p;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < p.rows(); ++j) {
        const double dist = (p.row(i) - p.row(j)).norm();
        m.min_distance = m.min_distance ? std::min(*m.min_distance, dist) : dist;
        m.max_distance = m.max_distance ? std::max(*m.max_distance, dist) : dist;
      }
    }
  }
  return m;
}

}  // namespace formation

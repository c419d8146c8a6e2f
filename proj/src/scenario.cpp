#include "formation/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "formation/errors.hpp"

namespace formation {

namespace {

using nlohmann::json;

// Cursor into the document that remembers how it got there, so every error
// names the offending field.
class Field {
 public:
  Field(const json& node, std::string path, const std::string& source)
      : node_(node), path_(std::move(path)), source_(source) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(source_ + ": " + (path_.empty() ? "<root>" : path_) + ": " + msg);
  }

  bool has(const std::string& key) const { return node_.is_object() && node_.contains(key); }

  Field at(const std::string& key) const {
    if (!node_.is_object()) fail("expected an object");
    if (!node_.contains(key)) fail("missing required field '" + key + "'");
    return Field(node_.at(key), path_.empty() ? key : path_ + "." + key, source_);
  }

  Field at(std::size_t i) const {
    return Field(node_.at(i), path_ + "[" + std::to_string(i) + "]", source_);
  }

  std::size_t array_size() const {
    if (!node_.is_array()) fail("expected an array");
    return node_.size();
  }

  bool is_array() const { return node_.is_array(); }

  double number() const {
    if (!node_.is_number()) fail("expected a number");
    const double x = node_.get<double>();
    if (!std::isfinite(x)) fail("expected a finite number");
    return x;
  }

  double positive() const {
    const double x = number();
    if (!(x > 0.0)) fail("must be positive");
    return x;
  }

  long integer() const {
    if (!node_.is_number_integer()) fail("expected an integer");
    return node_.get<long>();
  }

  bool boolean() const {
    if (!node_.is_boolean()) fail("expected true or false");
    return node_.get<bool>();
  }

  std::string string() const {
    if (!node_.is_string()) fail("expected a string");
    return node_.get<std::string>();
  }

  Vec vector(int expected_size) const {
    const std::size_t n = array_size();
    if (expected_size >= 0 && static_cast<int>(n) != expected_size) {
      fail("expected " + std::to_string(expected_size) + " numbers, got " + std::to_string(n));
    }
    Vec out(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) out[static_cast<Eigen::Index>(i)] = at(i).number();
    return out;
  }

  /// A scalar broadcast to every follower, or one positive value per follower.
  Vec per_agent_positive(int n) const {
    if (!node_.is_array()) return Vec::Constant(n, positive());
    const Vec v = vector(n);
    for (int i = 0; i < n; ++i) {
      if (!(v[i] > 0.0)) at(static_cast<std::size_t>(i)).fail("must be positive");
    }
    return v;
  }

  const std::string& path() const { return path_; }

 private:
  const json& node_;
  std::string path_;
  const std::string& source_;
};

double number_or(const Field& f, const std::string& key, double fallback) {
  return f.has(key) ? f.at(key).number() : fallback;
}

double positive_or(const Field& f, const std::string& key, double fallback) {
  return f.has(key) ? f.at(key).positive() : fallback;
}

LeaderTrajectory parse_leader(const Field& f) {
  const std::string kind = f.at("kind").string();
  if (kind == "planar_sine") {
    PlanarSine s;
    s.speed = number_or(f, "speed", s.speed);
    s.amplitude = number_or(f, "amplitude", s.amplitude);
    s.omega = number_or(f, "omega", s.omega);
    return s;
  }
  if (kind == "helix") {
    Helix h;
    h.radius = number_or(f, "radius", h.radius);
    h.omega = number_or(f, "omega", h.omega);
    h.climb_rate = number_or(f, "climb_rate", h.climb_rate);
    h.altitude = number_or(f, "altitude", h.altitude);
    return h;
  }
  if (kind == "constant_acceleration") {
    ConstantAcceleration c;
    c.p0 = f.at("p0").vector(-1);
    c.v0 = f.at("v0").vector(static_cast<int>(c.p0.size()));
    c.a = f.at("a").vector(static_cast<int>(c.p0.size()));
    return c;
  }
  if (kind == "polynomial") {
    Polynomial p;
    const Field coeffs = f.at("coefficients");
    for (std::size_t axis = 0; axis < coeffs.array_size(); ++axis) {
      const Vec c = coeffs.at(axis).vector(-1);
      p.coefficients.emplace_back(c.data(), c.data() + c.size());
    }
    return p;
  }
  f.at("kind").fail("unknown leader kind '" + kind +
                    "' (expected planar_sine, helix, constant_acceleration or polynomial)");
}

std::vector<Edge> parse_edges(const Field& f, int n) {
  std::vector<Edge> edges;
  for (std::size_t k = 0; k < f.array_size(); ++k) {
    const Field e = f.at(k);
    if (e.array_size() != 2) e.fail("an edge is a pair of follower ids");
    AgentId ids[2];
    for (std::size_t s = 0; s < 2; ++s) {
      const long id = e.at(s).integer();
      if (id < 1 || id > n) e.at(s).fail("follower id must be in 1.." + std::to_string(n));
      ids[s] = static_cast<AgentId>(id);
    }
    if (ids[0] == ids[1]) e.fail("self-loop");
    edges.emplace_back(ids[0], ids[1]);
  }
  return edges;
}

void parse_quadrotor(const Field& f, QuadLoopConfig& q) {
  if (f.has("params")) {
    const Field p = f.at("params");
    q.params.mass = positive_or(p, "mass", q.params.mass);
    q.params.gravity = positive_or(p, "gravity", q.params.gravity);
    q.params.ixx = positive_or(p, "ixx", q.params.ixx);
    q.params.iyy = positive_or(p, "iyy", q.params.iyy);
    q.params.izz = positive_or(p, "izz", q.params.izz);
    q.params.arm = positive_or(p, "arm", q.params.arm);
  }
  if (f.has("attitude")) {
    const Field a = f.at("attitude");
    const auto triple = [&](const std::string& key, Eigen::Vector3d& out) {
      if (!a.has(key)) return;
      const Field v = a.at(key);
      out = v.is_array() ? Eigen::Vector3d(v.vector(3)) : Eigen::Vector3d::Constant(v.positive());
      if (!(out.minCoeff() > 0.0)) v.fail("must be positive");
    };
    triple("lambda", q.attitude.lambda);
    triple("k", q.attitude.k);
    q.attitude.boundary_layer = positive_or(a, "boundary_layer", q.attitude.boundary_layer);
    if (a.has("use_sign")) q.attitude.use_sign = a.at("use_sign").boolean();
  }
  if (f.has("filter")) {
    const Field r = f.at("filter");
    q.filter.natural_frequency = positive_or(r, "natural_frequency", q.filter.natural_frequency);
    q.filter.damping = positive_or(r, "damping", q.filter.damping);
  }
  q.psi_d = number_or(f, "psi_d", q.psi_d);
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

}  // namespace

std::string to_string(PlantKind p) {
  return p == PlantKind::DoubleIntegrator ? "double_integrator" : "quadrotor";
}

std::string to_string(EstimatorInit e) {
  switch (e) {
    case EstimatorInit::OwnPosition:
      return "own_position";
    case EstimatorInit::Zero:
      return "zero";
    case EstimatorInit::LeaderInitial:
      return "leader_initial";
  }
  return "unknown";
}

int ScenarioConfig::effective_log_every() const {
  if (log_every > 0) return log_every;
  return size() <= 20 ? 1 : 10;
}

void ScenarioConfig::validate() const {
  const int n = size();
  const auto fail = [&](const std::string& msg) { throw ConfigError(name + ": " + msg); };
  if (n < 1) fail("at least one follower is required");
  if (dim != 2 && dim != 3) fail("dimension must be 2 or 3");
  if (plant == PlantKind::Quadrotor && dim != 3) fail("quadrotor plant requires dimension 3");
  if (dimension(leader) != dim) fail("leader trajectory dimension differs from scenario dimension");
  if (initial_positions.cols() != dim || initial_velocities.rows() != n ||
      initial_velocities.cols() != dim || initial_goals.rows() != n ||
      initial_goals.cols() != dim) {
    fail("follower positions, velocities and goals must all be N x d");
  }
  if (control_graph.size() != n) fail("control graph size differs from follower count");
  if (!(dt > 0.0) || !(t_end > 0.0)) fail("dt and t_end must be positive");
  if (!(comm_range > 0.0)) fail("comm_range must be positive");
  try {
    control_gains.validate();
    estimator_gains.validate();
    if (plant == PlantKind::Quadrotor) {
      quad.params.validate();
      quad.attitude.validate();
    }
  } catch (const InputError& e) {
    fail(e.what());
  }
  if (control_gains.size() != n || estimator_gains.size() != n) fail("one gain per follower");
  if (!has_spanning_tree(control_graph)) {
    fail("initial control graph has no spanning tree rooted at the leader");
  }
  const CommGraph comm = build_comm_graph(initial_positions, comm_range);
  const auto stretched = stretched_edges(control_graph, comm);
  if (!stretched.empty()) {
    fail("control edge (" + std::to_string(stretched.front().first) + "," +
         std::to_string(stretched.front().second) +
         ") is longer than the communication range at t = 0");
  }
  if (assignment) {
    if (!(assignment->period > 0.0)) fail("assignment.period must be positive");
    const double ratio = assignment->period / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio) || std::round(ratio) < 1) {
      fail("assignment.period must be a positive multiple of dt");
    }
  }
}

ScenarioConfig parse_scenario(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": line " + std::to_string(line_of(text, e.byte)) +
                      ": malformed JSON (" + e.what() + ")");
  }
  const Field root(doc, "", source);
  const long version = root.at("schema_version").integer();
  if (version != kScenarioSchemaVersion) {
    root.at("schema_version").fail("unsupported schema version " + std::to_string(version));
  }

  ScenarioConfig cfg;
  cfg.name = root.has("name") ? root.at("name").string() : source;
  const long dim = root.at("dimension").integer();
  if (dim != 2 && dim != 3) root.at("dimension").fail("must be 2 or 3");
  cfg.dim = static_cast<int>(dim);

  const std::string plant = root.has("plant") ? root.at("plant").string() : "double_integrator";
  if (plant == "double_integrator") {
    cfg.plant = PlantKind::DoubleIntegrator;
  } else if (plant == "quadrotor") {
    cfg.plant = PlantKind::Quadrotor;
  } else {
    root.at("plant").fail("expected double_integrator or quadrotor");
  }

  cfg.dt = root.has("dt") ? root.at("dt").positive() : 1e-3;
  cfg.t_end = root.at("t_end").positive();
  cfg.comm_range = root.at("comm_range").positive();

  const Field leader = root.at("leader");
  cfg.leader = parse_leader(leader);
  if (dimension(cfg.leader) != cfg.dim) leader.fail("leader dimension differs from 'dimension'");
  if (leader.has("accel_bound") || leader.has("jerk_bound")) {
    cfg.leader_bounds = LeaderBounds{leader.at("accel_bound").positive(),
                                     leader.at("jerk_bound").positive()};
  }

  const Field followers = root.at("followers");
  const int n = static_cast<int>(followers.array_size());
  if (n < 1) followers.fail("at least one follower is required");
  cfg.initial_positions.resize(n, cfg.dim);
  cfg.initial_velocities.resize(n, cfg.dim);
  cfg.initial_goals.resize(n, cfg.dim);
  for (int i = 0; i < n; ++i) {
    const Field f = followers.at(static_cast<std::size_t>(i));
    cfg.initial_positions.row(i) = f.at("position").vector(cfg.dim).transpose();
    cfg.initial_velocities.row(i) =
        f.has("velocity") ? Vec(f.at("velocity").vector(cfg.dim)) : Vec(Vec::Zero(cfg.dim));
    cfg.initial_goals.row(i) = f.at("goal").vector(cfg.dim).transpose();
  }

  const Field graph = root.at("control_graph");
  const std::vector<Edge> edges = parse_edges(graph.at("edges"), n);
  std::vector<AgentId> leader_ids;
  const Field leader_edges = graph.at("leader_edges");
  for (std::size_t k = 0; k < leader_edges.array_size(); ++k) {
    const long id = leader_edges.at(k).integer();
    if (id < 1 || id > n) leader_edges.at(k).fail("follower id must be in 1.." + std::to_string(n));
    leader_ids.push_back(static_cast<AgentId>(id));
  }
  cfg.control_graph = ControlGraph::from_edges(n, edges, leader_ids);

  const Field ctrl = root.at("controller");
  cfg.control_gains = {ctrl.at("k1").per_agent_positive(n), ctrl.at("k2").per_agent_positive(n)};

  const Field est = root.at("estimator");
  cfg.estimator_gains = {est.at("gamma1").per_agent_positive(n),
                         est.at("gamma2").per_agent_positive(n),
                         est.at("gamma3").per_agent_positive(n)};
  if (est.has("init")) {
    const std::string init = est.at("init").string();
    if (init == "own_position") {
      cfg.estimator_init = EstimatorInit::OwnPosition;
    } else if (init == "zero") {
      cfg.estimator_init = EstimatorInit::Zero;
    } else if (init == "leader_initial") {
      cfg.estimator_init = EstimatorInit::LeaderInitial;
    } else {
      est.at("init").fail("expected own_position, zero or leader_initial");
    }
  }

  const std::uint64_t seed = root.has("seed") ? static_cast<std::uint64_t>(root.at("seed").integer()) : 0;
  if (root.has("assignment")) {
    const Field a = root.at("assignment");
    const bool enabled = a.has("enabled") ? a.at("enabled").boolean() : true;
    if (enabled) {
      AssignmentSchedule s;
      s.period = positive_or(a, "period", s.period);
      s.seed = a.has("seed") ? static_cast<std::uint64_t>(a.at("seed").integer()) : seed;
      if (a.has("pair_policy")) {
        const std::string policy = a.at("pair_policy").string();
        if (policy == "round_robin") {
          s.policy = PairPolicy::RoundRobin;
        } else if (policy == "seeded_random") {
          s.policy = PairPolicy::SeededRandom;
        } else {
          a.at("pair_policy").fail("expected round_robin or seeded_random");
        }
      }
      cfg.assignment = s;
    }
  }

  if (root.has("quadrotor")) parse_quadrotor(root.at("quadrotor"), cfg.quad);
  if (root.has("log_every")) {
    const long every = root.at("log_every").integer();
    if (every < 1) root.at("log_every").fail("must be at least 1");
    cfg.log_every = static_cast<int>(every);
  }

  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open scenario file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

}  // namespace formation

#include "formation/output.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

#include <Eigen/Eigenvalues>

#include "formation/errors.hpp"

namespace formation {

namespace {

using nlohmann::json;

constexpr std::array<const char*, 3> kAxes{"x", "y", "z"};

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void write_matrix_row(std::ostream& out, const Mat& m, Eigen::Index row) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) out << ',' << format_double(m(row, c));
}

json number_or_null(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

}  // namespace

std::string format_double(double x) {
  std::array<char, 64> buf{};
  const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), result.ptr);
}

void write_trajectory_csv(const RunLog& log, std::ostream& out) {
  out << 't';
  if (!log.records.empty()) {
    const LogRecord& r0 = log.records.front();
    const int n = r0.fleet.size();
    const int d = r0.fleet.dim();
    for (int i = 1; i <= n; ++i) {
      for (const char* field : {"p", "v", "e1", "e2"}) {
        for (int k = 0; k < d; ++k) out << ',' << field << i << '_' << kAxes[k];
      }
    }
  }
  out << ",V\n";
  for (const LogRecord& r : log.records) {
    out << format_double(r.t);
    for (Eigen::Index i = 0; i < r.fleet.p.rows(); ++i) {
      write_matrix_row(out, r.fleet.p, i);
      write_matrix_row(out, r.fleet.v, i);
      write_matrix_row(out, r.surfaces.e1, i);
      write_matrix_row(out, r.surfaces.e2, i);
    }
    out << ',' << format_double(r.V) << '\n';
  }
}

void write_lyapunov_csv(const RunLog& log, std::ostream& out) {
  out << "t,V\n";
  for (const LogRecord& r : log.records) out << format_double(r.t) << ',' << format_double(r.V) << '\n';
}

void write_events_jsonl(const RunLog& log, std::ostream& out) {
  for (const EventRecord& rec : log.events) {
    const ExchangeEvent& e = rec.event;
    json j = {{"t", e.tau},
              {"alpha", e.alpha},
              {"beta", e.beta},
              {"e_cur", e.e_cur},
              {"e_new", e.e_new},
              {"accepted", e.accepted},
              {"reason", to_string(e.reason)},
              {"v_before", rec.v_before},
              {"v_after", rec.v_after}};
    out << j.dump() << '\n';
  }
}

json metrics_json(const RunLog& log, const RunMetrics& m) {
  json edges = json::array();
  for (const Edge& e : log.final_graph.edges()) edges.push_back({e.first, e.second});
  json goals = json::array();
  const Mat& g = log.final_goals.goals();
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < g.cols(); ++k) row.push_back(g(i, k));
    goals.push_back(row);
  }
  return {{"scenario", log.scenario},
          {"assignment_enabled", log.assignment_enabled},
          {"final_delta_norm", m.final_delta_norm},
          {"final_max_delta", m.final_max_delta},
          {"final_max_p_tilde", m.final_max_p_tilde},
          {"final_V", m.final_V},
          {"v_threshold", m.v_threshold},
          {"time_to_threshold", number_or_null(m.time_to_threshold)},
          {"integral_V", m.integral_V},
          {"exchange_count", m.exchange_count},
          {"proposal_count", m.proposal_count},
          {"min_distance", number_or_null(m.min_distance)},
          {"max_distance", number_or_null(m.max_distance)},
          {"final_control_edges", edges},
          {"final_leader_edges", log.final_graph.leader_neighbors()},
          {"final_goals", goals},
          {"warnings", log.warnings}};
}

void write_run(const RunLog& log, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_output(dir / "trajectory.csv");
    write_trajectory_csv(log, out);
  }
  {
    auto out = open_output(dir / "lyapunov.csv");
    write_lyapunov_csv(log, out);
  }
  {
    auto out = open_output(dir / "events.jsonl");
    write_events_jsonl(log, out);
  }
  {
    auto out = open_output(dir / "summary.json");
    out << metrics_json(log, compute_metrics(log)).dump(2) << '\n';
  }
}

json analyze_scenario(const ScenarioConfig& cfg) {
  const GraphMatrices m = graph_matrices(cfg.control_graph);
  const bool tree = has_spanning_tree(cfg.control_graph);
  const CommGraph comm = build_comm_graph(cfg.initial_positions, cfg.comm_range);

  const Mat a1 = build_A1(m, cfg.estimator_gains, cfg.dim);
  Eigen::EigenSolver<Mat> solver(a1, false);
  if (solver.info() != Eigen::Success) throw NumericError("analyze: eigenvalue iteration failed");
  std::vector<std::pair<double, double>> spectrum;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    spectrum.emplace_back(solver.eigenvalues()[i].real(), solver.eigenvalues()[i].imag());
  }
  std::sort(spectrum.begin(), spectrum.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second > b.second;
  });
  json eig = json::array();
  for (const auto& [re, im] : spectrum) eig.push_back({{"re", re}, {"im", im}});
  const double abscissa = spectrum.front().first;

  json out = {{"scenario", cfg.name},
              {"followers", cfg.size()},
              {"dimension", cfg.dim},
              {"spanning_tree", tree},
              {"control_graph_within_range", is_subgraph_of(cfg.control_graph, comm)},
              {"h_min_eigenvalue", h_min_eigenvalue(m)},
              {"spectral_abscissa", abscissa},
              {"a1_eigenvalues", eig}};
  if (abscissa < 0.0) {
    const Mat q = Mat::Identity(a1.rows(), a1.cols());
    const Mat p = lyapunov_solve(a1, q);
    Eigen::SelfAdjointEigenSolver<Mat> ps(p, Eigen::EigenvaluesOnly);
    out["lyapunov_method"] = a1.rows() <= kKroneckerLyapunovLimit ? "kronecker" : "schur";
    out["lyapunov_residual"] = lyapunov_residual(a1, p, q);
    out["p_min_eigenvalue"] = ps.eigenvalues().minCoeff();
  } else {
    out["lyapunov_method"] = nullptr;
    out["lyapunov_residual"] = nullptr;
    out["p_min_eigenvalue"] = nullptr;
  }
  return out;
}

LyapunovSeries read_lyapunov_csv(const std::filesystem::path& run) {
  const std::filesystem::path path =
      std::filesystem::is_directory(run) ? run / "lyapunov.csv" : run;
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  LyapunovSeries s;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line != "t,V") throw ConfigError(path.string() + ": line 1: expected header 't,V'");
      continue;
    }
    if (line.empty()) continue;
    const auto comma = line.find(',');
    double t = 0.0;
    double v = 0.0;
    const char* begin = line.data();
    const char* end = line.data() + line.size();
    if (comma == std::string::npos ||
        std::from_chars(begin, begin + comma, t).ec != std::errc{} ||
        std::from_chars(begin + comma + 1, end, v).ec != std::errc{}) {
      throw ConfigError(path.string() + ": line " + std::to_string(line_no) + ": expected 't,V'");
    }
    s.t.push_back(t);
    s.v.push_back(v);
  }
  return s;
}

void write_comparison_csv(const LyapunovSeries& without, const LyapunovSeries& with,
                          std::ostream& out) {
  if (without.t != with.t) throw ConfigError("compare: the two runs use different time grids");
  out << "t,V_without,V_with\n";
  for (std::size_t k = 0; k < without.t.size(); ++k) {
    out << format_double(without.t[k]) << ',' << format_double(without.v[k]) << ','
        << format_double(with.v[k]) << '\n';
  }
}

}  // namespace formation

#include "gbmred/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "gbmred/metrics.hpp"
#include "gbmred/quantum.hpp"
#include "gbmred/reduce_im.hpp"
#include "gbmred/reduce_sde.hpp"

namespace gbmred::cli {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const json& j, int n, const char* name) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) {
    throw ConfigError(std::string("model: ") + name + " must be an array of " + std::to_string(n) + " rows");
  }
  Matrix M(n, n);
  for (int i = 0; i < n; ++i) {
    const json& row = j[i];
    if (!row.is_array() || static_cast<int>(row.size()) != n) {
      throw ConfigError(std::string("model: row ") + std::to_string(i) + " of " + name + " must hold " +
                        std::to_string(n) + " numbers");
    }
    for (int k = 0; k < n; ++k) {
      if (!row[k].is_number()) throw ConfigError(std::string("model: ") + name + " has a non-numeric entry");
      M(i, k) = row[k].get<double>();
    }
  }
  return M;
}

struct Options {
  std::string command;
  std::string model_file;
  std::string preset;
  std::optional<double> alpha, beta, epsilon, tmax;
  int points = 200;
  double dt = 1e-3;
  int paths = 1000;
  std::uint64_t seed = 0;
  std::string method = "adiabatic";
  std::string norm = "sup";
  std::string out = "gbmred_out";
  std::string format = "csv";
  std::string simulator = "cartesian";
  std::vector<double> x0;
  bool dump_paths = false;
};

// Everything a command needs, with defaults filled in.
struct Resolved {
  Options opt;
  std::optional<GbmModel> file_model;
  bool quantum = false;
  double alpha = 0.0, beta = 0.0, epsilon = 1.0;
  double tmax = 10.0;
  Vector x0;
  json canonical;
  std::string hash;

  double beta_slow() const { return beta / std::sqrt(epsilon); }
  GbmModel model() const { return file_model ? *file_model : quantum_gbm(alpha, beta_slow()); }
};

GbmModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("model file '" + path + "': " + e.what());
  }
  return model_from_json(j);
}

Resolved resolve(const Options& o) {
  Resolved r;
  r.opt = o;
  std::optional<QuantumPreset> preset;
  if (!o.preset.empty()) {
    try {
      preset = find_preset(o.preset);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
  if (!o.model_file.empty()) {
    if (o.alpha || o.beta || o.epsilon) throw ConfigError("--model cannot be combined with --alpha/--beta/--epsilon");
    r.file_model = load_model(o.model_file);
  } else if (preset || o.alpha || o.beta) {
    r.quantum = true;
    r.alpha = o.alpha ? *o.alpha : preset ? preset->alpha : 0.5;
    r.beta = o.beta ? *o.beta : preset ? preset->beta : 1.0;
    r.epsilon = o.epsilon ? *o.epsilon : (preset && preset->epsilon) ? *preset->epsilon : 1.0;
  } else {
    throw ConfigError("no model: give --model FILE, --preset NAME or --alpha/--beta");
  }
  if (o.epsilon && !r.quantum) throw ConfigError("--epsilon needs quantum parameters");
  r.tmax = o.tmax ? *o.tmax : preset ? preset->t_max : 10.0;

  if (r.quantum) {
    if (!std::isfinite(r.alpha)) throw ConfigError("--alpha must be finite");
    if (!(r.beta > 0.0) || !std::isfinite(r.beta)) throw ConfigError("--beta must be positive");
    if (!(r.epsilon > 0.0 && r.epsilon <= 1.0)) throw ConfigError("--epsilon must lie in (0, 1]");
  }
  if (!(r.tmax > 0.0) || !std::isfinite(r.tmax)) throw ConfigError("--tmax must be positive");
  if (o.points < 1) throw ConfigError("--points must be >= 1");
  if (!(o.dt > 0.0) || !std::isfinite(o.dt)) throw ConfigError("--dt must be positive");
  if (o.paths < 1) throw ConfigError("--paths must be >= 1");
  if (o.command == "simulate" && o.dt > r.tmax) throw ConfigError("--dt must not exceed --tmax");
  if (o.method == "exact" && o.command != "compare") throw ConfigError("--method exact is only valid for compare");
  if (o.simulator != "cartesian" && !r.quantum) {
    throw ConfigError("--simulator " + o.simulator + " needs quantum parameters");
  }
  if ((o.command == "reduce" || o.command == "compare") && !r.quantum) {
    throw ConfigError(o.command + " needs quantum parameters (--preset or --alpha/--beta)");
  }

  const int n = r.quantum ? 3 : r.file_model->dim();
  if (o.x0.empty()) {
    r.x0 = Vector::Zero(n);
    r.x0(0) = 1.0;
  } else {
    if (static_cast<int>(o.x0.size()) != n) {
      throw ConfigError("--x0 has " + std::to_string(o.x0.size()) + " entries, model dimension is " +
                        std::to_string(n));
    }
    r.x0 = Eigen::Map<const Vector>(o.x0.data(), n);
    if (!r.x0.allFinite()) throw ConfigError("--x0 must be finite");
  }
  if (o.simulator != "cartesian" && std::abs(r.x0.norm() - 1.0) > 1e-9) {
    throw ConfigError("--x0 must be a unit vector for the " + o.simulator + " simulator");
  }
  if (o.simulator == "spin" && r.x0(0) < 0.0) throw ConfigError("--x0 must have x >= 0 for the spin simulator");

  json c;
  c["command"] = o.command;
  if (r.file_model) {
    c["model"] = model_to_json(*r.file_model);
  } else {
    c["alpha"] = r.alpha;
    c["beta"] = r.beta;
    c["epsilon"] = r.epsilon;
  }
  c["tmax"] = r.tmax;
  c["points"] = o.points;
  c["x0"] = std::vector<double>(r.x0.data(), r.x0.data() + n);
  c["format"] = o.format;
  if (o.command == "reduce" || o.command == "compare") {
    c["method"] = o.method;
    c["norm"] = o.norm;
  }
  if (o.command == "simulate") {
    c["dt"] = o.dt;
    c["paths"] = o.paths;
    c["seed"] = o.seed;
    c["simulator"] = o.simulator;
    c["dump_paths"] = o.dump_paths;
  }
  r.canonical = c;
  std::ostringstream h;
  h << std::hex << std::setw(16) << std::setfill('0') << fnv1a(c.dump());
  r.hash = h.str();
  return r;
}

using Columns = std::vector<std::pair<std::string, std::vector<double>>>;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::ios_base::failure("cannot open '" + path + "' for writing");
  f << text;
  f.close();
  if (!f) throw std::ios_base::failure("write to '" + path + "' failed");
}

void write_csv(const Resolved& r, const std::string& path, const Columns& cols) {
  std::string s = "# config-hash: " + r.hash + "\n";
  for (std::size_t c = 0; c < cols.size(); ++c) s += (c ? "," : "") + cols[c].first;
  s += "\n";
  const std::size_t rows = cols.empty() ? 0 : cols.front().second.size();
  for (std::size_t k = 0; k < rows; ++k) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) s += ',';
      s += format_double(cols[c].second[k]);
    }
    s += '\n';
  }
  write_text(path, s);
}

void write_json(const Resolved& r, const std::string& path, json body) {
  body["config_hash"] = r.hash;
  body["config"] = r.canonical;
  write_text(path, body.dump(2) + "\n");
}

json columns_to_json(const Columns& cols) {
  json j = json::object();
  for (const auto& [name, v] : cols) j[name] = v;
  return j;
}

std::string index_name(const char* prefix, int i) { return prefix + std::to_string(i + 1); }

std::string pair_name(const char* prefix, int i, int j) {
  return prefix + std::to_string(i + 1) + std::to_string(j + 1);
}

std::string entry_name(const char* prefix, int i, int j, int n) {
  if (n < 10) return pair_name(prefix, i, j);
  return std::string(prefix) + std::to_string(i + 1) + "_" + std::to_string(j + 1);
}

void add_vector_columns(Columns& cols, const char* prefix, const std::vector<Vector>& values, int n) {
  for (int i = 0; i < n; ++i) {
    std::vector<double> c;
    c.reserve(values.size());
    for (const auto& v : values) c.push_back(v(i));
    cols.emplace_back(index_name(prefix, i), std::move(c));
  }
}

void add_matrix_columns(Columns& cols, const char* prefix, const std::vector<Matrix>& values, int n) {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::vector<double> c;
      c.reserve(values.size());
      for (const auto& m : values) c.push_back(m(i, j));
      cols.emplace_back(entry_name(prefix, i, j, n), std::move(c));
    }
}

std::vector<Matrix> matrices(const std::vector<CovarianceState>& states) {
  std::vector<Matrix> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s.matrix());
  return out;
}

int cmd_moments(const Resolved& r, std::ostream& out) {
  const GbmModel model = r.model();
  const int n = model.dim();
  const auto grid = uniform_grid(r.tmax, r.opt.points);
  const auto mean = mean_trajectory(model, r.x0, grid);
  const auto cov = covariance_trajectory(model, CovarianceState(r.x0 * r.x0.transpose()), grid);

  Columns mc{{"t", grid}}, pc{{"t", grid}};
  add_vector_columns(mc, "x", mean.values, n);
  add_matrix_columns(pc, "P", matrices(cov), n);
  if (r.opt.format == "json") {
    const std::string path = r.opt.out + "_moments.json";
    write_json(r, path, json{{"mean", columns_to_json(mc)}, {"second_moment", columns_to_json(pc)}});
    out << path << "\n";
  } else {
    write_csv(r, r.opt.out + "_mean.csv", mc);
    write_csv(r, r.opt.out + "_cov.csv", pc);
    out << r.opt.out << "_mean.csv\n" << r.opt.out << "_cov.csv\n";
  }
  return 0;
}

// Rates of the reduced mean and variance equations on the time scale of the
// full model quantum_gbm(alpha, beta / sqrt(eps)).
struct Reduction {
  double mean_rate = 0.0;
  double variance_rate = 0.0;
  json details = json::object();
};

Reduction reduce_rates(const Resolved& r) {
  Reduction red;
  const double b2 = r.beta_slow() * r.beta_slow();
  if (r.opt.method == "adiabatic") {
    red.mean_rate = -2 * r.alpha * r.alpha / b2;
    red.variance_rate = -6 * r.alpha * r.alpha / b2;
    return red;
  }
  const QuantumParams p{r.alpha, r.beta, r.epsilon};
  p.validate();
  const auto [plus, minus] = solve_ie_deterministic(p);
  const InvarianceSolution cov = solve_ie_covariance(p);
  red.mean_rate = reduced_mean_dynamics_slow(p).rate;
  red.variance_rate = reduced_variance_dynamics_slow(p).rate;
  red.details["a"] = plus.closure[0];
  red.details["a1"] = cov.closure[0];
  red.details["a2"] = cov.closure[1];
  red.details["a3"] = cov.closure[2];
  red.details["xi"] = cov.xi;
  return red;
}

GapNorm parse_norm(const std::string& s) { return s == "l2" ? GapNorm::l2 : GapNorm::sup; }

// Rethrows a domain failure of the reduction with the critical epsilons attached.
[[noreturn]] void rethrow_with_criticals(const Resolved& r, const DomainError& e) {
  std::ostringstream os;
  os << e.what();
  try {
    const CriticalEpsilons c = critical_epsilons(r.alpha, r.beta);
    os << std::setprecision(8) << " (eps_c' = " << c.eps_det << ", eps_c'' = " << c.eps_cov << ")";
  } catch (const std::exception&) {
  }
  throw DomainError(os.str());
}

struct ReducedRun {
  Reduction red;
  ReducedModel model;
  std::vector<double> grid;
  ScalarTrajectory mz, pzz, pbar, mbar;
};

ReducedRun run_reduction(const Resolved& r) {
  ReducedRun run;
  try {
    run.red = reduce_rates(r);
    run.model = build_reduced_model(run.red.mean_rate, run.red.variance_rate, 1.0 / 3.0, parse_norm(r.opt.norm),
                                    r.opt.method == "im" ? ReductionSource::invariant_manifold
                                                         : ReductionSource::adiabatic);
  } catch (const DomainError& e) {
    rethrow_with_criticals(r, e);
  }
  run.grid = uniform_grid(r.tmax, r.opt.points);
  const double z0 = r.x0(2);
  run.mz = solve_reduced({run.red.mean_rate, 0.0}, z0, run.grid);
  run.pzz = solve_reduced({run.red.variance_rate, 1.0 / 3.0}, z0 * z0, run.grid);
  run.pbar = reduced_second_moment(run.model, z0 * z0, run.grid);
  run.mbar = reduced_mean(run.model, z0, run.grid);
  return run;
}

int cmd_reduce(const Resolved& r, std::ostream& out) {
  const ReducedRun run = run_reduction(r);
  const CriticalEpsilons crit = critical_epsilons(r.alpha, r.beta);
  json j = run.red.details;
  j["method"] = r.opt.method;
  j["norm"] = r.opt.norm;
  j["beta_slow"] = r.beta_slow();
  j["A_bar"] = run.model.A_bar;
  j["B_bar"] = run.model.B_bar;
  j["D_bar"] = run.model.D_bar;
  j["mean_rate"] = run.red.mean_rate;
  j["variance_rate"] = run.red.variance_rate;
  j["equilibrium"] = run.model.p_inf;
  j["fdt_residual"] = run.model.fdt_residual();
  j["eps_c_prime"] = crit.eps_det;
  j["eps_c_double_prime"] = crit.eps_cov;

  const Columns cols{{"t", run.grid},
                     {"mz_reduced", run.mz.values},
                     {"pzz_reduced", run.pzz.values},
                     {"pzz_reconstructed", run.pbar.values}};
  const std::string jpath = r.opt.out + "_reduced.json";
  if (r.opt.format == "json") {
    j["trajectory"] = columns_to_json(cols);
    write_json(r, jpath, j);
    out << jpath << "\n";
  } else {
    write_json(r, jpath, j);
    write_csv(r, r.opt.out + "_reduced.csv", cols);
    out << jpath << "\n" << r.opt.out << "_reduced.csv\n";
  }
  return 0;
}

int cmd_compare(const Resolved& r, std::ostream& out) {
  const auto grid = uniform_grid(r.tmax, r.opt.points);
  const double bs = r.beta_slow();

  // (p_xx, p_yy, p_yz, p_zz) and (m_y, m_z) form closed subsystems.
  const Vector& x = r.x0;
  Vector p0(4);
  p0 << x(0) * x(0), x(1) * x(1), x(1) * x(2), x(2) * x(2);
  const Trajectory pfull = integrate_linear_ode(covariance_system_matrix(r.alpha, bs), Vector::Zero(4), p0, grid);
  const Trajectory mfull =
      integrate_linear_ode(mean_subsystem_matrix(r.alpha, bs), Vector::Zero(2), Vector(x.tail(2)), grid);

  ScalarMoments full{grid, {}, {}};
  for (std::size_t k = 0; k < grid.size(); ++k) {
    full.mean.push_back(mfull.values[k](1));
    full.second_moment.push_back(pfull.values[k](3));
  }

  ScalarMoments tilde, bar;
  json summary = json::object();
  if (r.opt.method == "exact") {
    tilde = full;
    bar = full;
  } else {
    const ReducedRun run = run_reduction(r);
    tilde = {grid, run.mz.values, run.pzz.values};
    bar = {grid, run.mbar.values, run.pbar.values};
    summary = run.red.details;
    summary["A_bar"] = run.model.A_bar;
    summary["B_bar"] = run.model.B_bar;
    summary["D_bar"] = run.model.D_bar;
    summary["mean_rate"] = run.red.mean_rate;
    summary["variance_rate"] = run.red.variance_rate;
  }

  const ErrorBudget budget = error_budget({grid, bar.second_moment}, {grid, tilde.second_moment},
                                          {grid, full.second_moment});
  const ReductionErrorReport w2 = reduction_error_report(full, bar);
  std::vector<double> lower, upper;
  for (const auto& b : w2.bounds) {
    lower.push_back(b.lower);
    upper.push_back(b.upper);
  }
  std::vector<double> mean_gap;
  double sup_mean_gap = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    mean_gap.push_back(std::abs(tilde.mean[k] - full.mean[k]));
    sup_mean_gap = std::max(sup_mean_gap, mean_gap.back());
  }

  const Columns cols{{"t", grid},
                     {"pzz_full", full.second_moment},
                     {"pzz_reduced", tilde.second_moment},
                     {"pzz_reconstructed", bar.second_moment},
                     {"mz_full", full.mean},
                     {"mz_reduced", tilde.mean},
                     {"gap_reduced_full", budget.reduction_gap},
                     {"gap_reconstructed_reduced", budget.reconstruction_gap},
                     {"gap_reconstructed_full", budget.total_gap},
                     {"gap_mean", mean_gap},
                     {"w2_lower", lower},
                     {"w2_upper", upper}};

  summary["method"] = r.opt.method;
  summary["sup_gap_reduced_full"] = budget.sup_reduction;
  summary["sup_gap_reconstructed_reduced"] = budget.sup_reconstruction;
  summary["sup_gap_reconstructed_full"] = budget.sup_total;
  summary["sup_gap_mean"] = sup_mean_gap;
  summary["sup_w2_lower"] = w2.sup_lower;
  summary["sup_w2_upper"] = w2.sup_upper;

  const std::string jpath = r.opt.out + "_compare.json";
  if (r.opt.format == "json") {
    summary["table"] = columns_to_json(cols);
    write_json(r, jpath, summary);
    out << jpath << "\n";
  } else {
    write_json(r, jpath, summary);
    write_csv(r, r.opt.out + "_compare.csv", cols);
    out << jpath << "\n" << r.opt.out << "_compare.csv\n";
  }
  out << "sup |pzz_reduced - pzz_full| = " << format_double(budget.sup_reduction) << "\n";
  return 0;
}

PathEnsemble simulate_batch(const Resolved& r, const GbmModel& model, const SimulationOptions& so) {
  const std::string& sim = r.opt.simulator;
  if (sim == "spherical") {
    const double theta0 = std::asin(std::clamp(r.x0(2), -1.0, 1.0));
    const double phi0 = std::atan2(r.x0(1), r.x0(0));
    return simulate_spherical(r.alpha, r.beta_slow(), theta0, phi0, so);
  }
  if (sim == "spin") return simulate_spin_conserving(r.alpha, r.beta_slow(), r.x0(1), r.x0(2), so);
  return simulate_paths(model, r.x0, so);
}

int cmd_simulate(const Resolved& r, std::ostream& out) {
  const GbmModel model = r.model();
  const int n = model.dim();
  const long long n_steps = step_count(r.opt.dt, r.tmax);
  const int record_every = static_cast<int>(std::max(1LL, n_steps / r.opt.points));
  const std::size_t n_times = recorded_steps(n_steps, record_every).size();

  if (r.opt.dump_paths) {
    const long double values = static_cast<long double>(r.opt.paths) * n_times * n;
    if (values > kDumpCap) {
      std::ostringstream os;
      os << "--dump-paths would write " << static_cast<long long>(values) << " values (cap " << kDumpCap
         << "); lower --paths or --points";
      throw CapError(os.str());
    }
  }

  // Batches keep memory bounded; path streams depend only on the global
  // path index, so the ensemble does not depend on the batch size.
  constexpr int kBatch = 10000;
  MomentAccumulator acc;
  std::string dump;
  for (int first = 0; first < r.opt.paths; first += kBatch) {
    SimulationOptions so;
    so.dt = r.opt.dt;
    so.t_max = r.tmax;
    so.n_paths = std::min(kBatch, r.opt.paths - first);
    so.seed = r.opt.seed;
    so.record_every = record_every;
    so.first_path = static_cast<std::uint64_t>(first);
    const PathEnsemble batch = simulate_batch(r, model, so);
    acc.add(batch);
    if (r.opt.dump_paths) {
      for (int p = 0; p < batch.n_paths; ++p)
        for (std::size_t k = 0; k < batch.n_times(); ++k) {
          dump += std::to_string(first + p) + "," + format_double(batch.times[k]);
          for (int i = 0; i < n; ++i) dump += "," + format_double(batch.at(p, k, i));
          dump += '\n';
        }
    }
  }
  const EmpiricalMoments em = acc.result();
  const auto& times = em.mean.times;
  const auto ode_mean = mean_trajectory(model, r.x0, times);
  const auto ode_cov = covariance_trajectory(model, CovarianceState(r.x0 * r.x0.transpose()), times);

  Columns cols{{"t", times}};
  add_vector_columns(cols, "x", em.mean.values, n);
  add_vector_columns(cols, "se_x", em.mean_std_error, n);
  add_vector_columns(cols, "ode_x", ode_mean.values, n);
  add_matrix_columns(cols, "P", matrices(em.second_moment), n);
  add_matrix_columns(cols, "se_P", em.second_moment_std_error, n);
  add_matrix_columns(cols, "ode_P", matrices(ode_cov), n);

  if (r.opt.format == "json") {
    const std::string path = r.opt.out + "_sim.json";
    write_json(r, path, json{{"n_paths", r.opt.paths}, {"table", columns_to_json(cols)}});
    out << path << "\n";
  } else {
    write_csv(r, r.opt.out + "_sim.csv", cols);
    out << r.opt.out << "_sim.csv\n";
  }
  if (r.opt.dump_paths) {
    std::string head = "# config-hash: " + r.hash + "\npath,t";
    for (int i = 0; i < n; ++i) head += "," + index_name("x", i);
    write_text(r.opt.out + "_paths.csv", head + "\n" + dump);
    out << r.opt.out << "_paths.csv\n";
  }
  return 0;
}

void add_common(CLI::App* app, Options& o) {
  auto* model = app->add_option("--model", o.model_file, "JSON model file {n, A, B, D}");
  auto* preset = app->add_option("--preset", o.preset, "fig1-left, fig1-right, fig3-left, fig3-right");
  model->excludes(preset);
  app->add_option("--alpha", o.alpha, "coupling alpha");
  app->add_option("--beta", o.beta, "noise strength beta");
  app->add_option("--epsilon", o.epsilon, "scale parameter in (0, 1]; the full model uses beta / sqrt(epsilon)");
  app->add_option("--tmax", o.tmax, "time horizon");
  app->add_option("--points", o.points, "output intervals")->capture_default_str();
  app->add_option("--x0", o.x0, "initial state, comma separated (default e1)")->delimiter(',');
  app->add_option("--out", o.out, "output path prefix")->capture_default_str();
  app->add_option("--format", o.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
}

}  // namespace

json model_to_json(const GbmModel& model) {
  return json{{"n", model.dim()},
              {"A", matrix_to_json(model.A())},
              {"B", matrix_to_json(model.B())},
              {"D", matrix_to_json(model.D())}};
}

GbmModel model_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("model: expected a JSON object");
  for (const char* key : {"n", "A", "B", "D"}) {
    if (!j.contains(key)) throw ConfigError(std::string("model: missing field '") + key + "'");
  }
  if (!j["n"].is_number_integer() || j["n"].get<long long>() < 1) {
    throw ConfigError("model: n must be a positive integer");
  }
  const int n = j["n"].get<int>();
  try {
    return GbmModel(matrix_from_json(j["A"], n, "A"), matrix_from_json(j["B"], n, "B"),
                    matrix_from_json(j["D"], n, "D"));
  } catch (const DimensionError& e) {
    throw ConfigError(e.what());
  }
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Moment dynamics and reduced models of geometric Brownian motion", "gbmred"};
  app.require_subcommand(1);
  Options o;

  auto* moments = app.add_subcommand("moments", "mean and second-moment trajectories");
  auto* reduce = app.add_subcommand("reduce", "reduced scalar model of the two-state system");
  auto* compare = app.add_subcommand("compare", "full vs reduced p_zz with gap and Wasserstein columns");
  auto* simulate = app.add_subcommand("simulate", "Euler-Maruyama ensemble moments");
  for (auto* sub : {moments, reduce, compare, simulate}) add_common(sub, o);
  for (auto* sub : {reduce, compare}) {
    sub->add_option("--method", o.method, "adiabatic or im (compare also accepts exact)")
        ->check(CLI::IsMember({"adiabatic", "im", "exact"}))
        ->capture_default_str();
    sub->add_option("--norm", o.norm, "gap norm for the noise coefficient: sup or l2")
        ->check(CLI::IsMember({"sup", "l2"}))
        ->capture_default_str();
  }
  simulate->add_option("--dt", o.dt, "time step")->capture_default_str();
  simulate->add_option("--paths", o.paths, "number of paths")->capture_default_str();
  simulate->add_option("--seed", o.seed, "random seed")->capture_default_str();
  simulate->add_option("--simulator", o.simulator, "cartesian, spherical or spin")
      ->check(CLI::IsMember({"cartesian", "spherical", "spin"}))
      ->capture_default_str();
  simulate->add_flag("--dump-paths", o.dump_paths, "also write every recorded path state");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    for (auto* sub : app.get_subcommands()) out << sub->help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "gbmred: " << e.what() << "\n";
    return 2;
  }
  o.command = app.get_subcommands().front()->get_name();

  try {
    const Resolved r = resolve(o);
    if (o.command == "moments") return cmd_moments(r, out);
    if (o.command == "reduce") return cmd_reduce(r, out);
    if (o.command == "compare") return cmd_compare(r, out);
    return cmd_simulate(r, out);
  } catch (const ConfigError& e) {
    err << "gbmred: " << e.what() << "\n";
    return 2;
  } catch (const CapError& e) {
    err << "gbmred: " << e.what() << "\n";
    return 4;
  } catch (const DomainError& e) {
    err << "gbmred: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "gbmred: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace gbmred::cli

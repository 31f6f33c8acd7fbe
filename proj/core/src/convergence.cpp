#include "pim/convergence.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>

#include <Eigen/QR>
#include <json.hpp>

#include "pim/error.hpp"
#include "pim/io.hpp"

namespace pim {

using json = nlohmann::json;

namespace {

std::string strip_spaces(std::string_view text) {
  std::string out;
  for (char ch : text) {
    if (ch != ' ' && ch != '\t') out += ch;
  }
  return out;
}

std::string csv_quote(const std::string& text) {
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

json params_json(const ManifoldParams& params) {
  json j = json::object();
  for (const auto& [key, value] : params) j[key] = value;
  return j;
}

}  // namespace

double TRule::operator()(double h) const {
  if (kind == Kind::Fixed) return t;
  return c * std::pow(h, gamma);
}

std::string TRule::describe() const {
  if (kind == Kind::Fixed) return "fixed t=" + format_double(t);
  return format_double(c) + "*h^" + format_double(gamma);
}

TRule TRule::fixed(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("bandwidth t must be positive");
  TRule rule;
  rule.kind = Kind::Fixed;
  rule.t = t;
  return rule;
}

TRule TRule::power(double c, double gamma) {
  if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("t-rule coefficient c must be positive");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ValidationError("t-rule exponent must be positive");
  TRule rule;
  rule.kind = Kind::Power;
  rule.c = c;
  rule.gamma = gamma;
  return rule;
}

TRule TRule::parse(std::string_view text, std::optional<double> c, std::optional<double> t) {
  const std::string s = strip_spaces(text);
  if (s == "fixed") {
    if (!t) throw ValidationError("t-rule 'fixed' requires --t");
    return fixed(*t);
  }
  const auto star = s.find("*h^");
  if (star == std::string::npos || star == 0) {
    throw ValidationError("t-rule must be 'fixed' or 'c*h^<gamma>', got '" + std::string(text) + "'");
  }
  const std::string coef = s.substr(0, star);
  const double gamma = parse_double(std::string_view(s).substr(star + 3));
  if (coef == "c") {
    if (!c) throw ValidationError("t-rule 'c*h^gamma' requires --c");
    return power(*c, gamma);
  }
  if (c) throw ValidationError("--c given but the t-rule already has a numeric coefficient");
  return power(parse_double(coef), gamma);
}

std::string_view to_string(SolverChoice solver) {
  switch (solver) {
    case SolverChoice::Auto: return "auto";
    case SolverChoice::Dense: return "dense";
    case SolverChoice::Lanczos: return "lanczos";
  }
  return "auto";
}

SolverChoice parse_solver(std::string_view name) {
  if (name == "auto") return SolverChoice::Auto;
  if (name == "dense") return SolverChoice::Dense;
  if (name == "lanczos") return SolverChoice::Lanczos;
  throw ValidationError("unknown solver '" + std::string(name) + "' (auto, dense, lanczos)");
}

std::string_view to_string(ResidualNorm norm) {
  return norm == ResidualNorm::Mass ? "mass" : "stiffness";
}

ResidualNorm parse_residual_norm(std::string_view name) {
  if (name == "mass") return ResidualNorm::Mass;
  if (name == "stiffness") return ResidualNorm::Stiffness;
  throw ValidationError("unknown residual norm '" + std::string(name) + "' (mass, stiffness)");
}

std::optional<double> LevelResult::residual_for_mode(std::size_t mode) const {
  for (const auto& row : modes) {
    if (row.mode != mode) continue;
    for (const auto& c : clusters) {
      if (c.cluster == row.cluster) return c.residual;
    }
  }
  return std::nullopt;
}

RateFit fit_rate(std::span<const double> h, std::span<const double> e) {
  if (h.size() != e.size()) throw ValidationError("fit_rate: h and error lists differ in length");
  if (h.size() < 3) throw ValidationError("fit_rate needs at least 3 (h, error) pairs");
  const auto n = static_cast<Eigen::Index>(h.size());
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (!(h[k] > 0.0) || !(e[k] > 0.0)) throw ValidationError("fit_rate: h and errors must be positive");
    X(i, 0) = std::log(h[k]);
    X(i, 1) = 1.0;
    y[i] = std::log(e[k]);
  }
  const Eigen::Vector2d coef = X.colPivHouseholderQr().solve(y);
  return {coef[0], coef[1]};
}

double subspace_residual(const Spectrum& spectrum, const GroundTruth& truth, const PointCloud& cloud,
                         const SparseMatrix& norm_matrix, std::size_t cluster) {
  if (cluster >= truth.clusters().size()) throw ValidationError("cluster index out of range");
  const Eigen::Index n = cloud.size();
  if (spectrum.vectors.rows() != n || spectrum.vectors.cols() != spectrum.size()) {
    throw ValidationError("spectrum eigenvectors do not match the cloud size");
  }
  if (norm_matrix.rows() != n || norm_matrix.cols() != n) {
    throw ValidationError("norm matrix does not match the cloud size");
  }
  const EigenCluster& cl = truth.clusters()[cluster];
  std::vector<double> res(spectrum.residual_norms.data(),
                          spectrum.residual_norms.data() + spectrum.residual_norms.size());
  const double window = std::max({0.05 * cl.mu, 3.0 * median(std::move(res)), 1e-8});
  std::vector<Eigen::Index> selected;
  for (Eigen::Index j = 0; j < spectrum.size(); ++j) {
    if (std::abs(spectrum.mu[j] - cl.mu) <= window) selected.push_back(j);
  }
  if (selected.empty()) {
    throw NumericalError("cluster not resolved: no computed eigenvalue within " + format_double(window) +
                         " of " + format_double(cl.mu));
  }
  Eigen::MatrixXd U(n, static_cast<Eigen::Index>(selected.size()));
  for (std::size_t k = 0; k < selected.size(); ++k) {
    U.col(static_cast<Eigen::Index>(k)) = spectrum.vectors.col(selected[k]);
  }
  const Eigen::MatrixXd NU = norm_matrix * U;
  const Eigen::MatrixXd G = U.transpose() * NU;
  const auto gram = G.completeOrthogonalDecomposition();
  const double diag_scale = norm_matrix.diagonal().cwiseAbs().maxCoeff();

  double worst = 0.0;
  Eigen::VectorXd phi(n);
  for (std::size_t mode = cl.first; mode < cl.first + cl.multiplicity; ++mode) {
    for (Eigen::Index i = 0; i < n; ++i) phi[i] = truth.eigenfunction(mode, cloud.point(i));
    const double phi_norm = phi.dot(norm_matrix * phi);
    if (!(phi_norm > 1e-12 * phi.squaredNorm() * diag_scale)) continue;
    const Eigen::VectorXd r = phi - U * gram.solve(NU.transpose() * phi);
    const double r_norm = std::max(0.0, r.dot(norm_matrix * r));
    worst = std::max(worst, std::sqrt(r_norm / phi_norm));
  }
  return worst;
}

double subspace_residual(const Spectrum& spectrum, const GroundTruth& truth, const PimPencil& pencil,
                         std::size_t cluster, ResidualNorm norm) {
  if (!pencil.cloud) throw ValidationError("subspace residual needs the pencil's point cloud");
  return subspace_residual(spectrum, truth, *pencil.cloud, norm == ResidualNorm::Mass ? pencil.B : pencil.A,
                           cluster);
}

LevelResult evaluate_level(const PimPencil& pencil, const Spectrum& spectrum, const GroundTruth& truth,
                           std::size_t modes, ResidualNorm norm) {
  if (!pencil.cloud) throw ValidationError("level evaluation needs the pencil's point cloud");
  LevelResult row;
  row.n = pencil.size();
  row.h = pencil.cloud->h_estimate();
  row.t = pencil.t;
  row.warnings = pencil.warnings;
  const std::size_t count = modes + 1;
  row.modes = eigenvalue_table(spectrum, truth, count);
  for (std::size_t c = 0; c < truth.clusters().size(); ++c) {
    const EigenCluster& cl = truth.clusters()[c];
    if (cl.first + cl.multiplicity > count) break;
    ClusterResidual cr{c, cl.mu, cl.multiplicity, std::nullopt, {}};
    try {
      cr.residual = subspace_residual(spectrum, truth, pencil, c, norm);
    } catch (const NumericalError& e) {
      cr.error = e.what();
    }
    row.clusters.push_back(std::move(cr));
  }
  return row;
}

Spectrum solve_modes(const PimPencil& pencil, Eigen::Index count, const LadderConfig& config) {
  const bool dense = config.solver == SolverChoice::Dense ||
                     (config.solver == SolverChoice::Auto && pencil.size() <= kAutoDenseLimit);
  if (dense) {
    DenseEigOptions opts;
    opts.deflate_constant = config.deflate_constant;
    return dense_generalized_eigs(pencil.A, pencil.B, count, opts);
  }
  LanczosOptions opts;
  opts.tol = config.tol;
  opts.deflate_constant = config.deflate_constant;
  return lanczos_generalized_eigs(pencil.A, pencil.B, count, opts);
}

ConvergenceReport run_ladder(const LadderConfig& input) {
  ConvergenceReport report;
  report.config = input;
  LadderConfig& config = report.config;
  if (config.n_list.empty()) throw ValidationError("ladder needs at least one n");
  for (std::size_t i = 0; i < config.n_list.size(); ++i) {
    if (config.n_list[i] < 2) throw ValidationError("ladder sizes must be at least 2");
    if (i > 0 && config.n_list[i] <= config.n_list[i - 1]) {
      throw ValidationError("ladder sizes must be strictly ascending");
    }
  }
  if (config.modes < 1) throw ValidationError("mode count must be at least 1");
  config.params = resolve_params(config.manifold, config.params);
  const GroundTruth truth = ground_truth(config.manifold, config.params, config.modes + 1);
  const Kernel kernel = make_kernel(config.kernel);

  for (const int n : config.n_list) {
    const auto start = std::chrono::steady_clock::now();
    LevelResult row;
    row.n = n;
    std::string stage = "sample";
    try {
      auto cloud = std::make_shared<const PointCloud>(
          sample_manifold(config.manifold, n, config.params, config.perturbation));
      row.n = cloud->size();
      row.h = cloud->h_estimate();
      row.t = config.t_rule(row.h);
      stage = "assemble";
      AssemblyOptions aopts;
      aopts.graph_mode = config.graph_mode;
      aopts.jitter = config.jitter;
      aopts.threads = config.threads;
      const PimPencil pencil = assemble_pencil(cloud, kernel, row.t, aopts);
      row.warnings = pencil.warnings;
      stage = "eigs";
      const Spectrum spectrum =
          solve_modes(pencil, static_cast<Eigen::Index>(config.modes + 1), config);
      stage = "compare";
      row = evaluate_level(pencil, spectrum, truth, config.modes, config.residual_norm);
    } catch (const std::exception& e) {
      row.modes.clear();
      row.clusters.clear();
      row.error = stage + ": " + e.what();
    }
    row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.rows.push_back(std::move(row));
  }
  fit_report_rates(report);
  return report;
}

void fit_report_rates(ConvergenceReport& report) {
  report.fitted_rates.assign(report.config.modes + 1, std::nullopt);
  for (std::size_t mode = 0; mode <= report.config.modes; ++mode) {
    std::vector<double> h;
    std::vector<double> e;
    bool positive = true;
    for (const auto& row : report.rows) {
      if (!row.ok()) continue;
      for (const auto& m : row.modes) {
        if (m.mode != mode) continue;
        h.push_back(row.h);
        e.push_back(m.abs_error);
        positive = positive && m.abs_error > 0.0 && row.h > 0.0;
      }
    }
    if (h.size() >= 3 && positive) report.fitted_rates[mode] = fit_rate(h, e);
  }
}

std::string report_csv(const ConvergenceReport& report) {
  std::string out =
      "n,h,t,mode,cluster,mu_computed,mu_exact,abs_error,rel_error,subspace_residual,status\n";
  for (const auto& row : report.rows) {
    const std::string prefix =
        std::to_string(row.n) + "," + format_double(row.h) + "," + format_double(row.t) + ",";
    if (!row.ok()) {
      out += prefix + ",,,,,,," + csv_quote(row.error) + "\n";
      continue;
    }
    for (const auto& m : row.modes) {
      const auto residual = row.residual_for_mode(m.mode);
      out += prefix + std::to_string(m.mode) + "," + std::to_string(m.cluster) + "," +
             format_double(m.computed) + "," + format_double(m.exact) + "," + format_double(m.abs_error) +
             "," + format_double(m.rel_error) + "," + (residual ? format_double(*residual) : "") + ",ok\n";
    }
  }
  return out;
}

std::string report_summary_json(const ConvergenceReport& report,
                                const std::vector<std::string>& output_paths) {
  const LadderConfig& c = report.config;
  json config = {{"manifold", std::string(to_string(c.manifold))},
                 {"params", params_json(c.params)},
                 {"n_list", c.n_list},
                 {"t_rule", c.t_rule.describe()},
                 {"kernel", std::string(to_string(c.kernel))},
                 {"modes", c.modes},
                 {"graph_mode", c.graph_mode},
                 {"perturbation",
                  {{"jitter", c.perturbation.jitter},
                   {"warp", c.perturbation.warp},
                   {"seed", c.perturbation.seed}}},
                 {"solver", std::string(to_string(c.solver))},
                 {"mass_jitter", c.jitter},
                 {"deflate_constant", c.deflate_constant},
                 {"tol", c.tol},
                 {"residual_norm", std::string(to_string(c.residual_norm))},
                 {"threads", c.threads}};
  json levels = json::array();
  for (const auto& row : report.rows) {
    json clusters = json::array();
    for (const auto& cr : row.clusters) {
      json entry = {{"cluster", cr.cluster}, {"mu_exact", cr.exact}, {"multiplicity", cr.multiplicity}};
      entry["subspace_residual"] = cr.residual ? json(*cr.residual) : json(nullptr);
      if (!cr.error.empty()) entry["error"] = cr.error;
      clusters.push_back(std::move(entry));
    }
    json level = {{"n", row.n},          {"h", row.h},
                  {"t", row.t},          {"wall_time_s", row.wall_time},
                  {"ok", row.ok()},      {"warnings", row.warnings},
                  {"clusters", clusters}};
    if (!row.ok()) level["error"] = row.error;
    levels.push_back(std::move(level));
  }
  json rates = json::array();
  for (std::size_t mode = 0; mode < report.fitted_rates.size(); ++mode) {
    const auto& fit = report.fitted_rates[mode];
    if (fit) rates.push_back({{"mode", mode}, {"slope", fit->slope}, {"intercept", fit->intercept}});
  }
  json summary = {{"config", config}, {"levels", levels}, {"fitted_rates", rates}, {"outputs", output_paths}};
  return summary.dump(2) + "\n";
}

}  // namespace pim

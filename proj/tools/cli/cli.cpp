#include "cli/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "pim/assembly.hpp"
#include "pim/convergence.hpp"
#include "pim/eigensolve.hpp"
#include "pim/error.hpp"
#include "pim/io.hpp"
#include "pim/kernels.hpp"
#include "pim/operators.hpp"
#include "pim/pointcloud.hpp"

namespace pim::cli {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

ManifoldParams parse_params(const std::vector<std::string>& entries) {
  ManifoldParams params;
  for (const auto& entry : entries) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ValidationError("--param expects key=value, got '" + entry + "'");
    }
    const std::string key = trim(std::string_view(entry).substr(0, eq));
    if (params.count(key)) throw ValidationError("parameter '" + key + "' given twice");
    params[key] = parse_double(trim(std::string_view(entry).substr(eq + 1)));
  }
  return params;
}

std::string relative_reference(const fs::path& target, const fs::path& from_file) {
  const fs::path base = fs::weakly_canonical(fs::absolute(from_file)).parent_path();
  const fs::path rel = fs::weakly_canonical(fs::absolute(target)).lexically_relative(base);
  return rel.empty() ? fs::absolute(target).string() : rel.generic_string();
}

struct SampleArgs {
  std::string manifold;
  int n = 0;
  std::vector<std::string> params;
  double perturb_jitter = 0.0;
  double perturb_warp = 0.0;
  std::uint64_t seed = 0;
  std::string output;
};

struct AssembleArgs {
  std::string input;
  double t = 0.0;
  std::string kernel = "wendland";
  bool graph_mode = false;
  double jitter = 0.0;
  int threads = 1;
  std::string output;
};

struct EigsArgs {
  std::string input;
  int m = 0;
  bool lanczos = false;
  double tol = 1e-10;
  long max_iter = 0;
  double shift = 0.0;
  bool deflate = false;
  double jitter = 0.0;
  bool no_vectors = false;
  std::string output;
};

struct PoissonArgs {
  std::string input;
  std::string f;
  std::string method = "cholesky";
  double tol = 1e-8;
  double jitter = 0.0;
  std::string output;
};

struct ExtendArgs {
  std::string input;
  int mode = 0;
  std::string at;
  std::string output;
};

struct ConvergeArgs {
  std::string manifold;
  std::vector<int> n_list;
  std::vector<std::string> spectra;
  std::string t_rule;
  std::optional<double> c;
  std::optional<double> t;
  std::string kernel = "wendland";
  int m = 6;
  std::vector<std::string> params;
  bool graph_mode = false;
  double perturb_jitter = 0.0;
  double perturb_warp = 0.0;
  std::uint64_t seed = 0;
  std::string solver = "auto";
  bool lanczos = false;
  double jitter = 0.0;
  bool deflate = false;
  double tol = 1e-10;
  std::string residual_norm = "mass";
  int threads = 1;
  std::string output;
};

struct QuadcheckArgs {
  std::string manifold;
  std::vector<int> n_list;
  std::vector<std::string> params;
  double perturb_jitter = 0.0;
  double perturb_warp = 0.0;
  std::uint64_t seed = 0;
  std::string output;
};

Perturbation make_perturbation(double jitter, double warp, std::uint64_t seed) {
  if (jitter < 0.0 || jitter >= 0.5) throw ValidationError("--perturb-jitter must lie in [0, 0.5)");
  if (warp < 0.0 || warp >= 1.0) throw ValidationError("--perturb-warp must lie in [0, 1)");
  return {jitter, warp, seed};
}

void add_perturbation_flags(CLI::App* cmd, double& jitter, double& warp, std::uint64_t& seed) {
  cmd->add_option("--perturb-jitter", jitter,
                  "Nonuniform 1-D sampling: random offset of each point, in grid spacings [0, 0.5)");
  cmd->add_option("--perturb-warp", warp,
                  "Nonuniform 1-D sampling: warp s -> s + w sin(2 pi s)/(2 pi), w in [0, 1)");
  cmd->add_option("--seed", seed, "Seed for --perturb-jitter");
}

void add_config_flag(CLI::App* cmd) {
  // Expanded before parsing; declared here so it shows up in --help.
  cmd->add_option("--config", "Plain-text file of key = value lines, one per flag");
}

int run_sample(const SampleArgs& a, std::ostream& out) {
  const Manifold manifold = parse_manifold(a.manifold);
  const ManifoldParams params = resolve_params(manifold, parse_params(a.params));
  const Perturbation pert = make_perturbation(a.perturb_jitter, a.perturb_warp, a.seed);
  const PointCloud cloud = sample_manifold(manifold, a.n, params, pert);
  std::ostringstream csv;
  write_cloud_csv(cloud, csv);
  write_file_atomic(a.output, csv.str());
  out << "wrote " << a.output << ": " << cloud.size() << " points, h = " << format_double(cloud.h_estimate())
      << "\n";
  return kExitOk;
}

int run_assemble(const AssembleArgs& a, std::ostream& out, std::ostream& err) {
  const Kernel kernel = make_kernel(parse_kernel_family(a.kernel));
  if (a.threads < 1) throw ValidationError("--threads must be at least 1");
  if (a.jitter < 0.0) throw ValidationError("--jitter must be nonnegative");
  std::istringstream in(read_file(a.input));
  auto cloud = std::make_shared<const PointCloud>(read_cloud_csv(in));
  AssemblyOptions opts;
  opts.graph_mode = a.graph_mode;
  opts.jitter = a.jitter;
  opts.threads = a.threads;
  const PimPencil pencil = assemble_pencil(cloud, kernel, a.t, opts);
  for (const auto& w : pencil.warnings) err << "warning: " << w << "\n";
  write_pencil_dir(pencil, a.output);
  out << "wrote " << a.output << ": n = " << pencil.size() << ", nnz(A) = " << pencil.A.nonZeros() << "\n";
  return kExitOk;
}

int run_eigs(const EigsArgs& a, std::ostream& out) {
  if (a.m < 1) throw ValidationError("-m must be at least 1");
  if (!(a.tol > 0.0)) throw ValidationError("--tol must be positive");
  if (a.jitter < 0.0) throw ValidationError("--jitter must be nonnegative");
  PimPencil pencil = read_pencil_dir(a.input);
  if (a.m > pencil.size()) throw ValidationError("-m exceeds the pencil size");
  if (a.jitter > 0.0) apply_mass_jitter(pencil, a.jitter);
  Spectrum spectrum;
  if (a.lanczos) {
    LanczosOptions opts;
    opts.tol = a.tol;
    opts.max_iter = a.max_iter;
    opts.shift = a.shift;
    opts.deflate_constant = a.deflate;
    spectrum = lanczos_generalized_eigs(pencil.A, pencil.B, a.m, opts);
  } else {
    DenseEigOptions opts;
    opts.shift = a.shift;
    opts.deflate_constant = a.deflate;
    spectrum = dense_generalized_eigs(pencil.A, pencil.B, a.m, opts);
  }
  SpectrumFileInfo info;
  info.n = pencil.size();
  info.t = pencil.t;
  info.kernel = std::string(to_string(pencil.kernel));
  info.pencil_dir = relative_reference(a.input, a.output);
  const fs::path out_path(a.output);
  if (!a.no_vectors) {
    const fs::path sidecar = out_path.parent_path() / (out_path.stem().string() + ".vectors.csv");
    write_file_atomic(sidecar, vectors_to_csv(spectrum.vectors));
    info.vectors_csv = sidecar.filename().string();
  }
  write_file_atomic(out_path, spectrum_to_json(spectrum, info));
  out << "wrote " << a.output << ": " << spectrum.size() << " modes (" << spectrum.method << ", "
      << spectrum.formulation << ")\n";
  return kExitOk;
}

int run_poisson(const PoissonArgs& a, std::ostream& out) {
  PoissonOptions opts;
  if (a.method == "cholesky") {
    opts.method = PoissonMethod::Cholesky;
  } else if (a.method == "cg") {
    opts.method = PoissonMethod::ConjugateGradient;
  } else {
    throw ValidationError("--method must be cholesky or cg");
  }
  if (!(a.tol > 0.0)) throw ValidationError("--tol must be positive");
  PimPencil pencil = read_pencil_dir(a.input);
  if (a.jitter > 0.0) apply_mass_jitter(pencil, a.jitter);
  const Eigen::VectorXd f = column_from_csv(read_file(a.f));
  if (f.size() != pencil.size()) throw ValidationError("--f has a different length than the pencil");
  opts.tol = a.tol;
  const PoissonSolution sol = poisson_solve(pencil, std::span<const double>(f.data(), static_cast<std::size_t>(f.size())), opts);
  write_file_atomic(a.output, column_to_csv("u", sol.u));
  out << "wrote " << a.output << ": residual " << format_double(sol.residual) << "\n";
  return kExitOk;
}

int run_extend(const ExtendArgs& a, std::ostream& out) {
  SpectrumFileInfo info;
  const fs::path base = fs::path(a.input).parent_path();
  const Spectrum spectrum = spectrum_from_json(read_file(a.input), base, info);
  if (a.mode < 0 || a.mode >= spectrum.size()) throw ValidationError("--mode out of range");
  if (info.vectors_csv.empty()) throw ValidationError("spectrum has no eigenvector sidecar");
  if (info.pencil_dir.empty()) throw ValidationError("spectrum does not reference its pencil");
  const PimPencil pencil = read_pencil_dir(base / info.pencil_dir);
  if (!pencil.cloud) throw ValidationError("pencil directory has no cloud.csv");
  const PointMatrix at = points_from_csv(read_file(a.at));
  if (at.cols() != pencil.cloud->ambient_dim()) {
    throw ValidationError("--at points have a different dimension than the cloud");
  }
  const KernelField field(pencil.cloud, make_kernel(pencil.kernel), pencil.t);
  const Eigen::VectorXd u = spectrum.vectors.col(a.mode);
  const double mu = spectrum.mu[a.mode];
  Eigen::VectorXd values(at.rows());
  for (Eigen::Index i = 0; i < at.rows(); ++i) {
    const std::span<const double> xi(at.row(i).data(), static_cast<std::size_t>(at.cols()));
    values[i] = field.extend(std::span<const double>(u.data(), static_cast<std::size_t>(u.size())), mu, xi);
  }
  write_file_atomic(a.output, column_to_csv("value", values));
  out << "wrote " << a.output << ": " << values.size() << " values\n";
  return kExitOk;
}

ConvergenceReport chained_report(const ConvergeArgs& a, const LadderConfig& base_config) {
  ConvergenceReport report;
  report.config = base_config;
  report.config.n_list.clear();
  std::optional<GroundTruth> truth;
  for (const auto& file : a.spectra) {
    LevelResult row;
    std::string stage = "read";
    try {
      SpectrumFileInfo info;
      const fs::path base = fs::path(file).parent_path();
      const Spectrum spectrum = spectrum_from_json(read_file(file), base, info);
      row.n = info.n;
      row.t = info.t;
      if (info.pencil_dir.empty()) throw ValidationError(file + " does not reference its pencil");
      const PimPencil pencil = read_pencil_dir(base / info.pencil_dir);
      if (!pencil.cloud || !pencil.cloud->manifold()) {
        throw ValidationError("pencil of " + file + " lacks a cloud with manifold metadata");
      }
      const ManifoldInfo& mi = *pencil.cloud->manifold();
      if (!truth) {
        report.config.manifold = mi.tag;
        report.config.params = mi.params;
        report.config.kernel = pencil.kernel;
        report.config.graph_mode = pencil.graph_mode;
        truth = ground_truth(mi.tag, mi.params, report.config.modes + 1);
      } else if (mi.tag != report.config.manifold || mi.params != report.config.params) {
        throw ValidationError(file + " was sampled from a different manifold");
      }
      stage = "compare";
      row = evaluate_level(pencil, spectrum, *truth, report.config.modes, report.config.residual_norm);
    } catch (const std::exception& e) {
      row.modes.clear();
      row.clusters.clear();
      row.error = stage + ": " + e.what();
    }
    report.config.n_list.push_back(static_cast<int>(row.n));
    report.rows.push_back(std::move(row));
  }
  fit_report_rates(report);
  return report;
}

int run_converge(const ConvergeArgs& a, std::ostream& out, std::ostream& err) {
  if (a.m < 1) throw ValidationError("-m must be at least 1");
  if (a.threads < 1) throw ValidationError("--threads must be at least 1");
  if (a.jitter < 0.0) throw ValidationError("--jitter must be nonnegative");
  LadderConfig config;
  config.modes = static_cast<std::size_t>(a.m);
  config.residual_norm = parse_residual_norm(a.residual_norm);
  config.solver = a.lanczos ? SolverChoice::Lanczos : parse_solver(a.solver);
  config.jitter = a.jitter;
  config.deflate_constant = a.deflate;
  config.tol = a.tol;
  config.threads = a.threads;
  config.kernel = parse_kernel_family(a.kernel);
  config.graph_mode = a.graph_mode;
  config.perturbation = make_perturbation(a.perturb_jitter, a.perturb_warp, a.seed);

  ConvergenceReport report;
  if (!a.spectra.empty()) {
    if (!a.n_list.empty() || !a.manifold.empty()) {
      throw ValidationError("--spectra replaces --manifold and --n; give one or the other");
    }
    report = chained_report(a, config);
  } else {
    if (a.manifold.empty()) throw ValidationError("--manifold is required without --spectra");
    if (a.n_list.empty()) throw ValidationError("--n needs at least one size");
    config.manifold = parse_manifold(a.manifold);
    config.params = resolve_params(config.manifold, parse_params(a.params));
    config.n_list = a.n_list;
    if (!a.t_rule.empty()) {
      config.t_rule = TRule::parse(a.t_rule, a.c, a.t);
    } else if (a.t) {
      config.t_rule = TRule::fixed(*a.t);
    } else {
      config.t_rule = TRule::parse("c*h^0.5", a.c.value_or(0.01), std::nullopt);
    }
    report = run_ladder(config);
  }

  const fs::path dir(a.output);
  const fs::path csv_path = dir / "report.csv";
  const fs::path json_path = dir / "summary.json";
  write_file_atomic(csv_path, report_csv(report));
  write_file_atomic(json_path, report_summary_json(report, {csv_path.generic_string(), json_path.generic_string()}));
  bool failed = false;
  for (const auto& row : report.rows) {
    if (!row.ok()) {
      failed = true;
      err << "level n = " << row.n << " failed: " << row.error << "\n";
    }
    for (const auto& w : row.warnings) err << "warning (n = " << row.n << "): " << w << "\n";
  }
  out << "wrote " << csv_path.generic_string() << " and " << json_path.generic_string() << "\n";
  return failed ? kExitNumerical : kExitOk;
}

int run_quadcheck(const QuadcheckArgs& a, std::ostream& out) {
  if (a.n_list.empty()) throw ValidationError("--n needs at least one size");
  const Manifold manifold = parse_manifold(a.manifold);
  const ManifoldParams params = resolve_params(manifold, parse_params(a.params));
  const Perturbation pert = make_perturbation(a.perturb_jitter, a.perturb_warp, a.seed);
  const auto fns = builtin_test_functions(manifold, params);
  std::string csv = "n,h,function,exact,abs_error\n";
  for (const int n : a.n_list) {
    const PointCloud cloud = sample_manifold(manifold, n, params, pert);
    const auto errors = quadrature_check(cloud, fns);
    for (std::size_t k = 0; k < fns.size(); ++k) {
      csv += std::to_string(cloud.size()) + "," + format_double(cloud.h_estimate()) + "," + fns[k].name + "," +
             format_double(fns[k].exact_integral) + "," + format_double(errors[k]) + "\n";
    }
  }
  if (a.output.empty()) {
    out << csv;
  } else {
    write_file_atomic(a.output, csv);
    out << "wrote " << a.output << "\n";
  }
  return kExitOk;
}

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> expanded;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ValidationError("--config requires a file path");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      expanded.push_back(args[i]);
      continue;
    }
    const auto extra = config_file_args(path);
    expanded.insert(expanded.end(), extra.begin(), extra.end());
  }
  return expanded;
}

}  // namespace

std::vector<std::string> config_file_args(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> args;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(std::string_view(text).substr(0, eq));
    for (char& ch : key) {
      if (ch == '_') ch = '-';
    }
    if (key == "config") throw ValidationError(path + ": nested config files are not supported");
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    if (key == "i" || key == "o" || key == "m") {
      args.push_back("-" + key);
      args.push_back(value);
    } else {
      args.push_back("--" + key + "=" + value);
    }
  }
  return args;
}

int parse_and_dispatch(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Laplace-Beltrami spectra of point clouds by the point integral method", "pimspec"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1, 1);
  app.failure_message(CLI::FailureMessage::help);

  std::function<int()> action;

  SampleArgs sample;
  auto* s = app.add_subcommand("sample", "Sample a built-in manifold into a cloud CSV");
  s->add_option("--manifold", sample.manifold,
                "interval, circle, rectangle, torus, flat_torus, sphere or hemisphere")->required();
  s->add_option("--n", sample.n, "Number of points (points per side for rectangle)")->required();
  s->add_option("--param", sample.params, "Manifold parameter key=value (L, radius, Lx, Ly, R, r)")->take_all();
  add_perturbation_flags(s, sample.perturb_jitter, sample.perturb_warp, sample.seed);
  s->add_option("-o,--output", sample.output, "Cloud CSV to write")->required();
  add_config_flag(s);
  s->callback([&] { action = [&] { return run_sample(sample, out); }; });

  AssembleArgs assemble;
  auto* as = app.add_subcommand("assemble", "Assemble the stiffness/mass pencil of a cloud");
  as->add_option("-i,--input", assemble.input, "Cloud CSV")->required();
  as->add_option("--t", assemble.t, "Bandwidth t > 0")->required();
  as->add_option("--kernel", assemble.kernel, "Kernel family: wendland or gaussian");
  as->add_flag("--graph-mode", assemble.graph_mode, "Use V_j = 1/n instead of the cloud weights");
  as->add_option("--jitter", assemble.jitter, "Add eps*trace(B)/n to the mass diagonal (fallback 1e-12)");
  as->add_option("--threads", assemble.threads, "Worker thread cap");
  as->add_option("-o,--output", assemble.output, "Pencil directory to write")->required();
  add_config_flag(as);
  as->callback([&] { action = [&] { return run_assemble(assemble, out, err); }; });

  EigsArgs eigs;
  auto* e = app.add_subcommand("eigs", "Smallest eigenpairs of a pencil");
  e->add_option("-i,--input", eigs.input, "Pencil directory")->required();
  e->add_option("-m,--modes", eigs.m, "Number of modes, the constant mode included")->required();
  e->add_flag("--lanczos", eigs.lanczos, "Use shift-invert Lanczos instead of the dense solver");
  e->add_option("--tol", eigs.tol, "Lanczos relative residual tolerance");
  e->add_option("--max-iter", eigs.max_iter, "Lanczos basis cap (0 = automatic)");
  e->add_option("--shift", eigs.shift, "Shift sigma of A + sigma B (0 = automatic)");
  e->add_flag("--deflate-constant", eigs.deflate, "Deflate the known constant mode");
  e->add_option("--jitter", eigs.jitter, "Add eps*trace(B)/n to the mass diagonal before solving");
  e->add_flag("--no-vectors", eigs.no_vectors, "Skip the eigenvector sidecar CSV");
  e->add_option("-o,--output", eigs.output, "Spectrum JSON to write (vectors go to <stem>.vectors.csv)")
      ->required();
  add_config_flag(e);
  e->callback([&] { action = [&] { return run_eigs(eigs, out); }; });

  PoissonArgs poisson;
  auto* p = app.add_subcommand("poisson", "Solve the discrete Neumann Poisson problem -Laplace u = f");
  p->add_option("-i,--input", poisson.input, "Pencil directory")->required();
  p->add_option("--f", poisson.f, "Single-column CSV of f at the samples")->required();
  p->add_option("--method", poisson.method, "cholesky or cg");
  p->add_option("--tol", poisson.tol, "Relative residual tolerance");
  p->add_option("--jitter", poisson.jitter, "Add eps*trace(B)/n to the mass diagonal");
  p->add_option("-o,--output", poisson.output, "Single-column CSV of u to write")->required();
  add_config_flag(p);
  p->callback([&] { action = [&] { return run_poisson(poisson, out); }; });

  ExtendArgs extend;
  auto* x = app.add_subcommand("extend", "Evaluate the extension of an eigenvector at arbitrary points");
  x->add_option("-i,--input", extend.input, "Spectrum JSON written by eigs")->required();
  x->add_option("--mode", extend.mode, "Mode index")->required();
  x->add_option("--at", extend.at, "CSV of query points with header x1..xd")->required();
  x->add_option("-o,--output", extend.output, "Single-column CSV of values to write")->required();
  add_config_flag(x);
  x->callback([&] { action = [&] { return run_extend(extend, out); }; });

  ConvergeArgs conv;
  auto* c = app.add_subcommand("converge", "Refinement study against the analytic Neumann spectrum");
  c->add_option("--manifold", conv.manifold, "Manifold with a closed-form spectrum");
  c->add_option("--n", conv.n_list, "Comma-separated ascending ladder of sizes")->delimiter(',')->take_all();
  c->add_option("--spectra", conv.spectra,
                "Comma-separated spectrum JSON files from eigs (chained route, replaces sampling)")
      ->delimiter(',')
      ->take_all();
  c->add_option("--t-rule", conv.t_rule, "Bandwidth rule: \"c*h^<gamma>\" or \"fixed\" (default c*h^0.5, or fixed when only --t is given)");
  c->add_option("--c", conv.c, "Coefficient c of the t-rule (default 0.01)");
  c->add_option("--t", conv.t, "Bandwidth for --t-rule fixed");
  c->add_option("--kernel", conv.kernel, "Kernel family: wendland or gaussian");
  c->add_option("-m,--modes", conv.m, "Nonzero modes compared (m + 1 are solved)");
  c->add_option("--param", conv.params, "Manifold parameter key=value")->take_all();
  c->add_flag("--graph-mode", conv.graph_mode, "Use V_j = 1/n instead of the cloud weights");
  add_perturbation_flags(c, conv.perturb_jitter, conv.perturb_warp, conv.seed);
  c->add_option("--solver", conv.solver, "auto, dense or lanczos");
  c->add_flag("--lanczos", conv.lanczos, "Same as --solver lanczos");
  c->add_option("--jitter", conv.jitter, "Add eps*trace(B)/n to the mass diagonal");
  c->add_flag("--deflate-constant", conv.deflate, "Deflate the known constant mode");
  c->add_option("--tol", conv.tol, "Lanczos relative residual tolerance");
  c->add_option("--residual-norm", conv.residual_norm, "Subspace residual norm: mass or stiffness");
  c->add_option("--threads", conv.threads, "Worker thread cap");
  c->add_option("-o,--output", conv.output, "Report directory (report.csv, summary.json)")->required();
  add_config_flag(c);
  c->callback([&] { action = [&] { return run_converge(conv, out, err); }; });

  QuadcheckArgs quad;
  auto* q = app.add_subcommand("quadcheck", "Quadrature errors of a sampler on its built-in test functions");
  q->add_option("--manifold", quad.manifold, "Manifold to sample")->required();
  q->add_option("--n", quad.n_list, "Comma-separated sizes")->delimiter(',')->take_all()->required();
  q->add_option("--param", quad.params, "Manifold parameter key=value")->take_all();
  add_perturbation_flags(q, quad.perturb_jitter, quad.perturb_warp, quad.seed);
  q->add_option("-o,--output", quad.output, "CSV to write (stdout when omitted)");
  add_config_flag(q);
  q->callback([&] { action = [&] { return run_quadcheck(quad, out); }; });

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& pe) {
    const int code = app.exit(pe, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitValidation;
  }

  try {
    return action();
  } catch (const NumericalError& ne) {
    err << "numerical failure: " << ne.what() << "\n";
    if (!ne.diagnostics().empty()) err << ne.diagnostics() << "\n";
    return kExitNumerical;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace pim::cli

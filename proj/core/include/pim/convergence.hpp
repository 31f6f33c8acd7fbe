#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "pim/assembly.hpp"
#include "pim/eigensolve.hpp"
#include "pim/ground_truth.hpp"
#include "pim/kernels.hpp"
#include "pim/pointcloud.hpp"

namespace pim {

/// Bandwidth as a function of the fill distance: fixed t or t = c h^gamma.
struct TRule {
  enum class Kind { Fixed, Power };
  Kind kind = Kind::Power;
  double t = 0.0;
  double c = 0.01;
  double gamma = 0.5;

  double operator()(double h) const;
  std::string describe() const;

  static TRule fixed(double t);
  static TRule power(double c, double gamma);
  /// Accepts "c*h^<gamma>" (coefficient taken from `c`), "<number>*h^<gamma>"
  /// and "fixed" (bandwidth taken from `t`).
  static TRule parse(std::string_view text, std::optional<double> c, std::optional<double> t);
};

enum class SolverChoice { Auto, Dense, Lanczos };
std::string_view to_string(SolverChoice solver);
SolverChoice parse_solver(std::string_view name);

/// Inner product used by subspace_residual: mass (B) or stiffness (A, the
/// H1-seminorm surrogate).
enum class ResidualNorm { Mass, Stiffness };
std::string_view to_string(ResidualNorm norm);
ResidualNorm parse_residual_norm(std::string_view name);

/// Auto picks the dense path up to this many points.
inline constexpr Eigen::Index kAutoDenseLimit = 1500;

struct LadderConfig {
  Manifold manifold = Manifold::Interval;
  ManifoldParams params;
  std::vector<int> n_list;
  TRule t_rule;
  KernelFamily kernel = KernelFamily::Wendland;
  /// Nonzero modes compared; m + 1 modes are solved.
  std::size_t modes = 6;
  bool graph_mode = false;
  Perturbation perturbation;
  SolverChoice solver = SolverChoice::Auto;
  double jitter = 0.0;
  bool deflate_constant = false;
  double tol = 1e-10;
  ResidualNorm residual_norm = ResidualNorm::Mass;
  int threads = 1;
};

struct ClusterResidual {
  std::size_t cluster = 0;
  double exact = 0.0;
  std::size_t multiplicity = 0;
  std::optional<double> residual;
  std::string error;
};

struct LevelResult {
  Eigen::Index n = 0;
  double h = 0.0;
  double t = 0.0;
  std::vector<ModeComparison> modes;
  std::vector<ClusterResidual> clusters;
  double wall_time = 0.0;
  /// Non-empty when the level failed; `modes` is then empty.
  std::string error;
  std::vector<std::string> warnings;

  bool ok() const noexcept { return error.empty(); }
  /// Residual of the cluster containing analytic `mode`, if computed.
  std::optional<double> residual_for_mode(std::size_t mode) const;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
};

struct ConvergenceReport {
  LadderConfig config;
  std::vector<LevelResult> rows;
  /// Per mode: slope of log |mu - mu_exact| against log h; present only with
  /// at least three successful levels and positive errors.
  std::vector<std::optional<RateFit>> fitted_rates;
};

/// Least-squares fit of log e = slope log h + intercept. Requires >= 3 pairs,
/// all positive.
RateFit fit_rate(std::span<const double> h, std::span<const double> e);

/// Samples each analytic eigenfunction of `cluster` at the cloud, projects it
/// onto the span of computed eigenvectors whose mu lies within
/// max(5% mu_c, 3 median residual, 1e-8) of the cluster value, and returns the
/// largest relative residual ||phi - proj phi||_N / ||phi||_N, N = `norm_matrix`.
/// Throws NumericalError("cluster not resolved") when the window is empty.
double subspace_residual(const Spectrum& spectrum, const GroundTruth& truth, const PointCloud& cloud,
                         const SparseMatrix& norm_matrix, std::size_t cluster);
double subspace_residual(const Spectrum& spectrum, const GroundTruth& truth, const PimPencil& pencil,
                         std::size_t cluster, ResidualNorm norm = ResidualNorm::Mass);

/// Eigenvalue table and cluster residuals for one solved level. The pencil
/// must carry its cloud.
LevelResult evaluate_level(const PimPencil& pencil, const Spectrum& spectrum, const GroundTruth& truth,
                           std::size_t modes, ResidualNorm norm);

/// Smallest `count` modes with the configured solver, tolerance and shift
/// options.
Spectrum solve_modes(const PimPencil& pencil, Eigen::Index count, const LadderConfig& config);

/// Sample, assemble, solve and compare for every n; per-level failures are
/// recorded in the row and the ladder continues.
ConvergenceReport run_ladder(const LadderConfig& config);

/// Fills fitted_rates from the rows.
void fit_report_rates(ConvergenceReport& report);

/// One row per (level, mode); deterministic for identical inputs.
std::string report_csv(const ConvergenceReport& report);
/// Config echo, per-level timing and warnings, fitted rates and the given
/// output paths.
std::string report_summary_json(const ConvergenceReport& report,
                                const std::vector<std::string>& output_paths);

}  // namespace pim

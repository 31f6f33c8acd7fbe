#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace pim {

/// Built-in test manifolds with closed-form Neumann spectra (except Torus,
/// whose embedded spectrum has no closed form and is used for sampling and
/// quadrature only).
enum class Manifold { Interval, Circle, Rectangle, Torus, FlatTorus, Sphere, Hemisphere };

std::string_view to_string(Manifold manifold);
Manifold parse_manifold(std::string_view name);

/// Named real parameters of a manifold (L, radius, Lx, Ly, R, r).
using ManifoldParams = std::map<std::string, double, std::less<>>;

/// Fills in defaults and rejects keys the manifold does not know.
ManifoldParams resolve_params(Manifold manifold, const ManifoldParams& given);

struct ManifoldInfo {
  Manifold tag;
  ManifoldParams params;
};

/// n x d ambient coordinates, one point per row.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Sample points P (rows of an n x d matrix) with positive volume weights V.
class PointCloud {
 public:
  PointCloud(PointMatrix points, Eigen::VectorXd weights, int intrinsic_dim,
             std::vector<bool> boundary = {}, std::optional<ManifoldInfo> manifold = std::nullopt);

  Eigen::Index size() const noexcept { return points_.rows(); }
  int ambient_dim() const noexcept { return static_cast<int>(points_.cols()); }
  int intrinsic_dim() const noexcept { return intrinsic_dim_; }

  const PointMatrix& points() const noexcept { return points_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  const std::vector<bool>& boundary() const noexcept { return boundary_; }
  const std::optional<ManifoldInfo>& manifold() const noexcept { return manifold_; }

  /// Fill distance h (max nearest-neighbour distance), computed on construction.
  double h_estimate() const noexcept { return h_estimate_; }

  std::span<const double> point(Eigen::Index i) const;

 private:
  PointMatrix points_;
  Eigen::VectorXd weights_;
  int intrinsic_dim_;
  std::vector<bool> boundary_;
  std::optional<ManifoldInfo> manifold_;
  double h_estimate_ = 0.0;
};

/// Seeded nonuniform perturbation for the 1-D samplers (interval, circle).
/// Parameter positions are warped by s -> s + warp sin(2 pi s) / (2 pi) and
/// jittered by up to `jitter` grid spacings; weights are recomputed as 1-D
/// Voronoi cell lengths in parameter space.
struct Perturbation {
  double jitter = 0.0;
  double warp = 0.0;
  std::uint64_t seed = 0;

  bool active() const noexcept { return jitter != 0.0 || warp != 0.0; }
};

PointCloud sample_interval(int n, double length, const Perturbation& perturbation = {});
PointCloud sample_circle(int n, double radius, const Perturbation& perturbation = {});
PointCloud sample_rectangle(int n_per_side, double lx, double ly);
PointCloud sample_torus(int n, double major_radius, double minor_radius);
/// Flat torus: product of two circles embedded isometrically in R^4.
PointCloud sample_flat_torus(int n, double radius_u, double radius_v);
/// Fibonacci lattice on the unit sphere, V_i = 4 pi / n.
PointCloud sample_sphere(int n);
/// Latitude bands on the unit upper hemisphere with exact band areas.
PointCloud sample_hemisphere(int n);

PointCloud sample_manifold(Manifold manifold, int n, const ManifoldParams& params,
                           const Perturbation& perturbation = {});

/// Max over points of the distance to the nearest other point.
double estimate_fill_distance(const PointMatrix& points);
double estimate_fill_distance(const PointCloud& cloud);

struct TestFunction {
  std::string name;
  std::function<double(std::span<const double>)> f;
  double exact_integral;
};

/// Constants, coordinate monomials and low-frequency trig with exact integrals.
std::vector<TestFunction> builtin_test_functions(Manifold manifold, const ManifoldParams& params);

/// |exact - sum_i f(p_i) V_i| for each function.
std::vector<double> quadrature_check(const PointCloud& cloud, std::span<const TestFunction> fns);

/// CSV with an optional leading "# key=value ..." metadata line, a header
/// x1..xd,V,boundary and one row per point, 17 significant digits.
void write_cloud_csv(const PointCloud& cloud, std::ostream& out);
PointCloud read_cloud_csv(std::istream& in);

}  // namespace pim

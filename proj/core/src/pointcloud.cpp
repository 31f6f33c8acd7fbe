#include "pim/pointcloud.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "pim/error.hpp"
#include "pim/io.hpp"
#include "pim/neighbor_index.hpp"

namespace pim {

namespace {

constexpr double kPi = std::numbers::pi;

struct ManifoldName {
  Manifold tag;
  std::string_view name;
};

constexpr ManifoldName kManifoldNames[] = {
    {Manifold::Interval, "interval"},   {Manifold::Circle, "circle"},
    {Manifold::Rectangle, "rectangle"}, {Manifold::Torus, "torus"},
    {Manifold::FlatTorus, "flat_torus"}, {Manifold::Sphere, "sphere"},
    {Manifold::Hemisphere, "hemisphere"},
};

ManifoldParams default_params(Manifold manifold) {
  switch (manifold) {
    case Manifold::Interval:
      return {{"L", kPi}};
    case Manifold::Circle:
      return {{"radius", 1.0}};
    case Manifold::Rectangle:
      return {{"Lx", 1.0}, {"Ly", 1.0}};
    case Manifold::Torus:
      return {{"R", 2.0}, {"r", 1.0}};
    case Manifold::FlatTorus:
      return {{"R", 1.0}, {"r", 1.0}};
    case Manifold::Sphere:
    case Manifold::Hemisphere:
      return {};
  }
  return {};
}

void require_min(int n, int minimum, std::string_view what) {
  if (n < minimum) {
    throw ValidationError(std::string(what) + ": n = " + std::to_string(n) +
                          " is below the minimum " + std::to_string(minimum));
  }
}

// Warped, jittered, sorted parameter positions in [0, 1).
std::vector<double> perturbed_parameters(int n, const Perturbation& p, bool periodic) {
  if (!(std::abs(p.warp) < 1.0)) throw ValidationError("perturbation warp must lie in (-1, 1)");
  if (!(p.jitter >= 0.0 && p.jitter < 1.0)) {
    throw ValidationError("perturbation jitter must lie in [0, 1)");
  }
  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  std::vector<double> s(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double u = (i + 0.5) / n + p.jitter * unit(rng) / n;
    if (periodic) {
      u -= std::floor(u);
    } else {
      u = std::clamp(u, 0.0, 1.0);
    }
    s[i] = u + p.warp * std::sin(2.0 * kPi * u) / (2.0 * kPi);
  }
  std::sort(s.begin(), s.end());
  return s;
}

// Voronoi cell lengths of sorted positions on [0, 1] (or the unit circle).
std::vector<double> voronoi_lengths(const std::vector<double>& s, bool periodic) {
  const std::size_t n = s.size();
  std::vector<double> len(n);
  for (std::size_t i = 0; i < n; ++i) {
    double left;
    double right;
    if (i > 0) {
      left = 0.5 * (s[i - 1] + s[i]);
    } else {
      left = periodic ? 0.5 * (s[n - 1] - 1.0 + s[0]) : 0.0;
    }
    if (i + 1 < n) {
      right = 0.5 * (s[i] + s[i + 1]);
    } else {
      right = periodic ? 0.5 * (s[n - 1] + s[0] + 1.0) : 1.0;
    }
    len[i] = right - left;
  }
  return len;
}

std::string format_params_line(const PointCloud& cloud) {
  std::string line = "# intrinsic_dim=" + std::to_string(cloud.intrinsic_dim());
  if (cloud.manifold()) {
    line += " manifold=" + std::string(to_string(cloud.manifold()->tag));
    for (const auto& [key, value] : cloud.manifold()->params) {
      line += " " + key + "=" + format_double(value);
    }
  }
  return line;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::string_view to_string(Manifold manifold) {
  for (const auto& entry : kManifoldNames) {
    if (entry.tag == manifold) return entry.name;
  }
  return "unknown";
}

Manifold parse_manifold(std::string_view name) {
  for (const auto& entry : kManifoldNames) {
    if (entry.name == name) return entry.tag;
  }
  throw ValidationError("unknown manifold '" + std::string(name) + "'");
}

ManifoldParams resolve_params(Manifold manifold, const ManifoldParams& given) {
  ManifoldParams params = default_params(manifold);
  for (const auto& [key, value] : given) {
    auto it = params.find(key);
    if (it == params.end()) {
      throw ValidationError("manifold " + std::string(to_string(manifold)) +
                            " has no parameter '" + key + "'");
    }
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw ValidationError("manifold parameter " + key + " must be positive");
    }
    it->second = value;
  }
  return params;
}

PointCloud::PointCloud(PointMatrix points, Eigen::VectorXd weights, int intrinsic_dim,
                       std::vector<bool> boundary, std::optional<ManifoldInfo> manifold)
    : points_(std::move(points)),
      weights_(std::move(weights)),
      intrinsic_dim_(intrinsic_dim),
      boundary_(std::move(boundary)),
      manifold_(std::move(manifold)) {
  const auto n = points_.rows();
  if (n < 2) throw ValidationError("point cloud needs at least 2 points");
  if (weights_.size() != n) throw ValidationError("weights length does not match point count");
  if (intrinsic_dim_ < 1 || intrinsic_dim_ > points_.cols()) {
    throw ValidationError("intrinsic dimension must satisfy 1 <= k <= d");
  }
  if (!points_.allFinite()) throw ValidationError("point coordinates must be finite");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i])) {
      throw ValidationError("volume weights must be strictly positive");
    }
  }
  if (boundary_.empty()) boundary_.assign(static_cast<std::size_t>(n), false);
  if (static_cast<Eigen::Index>(boundary_.size()) != n) {
    throw ValidationError("boundary flags length does not match point count");
  }
  h_estimate_ = estimate_fill_distance(points_);
}

std::span<const double> PointCloud::point(Eigen::Index i) const {
  return {points_.row(i).data(), static_cast<std::size_t>(points_.cols())};
}

PointCloud sample_interval(int n, double length, const Perturbation& perturbation) {
  require_min(n, 2, "interval");
  if (!(length > 0.0)) throw ValidationError("interval length must be positive");
  PointMatrix p(n, 1);
  Eigen::VectorXd v(n);
  std::vector<bool> boundary(static_cast<std::size_t>(n), false);
  if (perturbation.active()) {
    const auto s = perturbed_parameters(n, perturbation, false);
    const auto len = voronoi_lengths(s, false);
    for (int i = 0; i < n; ++i) {
      p(i, 0) = length * s[i];
      v[i] = length * len[i];
    }
  } else {
    for (int i = 0; i < n; ++i) {
      p(i, 0) = (i + 0.5) * length / n;
      v[i] = length / n;
    }
  }
  boundary.front() = boundary.back() = true;
  return {std::move(p), std::move(v), 1, std::move(boundary),
          ManifoldInfo{Manifold::Interval, {{"L", length}}}};
}

PointCloud sample_circle(int n, double radius, const Perturbation& perturbation) {
  require_min(n, 3, "circle");
  if (!(radius > 0.0)) throw ValidationError("circle radius must be positive");
  PointMatrix p(n, 2);
  Eigen::VectorXd v(n);
  std::vector<double> s(static_cast<std::size_t>(n));
  std::vector<double> len(static_cast<std::size_t>(n), 1.0 / n);
  if (perturbation.active()) {
    s = perturbed_parameters(n, perturbation, true);
    len = voronoi_lengths(s, true);
  } else {
    for (int i = 0; i < n; ++i) s[i] = (i + 0.5) / n;
  }
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * kPi * s[i];
    p(i, 0) = radius * std::cos(a);
    p(i, 1) = radius * std::sin(a);
    v[i] = 2.0 * kPi * radius * len[i];
  }
  return {std::move(p), std::move(v), 1, {}, ManifoldInfo{Manifold::Circle, {{"radius", radius}}}};
}

PointCloud sample_rectangle(int n_per_side, double lx, double ly) {
  require_min(n_per_side, 2, "rectangle (points per side)");
  if (!(lx > 0.0 && ly > 0.0)) throw ValidationError("rectangle sides must be positive");
  const int n = n_per_side * n_per_side;
  PointMatrix p(n, 2);
  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, (lx / n_per_side) * (ly / n_per_side));
  std::vector<bool> boundary(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n_per_side; ++i) {
    for (int j = 0; j < n_per_side; ++j) {
      const int row = i * n_per_side + j;
      p(row, 0) = (i + 0.5) * lx / n_per_side;
      p(row, 1) = (j + 0.5) * ly / n_per_side;
      boundary[row] = i == 0 || j == 0 || i == n_per_side - 1 || j == n_per_side - 1;
    }
  }
  return {std::move(p), std::move(v), 2, std::move(boundary),
          ManifoldInfo{Manifold::Rectangle, {{"Lx", lx}, {"Ly", ly}}}};
}

namespace {

std::pair<int, int> torus_grid(int n, double ru, double rv) {
  // Even counts keep the grid symmetric under a half turn in each angle.
  const int nu = std::max(4, 2 * static_cast<int>(std::lround(0.5 * std::sqrt(n * ru / rv))));
  const int nv = std::max(4, 2 * static_cast<int>(std::lround(0.5 * n / nu)));
  return {nu, nv};
}

}  // namespace

PointCloud sample_torus(int n, double major_radius, double minor_radius) {
  require_min(n, 9, "torus");
  if (!(major_radius > minor_radius && minor_radius > 0.0)) {
    throw ValidationError("torus needs R > r > 0");
  }
  const auto [nu, nv] = torus_grid(n, major_radius, minor_radius);
  const int total = nu * nv;
  PointMatrix p(total, 3);
  Eigen::VectorXd v(total);
  const double du = 2.0 * kPi / nu;
  const double dv = 2.0 * kPi / nv;
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      const int row = i * nv + j;
      const double u = (i + 0.5) * du;
      const double w = (j + 0.5) * dv;
      const double ring = major_radius + minor_radius * std::cos(w);
      p(row, 0) = ring * std::cos(u);
      p(row, 1) = ring * std::sin(u);
      p(row, 2) = minor_radius * std::sin(w);
      v[row] = du * dv * minor_radius * ring;
    }
  }
  return {std::move(p), std::move(v), 2, {},
          ManifoldInfo{Manifold::Torus, {{"R", major_radius}, {"r", minor_radius}}}};
}

PointCloud sample_flat_torus(int n, double radius_u, double radius_v) {
  require_min(n, 9, "flat_torus");
  if (!(radius_u > 0.0 && radius_v > 0.0)) throw ValidationError("flat torus radii must be positive");
  const auto [nu, nv] = torus_grid(n, radius_u, radius_v);
  const int total = nu * nv;
  PointMatrix p(total, 4);
  Eigen::VectorXd v =
      Eigen::VectorXd::Constant(total, (2.0 * kPi * radius_u / nu) * (2.0 * kPi * radius_v / nv));
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      const int row = i * nv + j;
      const double u = 2.0 * kPi * (i + 0.5) / nu;
      const double w = 2.0 * kPi * (j + 0.5) / nv;
      p(row, 0) = radius_u * std::cos(u);
      p(row, 1) = radius_u * std::sin(u);
      p(row, 2) = radius_v * std::cos(w);
      p(row, 3) = radius_v * std::sin(w);
    }
  }
  return {std::move(p), std::move(v), 2, {},
          ManifoldInfo{Manifold::FlatTorus, {{"R", radius_u}, {"r", radius_v}}}};
}

PointCloud sample_sphere(int n) {
  require_min(n, 4, "sphere");
  PointMatrix p(n, 3);
  const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * i;
    p(i, 0) = rho * std::cos(phi);
    p(i, 1) = rho * std::sin(phi);
    p(i, 2) = z;
  }
  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 4.0 * kPi / n);
  return {std::move(p), std::move(v), 2, {}, ManifoldInfo{Manifold::Sphere, {}}};
}

PointCloud sample_hemisphere(int n) {
  require_min(n, 4, "hemisphere");
  const double spacing = std::sqrt(2.0 * kPi / n);
  const int bands = std::max(1, static_cast<int>(std::lround(0.5 * kPi / spacing)));

  std::vector<double> area(static_cast<std::size_t>(bands));
  for (int b = 0; b < bands; ++b) {
    const double top = 0.5 * kPi * b / bands;
    const double bottom = 0.5 * kPi * (b + 1) / bands;
    area[b] = 2.0 * kPi * (std::cos(top) - std::cos(bottom));
  }
  // Largest-remainder allocation of n points proportionally to band area.
  std::vector<int> count(static_cast<std::size_t>(bands));
  std::vector<std::pair<double, int>> remainder;
  int allotted = 0;
  for (int b = 0; b < bands; ++b) {
    const double exact = n * area[b] / (2.0 * kPi);
    count[b] = static_cast<int>(std::floor(exact));
    allotted += count[b];
    remainder.emplace_back(-(exact - count[b]), b);
  }
  std::sort(remainder.begin(), remainder.end());
  for (int k = 0; allotted < n; ++k, ++allotted) ++count[remainder[k].second];
  for (int b = 0; b < bands; ++b) {
    if (count[b] == 0) {
      ++count[b];
      --*std::max_element(count.begin(), count.end());
    }
  }

  PointMatrix p(n, 3);
  Eigen::VectorXd v(n);
  std::vector<bool> boundary(static_cast<std::size_t>(n), false);
  int row = 0;
  for (int b = 0; b < bands; ++b) {
    const double theta = 0.5 * kPi * (b + 0.5) / bands;
    for (int k = 0; k < count[b]; ++k, ++row) {
      const double phi = 2.0 * kPi * (k + 0.5 * (b % 2)) / count[b];
      p(row, 0) = std::sin(theta) * std::cos(phi);
      p(row, 1) = std::sin(theta) * std::sin(phi);
      p(row, 2) = std::cos(theta);
      v[row] = area[b] / count[b];
      boundary[row] = b == bands - 1;
    }
  }
  return {std::move(p), std::move(v), 2, std::move(boundary),
          ManifoldInfo{Manifold::Hemisphere, {}}};
}

PointCloud sample_manifold(Manifold manifold, int n, const ManifoldParams& given,
                           const Perturbation& perturbation) {
  const ManifoldParams params = resolve_params(manifold, given);
  if (perturbation.active() && manifold != Manifold::Interval && manifold != Manifold::Circle) {
    throw ValidationError("perturbed sampling is only available for interval and circle");
  }
  switch (manifold) {
    case Manifold::Interval:
      return sample_interval(n, params.at("L"), perturbation);
    case Manifold::Circle:
      return sample_circle(n, params.at("radius"), perturbation);
    case Manifold::Rectangle:
      return sample_rectangle(n, params.at("Lx"), params.at("Ly"));
    case Manifold::Torus:
      return sample_torus(n, params.at("R"), params.at("r"));
    case Manifold::FlatTorus:
      return sample_flat_torus(n, params.at("R"), params.at("r"));
    case Manifold::Sphere:
      return sample_sphere(n);
    case Manifold::Hemisphere:
      return sample_hemisphere(n);
  }
  throw ValidationError("unknown manifold");
}

double estimate_fill_distance(const PointMatrix& points) {
  const auto n = points.rows();
  if (n < 2) throw ValidationError("fill distance needs at least 2 points");
  // A cell of diag / n^(1/d) holds at least about one point on average for any k <= d.
  double diag = 0.0;
  for (Eigen::Index c = 0; c < points.cols(); ++c) {
    const double span = points.col(c).maxCoeff() - points.col(c).minCoeff();
    diag += span * span;
  }
  diag = std::sqrt(diag);
  if (diag == 0.0) return 0.0;
  const double cell = diag / std::pow(static_cast<double>(n), 1.0 / points.cols());
  NeighborIndex index(points, cell);
  double h = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) h = std::max(h, index.nearest_other_distance(i));
  return h;
}

double estimate_fill_distance(const PointCloud& cloud) { return cloud.h_estimate(); }

std::vector<TestFunction> builtin_test_functions(Manifold manifold, const ManifoldParams& given) {
  const ManifoldParams params = resolve_params(manifold, given);
  const double e = std::numbers::e;
  std::vector<TestFunction> fns;
  switch (manifold) {
    case Manifold::Interval: {
      const double L = params.at("L");
      fns.push_back({"one", [](auto) { return 1.0; }, L});
      fns.push_back({"x", [](auto p) { return p[0]; }, L * L / 2});
      fns.push_back({"x^2", [](auto p) { return p[0] * p[0]; }, L * L * L / 3});
      fns.push_back({"cos(x)", [](auto p) { return std::cos(p[0]); }, std::sin(L)});
      fns.push_back({"cos(2x)", [](auto p) { return std::cos(2 * p[0]); }, std::sin(2 * L) / 2});
      fns.push_back({"exp(x/L)", [L](auto p) { return std::exp(p[0] / L); }, L * (e - 1)});
      break;
    }
    case Manifold::Circle: {
      const double r = params.at("radius");
      fns.push_back({"one", [](auto) { return 1.0; }, 2 * kPi * r});
      fns.push_back({"x^2", [](auto p) { return p[0] * p[0]; }, kPi * r * r * r});
      fns.push_back({"x^4", [](auto p) { return std::pow(p[0], 4); }, 0.75 * kPi * std::pow(r, 5)});
      fns.push_back({"exp(x/r)", [r](auto p) { return std::exp(p[0] / r); },
                     2 * kPi * r * std::cyl_bessel_i(0.0, 1.0)});
      fns.push_back({"|x|", [](auto p) { return std::abs(p[0]); }, 4 * r * r});
      break;
    }
    case Manifold::Rectangle: {
      const double lx = params.at("Lx");
      const double ly = params.at("Ly");
      fns.push_back({"one", [](auto) { return 1.0; }, lx * ly});
      fns.push_back({"x^2", [](auto p) { return p[0] * p[0]; }, lx * lx * lx * ly / 3});
      fns.push_back({"x^2 y", [](auto p) { return p[0] * p[0] * p[1]; },
                     (lx * lx * lx / 3) * (ly * ly / 2)});
      fns.push_back({"exp(x/Lx+y/Ly)", [lx, ly](auto p) { return std::exp(p[0] / lx + p[1] / ly); },
                     lx * ly * (e - 1) * (e - 1)});
      break;
    }
    case Manifold::Torus: {
      const double R = params.at("R");
      const double r = params.at("r");
      fns.push_back({"one", [](auto) { return 1.0; }, 4 * kPi * kPi * R * r});
      fns.push_back({"z^2", [](auto p) { return p[2] * p[2]; }, 2 * kPi * kPi * R * r * r * r});
      fns.push_back({"x^2+y^2", [](auto p) { return p[0] * p[0] + p[1] * p[1]; },
                     4 * kPi * kPi * r * (R * R * R + 1.5 * R * r * r)});
      fns.push_back({"|z|", [](auto p) { return std::abs(p[2]); }, 8 * kPi * R * r * r});
      break;
    }
    case Manifold::FlatTorus: {
      const double R = params.at("R");
      const double r = params.at("r");
      fns.push_back({"one", [](auto) { return 1.0; }, 4 * kPi * kPi * R * r});
      fns.push_back({"x1^2", [](auto p) { return p[0] * p[0]; }, 2 * kPi * kPi * R * R * R * r});
      fns.push_back({"x1^2 x3^2", [](auto p) { return p[0] * p[0] * p[2] * p[2]; },
                     kPi * kPi * R * R * R * r * r * r});
      fns.push_back({"|x2|", [](auto p) { return std::abs(p[1]); }, 8 * kPi * R * R * r});
      break;
    }
    case Manifold::Sphere:
      fns.push_back({"one", [](auto) { return 1.0; }, 4 * kPi});
      fns.push_back({"z^2", [](auto p) { return p[2] * p[2]; }, 4 * kPi / 3});
      fns.push_back({"x^4", [](auto p) { return std::pow(p[0], 4); }, 4 * kPi / 5});
      fns.push_back({"exp(z)", [](auto p) { return std::exp(p[2]); }, 2 * kPi * (e - 1 / e)});
      break;
    case Manifold::Hemisphere:
      fns.push_back({"one", [](auto) { return 1.0; }, 2 * kPi});
      fns.push_back({"z", [](auto p) { return p[2]; }, kPi});
      fns.push_back({"z^2", [](auto p) { return p[2] * p[2]; }, 2 * kPi / 3});
      fns.push_back({"x^2", [](auto p) { return p[0] * p[0]; }, 2 * kPi / 3});
      fns.push_back({"exp(z)", [](auto p) { return std::exp(p[2]); }, 2 * kPi * (e - 1)});
      break;
  }
  return fns;
}

std::vector<double> quadrature_check(const PointCloud& cloud, std::span<const TestFunction> fns) {
  std::vector<double> errors;
  errors.reserve(fns.size());
  for (const auto& fn : fns) {
    // Neumaier-compensated sum.
    double sum = 0.0;
    double comp = 0.0;
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
      const double term = fn.f(cloud.point(i)) * cloud.weights()[i];
      const double next = sum + term;
      comp += std::abs(sum) >= std::abs(term) ? (sum - next) + term : (term - next) + sum;
      sum = next;
    }
    errors.push_back(std::abs(fn.exact_integral - (sum + comp)));
  }
  return errors;
}

void write_cloud_csv(const PointCloud& cloud, std::ostream& out) {
  out << format_params_line(cloud) << '\n';
  const int d = cloud.ambient_dim();
  for (int c = 0; c < d; ++c) out << 'x' << (c + 1) << ',';
  out << "V,boundary\n";
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    for (int c = 0; c < d; ++c) out << format_double(cloud.points()(i, c)) << ',';
    out << format_double(cloud.weights()[i]) << ',' << (cloud.boundary()[i] ? 1 : 0) << '\n';
  }
}

PointCloud read_cloud_csv(std::istream& in) {
  std::string line;
  std::optional<int> intrinsic_dim;
  std::optional<Manifold> manifold;
  ManifoldParams params;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] != '#') break;
    std::istringstream ss(line.substr(1));
    std::string token;
    while (ss >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = token.substr(0, eq);
      const std::string value = token.substr(eq + 1);
      if (key == "intrinsic_dim") {
        intrinsic_dim = static_cast<int>(parse_double(value));
      } else if (key == "manifold") {
        manifold = parse_manifold(value);
      } else {
        params[key] = parse_double(value);
      }
    }
  }
  const auto header = split(line, ',');
  if (header.size() < 3 || header[header.size() - 2] != "V" || header.back() != "boundary") {
    throw ValidationError("cloud CSV header must be x1,...,xd,V,boundary");
  }
  const std::size_t d = header.size() - 2;
  for (std::size_t c = 0; c < d; ++c) {
    if (header[c] != "x" + std::to_string(c + 1)) {
      throw ValidationError("cloud CSV header column " + std::to_string(c + 1) + " must be x" +
                            std::to_string(c + 1));
    }
  }
  std::vector<double> coords;
  std::vector<double> weights;
  std::vector<bool> boundary;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != d + 2) throw ValidationError("cloud CSV row has wrong column count");
    for (std::size_t c = 0; c < d; ++c) coords.push_back(parse_double(cols[c]));
    weights.push_back(parse_double(cols[d]));
    if (cols[d + 1] != "0" && cols[d + 1] != "1") {
      throw ValidationError("boundary column must be 0 or 1");
    }
    boundary.push_back(cols[d + 1] == "1");
  }
  const auto n = static_cast<Eigen::Index>(weights.size());
  PointMatrix points = Eigen::Map<PointMatrix>(coords.data(), n, static_cast<Eigen::Index>(d));
  Eigen::VectorXd v = Eigen::Map<Eigen::VectorXd>(weights.data(), n);
  std::optional<ManifoldInfo> info;
  if (manifold) info = ManifoldInfo{*manifold, resolve_params(*manifold, params)};
  return {std::move(points), std::move(v), intrinsic_dim.value_or(static_cast<int>(d)),
          std::move(boundary), std::move(info)};
}

}  // namespace pim

#include "pim/ground_truth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pim/error.hpp"

namespace pim {

namespace {

constexpr double kPi = std::numbers::pi;

double trig(int parity, double x) { return parity == 0 ? std::cos(x) : std::sin(x); }

bool same_eigenvalue(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, b); }

double manifold_volume(Manifold manifold, const ManifoldParams& p) {
  switch (manifold) {
    case Manifold::Interval:
      return p.at("L");
    case Manifold::Circle:
      return 2 * kPi * p.at("radius");
    case Manifold::Rectangle:
      return p.at("Lx") * p.at("Ly");
    case Manifold::Torus:
    case Manifold::FlatTorus:
      return 4 * kPi * kPi * p.at("R") * p.at("r");
    case Manifold::Sphere:
      return 4 * kPi;
    case Manifold::Hemisphere:
      return 2 * kPi;
  }
  return 0.0;
}

// All modes with mu <= cap.
std::vector<AnalyticMode> enumerate(Manifold manifold, const ManifoldParams& p, double cap) {
  std::vector<AnalyticMode> out;
  switch (manifold) {
    case Manifold::Interval: {
      const double L = p.at("L");
      for (int m = 0;; ++m) {
        const double mu = std::pow(m * kPi / L, 2);
        if (mu > cap) break;
        out.push_back({mu, "cos(" + std::to_string(m) + " pi x/L)", m});
      }
      break;
    }
    case Manifold::Circle: {
      const double rho = p.at("radius");
      for (int m = 0;; ++m) {
        const double mu = std::pow(m / rho, 2);
        if (mu > cap) break;
        out.push_back({mu, "cos(" + std::to_string(m) + " theta)", m, 0, 0});
        if (m > 0) out.push_back({mu, "sin(" + std::to_string(m) + " theta)", m, 0, 1});
      }
      break;
    }
    case Manifold::Rectangle: {
      const double lx = p.at("Lx");
      const double ly = p.at("Ly");
      for (int m = 0; std::pow(m * kPi / lx, 2) <= cap; ++m) {
        for (int q = 0;; ++q) {
          const double mu = std::pow(m * kPi / lx, 2) + std::pow(q * kPi / ly, 2);
          if (mu > cap) break;
          out.push_back({mu, "cos(" + std::to_string(m) + ")cos(" + std::to_string(q) + ")", m, q});
        }
      }
      break;
    }
    case Manifold::FlatTorus: {
      const double R = p.at("R");
      const double r = p.at("r");
      for (int m = 0; std::pow(m / R, 2) <= cap; ++m) {
        for (int q = 0;; ++q) {
          const double mu = std::pow(m / R, 2) + std::pow(q / r, 2);
          if (mu > cap) break;
          for (int pa = 0; pa < (m > 0 ? 2 : 1); ++pa) {
            for (int pb = 0; pb < (q > 0 ? 2 : 1); ++pb) {
              out.push_back({mu, "torus(" + std::to_string(m) + "," + std::to_string(q) + ")", m, q,
                             pa, pb});
            }
          }
        }
      }
      break;
    }
    case Manifold::Sphere:
    case Manifold::Hemisphere: {
      const bool half = manifold == Manifold::Hemisphere;
      for (int l = 0;; ++l) {
        const double mu = l * (l + 1.0);
        if (mu > cap) break;
        for (int m = -l; m <= l; ++m) {
          // Neumann at the equator keeps harmonics even in z: l + m even.
          if (half && (l + std::abs(m)) % 2 != 0) continue;
          out.push_back({mu, "Y(" + std::to_string(l) + "," + std::to_string(m) + ")", l, m});
        }
      }
      break;
    }
    case Manifold::Torus:
      throw ValidationError("the embedded torus has no closed-form spectrum; use flat_torus");
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const AnalyticMode& x, const AnalyticMode& y) { return x.mu < y.mu; });
  return out;
}

// Real spherical harmonic (unnormalised for m != 0 up to a constant factor).
double real_harmonic(int l, int m, double x, double y, double z) {
  const double theta = std::acos(std::clamp(z, -1.0, 1.0));
  const double phi = std::atan2(y, x);
  const unsigned am = static_cast<unsigned>(std::abs(m));
  const double base = std::sph_legendre(static_cast<unsigned>(l), am, theta);
  if (m == 0) return base;
  return std::sqrt(2.0) * base * (m > 0 ? std::cos(am * phi) : std::sin(am * phi));
}

}  // namespace

GroundTruth::GroundTruth(Manifold manifold, ManifoldParams params, std::vector<AnalyticMode> modes)
    : manifold_(manifold),
      params_(std::move(params)),
      volume_(manifold_volume(manifold, params_)),
      modes_(std::move(modes)) {
  if (modes_.empty() || modes_.front().mu != 0.0) {
    throw ValidationError("ground truth must start with the constant mode");
  }
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    if (i > 0 && modes_[i].mu < modes_[i - 1].mu) {
      throw ValidationError("ground truth eigenvalues must be ascending");
    }
    if (!clusters_.empty() && same_eigenvalue(modes_[i].mu, clusters_.back().mu)) {
      ++clusters_.back().multiplicity;
    } else {
      clusters_.push_back({modes_[i].mu, i, 1});
    }
  }
}

std::vector<double> GroundTruth::eigenvalues() const {
  std::vector<double> mu;
  mu.reserve(modes_.size());
  for (const auto& m : modes_) mu.push_back(m.mu);
  return mu;
}

std::size_t GroundTruth::cluster_of(std::size_t mode) const {
  for (std::size_t c = 0; c < clusters_.size(); ++c) {
    if (mode >= clusters_[c].first && mode < clusters_[c].first + clusters_[c].multiplicity) {
      return c;
    }
  }
  throw ValidationError("mode index beyond ground truth");
}

double GroundTruth::eigenfunction(std::size_t mode, std::span<const double> x) const {
  const AnalyticMode& m = modes_.at(mode);
  switch (manifold_) {
    case Manifold::Interval:
      return std::cos(m.a * kPi * x[0] / params_.at("L"));
    case Manifold::Circle:
      return trig(m.parity_a, m.a * std::atan2(x[1], x[0]));
    case Manifold::Rectangle:
      return std::cos(m.a * kPi * x[0] / params_.at("Lx")) *
             std::cos(m.b * kPi * x[1] / params_.at("Ly"));
    case Manifold::FlatTorus:
      return trig(m.parity_a, m.a * std::atan2(x[1], x[0])) *
             trig(m.parity_b, m.b * std::atan2(x[3], x[2]));
    case Manifold::Sphere:
    case Manifold::Hemisphere: {
      const double norm = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
      return real_harmonic(m.a, m.b, x[0] / norm, x[1] / norm, x[2] / norm);
    }
    case Manifold::Torus:
      break;
  }
  throw ValidationError("no analytic eigenfunctions for this manifold");
}

GroundTruth ground_truth(Manifold manifold, const ManifoldParams& given, std::size_t min_modes) {
  const ManifoldParams params = resolve_params(manifold, given);
  min_modes = std::max<std::size_t>(min_modes, 1);
  double cap = 1.0;
  std::vector<AnalyticMode> modes;
  while (true) {
    modes = enumerate(manifold, params, cap);
    if (modes.size() >= min_modes) break;
    cap *= 2.0;
  }
  // Keep whole clusters: everything up to and including the cluster of mode min_modes - 1.
  const double last = modes[min_modes - 1].mu;
  std::size_t keep = min_modes;
  while (keep < modes.size() && same_eigenvalue(modes[keep].mu, last)) ++keep;
  modes.resize(keep);
  return GroundTruth(manifold, params, std::move(modes));
}

}  // namespace pim

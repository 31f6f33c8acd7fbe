#include "pim/kernels.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "pim/error.hpp"

namespace pim {

namespace {

constexpr int kTableIntervals = 2048;

// 8-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 8> kGaussNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGaussWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

double wendland_R(double r) {
  if (r > 1.0) return 0.0;
  const double s = 1.0 - r;
  const double s2 = s * s;
  return s2 * s2 * (4.0 * r + 1.0);
}

double wendland_Rbar(double r) {
  if (r > 1.0) return 0.0;
  const double s = 1.0 - r;
  const double s2 = s * s;
  return s2 * s2 * s * (1.0 + 2.0 * r) / 3.0;
}

double wendland_Rbarbar(double r) {
  if (r > 1.0) return 0.0;
  const double s = 1.0 - r;
  const double s3 = s * s * s;
  const double s6 = s3 * s3;
  return s6 / 6.0 - 2.0 * s6 * s / 21.0;
}

double gaussian_R(double r, double blend_width) {
  if (r >= 1.0) return 0.0;
  const double start = 1.0 - blend_width;
  double step = 1.0;
  if (r > start) {
    const double x = (r - start) / blend_width;
    step = 1.0 - x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
  }
  return std::exp(-r) * step;
}

// Cubic Hermite interpolation on the uniform table over [0, 1].
double hermite(const std::vector<double>& values, double r, auto&& derivative) {
  if (r >= 1.0) return 0.0;
  if (r < 0.0) r = 0.0;
  const double h = 1.0 / kTableIntervals;
  const int i = std::min(static_cast<int>(r / h), kTableIntervals - 1);
  const double x0 = i * h;
  const double x1 = x0 + h;
  const double u = (r - x0) / h;
  const double u2 = u * u;
  const double u3 = u2 * u;
  const double h00 = 2 * u3 - 3 * u2 + 1;
  const double h10 = u3 - 2 * u2 + u;
  const double h01 = -2 * u3 + 3 * u2;
  const double h11 = u3 - u2;
  return h00 * values[i] + h10 * h * derivative(x0) + h01 * values[i + 1] +
         h11 * h * derivative(x1);
}

}  // namespace

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Wendland:
      return "wendland";
    case KernelFamily::Gaussian:
      return "gaussian";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "wendland") return KernelFamily::Wendland;
  if (name == "gaussian") return KernelFamily::Gaussian;
  throw ValidationError("unknown kernel family '" + std::string(name) +
                        "' (expected wendland or gaussian)");
}

double Kernel::R(double r) const {
  if (r < 0.0) r = 0.0;
  switch (family_) {
    case KernelFamily::Wendland:
      return wendland_R(r);
    case KernelFamily::Gaussian:
      return gaussian_R(r, blend_width_);
  }
  return 0.0;
}

double Kernel::Rbar(double r) const {
  if (r < 0.0) r = 0.0;
  switch (family_) {
    case KernelFamily::Wendland:
      return wendland_Rbar(r);
    case KernelFamily::Gaussian:
      return hermite(rbar_table_, r, [this](double x) { return -R(x); });
  }
  return 0.0;
}

double Kernel::Rbarbar(double r) const {
  if (r < 0.0) r = 0.0;
  switch (family_) {
    case KernelFamily::Wendland:
      return wendland_Rbarbar(r);
    case KernelFamily::Gaussian:
      return hermite(rbarbar_table_, r, [this](double x) { return -Rbar(x); });
  }
  return 0.0;
}

double Kernel::eval(KernelLevel level, double r) const {
  switch (level) {
    case KernelLevel::R:
      return R(r);
    case KernelLevel::Rbar:
      return Rbar(r);
    case KernelLevel::Rbarbar:
      return Rbarbar(r);
  }
  return 0.0;
}

Kernel wendland_kernel() {
  Kernel k;
  k.family_ = KernelFamily::Wendland;
  k.delta0_ = wendland_R(0.5);
  return k;
}

Kernel gaussian_kernel(double blend_width) {
  if (!(blend_width > 0.0 && blend_width <= 0.5)) {
    throw ValidationError("gaussian blend width must lie in (0, 0.5]");
  }
  Kernel k;
  k.family_ = KernelFamily::Gaussian;
  k.blend_width_ = blend_width;
  k.delta0_ = gaussian_R(0.5, blend_width);

  const double h = 1.0 / kTableIntervals;
  k.rbar_table_.assign(kTableIntervals + 1, 0.0);
  k.rbarbar_table_.assign(kTableIntervals + 1, 0.0);
  for (int i = kTableIntervals - 1; i >= 0; --i) {
    const double a = i * h;
    double cell = 0.0;
    for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
      cell += kGaussWeights[q] * gaussian_R(a + 0.5 * h * (kGaussNodes[q] + 1.0), blend_width);
    }
    k.rbar_table_[i] = k.rbar_table_[i + 1] + 0.5 * h * cell;
  }
  // Exact integral of the cubic Hermite interpolant of Rbar over each cell.
  for (int i = kTableIntervals - 1; i >= 0; --i) {
    const double f0 = k.rbar_table_[i];
    const double f1 = k.rbar_table_[i + 1];
    const double d0 = -gaussian_R(i * h, blend_width);
    const double d1 = -gaussian_R((i + 1) * h, blend_width);
    k.rbarbar_table_[i] = k.rbarbar_table_[i + 1] + h * (f0 + f1) / 2.0 + h * h * (d0 - d1) / 12.0;
  }
  return k;
}

Kernel make_kernel(KernelFamily family) {
  return family == KernelFamily::Wendland ? wendland_kernel() : gaussian_kernel();
}

double normalization_constant(double t, int intrinsic_dim) {
  if (!(t > 0.0)) throw ValidationError("bandwidth t must be positive");
  if (intrinsic_dim < 1) throw ValidationError("intrinsic dimension must be >= 1");
  return std::pow(4.0 * std::numbers::pi * t, -0.5 * intrinsic_dim);
}

double kernel_at_scale(const Kernel& kernel, double t, int intrinsic_dim, double sq_dist,
                       KernelLevel level) {
  const double ct = normalization_constant(t, intrinsic_dim);
  if (sq_dist > 4.0 * t) return 0.0;
  return ct * kernel.eval(level, sq_dist / (4.0 * t));
}

}  // namespace pim

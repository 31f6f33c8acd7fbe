#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pim {

enum class KernelFamily { Wendland, Gaussian };

/// Which primitive of the kernel profile to evaluate.
enum class KernelLevel { R, Rbar, Rbarbar };

std::string_view to_string(KernelFamily family);
KernelFamily parse_kernel_family(std::string_view name);

/// Radial kernel profile R on [0, inf) together with its first and second
/// tail primitives
///
///   Rbar(r)    = int_r^inf R(s) ds,
///   Rbarbar(r) = int_r^inf Rbar(s) ds.
///
/// All three vanish for r > 1 and R(r) >= delta0 > 0 on [0, 1/2).
/// Instances are immutable after construction.
class Kernel {
 public:
  KernelFamily family() const noexcept { return family_; }
  double delta0() const noexcept { return delta0_; }

  double R(double r) const;
  double Rbar(double r) const;
  double Rbarbar(double r) const;
  double eval(KernelLevel level, double r) const;

  friend Kernel wendland_kernel();
  friend Kernel gaussian_kernel(double blend_width);

 private:
  Kernel() = default;

  KernelFamily family_ = KernelFamily::Wendland;
  double delta0_ = 0.0;

  // Gaussian family only: primitives tabulated on a uniform grid over [0, 1]
  // and evaluated by cubic Hermite interpolation using the exact derivatives
  // Rbar' = -R and Rbarbar' = -Rbar.
  double blend_width_ = 0.0;
  std::vector<double> rbar_table_;
  std::vector<double> rbarbar_table_;
};

/// R(r) = (1-r)^4 (4r+1) on [0,1], with closed-form primitives.
Kernel wendland_kernel();

/// R(r) = exp(-r) on [0, 1-w], blended to zero on [1-w, 1] by a C^2
/// quintic step. Primitives are tabulated by Gauss-Legendre quadrature.
Kernel gaussian_kernel(double blend_width = 0.1);

Kernel make_kernel(KernelFamily family);

/// C_t = (4 pi t)^(-k/2). Throws ValidationError for t <= 0 or k < 1.
double normalization_constant(double t, int intrinsic_dim);

/// C_t * K(sq_dist / (4t)) for the selected level K. Exactly 0 when
/// sq_dist > 4t.
double kernel_at_scale(const Kernel& kernel, double t, int intrinsic_dim, double sq_dist,
                       KernelLevel level);

}  // namespace pim

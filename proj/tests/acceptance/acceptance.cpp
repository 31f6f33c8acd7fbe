// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "pim/assembly.hpp"
#include "pim/convergence.hpp"
#include "pim/eigensolve.hpp"
#include "pim/io.hpp"
#include "pim/kernels.hpp"
#include "pim/operators.hpp"
#include "pim/pointcloud.hpp"

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

int failures = 0;

void criterion(int id, const std::string& name, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.check(secs < budget_s, "runtime over " + g(budget_s) + " s");
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << ". " << name << " (" << g(secs) << " s): "
            << o.detail.str() << std::endl;
}

std::shared_ptr<const pim::PointCloud> shared(pim::PointCloud c) {
  return std::make_shared<const pim::PointCloud>(std::move(c));
}

const pim::LevelResult& row_for(const pim::ConvergenceReport& r, int n) {
  for (const auto& row : r.rows) {
    if (row.n == n) return row;
  }
  throw std::runtime_error("missing level n = " + std::to_string(n));
}

void kernels(Outcome& o) {
  const auto k = pim::wendland_kernel();
  double e1 = 0.0;
  double e2 = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double r = i / 49.0;
    e1 = std::max(e1, std::abs(k.Rbar(r) - pim::test::wendland_Rbar_quad(r)));
    e2 = std::max(e2, std::abs(k.Rbarbar(r) - pim::test::wendland_Rbarbar_quad(r)));
  }
  o.detail << "max |Rbar - quad| = " << g(e1) << ", max |Rbarbar - quad| = " << g(e2);
  o.check(e1 < 1e-10 && e2 < 1e-10, "primitive error >= 1e-10");
}

void assembly(Outcome& o) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto kernel = pim::wendland_kernel();
  double worst = 0.0;
  double worst_rowsum = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 1 + trial % 3;
    const Eigen::Index n = 10 + 2 * trial;
    pim::PointMatrix p(n, d);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int c = 0; c < d; ++c) p(i, c) = u(rng);
      v[i] = (0.5 + u(rng)) / static_cast<double>(n);
    }
    const double t = 0.01 + 0.03 * u(rng);
    const auto cloud = shared(pim::PointCloud(p, v, d));
    const auto pencil = pim::assemble_pencil(cloud, kernel, t);
    const auto ref = pim::test::brute_force_pencil(cloud->points(), v, d, t, pim::test::wendland_R,
                                                   pim::test::wendland_Rbar_poly);
    const Eigen::MatrixXd A(pencil.A);
    const Eigen::MatrixXd B(pencil.B);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        for (const auto& [x, y] : {std::pair{A(i, j), ref.A(i, j)}, std::pair{B(i, j), ref.B(i, j)}}) {
          if (y == 0.0) {
            if (x != 0.0) worst = std::max(worst, 1.0);
          } else {
            worst = std::max(worst, std::abs(x - y) / std::abs(y));
          }
        }
      }
    }
    const double dmax = A.diagonal().cwiseAbs().maxCoeff();
    if (dmax > 0.0) worst_rowsum = std::max(worst_rowsum, (A * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff() / dmax);
  }
  o.detail << "max entrywise rel diff " << g(worst) << ", max |A 1| / max|A_ii| " << g(worst_rowsum);
  o.check(worst <= 1e-14, "entrywise difference > 1e-14");
  o.check(worst_rowsum <= 1e-12, "row sums > 1e-12");
}

void eigensolver(Outcome& o) {
  const auto cloud = shared(pim::sample_interval(500, kPi));
  const auto pencil = pim::assemble_pencil(cloud, pim::wendland_kernel(), 0.01 * std::sqrt(cloud->h_estimate()));
  const auto dense = pim::dense_generalized_eigs(pencil.A, pencil.B, 10);
  const auto lanczos = pim::lanczos_generalized_eigs(pencil.A, pencil.B, 10);
  double agree = 0.0;
  for (int k = 0; k < 10; ++k) agree = std::max(agree, std::abs(dense.mu[k] - lanczos.mu[k]) / std::max(1.0, dense.mu[k]));
  const double na = pencil.A.norm();
  const double nb = pencil.B.norm();
  double worst_res = 0.0;
  double worst_orth = 0.0;
  for (const auto* s : {&dense, &lanczos}) {
    for (int k = 0; k < 10; ++k) {
      const Eigen::VectorXd vk = s->vectors.col(k);
      const double r = (pencil.A * vk - s->mu[k] * (pencil.B * vk)).norm() / (na + std::abs(s->mu[k]) * nb);
      worst_res = std::max(worst_res, r);
    }
    const Eigen::MatrixXd gram = s->vectors.transpose() * pencil.B * s->vectors;
    worst_orth = std::max(worst_orth, (gram - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff());
  }
  o.detail << "max scaled residual " << g(worst_res) << ", B-orthonormality " << g(worst_orth)
           << ", dense/Lanczos " << g(agree);
  o.check(worst_res <= 1e-8, "residual");
  o.check(worst_orth <= 1e-10, "B-orthonormality");
  o.check(agree <= 1e-8, "dense vs Lanczos");
}

pim::ConvergenceReport interval_ladder;

void interval_spectrum(Outcome& o) {
  pim::LadderConfig config;
  config.manifold = pim::Manifold::Interval;
  config.n_list = {125, 250, 500, 1000};
  config.t_rule = pim::TRule::power(0.01, 0.5);
  config.modes = 5;
  interval_ladder = pim::run_ladder(config);
  for (const auto& row : interval_ladder.rows) o.check(row.ok(), "level " + std::to_string(row.n) + ": " + row.error);
  if (!o.pass) return;
  double worst_final = 0.0;
  for (std::size_t m = 1; m <= 5; ++m) {
    for (std::size_t l = 1; l < interval_ladder.rows.size(); ++l) {
      const double prev = interval_ladder.rows[l - 1].modes[m].rel_error;
      const double cur = interval_ladder.rows[l].modes[m].rel_error;
      o.check(cur <= 1.05 * prev, "mode " + std::to_string(m) + " error grew at n = " +
                                      std::to_string(interval_ladder.rows[l].n));
    }
    worst_final = std::max(worst_final, interval_ladder.rows.back().modes[m].rel_error);
  }
  o.detail << "t = 0.01 h^0.5; mode 1-5 max rel error by level:";
  for (const auto& row : interval_ladder.rows) {
    double e = 0.0;
    for (std::size_t m = 1; m <= 5; ++m) e = std::max(e, row.modes[m].rel_error);
    o.detail << " " << g(e);
  }
  o.check(worst_final <= 0.02, "error at n = 1000 above 2%");
}

void circle(Outcome& o) {
  const auto cloud = shared(pim::sample_circle(1000, 1.0));
  const auto pencil = pim::assemble_pencil(cloud, pim::wendland_kernel(), 0.01 * std::sqrt(cloud->h_estimate()));
  const auto s = pim::dense_generalized_eigs(pencil.A, pencil.B, 7);
  o.detail << "pairs:";
  for (int c = 0; c < 3; ++c) {
    const double a = s.mu[1 + 2 * c];
    const double b = s.mu[2 + 2 * c];
    const double mean = 0.5 * (a + b);
    const double exact = (c + 1) * (c + 1);
    const double rel = std::abs(mean - exact) / exact;
    const double gap = std::abs(b - a) / mean;
    o.detail << " (" << g(mean) << ", rel " << g(rel) << ", gap " << g(gap) << ")";
    o.check(rel <= 0.03, "cluster mean " + std::to_string(c + 1));
    o.check(gap <= 0.10, "intra-pair gap " + std::to_string(c + 1));
  }
}

void hemisphere(Outcome& o) {
  pim::LadderConfig config;
  config.manifold = pim::Manifold::Hemisphere;
  config.n_list = {1000, 2000};
  config.t_rule = pim::TRule::power(0.1, 1.0);
  config.modes = 9;
  const auto report = pim::run_ladder(config);
  for (const auto& row : report.rows) o.check(row.ok(), "level " + std::to_string(row.n) + ": " + row.error);
  if (!o.pass) return;
  const auto& coarse = row_for(report, 1000);
  const auto& fine = row_for(report, 2000);
  o.detail << "t = 0.1 h;";
  for (std::size_t c = 1; c <= 3; ++c) {
    double sum = 0.0;
    std::size_t count = 0;
    double exact = 0.0;
    for (const auto& m : fine.modes) {
      if (m.cluster == c) {
        sum += m.computed;
        exact = m.exact;
        ++count;
      }
    }
    const double rel = std::abs(sum / static_cast<double>(count) - exact) / exact;
    std::optional<double> r0, r1;
    for (const auto& cr : coarse.clusters) {
      if (cr.cluster == c) r0 = cr.residual;
    }
    for (const auto& cr : fine.clusters) {
      if (cr.cluster == c) r1 = cr.residual;
    }
    o.check(count > 0 && rel <= 0.10, "cluster " + std::to_string(c) + " eigenvalue");
    o.check(r0 && r1 && *r1 < *r0, "cluster " + std::to_string(c) + " residual did not decrease");
    o.detail << " cluster " << c << " (mu " << g(exact) << "): rel " << g(rel) << ", residual "
             << (r0 ? g(*r0) : "n/a") << " -> " << (r1 ? g(*r1) : "n/a") << ";";
  }
}

void interval_eigenfunctions(Outcome& o) {
  o.check(interval_ladder.rows.size() == 4, "interval ladder unavailable");
  if (!o.pass) return;
  o.detail << "mode-1 subspace residual:";
  std::optional<double> prev;
  for (const auto& row : interval_ladder.rows) {
    const auto r = row.residual_for_mode(1);
    o.check(r.has_value(), "missing residual at n = " + std::to_string(row.n));
    if (!r) return;
    o.detail << " " << g(*r);
    if (prev) o.check(*r < *prev, "not decreasing at n = " + std::to_string(row.n));
    prev = r;
  }
  o.check(*prev <= 0.05, "residual at n = 1000 above 0.05");
}

void graph_mode(Outcome& o) {
  const pim::Perturbation pert{0.2, 0.5, 7};
  const auto cloud = shared(pim::sample_interval(1000, kPi, pert));
  const double t = 0.01 * std::sqrt(cloud->h_estimate());
  const auto truth = pim::ground_truth(pim::Manifold::Interval, {}, 4);
  const auto kernel = pim::wendland_kernel();
  const auto weighted = pim::assemble_pencil(cloud, kernel, t);
  const auto graph = pim::assemble_pencil(cloud, kernel, t, {.graph_mode = true});
  const auto sw = pim::eigenvalue_table(pim::dense_generalized_eigs(weighted.A, weighted.B, 4), truth, 4);
  const auto sg = pim::eigenvalue_table(pim::dense_generalized_eigs(graph.A, graph.B, 4), truth, 4);
  o.detail << "rel error weighted vs graph:";
  for (std::size_t m = 1; m <= 3; ++m) {
    o.detail << " " << g(sw[m].rel_error) << "/" << g(sg[m].rel_error);
    o.check(sw[m].rel_error < sg[m].rel_error, "mode " + std::to_string(m));
  }
}

void poisson(Outcome& o) {
  std::optional<double> prev;
  o.detail << "t = 0.01 h^0.5; relative L2 error:";
  for (int n : {500, 1000, 2000}) {
    const auto cloud = shared(pim::sample_interval(n, kPi));
    const auto pencil = pim::assemble_pencil(cloud, pim::wendland_kernel(), 0.01 * std::sqrt(cloud->h_estimate()));
    Eigen::VectorXd f(n), exact(n);
    for (int i = 0; i < n; ++i) {
      f[i] = -std::cos(cloud->points()(i, 0));
      exact[i] = -f[i];
    }
    const Eigen::VectorXd& v = cloud->weights();
    exact.array() -= exact.dot(v) / v.sum();
    const auto sol = pim::poisson_solve(pencil, std::span<const double>(f.data(), static_cast<std::size_t>(n)));
    const Eigen::VectorXd e = sol.u - exact;
    const double err = std::sqrt(e.cwiseAbs2().dot(v) / exact.cwiseAbs2().dot(v));
    o.detail << " " << g(err);
    if (prev) o.check(err < *prev, "not decreasing at n = " + std::to_string(n));
    prev = err;
  }
  o.check(*prev <= 0.05, "error at n = 2000 above 5%");
}

void quadrature(Outcome& o) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (auto m : {pim::Manifold::Interval, pim::Manifold::Circle, pim::Manifold::Rectangle, pim::Manifold::Torus,
                 pim::Manifold::FlatTorus, pim::Manifold::Sphere, pim::Manifold::Hemisphere}) {
    const auto params = pim::resolve_params(m, {});
    const auto fns = pim::builtin_test_functions(m, params);
    const std::vector<int> ladder =
        m == pim::Manifold::Rectangle ? std::vector{8, 16, 32, 64} : std::vector{250, 1000, 4000, 16000};
    std::vector<std::vector<double>> err;
    std::vector<std::vector<double>> floor;
    for (int n : ladder) {
      const auto cloud = pim::sample_manifold(m, n, params);
      err.push_back(pim::quadrature_check(cloud, fns));
      std::vector<double> fl;
      for (const auto& fn : fns) {
        double mass = 0.0;
        for (Eigen::Index i = 0; i < cloud.size(); ++i) mass += std::abs(fn.f(cloud.point(i))) * cloud.weights()[i];
        fl.push_back(64 * eps * std::max(std::abs(fn.exact_integral), mass));
      }
      floor.push_back(std::move(fl));
    }
    bool strict_somewhere = false;
    for (std::size_t k = 0; k < fns.size(); ++k) {
      bool strict = true;
      for (std::size_t l = 1; l < ladder.size(); ++l) {
        const bool at_floor = err[l][k] <= floor[l][k] && err[l - 1][k] <= floor[l - 1][k];
        if (at_floor) {
          strict = false;
          continue;
        }
        if (!(err[l][k] < err[l - 1][k])) {
          strict = false;
          o.check(false, std::string(pim::to_string(m)) + " " + fns[k].name + " at level " + std::to_string(l));
        }
      }
      strict_somewhere |= strict;
    }
    o.check(strict_somewhere, std::string(pim::to_string(m)) + " has no decreasing test function");
  }
  o.detail << "7 samplers x 4 levels; errors decrease or sit at round-off";
}

}  // namespace

int main() {
  criterion(1, "kernel primitives vs quadrature", 1.0, kernels);
  criterion(2, "assembly vs brute force", 5.0, assembly);
  criterion(3, "eigensolver residuals and dense/Lanczos agreement", 30.0, eigensolver);
  criterion(4, "interval eigenvalue ladder", 120.0, interval_spectrum);
  criterion(5, "circle degenerate pairs", 60.0, circle);
  criterion(6, "hemisphere Neumann clusters", 300.0, hemisphere);
  criterion(7, "interval eigenfunction ladder", 1.0, interval_eigenfunctions);
  criterion(8, "weighted vs graph-mode contrast", 60.0, graph_mode);
  criterion(9, "Poisson manufactured solution", 60.0, poisson);
  criterion(10, "sampler quadrature ladders", 30.0, quadrature);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pim/error.hpp"
#include "pim/pointcloud.hpp"

namespace {

constexpr double kPi = std::numbers::pi;

TEST(PointCloud, IntervalMidpointGrid) {
  const auto c = pim::sample_interval(4, 1.0);
  ASSERT_EQ(c.size(), 4);
  const double expected[] = {0.125, 0.375, 0.625, 0.875};
  for (int i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(c.points()(i, 0), expected[i]);
    EXPECT_DOUBLE_EQ(c.weights()[i], 0.25);
  }
  EXPECT_TRUE(c.boundary().front());
  EXPECT_TRUE(c.boundary().back());
  EXPECT_FALSE(c.boundary()[1]);
  EXPECT_EQ(c.intrinsic_dim(), 1);
  EXPECT_EQ(c.ambient_dim(), 1);
  EXPECT_DOUBLE_EQ(c.h_estimate(), 0.25);
}

TEST(PointCloud, IntervalWeightsSumToLength) {
  for (int n : {2, 7, 100, 1000}) {
    const auto c = pim::sample_interval(n, kPi);
    EXPECT_NEAR(c.weights().sum(), kPi, 1e-13);
  }
}

TEST(PointCloud, RejectsTooFewPoints) {
  EXPECT_THROW(pim::sample_interval(1, 1.0), pim::ValidationError);
  EXPECT_THROW(pim::sample_circle(2, 1.0), pim::ValidationError);
  EXPECT_THROW(pim::sample_sphere(3), pim::ValidationError);
  EXPECT_THROW(pim::sample_interval(10, -1.0), pim::ValidationError);
}

TEST(PointCloud, ConstructorValidates) {
  pim::PointMatrix p(2, 1);
  p << 0.0, 1.0;
  EXPECT_THROW(pim::PointCloud(p, Eigen::Vector2d(1.0, 0.0), 1), pim::ValidationError);
  EXPECT_THROW(pim::PointCloud(p, Eigen::Vector2d(1.0, 1.0), 2), pim::ValidationError);
  EXPECT_THROW(pim::PointCloud(p, Eigen::Vector2d(1.0, 1.0), 0), pim::ValidationError);
  pim::PointMatrix one(1, 1);
  one << 0.0;
  EXPECT_THROW(pim::PointCloud(one, Eigen::VectorXd::Ones(1), 1), pim::ValidationError);
  EXPECT_NO_THROW(pim::PointCloud(p, Eigen::Vector2d(1.0, 1.0), 1));
}

TEST(PointCloud, VolumesOfBuiltInSamplers) {
  struct Case {
    pim::Manifold m;
    int n;
    double volume;
  };
  const Case cases[] = {
      {pim::Manifold::Interval, 200, kPi},
      {pim::Manifold::Circle, 200, 2 * kPi},
      {pim::Manifold::Rectangle, 20, 1.0},
      {pim::Manifold::Torus, 1000, 8 * kPi * kPi},
      {pim::Manifold::FlatTorus, 1000, 4 * kPi * kPi},
      {pim::Manifold::Sphere, 1000, 4 * kPi},
      {pim::Manifold::Hemisphere, 1000, 2 * kPi},
  };
  for (const auto& c : cases) {
    const auto cloud = pim::sample_manifold(c.m, c.n, {});
    EXPECT_GT(cloud.weights().minCoeff(), 0.0) << to_string(c.m);
    EXPECT_NEAR(cloud.weights().sum(), c.volume, 0.01 * c.volume) << to_string(c.m);
  }
}

TEST(PointCloud, TorusAreaMatchesMetricIntegral) {
  const double R = 2.0;
  const double r = 1.0;
  // sqrt(det g) = r (R + r cos v) on the (u, v) parameter square.
  const double area = 2 * kPi * pim::test::adaptive_simpson(
                                    [&](double v) { return r * (R + r * std::cos(v)); }, 0.0, 2 * kPi, 1e-13);
  EXPECT_NEAR(area, 8 * kPi * kPi, 1e-9);
  const auto cloud = pim::sample_torus(900, R, r);
  EXPECT_NEAR(cloud.weights().sum(), area, 1e-9);
}

TEST(PointCloud, SphereWeightsAreEqual) {
  const auto c = pim::sample_sphere(500);
  EXPECT_NEAR(c.weights().sum(), 4 * kPi, 1e-12);
  EXPECT_DOUBLE_EQ(c.weights().minCoeff(), c.weights().maxCoeff());
  for (Eigen::Index i = 0; i < c.size(); ++i) EXPECT_NEAR(c.points().row(i).norm(), 1.0, 1e-14);
}

TEST(PointCloud, HemisphereEquatorFlagged) {
  const auto c = pim::sample_hemisphere(1000);
  double zmin_unflagged = 1.0;
  double zmax_flagged = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const double z = c.points()(i, 2);
    EXPECT_GE(z, 0.0);
    EXPECT_NEAR(c.points().row(i).norm(), 1.0, 1e-14);
    if (c.boundary()[static_cast<std::size_t>(i)]) {
      zmax_flagged = std::max(zmax_flagged, z);
    } else {
      zmin_unflagged = std::min(zmin_unflagged, z);
    }
  }
  EXPECT_GT(zmax_flagged, 0.0);
  EXPECT_LT(zmax_flagged, 0.1);
  EXPECT_GT(zmin_unflagged, zmax_flagged);
}

TEST(PointCloud, RectangleIsTensorMidpointGrid) {
  const auto c = pim::sample_rectangle(4, 2.0, 1.0);
  ASSERT_EQ(c.size(), 16);
  EXPECT_NEAR(c.weights().sum(), 2.0, 1e-15);
  EXPECT_EQ(c.intrinsic_dim(), 2);
  for (Eigen::Index i = 0; i < c.size(); ++i) EXPECT_DOUBLE_EQ(c.weights()[i], 0.125);
}

TEST(PointCloud, FillDistance) {
  const auto circle = pim::sample_circle(100, 1.0);
  EXPECT_NEAR(circle.h_estimate(), 2 * std::sin(kPi / 100), 1e-14);
  pim::PointMatrix twins(2, 2);
  twins << 0.3, 0.4, 0.3, 0.4;
  EXPECT_EQ(pim::estimate_fill_distance(twins), 0.0);
  EXPECT_DOUBLE_EQ(pim::estimate_fill_distance(pim::sample_interval(4, 1.0)), 0.25);
}

TEST(PointCloud, FillDistanceMatchesBruteForce) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  pim::PointMatrix p(60, 3);
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (int d = 0; d < 3; ++d) p(i, d) = u(rng);
  }
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    double best = 1e300;
    for (Eigen::Index j = 0; j < p.rows(); ++j) {
      if (j != i) best = std::min(best, (p.row(i) - p.row(j)).norm());
    }
    h = std::max(h, best);
  }
  EXPECT_NEAR(pim::estimate_fill_distance(p), h, 1e-15);
}

TEST(PointCloud, PerturbedIntervalIsDeterministicAndNonuniform) {
  const pim::Perturbation pert{0.3, 0.5, 42};
  const auto a = pim::sample_interval(200, kPi, pert);
  const auto b = pim::sample_interval(200, kPi, pert);
  EXPECT_EQ(a.points(), b.points());
  EXPECT_EQ(a.weights(), b.weights());
  EXPECT_NEAR(a.weights().sum(), kPi, 1e-12);
  EXPECT_GT(a.weights().maxCoeff() / a.weights().minCoeff(), 1.5);
  for (Eigen::Index i = 1; i < a.size(); ++i) EXPECT_LT(a.points()(i - 1, 0), a.points()(i, 0));
  const auto c = pim::sample_interval(200, kPi, {0.3, 0.5, 43});
  EXPECT_NE(a.points(), c.points());
}

TEST(PointCloud, PerturbationOnlyFor1D) {
  EXPECT_THROW(pim::sample_manifold(pim::Manifold::Sphere, 100, {}, {0.1, 0.0, 1}), pim::ValidationError);
  EXPECT_NO_THROW(pim::sample_manifold(pim::Manifold::Circle, 100, {}, {0.1, 0.2, 1}));
}

TEST(PointCloud, ParamsResolveAndReject) {
  const auto p = pim::resolve_params(pim::Manifold::Interval, {});
  EXPECT_DOUBLE_EQ(p.at("L"), kPi);
  EXPECT_THROW(pim::resolve_params(pim::Manifold::Interval, {{"radius", 2.0}}), pim::ValidationError);
  EXPECT_THROW(pim::parse_manifold("klein_bottle"), pim::ValidationError);
  for (auto m : {pim::Manifold::Interval, pim::Manifold::Circle, pim::Manifold::Rectangle, pim::Manifold::Torus,
                 pim::Manifold::FlatTorus, pim::Manifold::Sphere, pim::Manifold::Hemisphere}) {
    EXPECT_EQ(pim::parse_manifold(pim::to_string(m)), m);
  }
}

TEST(Quadrature, IntervalExamples) {
  const auto params = pim::ManifoldParams{{"L", kPi}};
  const auto fns = pim::builtin_test_functions(pim::Manifold::Interval, params);
  const auto errs = pim::quadrature_check(pim::sample_interval(100, kPi), fns);
  for (std::size_t k = 0; k < fns.size(); ++k) {
    if (fns[k].name == "one") EXPECT_LE(errs[k], 1e-14);
    if (fns[k].name == "cos(x)") EXPECT_LE(errs[k], 1e-3);
  }
}

TEST(Quadrature, Cos2xErrorHalvesUnderRefinement) {
  // On [0, 3] the midpoint rule is not exact for cos(2x).
  const pim::ManifoldParams params{{"L", 3.0}};
  const auto fns = pim::builtin_test_functions(pim::Manifold::Interval, params);
  std::size_t idx = fns.size();
  for (std::size_t k = 0; k < fns.size(); ++k) {
    if (fns[k].name == "cos(2x)") idx = k;
  }
  ASSERT_LT(idx, fns.size());
  double prev = -1.0;
  for (int n : {50, 100, 200, 400}) {
    const double e = pim::quadrature_check(pim::sample_interval(n, 3.0), fns)[idx];
    EXPECT_GT(e, 0.0);
    if (prev > 0) EXPECT_LE(e, 0.5 * prev) << "n = " << n;
    prev = e;
  }
}

TEST(Quadrature, ExactIntegralsOfTestFunctions) {
  // Cross-check the tabulated exact integrals of the 1-D sets by quadrature.
  const double L = 2.5;
  for (const auto& fn : pim::builtin_test_functions(pim::Manifold::Interval, {{"L", L}})) {
    const double ref = pim::test::adaptive_simpson(
        [&](double x) { return fn.f(std::span<const double>(&x, 1)); }, 0.0, L, 1e-13);
    EXPECT_NEAR(fn.exact_integral, ref, 1e-10) << fn.name;
  }
  const double r = 1.5;
  for (const auto& fn : pim::builtin_test_functions(pim::Manifold::Circle, {{"radius", r}})) {
    double ref = 0.0;
    for (int piece = 0; piece < 16; ++piece) {
      ref += pim::test::adaptive_simpson(
          [&](double th) {
            const double x[2] = {r * std::cos(th), r * std::sin(th)};
            return fn.f(std::span<const double>(x, 2)) * r;
          },
          2 * kPi * piece / 16, 2 * kPi * (piece + 1) / 16, 1e-13);
    }
    EXPECT_NEAR(fn.exact_integral, ref, 1e-9) << fn.name;
  }
}

TEST(Quadrature, ErrorsDecreaseForSmoothFunctionsOnSphere) {
  const auto fns = pim::builtin_test_functions(pim::Manifold::Sphere, {});
  std::vector<double> prev;
  for (int n : {250, 1000, 4000, 16000}) {
    const auto errs = pim::quadrature_check(pim::sample_sphere(n), fns);
    if (!prev.empty()) {
      for (std::size_t k = 0; k < fns.size(); ++k) {
        if (fns[k].name == "one") continue;
        EXPECT_LE(errs[k], 1.05 * prev[k]) << fns[k].name << " n = " << n;
      }
    }
    prev = errs;
  }
}

TEST(CloudCsv, RoundTripIsByteIdentical) {
  for (auto m : {pim::Manifold::Interval, pim::Manifold::Sphere, pim::Manifold::Hemisphere, pim::Manifold::FlatTorus}) {
    const auto cloud = pim::sample_manifold(m, 60, {});
    std::ostringstream first;
    pim::write_cloud_csv(cloud, first);
    std::istringstream in(first.str());
    const auto back = pim::read_cloud_csv(in);
    std::ostringstream second;
    pim::write_cloud_csv(back, second);
    EXPECT_EQ(first.str(), second.str()) << to_string(m);
    EXPECT_EQ(back.points(), cloud.points());
    EXPECT_EQ(back.weights(), cloud.weights());
    EXPECT_EQ(back.boundary(), cloud.boundary());
    ASSERT_TRUE(back.manifold().has_value());
    EXPECT_EQ(back.manifold()->tag, m);
    EXPECT_EQ(back.intrinsic_dim(), cloud.intrinsic_dim());
  }
}

TEST(CloudCsv, RejectsMalformedInput) {
  const char* bad[] = {
      "x1,V,boundary\n0.5,abc,0\n",
      "x1,W,boundary\n0.5,1,0\n0.7,1,0\n",
      "x1,V,boundary\n0.5,1,0\n0.7,1\n",
      "x1,V,boundary\n0.5,-1,0\n0.7,1,0\n",
      "x1,V,boundary\n0.5,1,2\n0.7,1,0\n",
  };
  for (const char* text : bad) {
    std::istringstream in(text);
    EXPECT_THROW(pim::read_cloud_csv(in), pim::ValidationError) << text;
  }
  std::istringstream ok("x1,V,boundary\n0.5,1,1\n0.7,1,0\n");
  const auto c = pim::read_cloud_csv(ok);
  EXPECT_EQ(c.size(), 2);
  EXPECT_EQ(c.intrinsic_dim(), 1);
  EXPECT_FALSE(c.manifold().has_value());
}

}  // namespace

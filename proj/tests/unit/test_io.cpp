#include <cmath>
#include <limits>
#include <memory>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pim/error.hpp"
#include "pim/io.hpp"

namespace {

TEST(Io, DoubleFormattingRoundTrips) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int k = 0; k < 1000; ++k) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(k % 40) - 20);
    EXPECT_EQ(pim::parse_double(pim::format_double(x)), x);
  }
  EXPECT_EQ(pim::parse_double(pim::format_double(std::numeric_limits<double>::denorm_min())),
            std::numeric_limits<double>::denorm_min());
  EXPECT_THROW(pim::parse_double("1.5x"), pim::ValidationError);
  EXPECT_THROW(pim::parse_double(""), pim::ValidationError);
  EXPECT_THROW(pim::parse_double("abc"), pim::ValidationError);
}

TEST(Io, MatrixMarketRoundTrip) {
  Eigen::MatrixXd d(3, 3);
  d << 1.0 / 3, 0, -2e-17, 0, 0, 5, -2e-17, 5, 7;
  const Eigen::SparseMatrix<double> m = d.sparseView();
  const std::string text = pim::to_matrix_market(m);
  EXPECT_EQ(text.rfind("%%MatrixMarket", 0), 0u);
  EXPECT_EQ(Eigen::MatrixXd(pim::from_matrix_market(text)), d);
  EXPECT_EQ(pim::to_matrix_market(pim::from_matrix_market(text)), text);
  EXPECT_THROW(pim::from_matrix_market("garbage"), pim::ValidationError);
  EXPECT_THROW(pim::from_matrix_market("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n"),
               pim::ValidationError);
}

TEST(Io, PencilDirectoryRoundTrip) {
  pim::test::TempDir dir("io");
  auto cloud = std::make_shared<const pim::PointCloud>(pim::sample_circle(80, 1.0));
  const auto pencil = pim::assemble_pencil(cloud, pim::wendland_kernel(), 0.01);
  pim::write_pencil_dir(pencil, dir.path() / "pencil");
  const auto back = pim::read_pencil_dir(dir.path() / "pencil");
  EXPECT_EQ(Eigen::MatrixXd(back.A), Eigen::MatrixXd(pencil.A));
  EXPECT_EQ(Eigen::MatrixXd(back.B), Eigen::MatrixXd(pencil.B));
  EXPECT_EQ(back.weights, pencil.weights);
  EXPECT_EQ(back.t, pencil.t);
  EXPECT_EQ(back.intrinsic_dim, 1);
  EXPECT_EQ(back.kernel, pim::KernelFamily::Wendland);
  ASSERT_TRUE(back.cloud);
  EXPECT_EQ(back.cloud->points(), cloud->points());
  EXPECT_THROW(pim::read_pencil_dir(dir.path() / "missing"), pim::ValidationError);
}

TEST(Io, SpectrumJsonRoundTrip) {
  pim::test::TempDir dir("spec");
  pim::Spectrum s;
  s.mu = Eigen::Vector3d(0.0, 1.0 / 3, 4.000000001);
  s.vectors = Eigen::MatrixXd::Random(5, 3);
  s.residual_norms = Eigen::Vector3d(1e-15, 2e-14, 3e-13);
  s.converged = {true, true, false};
  s.method = "lanczos";
  s.formulation = "reciprocal";
  s.shift = 0.25;
  s.discarded = 2;
  pim::SpectrumFileInfo info{5, 0.01, "wendland", "pencil", "spec.vectors.csv"};
  pim::write_file_atomic(dir.path() / "spec.vectors.csv", pim::vectors_to_csv(s.vectors));
  const std::string json = pim::spectrum_to_json(s, info);
  pim::SpectrumFileInfo read_info;
  const auto back = pim::spectrum_from_json(json, dir.path(), read_info);
  EXPECT_EQ(back.mu, s.mu);
  EXPECT_EQ(back.residual_norms, s.residual_norms);
  EXPECT_EQ(back.converged, s.converged);
  EXPECT_EQ(back.method, s.method);
  EXPECT_EQ(back.formulation, s.formulation);
  EXPECT_EQ(back.vectors, s.vectors);
  EXPECT_EQ(read_info.n, 5);
  EXPECT_EQ(read_info.t, 0.01);
  EXPECT_EQ(read_info.pencil_dir, "pencil");
  EXPECT_THROW(pim::spectrum_from_json("{not json", dir.path(), read_info), pim::ValidationError);
}

TEST(Io, ColumnsAndPoints) {
  const Eigen::Vector3d v(1.5, -2.0, 1e-300);
  const std::string text = pim::column_to_csv("u", v);
  EXPECT_EQ(text.substr(0, 2), "u\n");
  EXPECT_EQ(pim::column_from_csv(text), v);
  const auto p = pim::points_from_csv("# comment\nx1,x2,V,boundary\n1,2,0.5,0\n3,4,0.5,1\n");
  ASSERT_EQ(p.rows(), 2);
  ASSERT_EQ(p.cols(), 2);
  EXPECT_EQ(p(1, 0), 3.0);
  EXPECT_THROW(pim::points_from_csv("y1\n1\n"), pim::ValidationError);
}

TEST(Io, AtomicWriteReplaces) {
  pim::test::TempDir dir("atomic");
  pim::write_file_atomic(dir.path() / "f.txt", "one");
  pim::write_file_atomic(dir.path() / "f.txt", "two");
  EXPECT_EQ(pim::read_file(dir.path() / "f.txt"), "two");
  EXPECT_THROW(pim::read_file(dir.path() / "nope.txt"), pim::ValidationError);
}

}  // namespace

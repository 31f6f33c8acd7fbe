#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "pim/assembly.hpp"
#include "pim/eigensolve.hpp"

namespace pim {

/// 17 significant digits; parses back bit-exactly.
std::string format_double(double value);
/// Strict full-string parse; throws ValidationError.
double parse_double(std::string_view text);

/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// Matrix Market coordinate file (1-based), 17 significant digits.
std::string to_matrix_market(const Eigen::SparseMatrix<double>& m);
Eigen::SparseMatrix<double> from_matrix_market(std::string_view text);

/// Pencil directory: header.json {n, t, kernel, graph_mode, intrinsic_dim},
/// A.mtx, B.mtx, V.csv and, when the pencil carries its cloud, cloud.csv.
void write_pencil_dir(const PimPencil& pencil, const std::filesystem::path& dir);
PimPencil read_pencil_dir(const std::filesystem::path& dir);

struct SpectrumFileInfo {
  Eigen::Index n = 0;
  double t = 0.0;
  std::string kernel;
  /// Pencil directory the spectrum was computed from (may be empty).
  std::string pencil_dir;
  /// Sidecar CSV with one column per mode (may be empty).
  std::string vectors_csv;
};

/// {mu, residuals, n, t, kernel, method, formulation, converged, pencil, vectors}.
std::string spectrum_to_json(const Spectrum& spectrum, const SpectrumFileInfo& info);
/// Reads mu/residuals/metadata; vectors are loaded from the sidecar when present.
Spectrum spectrum_from_json(std::string_view json, const std::filesystem::path& base_dir,
                            SpectrumFileInfo& info);

std::string vectors_to_csv(const Eigen::MatrixXd& vectors);
Eigen::MatrixXd vectors_from_csv(std::string_view text);

/// Single named column, one value per row.
std::string column_to_csv(std::string_view name, const Eigen::VectorXd& values);
Eigen::VectorXd column_from_csv(std::string_view text);

/// Header starting x1..xd then one point per row; further columns (such as
/// V,boundary of a cloud file) and leading '#' lines are ignored.
PointMatrix points_from_csv(std::string_view text);

}  // namespace pim

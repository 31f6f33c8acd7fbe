#include "pim/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "pim/error.hpp"

namespace pim {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = line.find(sep, start);
    out.push_back(line.substr(start, end == std::string_view::npos ? end : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

long parse_index(std::string_view text) {
  long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ValidationError("malformed integer '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ValidationError("malformed number '" + std::string(text) + "'");
  }
  return value;
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ValidationError("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string to_matrix_market(const Eigen::SparseMatrix<double>& m) {
  std::string out = "%%MatrixMarket matrix coordinate real general\n";
  out += std::to_string(m.rows()) + " " + std::to_string(m.cols()) + " " +
         std::to_string(m.nonZeros()) + "\n";
  // Row-major listing: iterate columns of the transpose.
  const Eigen::SparseMatrix<double, Eigen::RowMajor> r = m;
  for (Eigen::Index i = 0; i < r.outerSize(); ++i) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(r, i); it; ++it) {
      out += std::to_string(it.row() + 1) + " " + std::to_string(it.col() + 1) + " " +
             format_double(it.value()) + "\n";
    }
  }
  return out;
}

Eigen::SparseMatrix<double> from_matrix_market(std::string_view text) {
  const auto lines = split_lines(text);
  std::size_t k = 0;
  while (k < lines.size() && lines[k].front() == '%') ++k;
  if (k >= lines.size()) throw ValidationError("matrix market file has no size line");
  const auto size = split_ws(lines[k++]);
  if (size.size() != 3) throw ValidationError("matrix market size line must be 'rows cols nnz'");
  const long rows = parse_index(size[0]);
  const long cols = parse_index(size[1]);
  const long nnz = parse_index(size[2]);
  if (rows < 0 || cols < 0 || nnz < 0) throw ValidationError("negative matrix market size");
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(nnz));
  for (; k < lines.size(); ++k) {
    const auto f = split_ws(lines[k]);
    if (f.size() != 3) throw ValidationError("matrix market entry must be 'row col value'");
    const long i = parse_index(f[0]) - 1;
    const long j = parse_index(f[1]) - 1;
    if (i < 0 || j < 0 || i >= rows || j >= cols) throw ValidationError("matrix market index out of range");
    triplets.emplace_back(i, j, parse_double(f[2]));
  }
  if (static_cast<long>(triplets.size()) != nnz) {
    throw ValidationError("matrix market entry count does not match header");
  }
  Eigen::SparseMatrix<double> m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

void write_pencil_dir(const PimPencil& pencil, const fs::path& dir) {
  fs::create_directories(dir);
  json header = {{"n", pencil.size()},
                 {"t", pencil.t},
                 {"kernel", std::string(to_string(pencil.kernel))},
                 {"graph_mode", pencil.graph_mode},
                 {"intrinsic_dim", pencil.intrinsic_dim},
                 {"warnings", pencil.warnings}};
  write_file_atomic(dir / "A.mtx", to_matrix_market(pencil.A));
  write_file_atomic(dir / "B.mtx", to_matrix_market(pencil.B));
  write_file_atomic(dir / "V.csv", column_to_csv("V", pencil.weights));
  if (pencil.cloud) {
    std::ostringstream cloud;
    write_cloud_csv(*pencil.cloud, cloud);
    write_file_atomic(dir / "cloud.csv", cloud.str());
    header["cloud"] = "cloud.csv";
  }
  write_file_atomic(dir / "header.json", header.dump(2) + "\n");
}

PimPencil read_pencil_dir(const fs::path& dir) {
  json header;
  try {
    header = json::parse(read_file(dir / "header.json"));
  } catch (const json::exception& e) {
    throw ValidationError("malformed pencil header: " + std::string(e.what()));
  }
  PimPencil p;
  try {
    p.t = header.at("t").get<double>();
    p.kernel = parse_kernel_family(header.at("kernel").get<std::string>());
    p.graph_mode = header.at("graph_mode").get<bool>();
    p.intrinsic_dim = header.at("intrinsic_dim").get<int>();
    p.warnings = header.value("warnings", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw ValidationError("malformed pencil header: " + std::string(e.what()));
  }
  p.A = from_matrix_market(read_file(dir / "A.mtx"));
  p.B = from_matrix_market(read_file(dir / "B.mtx"));
  p.weights = column_from_csv(read_file(dir / "V.csv"));
  const auto n = header.at("n").get<Eigen::Index>();
  if (p.A.rows() != n || p.B.rows() != n || p.weights.size() != n) {
    throw ValidationError("pencil files disagree with header size n = " + std::to_string(n));
  }
  if (header.contains("cloud")) {
    std::istringstream in(read_file(dir / header["cloud"].get<std::string>()));
    p.cloud = std::make_shared<const PointCloud>(read_cloud_csv(in));
  }
  return p;
}

std::string spectrum_to_json(const Spectrum& spectrum, const SpectrumFileInfo& info) {
  json j;
  j["mu"] = std::vector<double>(spectrum.mu.data(), spectrum.mu.data() + spectrum.mu.size());
  j["residuals"] = std::vector<double>(spectrum.residual_norms.data(),
                                       spectrum.residual_norms.data() + spectrum.residual_norms.size());
  j["converged"] = spectrum.converged;
  j["n"] = info.n;
  j["t"] = info.t;
  j["kernel"] = info.kernel;
  j["method"] = spectrum.method;
  j["formulation"] = spectrum.formulation;
  j["shift"] = spectrum.shift;
  j["discarded"] = spectrum.discarded;
  if (!info.pencil_dir.empty()) j["pencil"] = info.pencil_dir;
  if (!info.vectors_csv.empty()) j["vectors"] = info.vectors_csv;
  return j.dump(2) + "\n";
}

Spectrum spectrum_from_json(std::string_view text, const fs::path& base_dir, SpectrumFileInfo& info) {
  Spectrum s;
  try {
    const json j = json::parse(text);
    const auto mu = j.at("mu").get<std::vector<double>>();
    const auto res = j.at("residuals").get<std::vector<double>>();
    s.mu = Eigen::Map<const Eigen::VectorXd>(mu.data(), static_cast<Eigen::Index>(mu.size()));
    s.residual_norms =
        Eigen::Map<const Eigen::VectorXd>(res.data(), static_cast<Eigen::Index>(res.size()));
    s.converged = j.value("converged", std::vector<bool>(mu.size(), true));
    s.method = j.value("method", std::string{});
    s.formulation = j.value("formulation", std::string{});
    s.shift = j.value("shift", 0.0);
    s.discarded = j.value("discarded", Eigen::Index{0});
    info.n = j.at("n").get<Eigen::Index>();
    info.t = j.at("t").get<double>();
    info.kernel = j.at("kernel").get<std::string>();
    info.pencil_dir = j.value("pencil", std::string{});
    info.vectors_csv = j.value("vectors", std::string{});
  } catch (const json::exception& e) {
    throw ValidationError("malformed spectrum JSON: " + std::string(e.what()));
  }
  if (!info.vectors_csv.empty()) {
    s.vectors = vectors_from_csv(read_file(base_dir / info.vectors_csv));
    if (s.vectors.cols() != s.mu.size() || s.vectors.rows() != info.n) {
      throw ValidationError("spectrum vectors sidecar has the wrong shape");
    }
  }
  return s;
}

std::string vectors_to_csv(const Eigen::MatrixXd& vectors) {
  std::string out;
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    out += (c ? ",mode" : "mode") + std::to_string(c);
  }
  out += '\n';
  for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
      if (c) out += ',';
      out += format_double(vectors(i, c));
    }
    out += '\n';
  }
  return out;
}

Eigen::MatrixXd vectors_from_csv(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw ValidationError("empty vectors CSV");
  const auto cols = static_cast<Eigen::Index>(split_fields(lines[0], ',').size());
  Eigen::MatrixXd m(static_cast<Eigen::Index>(lines.size() - 1), cols);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto f = split_fields(lines[r], ',');
    if (static_cast<Eigen::Index>(f.size()) != cols) throw ValidationError("ragged vectors CSV");
    for (Eigen::Index c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r - 1), c) = parse_double(f[c]);
  }
  return m;
}

std::string column_to_csv(std::string_view name, const Eigen::VectorXd& values) {
  std::string out(name);
  out += '\n';
  for (Eigen::Index i = 0; i < values.size(); ++i) out += format_double(values[i]) + "\n";
  return out;
}

Eigen::VectorXd column_from_csv(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw ValidationError("empty column CSV");
  Eigen::VectorXd v(static_cast<Eigen::Index>(lines.size() - 1));
  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (lines[r].find(',') != std::string_view::npos) {
      throw ValidationError("column CSV must have a single column");
    }
    v[static_cast<Eigen::Index>(r - 1)] = parse_double(lines[r]);
  }
  return v;
}

PointMatrix points_from_csv(std::string_view text) {
  auto lines = split_lines(text);
  while (!lines.empty() && lines.front().front() == '#') lines.erase(lines.begin());
  if (lines.empty()) throw ValidationError("empty points CSV");
  const auto header = split_fields(lines[0], ',');
  Eigen::Index d = 0;
  while (d < static_cast<Eigen::Index>(header.size()) && header[d] == "x" + std::to_string(d + 1)) ++d;
  if (d == 0) throw ValidationError("points CSV header must start with x1,...,xd");
  PointMatrix p(static_cast<Eigen::Index>(lines.size() - 1), d);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto f = split_fields(lines[r], ',');
    if (f.size() != header.size()) throw ValidationError("ragged points CSV");
    for (Eigen::Index c = 0; c < d; ++c) p(static_cast<Eigen::Index>(r - 1), c) = parse_double(f[c]);
  }
  return p;
}

}  // namespace pim

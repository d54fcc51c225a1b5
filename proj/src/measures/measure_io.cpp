#include "diffu/measures/measure_io.hpp"

#include "diffu/common/error.hpp"
#include "diffu/report/csv.hpp"

namespace diffu {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  require(j.is_array() && !j.empty(), "matrix must be a non-empty array of rows");
  const auto rows = static_cast<Index>(j.size());
  const auto cols = static_cast<Index>(j.at(0).size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    require(row.is_array() && static_cast<Index>(row.size()) == cols, "ragged matrix rows");
    for (Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

json vector_to_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vector_from_json(const json& j) {
  require(j.is_array(), "vector must be an array");
  Vector v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i) v(i) = j.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

EmpiricalMeasure load_empirical_csv(const std::string& path, bool has_header) {
  const auto table = report::read_csv(path, has_header);
  require(!table.rows.empty(), "empirical CSV has no rows: " + path);
  return EmpiricalMeasure(table.to_matrix());
}

void save_empirical_csv(const EmpiricalMeasure& m, const std::string& path, bool with_header) {
  std::vector<std::string> header;
  if (with_header)
    for (Index j = 0; j < m.dim(); ++j) header.push_back("x" + std::to_string(j));
  report::write_matrix_csv(path, m.samples(), header);
}

json to_json(const GaussianMeasure& g) {
  return {{"kind", "gaussian"}, {"mean", vector_to_json(g.mean())}, {"covariance", matrix_to_json(g.covariance())}};
}

json to_json(const SubspaceGaussian& s) {
  return {{"kind", "subspace_gaussian"},
          {"mean", vector_to_json(Vector::Zero(s.dim()))},
          {"embedding", matrix_to_json(s.embedding())},
          {"intrinsic_covariance", matrix_to_json(s.intrinsic_covariance())}};
}

GaussianMeasure gaussian_from_json(const json& j) {
  require(j.value("kind", "") == "gaussian", "expected kind 'gaussian'");
  return {vector_from_json(j.at("mean")), matrix_from_json(j.at("covariance"))};
}

SubspaceGaussian subspace_from_json(const json& j) {
  require(j.value("kind", "") == "subspace_gaussian", "expected kind 'subspace_gaussian'");
  if (j.contains("mean")) {
    require(vector_from_json(j.at("mean")).isZero(0.0), "subspace Gaussian mean must be zero");
  }
  return {matrix_from_json(j.at("embedding")), matrix_from_json(j.at("intrinsic_covariance"))};
}

Matrix standard_normal_rows(Index n, Index k, std::uint64_t seed) {
  Matrix out(n, k);
  for (Index i = 0; i < n; ++i) {
    CounterRng rng(seed, StreamTag::kDataset, static_cast<std::uint64_t>(i));
    for (Index j = 0; j < k; ++j) out(i, j) = rng.normal();
  }
  return out;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

Index parse_index(const std::string& s, const std::string& spec) {
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size() || v < 1) throw std::invalid_argument(s);
    return static_cast<Index>(v);
  } catch (const std::exception&) {
    throw ValidationError("bad integer '" + s + "' in measure spec '" + spec + "'");
  }
}

}  // namespace

std::shared_ptr<const ScoreOracle> make_measure(const std::string& spec, std::uint64_t seed) {
  const auto colon = spec.find(':');
  require(colon != std::string::npos, "measure spec must look like kind:args, got '" + spec + "'");
  const std::string kind = spec.substr(0, colon);
  const std::string rest = spec.substr(colon + 1);
  if (kind == "builtin") {
    const auto parts = split(rest, ':');
    const std::string& name = parts[0];
    if (name == "gauss2d" && parts.size() == 1) return std::make_shared<GaussianMeasure>(GaussianMeasure::standard(2));
    if (name == "gauss" && parts.size() == 2)
      return std::make_shared<GaussianMeasure>(GaussianMeasure::standard(parse_index(parts[1], spec)));
    if (name == "point" && parts.size() == 2)
      return std::make_shared<GaussianMeasure>(GaussianMeasure::point_mass(Vector::Zero(parse_index(parts[1], spec))));
    if (name == "subspace" && parts.size() == 3)
      return std::make_shared<SubspaceGaussian>(
          SubspaceGaussian::coordinate(parse_index(parts[1], spec), parse_index(parts[2], spec)));
    if (name == "atoms" && parts.size() == 2)
      return std::make_shared<EmpiricalMeasure>(standard_normal_rows(parse_index(parts[1], spec), 2, seed));
    fail_validation("unknown builtin measure '" + spec + "'");
  }
  if (kind == "csv") return std::make_shared<EmpiricalMeasure>(load_empirical_csv(rest, false));
  if (kind == "csv+header") return std::make_shared<EmpiricalMeasure>(load_empirical_csv(rest, true));
  if (kind == "json") {
    const json j = json::parse(report::read_text_file(rest));
    const std::string k = j.value("kind", "");
    if (k == "gaussian") return std::make_shared<GaussianMeasure>(gaussian_from_json(j));
    if (k == "subspace_gaussian") return std::make_shared<SubspaceGaussian>(subspace_from_json(j));
    fail_validation("unknown measure kind '" + k + "' in " + rest);
  }
  fail_validation("unknown measure spec '" + spec + "'");
}

}  // namespace diffu

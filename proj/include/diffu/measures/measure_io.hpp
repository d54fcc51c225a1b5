#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include <json.hpp>

#include "diffu/measures/empirical.hpp"
#include "diffu/measures/gaussian.hpp"
#include "diffu/measures/subspace_gaussian.hpp"

namespace diffu {

EmpiricalMeasure load_empirical_csv(const std::string& path, bool has_header);
void save_empirical_csv(const EmpiricalMeasure& m, const std::string& path, bool with_header);

nlohmann::json to_json(const GaussianMeasure& g);
nlohmann::json to_json(const SubspaceGaussian& s);
GaussianMeasure gaussian_from_json(const nlohmann::json& j);
SubspaceGaussian subspace_from_json(const nlohmann::json& j);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

/// Resolves a measure description used by the CLI and config files:
///   builtin:gauss2d              N(0, I_2)
///   builtin:gauss:<k>            N(0, I_k)
///   builtin:point:<k>            point mass at the origin of R^k
///   builtin:subspace:<m>:<k>     N(0, I_m) on the first m axes of R^k
///   builtin:atoms:<N>            N i.i.d. draws from N(0, I_2) (uses seed)
///   csv:<path> | csv+header:<path>   empirical measure
///   json:<path>                  Gaussian or subspace Gaussian document
std::shared_ptr<const ScoreOracle> make_measure(const std::string& spec, std::uint64_t seed);

/// Draws N rows of N(0, I_k) with per-row counter streams.
Matrix standard_normal_rows(Index n, Index k, std::uint64_t seed);

}  // namespace diffu

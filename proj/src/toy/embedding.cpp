#include "diffu/toy/embedding.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "diffu/common/error.hpp"

namespace diffu::toy {

const Vector& embedding_frequencies(int dim) {
  if (dim <= 0 || dim % 2 != 0) fail_validation("sinusoidal embedding needs an even positive dim, got " + std::to_string(dim));
  static std::mutex mu;
  static std::map<int, Vector> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(dim);
  if (it == cache.end()) {
    const int half = dim / 2;
    Vector w(half);
    for (int j = 0; j < half; ++j) w(j) = half == 1 ? 1.0 : std::pow(10.0, -4.0 * j / (half - 1));
    it = cache.emplace(dim, std::move(w)).first;
  }
  return it->second;
}

void sinusoidal_embed(double v, int dim, double* out) {
  const Vector& w = embedding_frequencies(dim);
  for (Index j = 0; j < w.size(); ++j) {
    out[2 * j] = std::sin(w(j) * v);
    out[2 * j + 1] = std::cos(w(j) * v);
  }
}

Vector sinusoidal_embed(double v, int dim) {
  Vector out(dim);
  sinusoidal_embed(v, dim, out.data());
  return out;
}

void sinusoidal_embed_derivative(double v, int dim, double* out) {
  const Vector& w = embedding_frequencies(dim);
  for (Index j = 0; j < w.size(); ++j) {
    out[2 * j] = w(j) * std::cos(w(j) * v);
    out[2 * j + 1] = -w(j) * std::sin(w(j) * v);
  }
}

}  // namespace diffu::toy

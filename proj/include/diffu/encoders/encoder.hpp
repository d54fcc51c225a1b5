#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "diffu/common/dual.hpp"
#include "diffu/common/error.hpp"
#include "diffu/common/types.hpp"

namespace diffu {

enum class Activation { kRelu, kLeakyRelu, kGelu, kSigmoid, kTanh };
enum class Smoothness { kPiecewiseLinear, kSmooth };

struct JacobianResult {
  Matrix matrix;         // d x D
  bool at_kink = false;  // a piecewise-linear coordinate was exactly on its kink
};

class Encoder;

namespace encoder_detail {

struct Identity {};
struct Pointwise {
  Activation kind;
  double alpha = 0.0;  // negative slope, leaky ReLU only
};
struct LinearDiag {
  double delta0;
};
struct ZeroPad {
  Index keep;  // leading coordinates copied; the rest of the output is zero
};
struct Cylinder {
  double eps0;
};
struct GeneralLinear {
  Matrix a;
};
struct Composite {
  std::shared_ptr<const std::vector<Encoder>> stages;
};

using Payload = std::variant<Identity, Pointwise, LinearDiag, ZeroPad, Cylinder, GeneralLinear, Composite>;

template <class T>
T activate(Activation kind, double alpha, const T& x) {
  switch (kind) {
    case Activation::kRelu:
      return primal(x) > 0.0 ? x : T(0.0);
    case Activation::kLeakyRelu:
      return primal(x) > 0.0 ? x : T(alpha) * x;
    case Activation::kGelu:
      return x * T(0.5) * (T(1.0) + erf(x * T(0.70710678118654752440)));
    case Activation::kSigmoid:
      return T(1.0) / (T(1.0) + exp(-x));
    case Activation::kTanh:
      return tanh(x);
  }
  return x;
}

}  // namespace encoder_detail

/// A map E: R^D -> R^d with an analytic Jacobian. Encoders are immutable
/// values; composites share their stages.
class Encoder {
 public:
  static Encoder identity(Index dim);
  static Encoder pointwise(Activation kind, Index dim, double alpha = 0.01);
  /// A = diag(sqrt(1 + delta0), sqrt(1 - delta0)) on R^2.
  static Encoder linear_diag(double delta0);
  /// R^in -> R^out copying the first `keep` coordinates.
  static Encoder zero_pad(Index in, Index out, Index keep);
  /// Wraps the (x1, x2) plane onto a cylinder of radius 1/eps0 in R^3; x3 is ignored.
  static Encoder cylinder(double eps0);
  static Encoder general_linear(Matrix a);
  /// Applies stages left to right.
  static Encoder composite(std::vector<Encoder> stages);

  /// Parses CLI specs: identity, relu, leaky_relu:<alpha>, gelu, sigmoid,
  /// tanh, linear_diag:<delta0>, zero_pad:<d>, cylinder:<eps0>, scale:<a>.
  /// `input_dim` fixes D for dimension-agnostic variants.
  static Encoder parse(const std::string& spec, Index input_dim);

  const std::string& name() const { return name_; }
  Index input_dim() const { return in_; }
  Index output_dim() const { return out_; }
  Smoothness smoothness() const;
  bool is_linear() const;

  Vector apply(const Vector& x) const;
  JacobianResult jacobian(const Vector& x) const;

  /// True if x sits exactly on a kink of a piecewise-linear stage where the
  /// slopes differ (so second derivatives are Dirac masses there).
  bool at_kink(const Vector& x) const;

  /// Evaluation over any scalar supporting + - * / and the elementary
  /// functions (used with dual numbers for directional derivatives).
  template <class T>
  std::vector<T> apply_generic(const std::vector<T>& x) const;

  nlohmann::json to_json() const;
  static Encoder from_json(const nlohmann::json& j);

  const encoder_detail::Payload& payload() const { return payload_; }

 private:
  static Encoder from_json_payload(const nlohmann::json& j);
  Encoder(std::string name, Index in, Index out, encoder_detail::Payload p)
      : name_(std::move(name)), in_(in), out_(out), payload_(std::move(p)) {}

  void check_input(Index n) const;

  std::string name_;
  Index in_ = 0;
  Index out_ = 0;
  encoder_detail::Payload payload_;
};

template <class T>
std::vector<T> Encoder::apply_generic(const std::vector<T>& x) const {
  using namespace encoder_detail;
  check_input(static_cast<Index>(x.size()));
  return std::visit(
      [&](const auto& p) -> std::vector<T> {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, Identity>) {
          return x;
        } else if constexpr (std::is_same_v<P, Pointwise>) {
          std::vector<T> y(x.size());
          for (std::size_t i = 0; i < x.size(); ++i) y[i] = activate(p.kind, p.alpha, x[i]);
          return y;
        } else if constexpr (std::is_same_v<P, LinearDiag>) {
          return {T(std::sqrt(1.0 + p.delta0)) * x[0], T(std::sqrt(1.0 - p.delta0)) * x[1]};
        } else if constexpr (std::is_same_v<P, ZeroPad>) {
          std::vector<T> y(static_cast<std::size_t>(out_), T(0.0));
          for (Index i = 0; i < p.keep; ++i) y[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)];
          return y;
        } else if constexpr (std::is_same_v<P, Cylinder>) {
          const T t = T(p.eps0) * x[0];
          return {sin(t) / T(p.eps0), x[1], (T(1.0) - cos(t)) / T(p.eps0)};
        } else if constexpr (std::is_same_v<P, GeneralLinear>) {
          std::vector<T> y(static_cast<std::size_t>(out_), T(0.0));
          for (Index r = 0; r < p.a.rows(); ++r)
            for (Index c = 0; c < p.a.cols(); ++c)
              y[static_cast<std::size_t>(r)] += T(p.a(r, c)) * x[static_cast<std::size_t>(c)];
          return y;
        } else {
          std::vector<T> cur = x;
          for (const auto& stage : *p.stages) cur = stage.apply_generic(cur);
          return cur;
        }
      },
      payload_);
}

const char* activation_name(Activation a);

}  // namespace diffu

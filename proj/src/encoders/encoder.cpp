#include "diffu/encoders/encoder.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace diffu {

using namespace encoder_detail;
using nlohmann::json;

namespace {

double activation_slope(Activation kind, double alpha, double x) {
  switch (kind) {
    case Activation::kRelu:
      return x > 0.0 ? 1.0 : 0.0;
    case Activation::kLeakyRelu:
      return x > 0.0 ? 1.0 : alpha;
    case Activation::kGelu: {
      const double cdf = 0.5 * std::erfc(-x / std::numbers::sqrt2);
      const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
      return cdf + x * pdf;
    }
    case Activation::kSigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-x));
      return s * (1.0 - s);
    }
    case Activation::kTanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
  }
  return 1.0;
}

bool has_kink(const Pointwise& p) {
  return p.kind == Activation::kRelu || (p.kind == Activation::kLeakyRelu && p.alpha != 1.0);
}

std::string format_param(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

double parse_param(const std::string& s, const std::string& spec) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("bad numeric parameter '" + s + "' in encoder spec '" + spec + "'");
  }
}

}  // namespace

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kRelu:
      return "relu";
    case Activation::kLeakyRelu:
      return "leaky_relu";
    case Activation::kGelu:
      return "gelu";
    case Activation::kSigmoid:
      return "sigmoid";
    case Activation::kTanh:
      return "tanh";
  }
  return "?";
}

Encoder Encoder::identity(Index dim) {
  require(dim >= 1, "identity encoder needs dim >= 1");
  return {"identity", dim, dim, Identity{}};
}

Encoder Encoder::pointwise(Activation kind, Index dim, double alpha) {
  require(dim >= 1, "pointwise encoder needs dim >= 1");
  std::string name = activation_name(kind);
  if (kind == Activation::kLeakyRelu) {
    require(alpha > 0.0 && std::isfinite(alpha), "leaky_relu slope must be > 0");
    name += ":" + format_param(alpha);
  }
  return {name, dim, dim, Pointwise{kind, kind == Activation::kLeakyRelu ? alpha : 0.0}};
}

Encoder Encoder::linear_diag(double delta0) {
  require(delta0 >= 0.0 && delta0 < 1.0, "linear_diag needs 0 <= delta0 < 1");
  return {"linear_diag:" + format_param(delta0), 2, 2, LinearDiag{delta0}};
}

Encoder Encoder::zero_pad(Index in, Index out, Index keep) {
  require(in >= 1 && out >= 1, "zero_pad dimensions must be >= 1");
  require(keep >= 0 && keep <= in && keep <= out, "zero_pad keep must be <= min(in, out)");
  return {"zero_pad:" + std::to_string(out), in, out, ZeroPad{keep}};
}

Encoder Encoder::cylinder(double eps0) {
  require(eps0 > 0.0 && std::isfinite(eps0), "cylinder needs eps0 > 0");
  return {"cylinder:" + format_param(eps0), 3, 3, Cylinder{eps0}};
}

Encoder Encoder::general_linear(Matrix a) {
  require(a.rows() >= 1 && a.cols() >= 1 && a.allFinite(), "general linear map must be finite and non-empty");
  const Index in = a.cols();
  const Index out = a.rows();
  return {"linear", in, out, GeneralLinear{std::move(a)}};
}

Encoder Encoder::composite(std::vector<Encoder> stages) {
  require(!stages.empty(), "composite encoder needs at least one stage");
  std::string name;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (i) {
      require(stages[i].input_dim() == stages[i - 1].output_dim(), "composite stage dimensions do not chain");
      name += ">";
    }
    name += stages[i].name();
  }
  const Index in = stages.front().input_dim();
  const Index out = stages.back().output_dim();
  return {name, in, out, Composite{std::make_shared<const std::vector<Encoder>>(std::move(stages))}};
}

Encoder Encoder::parse(const std::string& spec, Index input_dim) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const bool has_arg = colon != std::string::npos;
  const std::string arg = has_arg ? spec.substr(colon + 1) : std::string{};
  auto need_arg = [&] {
    if (!has_arg) fail_validation("encoder '" + kind + "' needs a parameter, e.g. " + kind + ":0.5");
  };
  auto no_arg = [&] {
    if (has_arg) fail_validation("encoder '" + kind + "' takes no parameter");
  };
  if (kind == "identity") return no_arg(), identity(input_dim);
  if (kind == "relu") return no_arg(), pointwise(Activation::kRelu, input_dim);
  if (kind == "gelu") return no_arg(), pointwise(Activation::kGelu, input_dim);
  if (kind == "sigmoid") return no_arg(), pointwise(Activation::kSigmoid, input_dim);
  if (kind == "tanh") return no_arg(), pointwise(Activation::kTanh, input_dim);
  if (kind == "leaky_relu") {
    need_arg();
    return pointwise(Activation::kLeakyRelu, input_dim, parse_param(arg, spec));
  }
  if (kind == "linear_diag") {
    need_arg();
    require(input_dim == 2, "linear_diag acts on R^2");
    return linear_diag(parse_param(arg, spec));
  }
  if (kind == "zero_pad") {
    need_arg();
    const double d = parse_param(arg, spec);
    require(d >= 1 && d == std::floor(d), "zero_pad needs an integer output dimension");
    const auto out = static_cast<Index>(d);
    return zero_pad(input_dim, out, std::min(input_dim, out));
  }
  if (kind == "cylinder") {
    need_arg();
    require(input_dim == 3, "cylinder acts on R^3");
    return cylinder(parse_param(arg, spec));
  }
  if (kind == "scale") {
    need_arg();
    Encoder e = general_linear(parse_param(arg, spec) * Matrix::Identity(input_dim, input_dim));
    e.name_ = spec;
    return e;
  }
  fail_validation("unknown encoder '" + spec +
                  "' (expected identity, relu, leaky_relu:a, gelu, sigmoid, tanh, linear_diag:d, zero_pad:n, "
                  "cylinder:e, scale:a)");
}

void Encoder::check_input(Index n) const {
  if (n != in_) {
    fail_validation("encoder '" + name_ + "' expects dimension " + std::to_string(in_) + ", got " + std::to_string(n));
  }
}

Smoothness Encoder::smoothness() const {
  return std::visit(
      [](const auto& p) -> Smoothness {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, Pointwise>) {
          return has_kink(p) ? Smoothness::kPiecewiseLinear : Smoothness::kSmooth;
        } else if constexpr (std::is_same_v<P, Composite>) {
          for (const auto& s : *p.stages)
            if (s.smoothness() == Smoothness::kPiecewiseLinear) return Smoothness::kPiecewiseLinear;
          return Smoothness::kSmooth;
        } else {
          return Smoothness::kSmooth;
        }
      },
      payload_);
}

bool Encoder::is_linear() const {
  return std::visit(
      [](const auto& p) -> bool {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, Pointwise>) {
          return p.kind == Activation::kLeakyRelu && p.alpha == 1.0;
        } else if constexpr (std::is_same_v<P, Cylinder>) {
          return false;
        } else if constexpr (std::is_same_v<P, Composite>) {
          for (const auto& s : *p.stages)
            if (!s.is_linear()) return false;
          return true;
        } else {
          return true;
        }
      },
      payload_);
}

Vector Encoder::apply(const Vector& x) const {
  check_input(x.size());
  std::vector<double> in(x.data(), x.data() + x.size());
  const auto out = apply_generic(in);
  return Eigen::Map<const Vector>(out.data(), static_cast<Index>(out.size()));
}

JacobianResult Encoder::jacobian(const Vector& x) const {
  check_input(x.size());
  JacobianResult r;
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, Identity>) {
          r.matrix = Matrix::Identity(in_, in_);
        } else if constexpr (std::is_same_v<P, Pointwise>) {
          r.matrix = Matrix::Zero(in_, in_);
          for (Index i = 0; i < in_; ++i) {
            r.matrix(i, i) = activation_slope(p.kind, p.alpha, x(i));
            if (has_kink(p) && x(i) == 0.0) r.at_kink = true;
          }
        } else if constexpr (std::is_same_v<P, LinearDiag>) {
          r.matrix = Matrix::Zero(2, 2);
          r.matrix(0, 0) = std::sqrt(1.0 + p.delta0);
          r.matrix(1, 1) = std::sqrt(1.0 - p.delta0);
        } else if constexpr (std::is_same_v<P, ZeroPad>) {
          r.matrix = Matrix::Zero(out_, in_);
          for (Index i = 0; i < p.keep; ++i) r.matrix(i, i) = 1.0;
        } else if constexpr (std::is_same_v<P, Cylinder>) {
          const double t = p.eps0 * x(0);
          r.matrix = Matrix::Zero(3, 3);
          r.matrix(0, 0) = std::cos(t);
          r.matrix(1, 1) = 1.0;
          r.matrix(2, 0) = std::sin(t);
        } else if constexpr (std::is_same_v<P, GeneralLinear>) {
          r.matrix = p.a;
        } else {
          Vector cur = x;
          r.matrix = Matrix::Identity(in_, in_);
          for (const auto& stage : *p.stages) {
            const JacobianResult j = stage.jacobian(cur);
            r.matrix = j.matrix * r.matrix;
            r.at_kink = r.at_kink || j.at_kink;
            cur = stage.apply(cur);
          }
        }
      },
      payload_);
  return r;
}

bool Encoder::at_kink(const Vector& x) const { return jacobian(x).at_kink; }

json Encoder::to_json() const {
  json j = std::visit(
      [&](const auto& p) -> json {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, Identity>) {
          return {{"variant", "identity"}, {"params", {{"dim", in_}}}};
        } else if constexpr (std::is_same_v<P, Pointwise>) {
          json params = {{"dim", in_}};
          if (p.kind == Activation::kLeakyRelu) params["alpha"] = p.alpha;
          return {{"variant", activation_name(p.kind)}, {"params", params}};
        } else if constexpr (std::is_same_v<P, LinearDiag>) {
          return {{"variant", "linear_diag"}, {"params", {{"delta0", p.delta0}}}};
        } else if constexpr (std::is_same_v<P, ZeroPad>) {
          return {{"variant", "zero_pad"}, {"params", {{"in", in_}, {"out", out_}, {"keep", p.keep}}}};
        } else if constexpr (std::is_same_v<P, Cylinder>) {
          return {{"variant", "cylinder"}, {"params", {{"eps0", p.eps0}}}};
        } else if constexpr (std::is_same_v<P, GeneralLinear>) {
          json rows = json::array();
          for (Index i = 0; i < p.a.rows(); ++i) {
            json row = json::array();
            for (Index j = 0; j < p.a.cols(); ++j) row.push_back(p.a(i, j));
            rows.push_back(row);
          }
          return {{"variant", "general_linear"}, {"params", {{"matrix", rows}}}};
        } else {
          json stages = json::array();
          for (const auto& s : *p.stages) stages.push_back(s.to_json());
          return {{"variant", "composite"}, {"params", {{"stages", stages}}}};
        }
      },
      payload_);
  j["name"] = name_;
  return j;
}

Encoder Encoder::from_json(const json& j) {
  Encoder e = from_json_payload(j);
  if (j.contains("name")) e.name_ = j.at("name").get<std::string>();
  return e;
}

Encoder Encoder::from_json_payload(const json& j) {
  const std::string v = j.at("variant").get<std::string>();
  const json& p = j.at("params");
  if (v == "identity") return identity(p.at("dim").get<Index>());
  if (v == "relu") return pointwise(Activation::kRelu, p.at("dim").get<Index>());
  if (v == "leaky_relu") return pointwise(Activation::kLeakyRelu, p.at("dim").get<Index>(), p.at("alpha").get<double>());
  if (v == "gelu") return pointwise(Activation::kGelu, p.at("dim").get<Index>());
  if (v == "sigmoid") return pointwise(Activation::kSigmoid, p.at("dim").get<Index>());
  if (v == "tanh") return pointwise(Activation::kTanh, p.at("dim").get<Index>());
  if (v == "linear_diag") return linear_diag(p.at("delta0").get<double>());
  if (v == "zero_pad") return zero_pad(p.at("in").get<Index>(), p.at("out").get<Index>(), p.at("keep").get<Index>());
  if (v == "cylinder") return cylinder(p.at("eps0").get<double>());
  if (v == "general_linear") {
    const json& rows = p.at("matrix");
    Matrix a(static_cast<Index>(rows.size()), static_cast<Index>(rows.at(0).size()));
    for (Index i = 0; i < a.rows(); ++i)
      for (Index c = 0; c < a.cols(); ++c)
        a(i, c) = rows.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(c)).get<double>();
    return general_linear(a);
  }
  if (v == "composite") {
    std::vector<Encoder> stages;
    for (const auto& s : p.at("stages")) stages.push_back(from_json(s));
    return composite(std::move(stages));
  }
  fail_validation("unknown encoder variant '" + v + "'");
}

}  // namespace diffu

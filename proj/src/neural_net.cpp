#include <cmath>
#include <cstdio>
#include <sstream>

#include "a2p/neural.hpp"
#include "a2p/util.hpp"

namespace a2p::neural {

namespace {

constexpr double kLow = 0.01;
constexpr double kHigh = 0.99;
constexpr std::string_view kMagic = "a2p-net 1";

std::string hex(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double unhex(const std::string& s) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw DataError("network file: bad number '" + s + "'");
  return v;
}

struct Activations {
  std::vector<Matrix> inputs;  // input of each layer
  std::vector<Matrix> pre;     // pre-activation of each layer
  Matrix output;
};

Activations run(const FeedForwardNet& net, const Matrix& x) {
  const auto& layers = net.layers();
  const double a = net.shape().a, b = net.shape().b;
  Activations act;
  Matrix h = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix z = h * layers[l].weights.transpose();
    z.rowwise() += layers[l].bias.transpose();
    act.inputs.push_back(std::move(h));
    if (l + 1 < layers.size()) {
      h = (b * z.array()).tanh() * a;
    } else {
      h = z;
    }
    act.pre.push_back(std::move(z));
  }
  act.output = std::move(h);
  return act;
}

void check_batch(const FeedForwardNet& net, const Matrix& x, const Matrix& y) {
  if (x.rows() == 0) throw EmptyBatch();
  if (static_cast<std::size_t>(x.cols()) != net.shape().inputs) {
    throw DimensionMismatch(net.shape().inputs, static_cast<std::size_t>(x.cols()));
  }
  if (static_cast<std::size_t>(y.cols()) != net.shape().outputs) {
    throw DimensionMismatch(net.shape().outputs, static_cast<std::size_t>(y.cols()));
  }
  if (y.rows() != x.rows()) throw LengthMismatch(static_cast<std::size_t>(x.rows()), static_cast<std::size_t>(y.rows()));
}

}  // namespace

Matrix InputNormalizer::apply(const Matrix& x) const {
  if (x.cols() != min.size()) throw DimensionMismatch(static_cast<std::size_t>(min.size()), static_cast<std::size_t>(x.cols()));
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double range = max(j) - min(j);
    if (range > 0) {
      out.col(j) = ((x.col(j).array() - min(j)) / range * (kHigh - kLow) + kLow).matrix();
    } else {
      out.col(j).setConstant(0.5);
    }
  }
  return out;
}

Matrix OutputNormalizer::apply(const Matrix& y) const {
  if (y.cols() != mean.size()) throw DimensionMismatch(static_cast<std::size_t>(mean.size()), static_cast<std::size_t>(y.cols()));
  Matrix out(y.rows(), y.cols());
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    if (stddev(j) > 0) {
      out.col(j) = ((y.col(j).array() - mean(j)) / stddev(j)).matrix();
    } else {
      out.col(j).setZero();
    }
  }
  return out;
}

Matrix OutputNormalizer::invert(const Matrix& z) const {
  if (z.cols() != mean.size()) throw DimensionMismatch(static_cast<std::size_t>(mean.size()), static_cast<std::size_t>(z.cols()));
  Matrix out(z.rows(), z.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    out.col(j) = (z.col(j).array() * stddev(j) + mean(j)).matrix();
  }
  return out;
}

Normalizers fit_normalizers(const Matrix& inputs, const Matrix& outputs) {
  if (inputs.rows() < 2) throw TooFewSamples(static_cast<std::size_t>(inputs.rows()));
  if (outputs.rows() != inputs.rows()) {
    throw LengthMismatch(static_cast<std::size_t>(inputs.rows()), static_cast<std::size_t>(outputs.rows()));
  }
  Normalizers n;
  n.input.min = inputs.colwise().minCoeff().transpose();
  n.input.max = inputs.colwise().maxCoeff().transpose();
  const double count = static_cast<double>(outputs.rows());
  n.output.mean = (outputs.colwise().sum() / count).transpose();
  n.output.stddev.resize(outputs.cols());
  for (Eigen::Index j = 0; j < outputs.cols(); ++j) {
    const double var = (outputs.col(j).array() - n.output.mean(j)).square().sum() / count;
    // Variance below rounding noise of the mean counts as constant.
    const double scale = std::max(1.0, std::abs(n.output.mean(j)));
    n.output.stddev(j) = var > 1e-24 * scale * scale ? std::sqrt(var) : 0.0;
  }
  return n;
}

FeedForwardNet::FeedForwardNet(const NetShape& shape, Normalizers normalizers, std::uint64_t seed)
    : shape_(shape), norm_(std::move(normalizers)) {
  if (shape.inputs == 0 || shape.outputs == 0) throw ConfigError("network needs inputs and outputs");
  for (auto w : shape.hidden) {
    if (w == 0) throw ConfigError("hidden layers must have at least one unit");
  }
  if (static_cast<std::size_t>(norm_.input.min.size()) != shape.inputs) {
    throw DimensionMismatch(shape.inputs, static_cast<std::size_t>(norm_.input.min.size()));
  }
  if (static_cast<std::size_t>(norm_.output.mean.size()) != shape.outputs) {
    throw DimensionMismatch(shape.outputs, static_cast<std::size_t>(norm_.output.mean.size()));
  }
  Rng rng(seed);
  std::size_t fan_in = shape.inputs;
  auto widths = shape.hidden;
  widths.push_back(shape.outputs);
  for (auto fan_out : widths) {
    Layer layer;
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    layer.weights.resize(static_cast<Eigen::Index>(fan_out), static_cast<Eigen::Index>(fan_in));
    // Row-major fill keeps the draw order independent of Eigen's storage.
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = rng.uniform(-limit, limit);
    }
    layer.bias = Vector::Zero(static_cast<Eigen::Index>(fan_out));
    layers_.push_back(std::move(layer));
    fan_in = fan_out;
  }
}

Matrix FeedForwardNet::forward_normalized(const Matrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != shape_.inputs) {
    throw DimensionMismatch(shape_.inputs, static_cast<std::size_t>(x.cols()));
  }
  return run(*this, x).output;
}

Matrix FeedForwardNet::predict(const Matrix& features, bool denormalize) const {
  if (static_cast<std::size_t>(features.cols()) != shape_.inputs) {
    throw DimensionMismatch(shape_.inputs, static_cast<std::size_t>(features.cols()));
  }
  Matrix z = forward_normalized(norm_.input.apply(features));
  return denormalize ? norm_.output.invert(z) : z;
}

bool FeedForwardNet::operator==(const FeedForwardNet& o) const {
  if (shape_.inputs != o.shape_.inputs || shape_.hidden != o.shape_.hidden || shape_.outputs != o.shape_.outputs ||
      shape_.a != o.shape_.a || shape_.b != o.shape_.b || layers_.size() != o.layers_.size()) {
    return false;
  }
  if (norm_.input.min != o.norm_.input.min || norm_.input.max != o.norm_.input.max ||
      norm_.output.mean != o.norm_.output.mean || norm_.output.stddev != o.norm_.output.stddev) {
    return false;
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].weights != o.layers_[l].weights || layers_[l].bias != o.layers_[l].bias) return false;
  }
  return true;
}

std::string FeedForwardNet::serialize() const {
  std::ostringstream out;
  auto vec = [&](std::string_view name, const Vector& v) {
    out << name;
    for (Eigen::Index i = 0; i < v.size(); ++i) out << '\t' << hex(v(i));
    out << '\n';
  };
  out << kMagic << '\n';
  out << "shape\t" << shape_.inputs;
  for (auto h : shape_.hidden) out << '\t' << h;
  out << '\t' << shape_.outputs << '\n';
  out << "activation\t" << hex(shape_.a) << '\t' << hex(shape_.b) << '\n';
  vec("input_min", norm_.input.min);
  vec("input_max", norm_.input.max);
  vec("output_mean", norm_.output.mean);
  vec("output_stddev", norm_.output.stddev);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& w = layers_[l].weights;
    out << "layer\t" << l << '\t' << w.rows() << '\t' << w.cols() << '\n';
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) out << (c ? "\t" : "") << hex(w(r, c));
      out << '\n';
    }
    vec("bias", layers_[l].bias);
  }
  out << "end\n";
  return out.str();
}

FeedForwardNet FeedForwardNet::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  auto next = [&](std::string_view tag) {
    if (!std::getline(in, line)) throw DataError("network file: unexpected end");
    auto f = split(line, '\t');
    if (!tag.empty() && (f.empty() || f[0] != tag)) throw DataError("network file: expected '" + std::string(tag) + "'");
    return f;
  };
  auto vec = [&](std::string_view tag, std::size_t n) {
    auto f = next(tag);
    if (f.size() != n + 1) throw DataError("network file: '" + std::string(tag) + "' has wrong length");
    Vector v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = unhex(f[i + 1]);
    return v;
  };
  while (std::getline(in, line) && (line.empty() || line[0] == '#')) {
  }
  if (line != kMagic) throw DataError("network file: bad header");
  FeedForwardNet net;
  auto shape = next("shape");
  if (shape.size() < 3) throw DataError("network file: bad shape");
  std::vector<std::size_t> dims;
  for (std::size_t i = 1; i < shape.size(); ++i) dims.push_back(std::stoul(shape[i]));
  net.shape_.inputs = dims.front();
  net.shape_.outputs = dims.back();
  net.shape_.hidden.assign(dims.begin() + 1, dims.end() - 1);
  auto act = next("activation");
  if (act.size() != 3) throw DataError("network file: bad activation");
  net.shape_.a = unhex(act[1]);
  net.shape_.b = unhex(act[2]);
  net.norm_.input.min = vec("input_min", net.shape_.inputs);
  net.norm_.input.max = vec("input_max", net.shape_.inputs);
  net.norm_.output.mean = vec("output_mean", net.shape_.outputs);
  net.norm_.output.stddev = vec("output_stddev", net.shape_.outputs);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    auto head = next("layer");
    if (head.size() != 4 || std::stoul(head[1]) != l || std::stoul(head[2]) != dims[l + 1] ||
        std::stoul(head[3]) != dims[l]) {
      throw DataError("network file: bad layer header");
    }
    Layer layer;
    layer.weights.resize(static_cast<Eigen::Index>(dims[l + 1]), static_cast<Eigen::Index>(dims[l]));
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      auto f = next("");
      if (f.size() != dims[l]) throw DataError("network file: bad weight row");
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = unhex(f[static_cast<std::size_t>(c)]);
    }
    layer.bias = vec("bias", dims[l + 1]);
    net.layers_.push_back(std::move(layer));
  }
  if (!std::getline(in, line) || line != "end") throw DataError("network file: missing end marker");
  return net;
}

void FeedForwardNet::save(const std::string& path) const { write_file(path, serialize()); }

FeedForwardNet FeedForwardNet::load(const std::string& path) { return parse(read_file(path)); }

double loss(const FeedForwardNet& net, const Matrix& x, const Matrix& y, double l2) {
  check_batch(net, x, y);
  const Matrix out = run(net, x).output;
  double penalty = 0.0;
  for (const auto& layer : net.layers()) penalty += layer.weights.squaredNorm();
  return (out - y).squaredNorm() / static_cast<double>(x.rows()) + l2 * penalty;
}

Gradient gradient(const FeedForwardNet& net, const Matrix& x, const Matrix& y, double l2) {
  check_batch(net, x, y);
  const auto& layers = net.layers();
  const double a = net.shape().a, b = net.shape().b;
  auto act = run(net, x);
  Gradient grad(layers.size());
  Matrix delta = (act.output - y) * (2.0 / static_cast<double>(x.rows()));
  for (std::size_t l = layers.size(); l-- > 0;) {
    grad[l].weights = delta.transpose() * act.inputs[l] + 2.0 * l2 * layers[l].weights;
    grad[l].bias = delta.colwise().sum().transpose();
    if (l == 0) break;
    Matrix upstream = delta * layers[l].weights;
    // d/dz a*tanh(b*z) = a*b*(1 - tanh(b*z)^2)
    Eigen::ArrayXXd t = (b * act.pre[l - 1].array()).tanh();
    delta = (upstream.array() * (a * b) * (1.0 - t.square())).matrix();
  }
  return grad;
}

}  // namespace a2p::neural

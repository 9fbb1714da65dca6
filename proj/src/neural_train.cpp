#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <sstream>

#include "a2p/neural.hpp"
#include "a2p/util.hpp"

namespace a2p::neural {

void TrainConfig::validate() const {
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (width < 1) throw ConfigError("width must be >= 1");
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be > 0");
  if (!(top_layer_factor > 0)) throw ConfigError("top_layer_factor must be > 0");
  if (momentum < 0 || momentum >= 1 || momentum_late < 0 || momentum_late >= 1) {
    throw ConfigError("momentum must be in [0, 1)");
  }
  if (l2 < 0) throw ConfigError("l2 must be >= 0");
}

double TrainConfig::rate(std::size_t epoch, std::size_t layer, std::size_t layers) const {
  double r = learning_rate;
  if (epoch > schedule_switch) r = std::ldexp(r, -static_cast<int>(epoch - schedule_switch));
  if (layer + 2 >= layers) r *= top_layer_factor;
  return r;
}

double TrainConfig::momentum_at(std::size_t epoch) const { return epoch > schedule_switch ? momentum_late : momentum; }

NetShape TrainConfig::shape(std::size_t inputs, std::size_t outputs) const {
  NetShape s;
  s.inputs = inputs;
  s.hidden.assign(hidden_layers, width);
  s.outputs = outputs;
  s.a = a;
  s.b = b;
  return s;
}

TrainConfig TrainConfig::acoustic() {
  TrainConfig c;
  c.batch_size = 256;
  return c;
}

TrainConfig TrainConfig::duration() {
  TrainConfig c;
  c.batch_size = 64;
  return c;
}

double mse(const FeedForwardNet& net, const Matrix& x, const Matrix& y) {
  if (x.rows() == 0) return 0.0;
  return loss(net, net.normalizers().input.apply(x), net.normalizers().output.apply(y), 0.0);
}

TrainResult train(const FeedForwardNet& initial, const Matrix& train_x, const Matrix& train_y,
                  const Matrix& dev_x, const Matrix& dev_y, const TrainConfig& config) {
  config.validate();
  if (train_x.rows() == 0) throw EmptyBatch();
  const auto& norm = initial.normalizers();
  const Matrix xn = norm.input.apply(train_x);
  const Matrix yn = norm.output.apply(train_y);
  const bool has_dev = dev_x.rows() > 0;
  const Matrix dxn = has_dev ? norm.input.apply(dev_x) : Matrix();
  const Matrix dyn = has_dev ? norm.output.apply(dev_y) : Matrix();

  FeedForwardNet net = initial;
  auto& layers = net.layers();
  std::vector<Layer> velocity;
  for (const auto& l : layers) velocity.push_back({Matrix::Zero(l.weights.rows(), l.weights.cols()), Vector::Zero(l.bias.size())});

  std::vector<Eigen::Index> order(static_cast<std::size_t>(xn.rows()));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(config.seed);

  TrainResult result;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.shuffle(order);
    const double m = config.momentum_at(epoch);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::vector<Eigen::Index> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                          order.begin() + static_cast<std::ptrdiff_t>(end));
      const Matrix bx = xn(idx, Eigen::all);
      const Matrix by = yn(idx, Eigen::all);
      const auto g = gradient(net, bx, by, config.l2);
      for (std::size_t l = 0; l < layers.size(); ++l) {
        const double r = config.rate(epoch, l, layers.size());
        velocity[l].weights = m * velocity[l].weights - r * g[l].weights;
        velocity[l].bias = m * velocity[l].bias - r * g[l].bias;
        layers[l].weights += velocity[l].weights;
        layers[l].bias += velocity[l].bias;
      }
    }
    EpochLog log;
    log.epoch = epoch;
    log.learning_rate = config.rate(epoch, 0, layers.size());
    log.momentum = m;
    log.train_loss = loss(net, xn, yn, 0.0);
    log.dev_loss = has_dev ? loss(net, dxn, dyn, 0.0) : log.train_loss;
    if (!std::isfinite(log.train_loss)) throw DataError("training diverged at epoch " + std::to_string(epoch));
    result.log.push_back(log);
    if (log.dev_loss < best) {
      best = log.dev_loss;
      result.best_epoch = epoch;
      result.net = net;
    }
  }
  return result;
}

TrainResult fit(const Matrix& train_x, const Matrix& train_y, const Matrix& dev_x, const Matrix& dev_y,
                const TrainConfig& config) {
  config.validate();
  auto norm = fit_normalizers(train_x, train_y);
  FeedForwardNet net(config.shape(static_cast<std::size_t>(train_x.cols()), static_cast<std::size_t>(train_y.cols())),
                     std::move(norm), config.seed);
  return train(net, train_x, train_y, dev_x, dev_y, config);
}

std::array<double, kStates> DurationPrediction::states() const {
  std::array<double, kStates> out{};
  std::copy(values.begin(), values.begin() + kStates, out.begin());
  return out;
}

std::vector<DurationPrediction> predict_durations(const FeedForwardNet& net, const Matrix& features,
                                                  double floor_frames) {
  if (net.shape().outputs != DurationTarget::kSize) {
    throw DimensionMismatch(DurationTarget::kSize, net.shape().outputs);
  }
  const Matrix raw = net.predict(features);
  std::vector<DurationPrediction> out(static_cast<std::size_t>(raw.rows()));
  for (Eigen::Index r = 0; r < raw.rows(); ++r) {
    auto& p = out[static_cast<std::size_t>(r)];
    for (std::size_t k = 0; k < DurationTarget::kSize; ++k) {
      double v = raw(r, static_cast<Eigen::Index>(k));
      if (v < floor_frames) {
        v = floor_frames;
        p.floored[k] = true;
        p.any_floored = true;
      }
      p.values[k] = v;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataset files

namespace {

constexpr std::string_view kTextMagic = "a2p-dataset 1";
constexpr char kBinaryMagic[4] = {'A', '2', 'P', 'D'};
constexpr std::uint32_t kBinaryVersion = 1;

std::string decimal(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));  // hosts are little endian
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}
  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) throw DataError("binary dataset: truncated");
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string str() {
    auto n = get<std::uint32_t>();
    if (pos_ + n > bytes_.size()) throw DataError("binary dataset: truncated");
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void Dataset::check() const {
  if (static_cast<std::size_t>(x.cols()) != input_schema.size()) {
    throw DimensionMismatch(input_schema.size(), static_cast<std::size_t>(x.cols()));
  }
  if (input_schema.kinds.size() != input_schema.names.size()) {
    throw DimensionMismatch(input_schema.names.size(), input_schema.kinds.size());
  }
  if (static_cast<std::size_t>(y.cols()) != output_names.size()) {
    throw DimensionMismatch(output_names.size(), static_cast<std::size_t>(y.cols()));
  }
  if (x.rows() != y.rows()) throw LengthMismatch(static_cast<std::size_t>(x.rows()), static_cast<std::size_t>(y.rows()));
}

std::string Dataset::to_text() const {
  check();
  std::string out(kTextMagic);
  out += "\ninputs\t" + std::to_string(input_schema.size()) + '\n';
  for (std::size_t i = 0; i < input_schema.size(); ++i) {
    out += input_schema.names[i] + '\t' + (input_schema.kinds[i] == FeatureKind::binary ? "binary" : "numeric") + '\n';
  }
  out += "outputs\t" + std::to_string(output_names.size()) + '\n';
  for (const auto& n : output_names) out += n + '\n';
  out += "rows\t" + std::to_string(size()) + '\n';
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    std::string line;
    for (Eigen::Index c = 0; c < x.cols(); ++c) line += (c ? "\t" : "") + decimal(x(r, c));
    for (Eigen::Index c = 0; c < y.cols(); ++c) line += (line.empty() ? "" : "\t") + decimal(y(r, c));
    out += line + '\n';
  }
  return out;
}

Dataset Dataset::from_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  auto header = [&](std::string_view tag) {
    if (!std::getline(in, line)) throw DataError("dataset: unexpected end");
    auto f = split(line, '\t');
    if (f.size() != 2 || f[0] != tag) throw DataError("dataset: expected '" + std::string(tag) + "'");
    return std::stoul(f[1]);
  };
  while (std::getline(in, line) && (line.empty() || line[0] == '#')) {
  }
  if (line != kTextMagic) throw DataError("dataset: bad header");
  Dataset d;
  const auto ni = header("inputs");
  for (std::size_t i = 0; i < ni; ++i) {
    if (!std::getline(in, line)) throw DataError("dataset: unexpected end");
    auto f = split(line, '\t');
    if (f.size() != 2 || (f[1] != "binary" && f[1] != "numeric")) throw DataError("dataset: bad input line");
    d.input_schema.add(f[0], f[1] == "binary" ? FeatureKind::binary : FeatureKind::numeric);
  }
  const auto no = header("outputs");
  for (std::size_t i = 0; i < no; ++i) {
    if (!std::getline(in, line)) throw DataError("dataset: unexpected end");
    d.output_names.push_back(line);
  }
  const auto rows = header("rows");
  d.x.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(ni));
  d.y.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(no));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) throw DataError("dataset: missing rows");
    auto f = split(line, '\t');
    if (f.size() != ni + no) throw DataError("dataset row " + std::to_string(r) + ": wrong field count");
    for (std::size_t c = 0; c < f.size(); ++c) {
      char* end = nullptr;
      double v = std::strtod(f[c].c_str(), &end);
      if (end == f[c].c_str() || *end != '\0') throw DataError("dataset row " + std::to_string(r) + ": bad number");
      if (c < ni) {
        d.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
      } else {
        d.y(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - ni)) = v;
      }
    }
  }
  return d;
}

std::string Dataset::to_binary() const {
  check();
  std::string out(kBinaryMagic, 4);
  put<std::uint32_t>(out, kBinaryVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(input_schema.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(output_names.size()));
  put<std::uint64_t>(out, size());
  for (std::size_t i = 0; i < input_schema.size(); ++i) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(input_schema.names[i].size()));
    out += input_schema.names[i];
    put<std::uint8_t>(out, input_schema.kinds[i] == FeatureKind::binary ? 0 : 1);
  }
  for (const auto& n : output_names) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(n.size()));
    out += n;
  }
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) put<double>(out, x(r, c));
    for (Eigen::Index c = 0; c < y.cols(); ++c) put<double>(out, y(r, c));
  }
  return out;
}

Dataset Dataset::from_binary(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kBinaryMagic, 4) != 0) throw DataError("binary dataset: bad magic");
  Reader rd(bytes.substr(4));
  if (rd.get<std::uint32_t>() != kBinaryVersion) throw DataError("binary dataset: unsupported version");
  const auto ni = rd.get<std::uint32_t>();
  const auto no = rd.get<std::uint32_t>();
  const auto rows = rd.get<std::uint64_t>();
  Dataset d;
  for (std::uint32_t i = 0; i < ni; ++i) {
    auto name = rd.str();
    auto kind = rd.get<std::uint8_t>();
    if (kind > 1) throw DataError("binary dataset: bad feature kind");
    d.input_schema.add(std::move(name), kind == 0 ? FeatureKind::binary : FeatureKind::numeric);
  }
  for (std::uint32_t i = 0; i < no; ++i) d.output_names.push_back(rd.str());
  d.x.resize(static_cast<Eigen::Index>(rows), ni);
  d.y.resize(static_cast<Eigen::Index>(rows), no);
  for (std::uint64_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < ni; ++c) d.x(static_cast<Eigen::Index>(r), c) = rd.get<double>();
    for (std::uint32_t c = 0; c < no; ++c) d.y(static_cast<Eigen::Index>(r), c) = rd.get<double>();
  }
  if (!rd.done()) throw DataError("binary dataset: trailing bytes");
  return d;
}

void Dataset::save(const std::string& path, bool binary) const { write_file(path, binary ? to_binary() : to_text()); }

Dataset Dataset::parse(std::string_view bytes) {
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kBinaryMagic, 4) == 0) return from_binary(bytes);
  return from_text(bytes);
}

Dataset Dataset::load(const std::string& path) { return parse(read_file(path)); }

}  // namespace a2p::neural

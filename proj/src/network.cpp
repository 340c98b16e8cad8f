#include "hanr/network.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "hanr/binio.hpp"
#include "hanr/error.hpp"

namespace hanr {
namespace {

float uniform01(std::mt19937_64& rng) {
  return static_cast<float>(static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

std::vector<int> layer_dims(const NetworkTopology& t) {
  std::vector<int> dims{t.input_dim};
  for (int i = 0; i < t.hidden_layers; ++i) dims.push_back(t.hidden_width);
  dims.push_back(t.output_dim);
  return dims;
}

std::vector<DenseLayer> zero_layers(const NetworkTopology& t) {
  const auto dims = layer_dims(t);
  std::vector<DenseLayer> layers(dims.size() - 1);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    layers[l].weight = RowMatrixXf::Zero(dims[l + 1], dims[l]);
    layers[l].bias = Eigen::VectorXf::Zero(dims[l + 1]);
  }
  return layers;
}

struct Activations {
  std::vector<Eigen::MatrixXf> pre;   // per layer pre-activation
  std::vector<Eigen::MatrixXf> post;  // post[0] = input, post[l+1] = layer l output
};

Activations run_forward(const NetworkParams& p, const Eigen::MatrixXf& x) {
  if (x.rows() != p.topology.input_dim)
    throw ConfigError("network expects " + std::to_string(p.topology.input_dim) +
                      " inputs, got " + std::to_string(x.rows()));
  const float lo = static_cast<float>(p.topology.gain_floor());
  const std::size_t n_layers = p.layers.size();
  Activations a;
  a.pre.resize(n_layers);
  a.post.resize(n_layers + 1);
  a.post[0] = x;
  for (std::size_t l = 0; l < n_layers; ++l) {
    a.pre[l].noalias() = p.layers[l].weight * a.post[l];
    a.pre[l].colwise() += p.layers[l].bias;
    if (l + 1 < n_layers) {
      a.post[l + 1] = a.pre[l].cwiseMax(0.0f);
    } else {
      a.post[l + 1] = a.pre[l].unaryExpr([lo](float z) {
        return lo + (1.0f - lo) / (1.0f + std::exp(-z));
      });
    }
  }
  return a;
}

template <typename Fn>
void for_each_tensor(std::vector<DenseLayer>& layers, Fn&& fn) {
  for (auto& l : layers) {
    fn(std::span<float>(l.weight.data(), static_cast<std::size_t>(l.weight.size())));
    fn(std::span<float>(l.bias.data(), static_cast<std::size_t>(l.bias.size())));
  }
}

}  // namespace

void NetworkTopology::validate() const {
  if (input_dim <= 0 || hidden_layers < 0 || hidden_width <= 0 || output_dim <= 0)
    throw ConfigError("network dimensions must be positive");
  if (output_dim != kNumBands)
    throw ConfigError("network must predict " + std::to_string(kNumBands) + " gains");
  gain_floor();
}

std::size_t NetworkParams::num_parameters() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

NetworkParams zero_params(const NetworkTopology& topo) {
  topo.validate();
  return {topo, zero_layers(topo)};
}

NetworkParams init_params(const NetworkTopology& topo, std::uint64_t seed) {
  NetworkParams p = zero_params(topo);
  std::mt19937_64 rng(seed);
  for (auto& layer : p.layers) {
    const float limit = std::sqrt(6.0f / static_cast<float>(layer.weight.cols()));
    float* w = layer.weight.data();
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i)
      w[i] = (2.0f * uniform01(rng) - 1.0f) * limit;
  }
  return p;
}

Eigen::MatrixXf forward_batch(const NetworkParams& p, const Eigen::MatrixXf& x) {
  return std::move(run_forward(p, x).post.back());
}

GainVector forward(const NetworkParams& p, std::span<const float> x) {
  if (static_cast<int>(x.size()) != p.topology.input_dim)
    throw ConfigError("network expects " + std::to_string(p.topology.input_dim) +
                      " inputs, got " + std::to_string(x.size()));
  const float lo = static_cast<float>(p.topology.gain_floor());
  Eigen::VectorXf h = Eigen::Map<const Eigen::VectorXf>(x.data(), static_cast<Eigen::Index>(x.size()));
  Eigen::VectorXf z;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    z.noalias() = p.layers[l].weight * h;
    z += p.layers[l].bias;
    if (l + 1 < p.layers.size()) h = z.cwiseMax(0.0f);
  }
  GainVector g(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i)
    g[i] = lo + (1.0f - lo) / (1.0f + std::exp(-z[i]));
  return g;
}

GainVector forward(const NetworkParams& p, std::span<const double> x) {
  std::vector<float> xf(x.begin(), x.end());
  return forward(p, std::span<const float>(xf));
}

double rmse_loss(const Eigen::MatrixXf& pred, const Eigen::MatrixXf& target) {
  if (pred.size() == 0) throw DataError("rmse of an empty batch");
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw ConfigError("prediction and target shapes differ");
  double acc = 0.0;
  for (Eigen::Index j = 0; j < pred.cols(); ++j)
    for (Eigen::Index i = 0; i < pred.rows(); ++i) {
      const double d = static_cast<double>(pred(i, j)) - target(i, j);
      acc += d * d;
    }
  return std::sqrt(acc / static_cast<double>(pred.size()));
}

Gradients backward(const NetworkParams& p, const Eigen::MatrixXf& x,
                   const Eigen::MatrixXf& target) {
  const Activations a = run_forward(p, x);
  const Eigen::MatrixXf& y = a.post.back();
  if (y.rows() != target.rows() || y.cols() != target.cols())
    throw ConfigError("target shape differs from network output");
  const float lo = static_cast<float>(p.topology.gain_floor());
  const auto count = static_cast<float>(y.size());

  Gradients g;
  g.layers = zero_layers(p.topology);
  const Eigen::MatrixXf err = y - target;
  g.mse = static_cast<double>(err.cast<double>().squaredNorm()) / y.size();

  // dL/dz at the output: 2 (y - t) / count * dy/dz, with
  // dy/dz = (y - lo) (1 - y) / (1 - lo) for the rescaled logistic.
  Eigen::MatrixXf delta = (2.0f / count) * err.cwiseProduct(
      ((y.array() - lo) * (1.0f - y.array()) / (1.0f - lo)).matrix());
  for (std::size_t l = p.layers.size(); l-- > 0;) {
    g.layers[l].weight.noalias() = delta * a.post[l].transpose();
    g.layers[l].bias = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXf back = p.layers[l].weight.transpose() * delta;
    delta = back.cwiseProduct(
        (a.pre[l - 1].array() > 0.0f).cast<float>().matrix());
  }
  return g;
}

AdamState AdamState::zeros_like(const NetworkParams& p) {
  return {zero_layers(p.topology), zero_layers(p.topology), 0};
}

void adam_step(NetworkParams& p, const Gradients& g, AdamState& state,
               const AdamHyper& hyper) {
  ++state.step;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto& pl = p.layers[l];
    const auto& gl = g.layers[l];
    auto& ml = state.m[l];
    auto& vl = state.v[l];
    const auto nw = static_cast<std::size_t>(pl.weight.size());
    const auto nb = static_cast<std::size_t>(pl.bias.size());
    adam_update<float>({pl.weight.data(), nw}, {gl.weight.data(), nw},
                       {ml.weight.data(), nw}, {vl.weight.data(), nw}, state.step, hyper);
    adam_update<float>({pl.bias.data(), nb}, {gl.bias.data(), nb},
                       {ml.bias.data(), nb}, {vl.bias.data(), nb}, state.step, hyper);
  }
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
}

double evaluate_rmse(const NetworkParams& p, const FeatureSet& set) {
  const std::size_t n = set.size();
  if (n == 0) throw DataError("rmse of an empty feature set");
  constexpr std::size_t kChunk = 1024;
  double acc = 0.0;
  for (std::size_t start = 0; start < n; start += kChunk) {
    const auto cols = static_cast<Eigen::Index>(std::min(kChunk, n - start));
    Eigen::Map<const Eigen::MatrixXf> x(set.inputs.data() + start * set.input_dim(),
                                        set.input_dim(), cols);
    Eigen::Map<const Eigen::MatrixXf> t(set.targets.data() + start * set.output_dim(),
                                        set.output_dim(), cols);
    const Eigen::MatrixXf y = forward_batch(p, x);
    acc += (y - t).cast<double>().squaredNorm();
  }
  return std::sqrt(acc / (static_cast<double>(n) * set.output_dim()));
}

TrainResult train(const FeatureSet& train_set, const FeatureSet* val_set,
                  const TrainConfig& cfg, const NetworkTopology& topo,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  topo.validate();
  const std::size_t n = train_set.size();
  if (n == 0) throw DataError("training set is empty");
  if (train_set.input_dim() != topo.input_dim)
    throw ConfigError("feature dimension " + std::to_string(train_set.input_dim()) +
                      " differs from network input " + std::to_string(topo.input_dim));
  if (val_set && val_set->input_dim() != topo.input_dim)
    throw ConfigError("validation features have the wrong dimension");

  TrainResult result{init_params(topo, cfg.rng_seed), {}};
  AdamState adam = AdamState::zeros_like(result.params);
  const AdamHyper hyper = cfg.hyper();

  std::mt19937_64 rng(cfg.rng_seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  const int in_dim = train_set.input_dim();
  const int out_dim = train_set.output_dim();
  Eigen::MatrixXf xb, tb;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng() % (i + 1)]);

    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const auto b = static_cast<Eigen::Index>(std::min<std::size_t>(cfg.batch_size, n - start));
      xb.resize(in_dim, b);
      tb.resize(out_dim, b);
      for (Eigen::Index j = 0; j < b; ++j) {
        const std::size_t idx = order[start + j];
        xb.col(j) = Eigen::Map<const Eigen::VectorXf>(train_set.input(idx).data(), in_dim);
        tb.col(j) = Eigen::Map<const Eigen::VectorXf>(train_set.target(idx).data(), out_dim);
      }
      const Gradients g = backward(result.params, xb, tb);
      if (!std::isfinite(g.mse))
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) +
                           ", sample offset " + std::to_string(start) +
                           " (learning rate " + std::to_string(cfg.learning_rate) + ")");
      adam_step(result.params, g, adam, hyper);
    }

    EpochLoss rec;
    rec.epoch = epoch;
    rec.train_rmse = evaluate_rmse(result.params, train_set);
    rec.val_rmse = (val_set && val_set->size() > 0)
                       ? evaluate_rmse(result.params, *val_set)
                       : std::numeric_limits<double>::quiet_NaN();
    if (!std::isfinite(rec.train_rmse))
      throw NumericError("non-finite training RMSE after epoch " + std::to_string(epoch));
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

void save_model(const NetworkParams& p, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  const auto& t = p.topology;
  binio::write_magic(os, "HADM");
  binio::write_u32(os, kModelFileVersion);
  binio::write_u32(os, static_cast<std::uint32_t>(t.input_dim));
  binio::write_u32(os, static_cast<std::uint32_t>(t.hidden_layers));
  binio::write_u32(os, static_cast<std::uint32_t>(t.hidden_width));
  binio::write_u32(os, static_cast<std::uint32_t>(t.output_dim));
  binio::write_u32(os, static_cast<std::uint32_t>(std::lround(t.max_atten_db * 1000.0)));
  for (const auto& l : p.layers) {
    binio::write_f32s(os, {l.weight.data(), static_cast<std::size_t>(l.weight.size())});
    binio::write_f32s(os, {l.bias.data(), static_cast<std::size_t>(l.bias.size())});
  }
  if (!os) throw DataError("write failed: " + path.string());
}

NetworkParams load_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path.string());
  binio::expect_magic(is, "HADM");
  if (binio::read_u32(is) != kModelFileVersion)
    throw DataError(path.string() + ": unsupported model file version");
  NetworkTopology t;
  t.input_dim = static_cast<int>(binio::read_u32(is));
  t.hidden_layers = static_cast<int>(binio::read_u32(is));
  t.hidden_width = static_cast<int>(binio::read_u32(is));
  t.output_dim = static_cast<int>(binio::read_u32(is));
  t.max_atten_db = binio::read_u32(is) / 1000.0;
  try {
    t.validate();
  } catch (const ConfigError& e) {
    throw DataError(path.string() + ": bad topology: " + e.what());
  }
  NetworkParams p = zero_params(t);
  for_each_tensor(p.layers, [&](std::span<float> s) { binio::read_f32s(is, s); });
  if (is.peek() != std::char_traits<char>::eof())
    throw DataError(path.string() + ": trailing bytes after parameters");
  return p;
}

void write_loss_csv(const std::vector<EpochLoss>& history, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path.string());
  os << "epoch,train_rmse,val_rmse\n";
  os.precision(9);
  for (const auto& e : history) os << e.epoch << ',' << e.train_rmse << ',' << e.val_rmse << '\n';
}

}  // namespace hanr

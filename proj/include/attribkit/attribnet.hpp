#pragma once
// Per-set attribute classifiers: small MLPs (in -> h1 -> h2 -> out, ReLU
// hidden activations, softmax output) mapping a countermeasure embedding to a
// posterior over one attribute set. One net per set; their outputs
// concatenated give the probabilistic attribute embedding.
//
// All arithmetic is double precision. Parameters live in one flat vector
// (W1 row-major, b1, W2, b2, W3, b3) so optimizer state, checkpoints,
// serialization, and finite-difference checks all address parameters the
// same way. Training uses Adam on minibatch cross-entropy; the checkpoint
// kept is the epoch with the lowest dev-set EER (earliest on ties).
//
// Net bank file (little-endian): magic "PANB" | version u32 = 1 | count u32 |
// per net: set name str16 | in u32 | h1 u32 | h2 u32 | out u32 | params f32.

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "attribkit/core.hpp"
#include "attribkit/io.hpp"
#include "attribkit/metrics.hpp"

namespace attribkit {

inline constexpr std::uint32_t kNetBankFormatVersion = 1;

struct TrainConfig {
  int epochs = 100;
  int batch_size = 64;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;  // drives the per-epoch shuffle
};

namespace detail {

inline std::vector<double> softmax(std::span<const double> z) {
  double top = z[0];
  for (double v : z) top = std::max(top, v);
  std::vector<double> p(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - top);
    sum += p[i];
  }
  for (auto& v : p) v /= sum;
  return p;
}

}  // namespace detail

class AttribNet {
 public:
  // Glorot-uniform weights from the seed, zero biases.
  AttribNet(std::string set_name, int in_dim, int h1, int h2, int out_dim,
            std::uint64_t seed)
      : set_name_(std::move(set_name)), in_(in_dim), h1_(h1), h2_(h2), out_(out_dim) {
    if (in_ < 1 || h1_ < 1 || h2_ < 1 || out_ < 2)
      throw ValidationError("AttribNet: layer sizes must be positive and the "
                            "output at least 2 wide");
    ow1_ = 0;
    ob1_ = ow1_ + static_cast<std::size_t>(h1_) * static_cast<std::size_t>(in_);
    ow2_ = ob1_ + static_cast<std::size_t>(h1_);
    ob2_ = ow2_ + static_cast<std::size_t>(h2_) * static_cast<std::size_t>(h1_);
    ow3_ = ob2_ + static_cast<std::size_t>(h2_);
    ob3_ = ow3_ + static_cast<std::size_t>(out_) * static_cast<std::size_t>(h2_);
    params_.assign(ob3_ + static_cast<std::size_t>(out_), 0.0);

    detail::Rng rng(detail::mix_seed(seed, {"init", set_name_}));
    const auto glorot = [&](std::size_t w0, int rows, int cols) {
      const double a = std::sqrt(6.0 / (rows + cols));
      const std::size_t n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
      for (std::size_t i = 0; i < n; ++i)
        params_[w0 + i] = a * (2.0 * rng.uniform() - 1.0);
    };
    glorot(ow1_, h1_, in_);
    glorot(ow2_, h2_, h1_);
    glorot(ow3_, out_, h2_);
  }

  const std::string& set_name() const { return set_name_; }
  int in_dim() const { return in_; }
  int hidden1() const { return h1_; }
  int hidden2() const { return h2_; }
  int out_dim() const { return out_; }

  std::size_t param_count() const { return params_.size(); }
  double param(std::size_t i) const { return params_[i]; }
  void set_param(std::size_t i, double v) { params_[i] = v; }
  const std::vector<double>& params() const { return params_; }
  void set_params(std::vector<double> p) {
    if (p.size() != params_.size())
      throw ValidationError("AttribNet: parameter vector size mismatch");
    params_ = std::move(p);
  }

  std::vector<double> forward(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != in_)
      throw ValidationError("AttribNet '" + set_name_ + "': input has " +
                            std::to_string(x.size()) + " dims, expected " +
                            std::to_string(in_));
    std::vector<double> a1(static_cast<std::size_t>(h1_)),
        a2(static_cast<std::size_t>(h2_)), z3(static_cast<std::size_t>(out_));
    affine(ow1_, ob1_, x, a1);
    relu(a1);
    affine(ow2_, ob2_, a1, a2);
    relu(a2);
    affine(ow3_, ob3_, a2, z3);
    return detail::softmax(z3);
  }

  // Mean cross-entropy over the given rows plus its gradient in parameter
  // order. grad is resized and overwritten.
  double loss_and_gradient(const Matrix& X, const std::vector<int>& y,
                           std::span<const std::size_t> rows,
                           std::vector<double>& grad) const {
    grad.assign(params_.size(), 0.0);
    if (rows.empty()) throw ValidationError("AttribNet: empty batch");
    double loss = 0.0;
    std::vector<double> z1(static_cast<std::size_t>(h1_)),
        a1(static_cast<std::size_t>(h1_)), z2(static_cast<std::size_t>(h2_)),
        a2(static_cast<std::size_t>(h2_)), z3(static_cast<std::size_t>(out_));
    std::vector<double> d3(static_cast<std::size_t>(out_)),
        d2(static_cast<std::size_t>(h2_)), d1(static_cast<std::size_t>(h1_));
    for (const std::size_t r : rows) {
      const auto x = X.row(r);
      affine(ow1_, ob1_, x, z1);
      a1 = z1;
      relu(a1);
      affine(ow2_, ob2_, a1, z2);
      a2 = z2;
      relu(a2);
      affine(ow3_, ob3_, a2, z3);

      // log-sum-exp form of the cross entropy; stable for large logits
      double top = z3[0];
      for (double v : z3) top = std::max(top, v);
      double lse = 0.0;
      for (double v : z3) lse += std::exp(v - top);
      lse = top + std::log(lse);
      loss += lse - z3[static_cast<std::size_t>(y[r])];

      for (int k = 0; k < out_; ++k)
        d3[static_cast<std::size_t>(k)] = std::exp(z3[static_cast<std::size_t>(k)] - lse);
      d3[static_cast<std::size_t>(y[r])] -= 1.0;

      backprop_layer(ow3_, ob3_, out_, h2_, d3, a2, z2, d2, grad, true);
      backprop_layer(ow2_, ob2_, h2_, h1_, d2, a1, z1, d1, grad, true);
      backprop_layer(ow1_, ob1_, h1_, in_, d1, x, {}, d2, grad, false);
    }
    const double inv = 1.0 / static_cast<double>(rows.size());
    loss *= inv;
    for (auto& g : grad) g *= inv;
    return loss;
  }

 private:
  void affine(std::size_t w0, std::size_t b0, std::span<const double> x,
              std::vector<double>& out) const {
    const std::size_t n_in = x.size();
    for (std::size_t r = 0; r < out.size(); ++r) {
      const double* w = params_.data() + w0 + r * n_in;
      double acc = params_[b0 + r];
      for (std::size_t c = 0; c < n_in; ++c) acc += w[c] * x[c];
      out[r] = acc;
    }
  }

  static void relu(std::vector<double>& v) {
    for (auto& x : v)
      if (x < 0.0) x = 0.0;
  }

  // Accumulates dW += delta outer input, db += delta and, when wanted,
  // computes the previous layer's delta gated by its pre-activation sign.
  void backprop_layer(std::size_t w0, std::size_t b0, int n_out, int n_in,
                      const std::vector<double>& delta,
                      std::span<const double> input,
                      std::span<const double> prev_z,
                      std::vector<double>& prev_delta,
                      std::vector<double>& grad, bool want_prev) const {
    for (int r = 0; r < n_out; ++r) {
      const double d = delta[static_cast<std::size_t>(r)];
      double* gw = grad.data() + w0 + static_cast<std::size_t>(r) * static_cast<std::size_t>(n_in);
      for (int c = 0; c < n_in; ++c) gw[c] += d * input[static_cast<std::size_t>(c)];
      grad[b0 + static_cast<std::size_t>(r)] += d;
    }
    if (!want_prev) return;
    for (int c = 0; c < n_in; ++c) {
      double acc = 0.0;
      for (int r = 0; r < n_out; ++r)
        acc += params_[w0 + static_cast<std::size_t>(r) * static_cast<std::size_t>(n_in) +
                       static_cast<std::size_t>(c)] *
               delta[static_cast<std::size_t>(r)];
      prev_delta[static_cast<std::size_t>(c)] =
          prev_z[static_cast<std::size_t>(c)] > 0.0 ? acc : 0.0;
    }
  }

  std::string set_name_;
  int in_, h1_, h2_, out_;
  std::size_t ow1_, ob1_, ow2_, ob2_, ow3_, ob3_;
  std::vector<double> params_;
};

struct EpochLog {
  int epoch;  // 1-based
  double train_loss;
  double dev_eer;
};

struct TrainResult {
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_dev_eer = 0.0;
};

// Minibatch Adam with bias correction. The net is left holding the
// checkpointed (lowest dev EER, earliest tie) parameters.
inline TrainResult train_attrib(AttribNet& net, const Matrix& X_train,
                                const std::vector<int>& y_train,
                                const Matrix& X_dev,
                                const std::vector<int>& y_dev,
                                const TrainConfig& cfg) {
  const auto check_data = [&](const Matrix& X, const std::vector<int>& y,
                              const char* which) {
    if (X.rows() == 0)
      throw ValidationError(std::string("train_attrib: empty ") + which + " set");
    if (X.rows() != y.size())
      throw ValidationError(std::string("train_attrib: ") + which + " has " +
                            std::to_string(X.rows()) + " rows vs " +
                            std::to_string(y.size()) + " labels");
    if (static_cast<int>(X.cols()) != net.in_dim())
      throw ValidationError(std::string("train_attrib: ") + which + " width " +
                            std::to_string(X.cols()) + " vs net input " +
                            std::to_string(net.in_dim()));
    for (int v : y)
      if (v < 0 || v >= net.out_dim())
        throw ValidationError(std::string("train_attrib: ") + which +
                              " label " + std::to_string(v) + " outside [0, " +
                              std::to_string(net.out_dim()) + ")");
  };
  check_data(X_train, y_train, "train");
  check_data(X_dev, y_dev, "dev");
  if (cfg.epochs < 1 || cfg.batch_size < 1 || cfg.learning_rate <= 0.0)
    throw ValidationError("train_attrib: epochs and batch_size must be >= 1, "
                          "learning_rate > 0");
  bool multi_class = false;
  for (int v : y_train) multi_class = multi_class || v != y_train.front();
  if (!multi_class)
    throw ValidationError("train_attrib: training labels for set '" +
                          net.set_name() + "' contain a single class");

  const std::size_t n = X_train.rows();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  detail::Rng shuffle_rng(detail::mix_seed(cfg.seed, {"shuffle", net.set_name()}));

  std::vector<double> grad, m(net.param_count(), 0.0), v(net.param_count(), 0.0);
  long t = 0;
  TrainResult result;
  result.best_dev_eer = std::numeric_limits<double>::infinity();
  std::vector<double> best_params = net.params();

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    int batch_index = 0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t len = std::min(n - start, static_cast<std::size_t>(cfg.batch_size));
      const std::span<const std::size_t> batch(order.data() + start, len);
      const double loss = net.loss_and_gradient(X_train, y_train, batch, grad);
      if (!std::isfinite(loss))
        throw NumericError("train_attrib: loss became non-finite at epoch " +
                           std::to_string(epoch) + " batch " +
                           std::to_string(batch_index) + " in set '" +
                           net.set_name() + "'");
      epoch_loss += loss * static_cast<double>(len);

      ++t;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
      for (std::size_t i = 0; i < grad.size(); ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        const double mhat = m[i] / c1;
        const double vhat = v[i] / c2;
        net.set_param(i, net.param(i) -
                             cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon));
      }
      ++batch_index;
    }
    epoch_loss /= static_cast<double>(n);

    Matrix dev_scores(X_dev.rows(), static_cast<std::size_t>(net.out_dim()));
    for (std::size_t r = 0; r < X_dev.rows(); ++r) {
      const auto p = net.forward(X_dev.row(r));
      for (std::size_t k = 0; k < p.size(); ++k) {
        if (!std::isfinite(p[k]))
          throw NumericError("train_attrib: non-finite dev posterior at epoch " +
                             std::to_string(epoch) + " in set '" +
                             net.set_name() + "'");
        dev_scores(r, k) = p[k];
      }
    }
    const double dev = eer_multiclass(dev_scores, y_dev);
    result.log.push_back({epoch, epoch_loss, dev});
    if (dev < result.best_dev_eer) {
      result.best_dev_eer = dev;
      result.best_epoch = epoch;
      best_params = net.params();
    }
  }
  net.set_params(std::move(best_params));
  return result;
}

// Runs every record through every per-set net and concatenates the
// posteriors. Nets must line up with the taxonomy sets.
inline std::vector<ProbAttributeEmbedding> extract_embeddings(
    const std::vector<AttribNet>& nets, const std::vector<CmEmbedding>& embs,
    const AttributeTaxonomy& tax) {
  if (static_cast<int>(nets.size()) != tax.num_sets())
    throw ValidationError("extract_embeddings: " + std::to_string(nets.size()) +
                          " nets vs " + std::to_string(tax.num_sets()) +
                          " taxonomy sets");
  for (int i = 0; i < tax.num_sets(); ++i) {
    const auto& set = tax.sets()[static_cast<std::size_t>(i)];
    const auto& net = nets[static_cast<std::size_t>(i)];
    if (net.set_name() != set.name)
      throw ValidationError("extract_embeddings: net " + std::to_string(i) +
                            " is for set '" + net.set_name() +
                            "', taxonomy has '" + set.name + "'");
    if (net.out_dim() != tax.set_size(i))
      throw ValidationError("extract_embeddings: net '" + net.set_name() +
                            "' outputs " + std::to_string(net.out_dim()) +
                            " classes, set has " +
                            std::to_string(tax.set_size(i)));
  }
  std::vector<ProbAttributeEmbedding> out(embs.size());
  detail::parallel_for(embs.size(), [&](std::size_t r) {
    const auto& e = embs[r];
    std::vector<double> x(e.values.begin(), e.values.end());
    std::vector<std::vector<double>> per_set;
    per_set.reserve(nets.size());
    for (const auto& net : nets) per_set.push_back(net.forward(x));
    out[r] = concat_embedding(e.utt_id, per_set, tax);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Net bank serialization
// ---------------------------------------------------------------------------

inline void write_attrib_nets(const std::string& path,
                              const std::vector<AttribNet>& nets) {
  if (nets.empty())
    throw ValidationError("write_attrib_nets: no nets for " + path);
  auto out = detail::open_out(path);
  detail::ByteWriter w(out);
  w.bytes("PANB", 4);
  w.u32(kNetBankFormatVersion);
  w.u32(static_cast<std::uint32_t>(nets.size()));
  for (const auto& net : nets) {
    w.str16(net.set_name());
    w.u32(static_cast<std::uint32_t>(net.in_dim()));
    w.u32(static_cast<std::uint32_t>(net.hidden1()));
    w.u32(static_cast<std::uint32_t>(net.hidden2()));
    w.u32(static_cast<std::uint32_t>(net.out_dim()));
    for (std::size_t i = 0; i < net.param_count(); ++i)
      w.f32(static_cast<float>(net.param(i)));
  }
  if (!out) throw IoError("write failed: " + path);
}

inline std::vector<AttribNet> read_attrib_nets(const std::string& path) {
  auto in = detail::open_in(path);
  detail::ByteReader r(in, path);
  char magic[4];
  r.bytes(magic, 4);
  if (std::string_view(magic, 4) != "PANB")
    throw FormatError(path + ": not a net bank file (bad magic)");
  const auto version = r.u32();
  if (version != kNetBankFormatVersion)
    throw FormatError(path + ": unsupported format version " +
                      std::to_string(version));
  const auto count = r.u32();
  if (count == 0) throw FormatError(path + ": empty net bank");
  std::vector<AttribNet> nets;
  nets.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name = r.str16();
    const auto in_dim = r.u32();
    const auto h1 = r.u32();
    const auto h2 = r.u32();
    const auto out_dim = r.u32();
    if (in_dim < 1 || h1 < 1 || h2 < 1 || out_dim < 2 || in_dim > 1u << 20 ||
        h1 > 1u << 20 || h2 > 1u << 20 || out_dim > 1u << 20)
      throw FormatError(path + ": implausible layer sizes for net '" + name +
                        "'");
    AttribNet net(name, static_cast<int>(in_dim), static_cast<int>(h1),
                  static_cast<int>(h2), static_cast<int>(out_dim), 0);
    std::vector<double> params(net.param_count());
    for (auto& p : params) p = static_cast<double>(r.f32());
    net.set_params(std::move(params));
    nets.push_back(std::move(net));
  }
  if (!r.at_eof()) throw FormatError(path + ": trailing bytes");
  return nets;
}

}  // namespace attribkit

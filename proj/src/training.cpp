#include "jscc/training.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "jscc/channel.hpp"
#include "jscc/checkpoint.hpp"
#include "jscc/threadpool.hpp"

namespace jscc {
namespace training {

std::string SnrDist::str() const {
  char buf[64];
  if (kind == Kind::fixed) {
    std::snprintf(buf, sizeof(buf), "fixed(%g)", value);
  } else {
    std::snprintf(buf, sizeof(buf), "uniform(%g,%g)", lo, hi);
  }
  return buf;
}

SnrDist SnrDist::parse(const std::string& text) {
  const auto open = text.find('(');
  const auto close = text.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    throw std::invalid_argument("cannot parse SNR distribution '" + text + "'");
  }
  const std::string name = text.substr(0, open);
  const std::string args = text.substr(open + 1, close - open - 1);
  try {
    if (name == "fixed") {
      return make_fixed(std::stod(args));
    }
    if (name == "uniform") {
      const auto comma = args.find(',');
      if (comma == std::string::npos) throw std::invalid_argument("uniform needs two bounds");
      return make_uniform(std::stod(args.substr(0, comma)), std::stod(args.substr(comma + 1)));
    }
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse SNR distribution '" + text + "'");
  }
  throw std::invalid_argument("unknown SNR distribution '" + name + "'");
}

double sample_snr(const SnrDist& dist, RngStream& stream) { return dist.sample(stream); }

double mse_distortion(const data::ImageTensor& x, const data::ImageTensor& x_hat) {
  if (!x.same_shape(x_hat)) {
    throw std::invalid_argument("mse_distortion shape mismatch: " + x.shape_str() + " vs " +
                                x_hat.shape_str());
  }
  double acc = 0.0;
  for (int64_t i = 0; i < x.numel(); ++i) {
    const double d = static_cast<double>(x[i]) - static_cast<double>(x_hat[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(x.numel());
}

double batch_loss(const std::vector<data::ImageTensor>& x,
                  const std::vector<data::ImageTensor>& x_hat) {
  if (x.empty()) throw std::invalid_argument("batch_loss on empty batch");
  if (x.size() != x_hat.size()) throw std::invalid_argument("batch_loss size mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < x.size(); ++i) acc += mse_distortion(x[i], x_hat[i]);
  return acc / static_cast<double>(x.size());
}

namespace {

void append_train_log_row(std::ostream& os, const TrainLogEntry& e) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", e.loss);
  os << e.epoch << "," << buf << ",";
  std::snprintf(buf, sizeof(buf), "%.3f", e.seconds);
  os << buf << "," << e.checkpoint_path << "\n";
}

}  // namespace

void write_train_log_csv(const std::string& path, const TrainLog& log) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << "epoch,loss,seconds,checkpoint_path\n";
  for (const auto& e : log.entries) append_train_log_row(os, e);
}

namespace {

struct ChunkResult {
  double loss_sum = 0.0;  // sum over images of per-image MSE
  std::vector<Tensor<float>> grads;
};

/// Forward/backward over one chunk of the batch. Gradients come back scaled
/// by chunk_images/batch_images so that summing chunks yields the batch-mean
/// gradient.
ChunkResult run_chunk(const codec::Model<float>& model, const data::Dataset& dataset,
                      const std::vector<int64_t>& batch_idx, int begin, int end,
                      int batch_images, const std::vector<double>& snr_db, uint64_t seed,
                      int64_t step) {
  const int n = end - begin;
  const auto& first = dataset.images[static_cast<size_t>(batch_idx[static_cast<size_t>(begin)])];
  const int h = first.dim(0), w = first.dim(1), c = first.dim(2);
  Tensor<float> x({n, h, w, c});
  for (int i = 0; i < n; ++i) {
    const auto& img = dataset.images[static_cast<size_t>(batch_idx[static_cast<size_t>(begin + i)])];
    if (img.dim(0) != h || img.dim(1) != w || img.dim(2) != c) {
      throw std::invalid_argument("training images must share one shape");
    }
    std::copy(img.data(), img.data() + img.numel(),
              x.data() + static_cast<int64_t>(i) * img.numel());
  }

  Graph<float> g;
  codec::ParamNodes params = codec::add_param_leaves(g, model, /*requires_grad=*/true);
  const int x_node = g.add_leaf_ref(&x, false);
  std::vector<double> chunk_snr(snr_db.begin() + begin, snr_db.begin() + end);
  const int snr_node = codec::snr_leaf<float>(g, n, chunk_snr);
  codec::EncodeTrace enc = codec::encode_graph(g, model, params, x_node, snr_node);

  const Tensor<float>& z = g.val(enc.symbols);
  Tensor<float> noise({n, z.dim(1)});
  for (int i = 0; i < n; ++i) {
    RngStream stream = derive_stream(seed, "train-noise", static_cast<uint64_t>(step),
                                     static_cast<uint64_t>(begin + i));
    const double sigma2 = channel::snr_to_noise_power(chunk_snr[static_cast<size_t>(i)]);
    const float per_comp = static_cast<float>(std::sqrt(sigma2 / 2.0));
    float* row = noise.data() + static_cast<int64_t>(i) * z.dim(1);
    for (int j = 0; j < z.dim(1); ++j) row[j] = static_cast<float>(stream.normal()) * per_comp;
  }
  const int zhat = ops::add_constant(g, enc.symbols, noise);
  codec::DecodeTrace dec = codec::decode_graph(g, model, params, zhat, snr_node, h, w);
  const int loss = ops::mse_against(g, dec.image, x);

  // d(batch mean)/d(chunk mean) = n / batch_images.
  g.backward(loss, static_cast<float>(n) / static_cast<float>(batch_images));

  ChunkResult result;
  result.loss_sum = static_cast<double>(g.val(loss)[0]) * n;
  result.grads.reserve(model.values.size());
  for (size_t i = 0; i < model.values.size(); ++i) {
    const int id = params.ids[i];
    if (g.has_grad(id)) {
      result.grads.push_back(g.grad(id));
    } else {
      result.grads.emplace_back(model.values[i].shape());
    }
  }
  return result;
}

}  // namespace

TrainResult train(codec::Model<float>& model, const data::Dataset& dataset,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (dataset.empty()) throw std::invalid_argument("training dataset is empty");

  const bool writing = !cfg.out_dir.empty();
  if (writing) std::filesystem::create_directories(cfg.out_dir);
  const std::string log_path = writing ? cfg.out_dir + "/train_log.csv" : "";
  if (writing) {
    std::ofstream os(log_path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open '" + log_path + "' for writing");
    os << "epoch,loss,seconds,checkpoint_path\n";
  }

  const int64_t n_images = dataset.size();
  std::vector<int64_t> order(static_cast<size_t>(n_images));
  std::iota(order.begin(), order.end(), 0);

  Adam<float> adam(cfg.learning_rate);
  std::vector<Tensor<float>> grads;
  grads.reserve(model.values.size());
  for (const auto& p : model.values) grads.emplace_back(p.shape());

  TrainResult result;
  int64_t step = 0;
  const auto t0 = std::chrono::steady_clock::now();

  auto save = [&](int epochs_seen, const std::string& stem) {
    checkpoint::CheckpointMeta meta;
    meta.epochs_seen = epochs_seen;
    meta.snr_dist = cfg.snr_dist.str();
    meta.seed = cfg.seed;
    const std::string path = cfg.out_dir + "/" + stem + ".ckpt";
    checkpoint::save_checkpoint(path, model, meta);
    return path;
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    RngStream shuffle_stream = derive_stream(cfg.seed, "shuffle", static_cast<uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), shuffle_stream.engine());

    double epoch_loss_sum = 0.0;
    int64_t epoch_examples = 0;

    for (int64_t start = 0; start < n_images; start += cfg.batch_size) {
      const int batch_n = static_cast<int>(std::min<int64_t>(cfg.batch_size, n_images - start));
      std::vector<int64_t> batch_idx(order.begin() + start, order.begin() + start + batch_n);

      RngStream snr_stream = derive_stream(cfg.seed, "snr", static_cast<uint64_t>(step));
      std::vector<double> snr_db(static_cast<size_t>(batch_n));
      if (cfg.snr_per_batch) {
        const double mu = cfg.snr_dist.sample(snr_stream);
        std::fill(snr_db.begin(), snr_db.end(), mu);
      } else {
        for (auto& mu : snr_db) mu = cfg.snr_dist.sample(snr_stream);
      }

      const int n_chunks = (batch_n + cfg.chunk - 1) / cfg.chunk;
      std::vector<ChunkResult> chunks(static_cast<size_t>(n_chunks));
      parallel_for(n_chunks, cfg.workers, [&](int ci) {
        const int begin = ci * cfg.chunk;
        const int end = std::min(batch_n, begin + cfg.chunk);
        chunks[static_cast<size_t>(ci)] = run_chunk(model, dataset, batch_idx, begin, end,
                                                    batch_n, snr_db, cfg.seed, step);
      });

      for (auto& gt : grads) std::fill(gt.vec().begin(), gt.vec().end(), 0.0f);
      double loss_sum = 0.0;
      for (const auto& chunk : chunks) {
        loss_sum += chunk.loss_sum;
        for (size_t i = 0; i < grads.size(); ++i) {
          const Tensor<float>& src = chunk.grads[i];
          Tensor<float>& dst = grads[i];
          for (int64_t j = 0; j < dst.numel(); ++j) dst[j] += src[j];
        }
      }
      const double batch_mean_loss = loss_sum / batch_n;
      if (!std::isfinite(batch_mean_loss)) {
        throw TrainingDiverged("training diverged: loss " + std::to_string(batch_mean_loss) +
                               " at epoch " + std::to_string(epoch) + ", step " +
                               std::to_string(step));
      }
      adam.step(model.values, grads);

      epoch_loss_sum += loss_sum;
      epoch_examples += batch_n;
      ++step;

      if (writing && cfg.checkpoint_every_batches > 0 &&
          step % cfg.checkpoint_every_batches == 0) {
        char stem[64];
        std::snprintf(stem, sizeof(stem), "ckpt_step_%06lld", static_cast<long long>(step));
        save(epoch, stem);
      }
    }

    TrainLogEntry entry;
    entry.epoch = epoch;
    entry.loss = epoch_loss_sum / static_cast<double>(epoch_examples);
    entry.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (writing && cfg.checkpoint_every_epochs > 0 &&
        (epoch + 1) % cfg.checkpoint_every_epochs == 0) {
      char stem[64];
      std::snprintf(stem, sizeof(stem), "ckpt_epoch_%04d", epoch);
      entry.checkpoint_path = save(epoch + 1, stem);
    }
    result.log.entries.push_back(entry);
    if (writing) {
      std::ofstream os(log_path, std::ios::app);
      append_train_log_row(os, entry);
    }
  }

  if (writing) {
    result.final_checkpoint = save(cfg.epochs, "ckpt_final");
  }
  return result;
}

}  // namespace training
}  // namespace jscc

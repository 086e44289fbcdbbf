#include "jscc/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "jscc/channel.hpp"
#include "jscc/rng.hpp"
#include "jscc/threadpool.hpp"

namespace jscc {
namespace evaluation {

double psnr(const data::ImageTensor& x, const data::ImageTensor& x_hat, double max_pixel,
            double cap_db) {
  if (!x.same_shape(x_hat)) {
    throw std::invalid_argument("psnr shape mismatch: " + x.shape_str() + " vs " +
                                x_hat.shape_str());
  }
  double mse = 0.0;
  for (int64_t i = 0; i < x.numel(); ++i) {
    const double d = static_cast<double>(x[i]) - static_cast<double>(x_hat[i]);
    mse += d * d;
  }
  mse /= static_cast<double>(x.numel());
  if (mse <= 0.0) return cap_db;
  const double value = 10.0 * std::log10(max_pixel * max_pixel / mse);
  return std::min(value, cap_db);
}

MeanStd reduce_mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(sq / static_cast<double>(values.size()));
  return out;
}

MeanStd per_image_then_average(int64_t n_images, int workers,
                               const std::function<double(int64_t)>& per_image_psnr) {
  if (n_images <= 0) throw std::invalid_argument("evaluation dataset is empty");
  std::vector<double> scores(static_cast<size_t>(n_images));
  parallel_for(static_cast<int>(n_images), workers,
               [&](int i) { scores[static_cast<size_t>(i)] = per_image_psnr(i); });
  return reduce_mean_std(scores);
}

namespace {

/// Per-image transmission: encode once at the feedback SNR, add `repeats`
/// noise realizations at the true SNR, decode them as one batch; the
/// per-image PSNR averages the per-realization PSNRs.
double transmit_and_score(const codec::Model<float>& model, const data::ImageTensor& image,
                          int64_t image_index, double snr_fb_db, double snr_true_db,
                          const EvalConfig& cfg) {
  const int h = image.dim(0), w = image.dim(1), c = image.dim(2);
  Tensor<float> x({1, h, w, c}, image.vec());
  const Tensor<float> z = codec::encode(model, x, {snr_fb_db});
  const int len = z.dim(1);

  const double sigma2 = channel::snr_to_noise_power(snr_true_db);
  const float per_comp = static_cast<float>(std::sqrt(sigma2 / 2.0));
  Tensor<float> zhat({cfg.repeats, len});
  for (int r = 0; r < cfg.repeats; ++r) {
    RngStream stream = derive_stream(cfg.seed, "eval-noise", static_cast<uint64_t>(image_index),
                                     static_cast<uint64_t>(r));
    float* row = zhat.data() + static_cast<int64_t>(r) * len;
    for (int j = 0; j < len; ++j) {
      row[j] = z[j] + static_cast<float>(stream.normal()) * per_comp;
    }
  }
  const Tensor<float> decoded = codec::decode(model, zhat, {snr_fb_db}, h, w);

  double acc = 0.0;
  data::ImageTensor xhat({h, w, c});
  const int64_t stride = static_cast<int64_t>(h) * w * c;
  for (int r = 0; r < cfg.repeats; ++r) {
    std::copy(decoded.data() + r * stride, decoded.data() + (r + 1) * stride, xhat.data());
    acc += psnr(image, xhat, cfg.max_pixel, cfg.psnr_cap_db);
  }
  return acc / cfg.repeats;
}

}  // namespace

MeanStd dataset_psnr(const codec::Model<float>& model, const data::Dataset& dataset,
                     double snr_fb_db, double snr_true_db, const EvalConfig& cfg) {
  cfg.validate();
  if (dataset.empty()) throw std::invalid_argument("evaluation dataset is empty");
  return per_image_then_average(dataset.size(), cfg.workers, [&](int64_t i) {
    return transmit_and_score(model, dataset.images[static_cast<size_t>(i)], i, snr_fb_db,
                              snr_true_db, cfg);
  });
}

SweepResult sweep(const codec::Model<float>& model, const std::string& model_id,
                  const data::Dataset& dataset, const EvalConfig& cfg) {
  if (cfg.snr_test_list.empty()) throw std::invalid_argument("snr_test_list is empty");
  SweepResult rows;
  for (double snr : cfg.snr_test_list) {
    const MeanStd ms = dataset_psnr(model, dataset, snr, snr, cfg);
    rows.push_back({model_id, snr, ms.mean, ms.std, cfg.repeats});
  }
  return rows;
}

MeanStd mismatch_eval(const codec::Model<float>& model, const data::Dataset& dataset,
                      double snr_fb_db, double snr_true_db, const EvalConfig& cfg) {
  return dataset_psnr(model, dataset, snr_fb_db, snr_true_db, cfg);
}

AttentionStats attention_stats(const codec::Model<float>& model, const data::Dataset& dataset,
                               double snr_db, const EvalConfig& cfg, bool decoder_side) {
  cfg.validate();
  if (!model.arch.use_attention) throw std::invalid_argument("no attention modules");
  if (dataset.empty()) throw std::invalid_argument("evaluation dataset is empty");

  const size_t n_modules = decoder_side ? model.dec_af.size() : model.enc_af.size();
  const int64_t n_images = dataset.size();

  // factors[m] is (n_images x c_m), filled by image index.
  std::vector<std::vector<std::vector<double>>> factors(n_modules);
  for (size_t m = 0; m < n_modules; ++m) {
    factors[m].assign(static_cast<size_t>(n_images), {});
  }

  parallel_for(static_cast<int>(n_images), cfg.workers, [&](int i) {
    const data::ImageTensor& image = dataset.images[static_cast<size_t>(i)];
    Tensor<float> x({1, image.dim(0), image.dim(1), image.dim(2)}, image.vec());
    std::vector<Tensor<float>> module_factors;
    if (!decoder_side) {
      auto enc = codec::encode_collect(model, x, {snr_db});
      module_factors = std::move(enc.af_factors);
    } else {
      const Tensor<float> z = codec::encode(model, x, {snr_db});
      const double sigma2 = channel::snr_to_noise_power(snr_db);
      const float per_comp = static_cast<float>(std::sqrt(sigma2 / 2.0));
      RngStream stream = derive_stream(cfg.seed, "eval-noise", static_cast<uint64_t>(i), 0);
      Tensor<float> zhat(z.shape());
      for (int64_t j = 0; j < z.numel(); ++j) {
        zhat[j] = z[j] + static_cast<float>(stream.normal()) * per_comp;
      }
      auto dec = codec::decode_collect(model, zhat, {snr_db}, image.dim(0), image.dim(1));
      module_factors = std::move(dec.af_factors);
    }
    for (size_t m = 0; m < n_modules; ++m) {
      const Tensor<float>& f = module_factors[m];
      std::vector<double>& row = factors[m][static_cast<size_t>(i)];
      row.resize(static_cast<size_t>(f.numel()));
      for (int64_t j = 0; j < f.numel(); ++j) row[static_cast<size_t>(j)] = f[j];
    }
  });

  AttentionStats stats;
  stats.snr_db = snr_db;
  stats.decoder_side = decoder_side;
  for (size_t m = 0; m < n_modules; ++m) {
    const size_t c = factors[m][0].size();
    ModuleAttentionStats ms;
    ms.mean.assign(c, 0.0);
    ms.std.assign(c, 0.0);
    for (int64_t i = 0; i < n_images; ++i) {
      for (size_t j = 0; j < c; ++j) ms.mean[j] += factors[m][static_cast<size_t>(i)][j];
    }
    for (size_t j = 0; j < c; ++j) ms.mean[j] /= static_cast<double>(n_images);
    for (int64_t i = 0; i < n_images; ++i) {
      for (size_t j = 0; j < c; ++j) {
        const double d = factors[m][static_cast<size_t>(i)][j] - ms.mean[j];
        ms.std[j] += d * d;
      }
    }
    for (size_t j = 0; j < c; ++j) ms.std[j] = std::sqrt(ms.std[j] / static_cast<double>(n_images));
    const MeanStd of_means = reduce_mean_std(ms.mean);
    ms.var_of_means = of_means.std * of_means.std;
    stats.modules.push_back(std::move(ms));
  }
  return stats;
}

size_t select_nearest_snr(const std::vector<EnsembleMember>& members, double snr_test_db) {
  if (members.empty()) throw std::invalid_argument("ensemble has no members");
  size_t best = 0;
  double best_dist = std::abs(members[0].snr_train_db - snr_test_db);
  for (size_t i = 1; i < members.size(); ++i) {
    const double dist = std::abs(members[i].snr_train_db - snr_test_db);
    if (dist < best_dist ||
        (dist == best_dist && members[i].snr_train_db < members[best].snr_train_db)) {
      best = i;
      best_dist = dist;
    }
  }
  return best;
}

SweepResult ensemble_eval(const std::vector<EnsembleMember>& members,
                          const std::string& model_id, const data::Dataset& dataset,
                          const EvalConfig& cfg) {
  if (members.empty()) throw std::invalid_argument("ensemble has no members");
  if (cfg.snr_test_list.empty()) throw std::invalid_argument("snr_test_list is empty");
  SweepResult rows;
  for (double snr : cfg.snr_test_list) {
    const EnsembleMember& pick = members[select_nearest_snr(members, snr)];
    const MeanStd ms = dataset_psnr(*pick.model, dataset, snr, snr, cfg);
    rows.push_back({model_id, snr, ms.mean, ms.std, cfg.repeats});
  }
  return rows;
}

std::vector<StorageRow> storage_report(
    const std::vector<std::pair<std::string, int64_t>>& strategies) {
  std::vector<StorageRow> rows;
  for (const auto& [name, count] : strategies) {
    StorageRow row;
    row.strategy = name;
    row.param_count = count;
    row.bytes = count * 4;
    row.mb = static_cast<double>(row.bytes) / (1024.0 * 1024.0);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", row.mb);
    row.mb_human = buf;
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::ofstream open_csv(const std::string& path, bool timestamp) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  if (timestamp) {
    const std::time_t now = std::time(nullptr);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    os << "# generated " << buf << "\n";
  }
  return os;
}

}  // namespace

void write_sweep_csv(const std::string& path, const SweepResult& rows, bool timestamp) {
  auto os = open_csv(path, timestamp);
  os << "model_id,snr_test_db,mean_psnr_db,std_psnr_db,repeats\n";
  for (const auto& r : rows) {
    os << r.model_id << "," << fmt6(r.snr_test_db) << "," << fmt6(r.mean_psnr_db) << ","
       << fmt6(r.std_psnr_db) << "," << r.repeats << "\n";
  }
}

void write_mismatch_csv(const std::string& path,
                        const std::vector<std::tuple<std::string, double, double, MeanStd>>& rows,
                        bool timestamp) {
  auto os = open_csv(path, timestamp);
  os << "model_id,snr_fb_db,snr_true_db,mean_psnr_db,std_psnr_db\n";
  for (const auto& [id, fb, tr, ms] : rows) {
    os << id << "," << fmt6(fb) << "," << fmt6(tr) << "," << fmt6(ms.mean) << ","
       << fmt6(ms.std) << "\n";
  }
}

void write_attention_csv(const std::string& path, const std::vector<AttentionStats>& stats,
                         bool timestamp) {
  auto os = open_csv(path, timestamp);
  os << "# channel_index -1 is the per-module summary row; its mean column holds the "
        "variance of the per-channel means\n";
  os << "module_index,channel_index,snr_db,mean,std\n";
  for (const auto& st : stats) {
    for (size_t m = 0; m < st.modules.size(); ++m) {
      const auto& mod = st.modules[m];
      for (size_t c = 0; c < mod.mean.size(); ++c) {
        os << m << "," << c << "," << fmt6(st.snr_db) << "," << fmt6(mod.mean[c]) << ","
           << fmt6(mod.std[c]) << "\n";
      }
    }
    for (size_t m = 0; m < st.modules.size(); ++m) {
      os << m << ",-1," << fmt6(st.snr_db) << "," << fmt6(st.modules[m].var_of_means)
         << ",0\n";
    }
  }
}

void write_storage_csv(const std::string& path, const std::vector<StorageRow>& rows,
                       bool timestamp) {
  auto os = open_csv(path, timestamp);
  os << "strategy,param_count,bytes,mb\n";
  for (const auto& r : rows) {
    os << r.strategy << "," << r.param_count << "," << r.bytes << "," << fmt6(r.mb) << "\n";
  }
}

}  // namespace evaluation
}  // namespace jscc

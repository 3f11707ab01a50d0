#include "qmcl/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "qmcl/adam.hpp"
#include "qmcl/contrastive.hpp"
#include "qmcl/errors.hpp"
#include "qmcl/qtns.hpp"

namespace qmcl {

namespace {

constexpr std::size_t kEvalChunk = 256;

Tensor gather_eeg(const Tensor& eeg, std::span<const std::size_t> rows) {
  const std::size_t stride = eeg.numel() / eeg.dim(0);
  Tensor out({rows.size(), eeg.dim(1), eeg.dim(2), eeg.dim(3)});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy_n(eeg.data().begin() + rows[r] * stride, stride, out.data().begin() + r * stride);
  }
  return out;
}

Tensor gather_rows(const Tensor& m, std::span<const std::size_t> rows) {
  const std::size_t cols = m.dim(1);
  Tensor out({rows.size(), cols});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy_n(m.data().begin() + rows[r] * cols, cols, out.data().begin() + r * cols);
  }
  return out;
}

void check_compatible(const RunConfig& config, const Dataset& data) {
  data.validate();
  if (data.eeg.dim(2) != config.E || data.eeg.dim(3) != config.T) {
    throw ShapeError("dataset EEG is " + shape_string(data.eeg.shape()) + " but config expects E=" +
                     std::to_string(config.E) + ", T=" + std::to_string(config.T));
  }
  if (data.image_embeddings.dim(1) != config.D_img) {
    throw ShapeError("dataset image embeddings have width " +
                     std::to_string(data.image_embeddings.dim(1)) + " but config D_img=" +
                     std::to_string(config.D_img));
  }
}

}  // namespace

Model Model::init(const RunConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  Model m;
  m.eeg_config = config.eeg_encoder();
  m.image_config = config.image_head();
  m.eeg = QstConvParams::init(m.eeg_config, rng);
  m.image = ImageHeadParams::init(m.image_config, rng);
  m.log_temperature = Tensor::scalar(config.tau_init);
  return m;
}

std::vector<NamedParam> Model::trainable() {
  std::vector<NamedParam> out;
  for (auto& p : eeg.trainable()) out.push_back({"eeg." + p.name, p.tensor});
  for (auto& p : image.trainable()) out.push_back({"image." + p.name, p.tensor});
  out.push_back({"log_temperature", &log_temperature});
  return out;
}

std::vector<NamedParam> Model::state() {
  auto out = trainable();
  for (auto& p : eeg.buffers()) out.push_back({"eeg." + p.name, p.tensor});
  return out;
}

void save_model(const std::filesystem::path& path, Model& model) {
  std::vector<std::pair<std::string, const Tensor*>> entries;
  for (auto& p : model.state()) entries.emplace_back(p.name, p.tensor);
  save_tensor_bundle(path, entries);
}

Model load_model(const std::filesystem::path& path, const RunConfig& config) {
  Model model = Model::init(config, 0);
  auto stored = load_tensor_bundle(path);
  for (auto& p : model.state()) {
    auto it = stored.find(p.name);
    if (it == stored.end()) throw ConfigError("parameter file lacks '" + p.name + "'");
    if (it->second.shape() != p.tensor->shape()) {
      throw ShapeError("parameter '" + p.name + "' has shape " + shape_string(it->second.shape()) +
                       ", config expects " + shape_string(p.tensor->shape()));
    }
    *p.tensor = std::move(it->second);
  }
  return model;
}

nlohmann::ordered_json MetricsRecord::to_json() const {
  nlohmann::ordered_json j;
  j["run_id"] = run_id;
  j["epoch"] = epoch;
  j["train_loss"] = train_loss ? nlohmann::ordered_json(*train_loss) : nullptr;
  j["top1"] = top1;
  j["top5"] = top5;
  j["wall_time"] = wall_time ? nlohmann::ordered_json(*wall_time) : nullptr;
  return j;
}

MetricsRecord MetricsRecord::from_json(const nlohmann::json& j) {
  MetricsRecord r;
  r.run_id = j.at("run_id").get<int>();
  r.epoch = j.at("epoch").get<int>();
  if (!j.at("train_loss").is_null()) r.train_loss = j.at("train_loss").get<double>();
  r.top1 = j.at("top1").get<double>();
  r.top5 = j.at("top5").get<double>();
  if (!j.at("wall_time").is_null()) r.wall_time = j.at("wall_time").get<double>();
  return r;
}

std::string MetricsRecord::to_line() const { return to_json().dump() + "\n"; }

TrainResult train(const RunConfig& config, const Dataset& data, std::uint64_t seed, int run_id,
                  const MetricsSink& sink) {
  config.validate();
  check_compatible(config, data);
  const auto start = std::chrono::steady_clock::now();

  TrainResult result;
  result.model = Model::init(config, seed);
  Model& model = result.model;
  const auto params = model.trainable();
  std::vector<AdamState> optim;
  for (const auto& p : params) optim.emplace_back(p.tensor->numel(), config.adam());

  // Shuffling draws from a stream separate from initialisation.
  std::mt19937_64 shuffle_rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<std::size_t> order = data.samples_of(data.train_classes);
  if (order.size() < 2) throw ConfigError("train split needs at least 2 samples");
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += batch) {
      const std::size_t end = std::min(order.size(), begin + batch);
      if (end - begin < 2) break;  // batch norm needs two samples
      const std::span<const std::size_t> idx(order.data() + begin, end - begin);
      std::vector<std::size_t> classes(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) classes[i] = data.labels[idx[i]];

      for (const auto& p : params) p.tensor->zero_grad();
      Tape tape;
      Var eeg = tape.constant(gather_eeg(data.eeg, idx));
      Var img = tape.constant(gather_rows(data.image_embeddings, classes));
      Var eeg_f = qstconv_forward(tape, eeg, model.eeg, model.eeg_config, BatchNormMode::Train);
      Var img_f = image_head_forward(tape, img, model.image, model.image_config);
      Var logits = clip_logits(eeg_f, img_f, tape.parameter(model.log_temperature));
      Var loss;
      try {
        loss = clip_loss(logits);
      } catch (const NumericError&) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(n_batches) + " (run " + std::to_string(run_id) + ")");
      }
      tape.backward(loss);
      for (std::size_t k = 0; k < params.size(); ++k) {
        params[k].tensor->check_finite(params[k].name + " gradient");
        adam_step(params[k].tensor->data(), params[k].tensor->grad(), optim[k]);
      }
      model.log_temperature[0] = std::min(model.log_temperature[0], kMaxLogTemperature);
      loss_sum += loss.value()[0];
      ++n_batches;
    }
    const double epoch_loss = loss_sum / static_cast<double>(n_batches);
    if (epoch == 0) result.initial_loss = epoch_loss;
    result.final_loss = epoch_loss;

    MetricsRecord rec = evaluate_zero_shot(model, data, run_id);
    rec.epoch = epoch;
    rec.train_loss = epoch_loss;
    if (config.record_wall_time) {
      rec.wall_time =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    result.metrics.push_back(rec);
    if (sink) sink(rec);
  }
  for (const auto& p : params) p.tensor->drop_grad();
  return result;
}

TrainResult train(const RunConfig& config, const Dataset& data, const MetricsSink& sink) {
  return train(config, data, config.seed, 0, sink);
}

ZeroShotScores score_zero_shot(Model& model, const Dataset& data) {
  data.validate();
  if (data.test_classes.empty()) throw ContractError("test split is empty");
  ZeroShotScores out;
  const std::vector<std::size_t> queries = data.samples_of(data.test_classes);
  if (queries.empty()) throw ContractError("no samples belong to the test classes");

  Tape tape;
  Var img = tape.constant(gather_rows(data.image_embeddings, data.test_classes));
  Var img_f = image_head_forward(tape, img, model.image, model.image_config);
  Var tau = tape.constant(model.log_temperature);

  out.scores = Tensor({queries.size(), data.test_classes.size()});
  const std::size_t n_cls = data.test_classes.size();
  for (std::size_t begin = 0; begin < queries.size(); begin += kEvalChunk) {
    const std::size_t end = std::min(queries.size(), begin + kEvalChunk);
    Tape chunk;
    Var eeg = chunk.constant(gather_eeg(data.eeg, std::span(queries).subspan(begin, end - begin)));
    Var eeg_f = qstconv_forward(chunk, eeg, model.eeg, model.eeg_config, BatchNormMode::Eval);
    Var logits = clip_logits(eeg_f, chunk.constant(img_f.value()), chunk.constant(tau.value()));
    std::copy(logits.value().data().begin(), logits.value().data().end(),
              out.scores.data().begin() + begin * n_cls);
  }
  for (std::size_t q : queries) {
    const auto it = std::find(data.test_classes.begin(), data.test_classes.end(), data.labels[q]);
    out.truth.push_back(static_cast<std::size_t>(it - data.test_classes.begin()));
  }
  return out;
}

std::vector<double> zero_shot_topk(Model& model, const Dataset& data,
                                   const std::vector<std::size_t>& k_list) {
  const ZeroShotScores s = score_zero_shot(model, data);
  std::vector<double> out;
  for (std::size_t k : k_list) {
    out.push_back(topk_accuracy(s.scores, s.truth, std::min(k, s.scores.dim(1))));
  }
  return out;
}

MetricsRecord evaluate_zero_shot(Model& model, const Dataset& data, int run_id) {
  const auto acc = zero_shot_topk(model, data, {1, 5});
  MetricsRecord r;
  r.run_id = run_id;
  r.epoch = -1;
  r.top1 = acc[0];
  r.top5 = acc[1];
  return r;
}

SyntheticSpec synthetic_spec(const RunConfig& c) {
  SyntheticSpec s;
  s.seed = c.data_seed;
  s.n_train_classes = static_cast<std::size_t>(c.n_train_classes);
  s.n_test_classes = static_cast<std::size_t>(c.n_test_classes);
  s.samples_per_class = static_cast<std::size_t>(c.samples_per_class);
  s.electrodes = c.E;
  s.samples = c.T;
  s.image_dim = c.D_img;
  s.noise_sigma = c.noise_sigma;
  s.latent_dim = static_cast<std::size_t>(c.latent_dim);
  return s;
}

Dataset dataset_for(const RunConfig& config) {
  if (!config.manifest_path.empty()) return load_dataset(std::filesystem::path(config.manifest_path));
  return generate_synthetic_dataset(synthetic_spec(config));
}

}  // namespace qmcl

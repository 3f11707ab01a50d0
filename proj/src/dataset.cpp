#include "qmcl/dataset.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

#include <json.hpp>

#include "qmcl/errors.hpp"
#include "qmcl/qtns.hpp"

namespace qmcl {

namespace fs = std::filesystem;

DatasetManifest DatasetManifest::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest " + path.string());
  DatasetManifest m;
  try {
    const auto j = nlohmann::json::parse(in);
    const fs::path base = path.parent_path();
    auto resolve = [&](const char* key) {
      fs::path p = j.at(key).get<std::string>();
      return p.is_relative() ? base / p : p;
    };
    for (const auto& [key, _] : j.items()) {
      static const std::set<std::string> known = {"eeg_path", "image_emb_path", "labels_path",
                                                  "train_classes", "test_classes"};
      if (!known.count(key)) throw ConfigError("unknown manifest key '" + key + "'");
    }
    m.eeg_path = resolve("eeg_path");
    m.image_emb_path = resolve("image_emb_path");
    m.labels_path = resolve("labels_path");
    m.train_classes = j.at("train_classes").get<std::vector<std::size_t>>();
    m.test_classes = j.at("test_classes").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("manifest " + path.string() + ": " + e.what());
  }
  return m;
}

void DatasetManifest::save(const fs::path& path) const {
  nlohmann::ordered_json j;
  j["eeg_path"] = eeg_path.string();
  j["image_emb_path"] = image_emb_path.string();
  j["labels_path"] = labels_path.string();
  j["train_classes"] = train_classes;
  j["test_classes"] = test_classes;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write manifest " + path.string());
  out << j.dump(2) << "\n";
}

void Dataset::validate() const {
  if (eeg.rank() != 4 || eeg.dim(1) != 1) {
    throw ShapeError("EEG tensor must be [N, 1, E, T], got " + shape_string(eeg.shape()));
  }
  if (image_embeddings.rank() != 2) {
    throw ShapeError("image embeddings must be [N_class, D_img], got " +
                     shape_string(image_embeddings.shape()));
  }
  if (labels.size() != eeg.dim(0)) {
    throw ShapeError(std::to_string(labels.size()) + " labels for " +
                     std::to_string(eeg.dim(0)) + " EEG samples");
  }
  for (std::size_t l : labels) {
    if (l >= n_classes()) {
      throw ContractError("label " + std::to_string(l) + " has no image embedding (" +
                          std::to_string(n_classes()) + " classes)");
    }
  }
  std::set<std::size_t> train;
  for (std::size_t c : train_classes) {
    if (c >= n_classes()) throw ContractError("train class " + std::to_string(c) + " out of range");
    if (!train.insert(c).second) throw ContractError("train class " + std::to_string(c) + " repeated");
  }
  std::set<std::size_t> test;
  for (std::size_t c : test_classes) {
    if (c >= n_classes()) throw ContractError("test class " + std::to_string(c) + " out of range");
    if (!test.insert(c).second) throw ContractError("test class " + std::to_string(c) + " repeated");
    if (train.count(c)) {
      throw ContractError("class " + std::to_string(c) +
                          " appears in both train and test splits; zero-shot evaluation "
                          "requires disjoint classes");
    }
  }
}

std::vector<std::size_t> Dataset::samples_of(const std::vector<std::size_t>& classes) const {
  const std::set<std::size_t> wanted(classes.begin(), classes.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (wanted.count(labels[i])) out.push_back(i);
  }
  return out;
}

Dataset load_dataset(const DatasetManifest& m) {
  Dataset d;
  d.eeg = load_tensor_file(m.eeg_path);
  d.image_embeddings = load_tensor_file(m.image_emb_path);
  const Tensor labels = load_tensor_file(m.labels_path);
  if (labels.rank() != 1) throw ShapeError("labels tensor must be one-dimensional");
  for (double v : labels.data()) {
    if (!(v >= 0) || v != std::floor(v)) {
      throw ContractError("labels must be non-negative integers, found " + std::to_string(v));
    }
    d.labels.push_back(static_cast<std::size_t>(v));
  }
  d.train_classes = m.train_classes;
  d.test_classes = m.test_classes;
  d.validate();
  return d;
}

Dataset load_dataset(const fs::path& manifest_path) {
  return load_dataset(DatasetManifest::load(manifest_path));
}

DatasetManifest write_dataset(const Dataset& data, const fs::path& out_dir) {
  data.validate();
  fs::create_directories(out_dir);
  DatasetManifest m{"eeg.qtns", "image_emb.qtns", "labels.qtns", data.train_classes,
                    data.test_classes};
  save_tensor_file(out_dir / m.eeg_path, data.eeg);
  save_tensor_file(out_dir / m.image_emb_path, data.image_embeddings);
  Tensor labels({data.labels.size()});
  for (std::size_t i = 0; i < data.labels.size(); ++i) labels[i] = static_cast<double>(data.labels[i]);
  save_tensor_file(out_dir / m.labels_path, labels);
  m.save(out_dir / "manifest.json");
  m.eeg_path = out_dir / m.eeg_path;
  m.image_emb_path = out_dir / m.image_emb_path;
  m.labels_path = out_dir / m.labels_path;
  return m;
}

Dataset generate_synthetic_dataset(const SyntheticSpec& s) {
  if (s.n_train_classes < 1 || s.n_test_classes < 1 || s.samples_per_class < 1 ||
      s.electrodes < 1 || s.samples < 1 || s.image_dim < 1 || s.latent_dim < 1 ||
      !(s.noise_sigma >= 0) || !std::isfinite(s.noise_sigma)) {
    throw ConfigError("invalid synthetic dataset sizes");
  }
  std::mt19937_64 rng(s.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t K = s.latent_dim, E = s.electrodes, T = s.samples;
  const std::size_t n_classes = s.n_train_classes + s.n_test_classes;

  // Shared generative structure.
  std::vector<double> spatial(K * E), temporal(K * T), mixing(s.image_dim * K);
  for (auto& v : spatial) v = normal(rng);
  for (std::size_t k = 0; k < K; ++k) {
    const double cycles = 1.0 + 7.0 * unit(rng);
    const double phase = 2.0 * std::numbers::pi * unit(rng);
    for (std::size_t t = 0; t < T; ++t) {
      temporal[k * T + t] =
          std::sin(2.0 * std::numbers::pi * cycles * static_cast<double>(t) / T + phase);
    }
  }
  for (auto& v : mixing) v = normal(rng) / std::sqrt(static_cast<double>(K));
  const double eeg_scale = std::sqrt(2.0 / static_cast<double>(K));

  Dataset d;
  d.image_embeddings = Tensor({n_classes, s.image_dim});
  std::vector<double> prototypes(n_classes * E * T, 0.0);
  for (std::size_t c = 0; c < n_classes; ++c) {
    std::vector<double> z(K);
    for (auto& v : z) v = normal(rng);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t e = 0; e < E; ++e)
        for (std::size_t t = 0; t < T; ++t) {
          prototypes[(c * E + e) * T + t] +=
              eeg_scale * z[k] * spatial[k * E + e] * temporal[k * T + t];
        }
    for (std::size_t i = 0; i < s.image_dim; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < K; ++k) acc += mixing[i * K + k] * z[k];
      d.image_embeddings.at(c, i) = acc;
    }
  }

  const std::size_t n = n_classes * s.samples_per_class;
  d.eeg = Tensor({n, 1, E, T});
  d.labels.reserve(n);
  std::size_t row = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    for (std::size_t r = 0; r < s.samples_per_class; ++r, ++row) {
      for (std::size_t i = 0; i < E * T; ++i) {
        const double noise = s.noise_sigma > 0.0 ? s.noise_sigma * normal(rng) : 0.0;
        d.eeg[row * E * T + i] = prototypes[c * E * T + i] + noise;
      }
      d.labels.push_back(c);
    }
  }
  round_to_float32(d.eeg);
  round_to_float32(d.image_embeddings);
  for (std::size_t c = 0; c < s.n_train_classes; ++c) d.train_classes.push_back(c);
  for (std::size_t c = s.n_train_classes; c < n_classes; ++c) d.test_classes.push_back(c);
  d.validate();
  return d;
}

DatasetManifest gen_synthetic_dataset(const SyntheticSpec& spec, const fs::path& out_dir) {
  return write_dataset(generate_synthetic_dataset(spec), out_dir);
}

}  // namespace qmcl

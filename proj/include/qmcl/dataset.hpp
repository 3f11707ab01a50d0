#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "qmcl/tensor.hpp"

namespace qmcl {

/// On-disk description of a dataset. Relative paths resolve against the
/// directory holding the manifest.
struct DatasetManifest {
  std::filesystem::path eeg_path;        // QTNS [N, 1, E, T]
  std::filesystem::path image_emb_path;  // QTNS [N_class, D_img]
  std::filesystem::path labels_path;     // QTNS [N], integral class indices
  std::vector<std::size_t> train_classes;
  std::vector<std::size_t> test_classes;

  static DatasetManifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

/// In-memory dataset: one EEG tensor per sample, one image embedding per
/// class.
struct Dataset {
  Tensor eeg;               // [N, 1, E, T]
  Tensor image_embeddings;  // [N_class, D_img]
  std::vector<std::size_t> labels;
  std::vector<std::size_t> train_classes;
  std::vector<std::size_t> test_classes;

  std::size_t size() const { return labels.size(); }
  std::size_t n_classes() const { return image_embeddings.dim(0); }

  /// Shapes agree, labels reference existing classes, class lists hold no
  /// duplicates. Throws ContractError if a class is in both splits.
  void validate() const;

  /// Indices of samples whose label is in `classes`, in file order.
  std::vector<std::size_t> samples_of(const std::vector<std::size_t>& classes) const;
};

Dataset load_dataset(const DatasetManifest& manifest);
Dataset load_dataset(const std::filesystem::path& manifest_path);

/// Writes eeg.qtns, image_emb.qtns, labels.qtns and manifest.json into
/// `out_dir`. The file stores relative names; the returned manifest holds
/// the resolved paths.
DatasetManifest write_dataset(const Dataset& data, const std::filesystem::path& out_dir);

struct SyntheticSpec {
  std::uint64_t seed = 0;
  std::size_t n_train_classes = 16;
  std::size_t n_test_classes = 8;
  std::size_t samples_per_class = 20;
  std::size_t electrodes = 8;
  std::size_t samples = 64;
  std::size_t image_dim = 32;
  double noise_sigma = 0.3;
  std::size_t latent_dim = 2;
};

/// Paired EEG/image data driven by one latent vector per class. Each latent
/// component contributes a fixed spatial pattern times a fixed sinusoid to the
/// EEG prototype (scaled to unit RMS on average) and a fixed random direction
/// to the image embedding. Samples are the EEG prototype plus
/// N(0, noise_sigma^2) noise. Classes [0, n_train) form the train split and
/// the rest the test split. Values are rounded to float32 so a dataset written
/// to disk and reloaded is bit-identical to the in-memory one.
Dataset generate_synthetic_dataset(const SyntheticSpec& spec);

/// generate_synthetic_dataset followed by write_dataset.
DatasetManifest gen_synthetic_dataset(const SyntheticSpec& spec,
                                      const std::filesystem::path& out_dir);

}  // namespace qmcl

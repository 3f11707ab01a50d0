#include "qmcl/config.hpp"

#include <fstream>
#include <set>
#include <type_traits>

#include "qmcl/errors.hpp"

namespace qmcl {

namespace {

// Single field table shared by serialisation and parsing.
template <typename Visitor>
void visit_fields(RunConfig& c, Visitor&& v) {
  v("n_qubits", c.n_qubits);
  v("n_layers", c.n_layers);
  v("lr", c.lr);
  v("beta1", c.beta1);
  v("beta2", c.beta2);
  v("weight_decay", c.weight_decay);
  v("epochs", c.epochs);
  v("batch_size", c.batch_size);
  v("tau_init", c.tau_init);
  v("seed", c.seed);
  v("n_runs", c.n_runs);
  v("E", c.E);
  v("T", c.T);
  v("F", c.F);
  v("G", c.G);
  v("k_t", c.k_t);
  v("D", c.D);
  v("D_img", c.D_img);
  v("manifest_path", c.manifest_path);
  v("data_seed", c.data_seed);
  v("n_train_classes", c.n_train_classes);
  v("n_test_classes", c.n_test_classes);
  v("samples_per_class", c.samples_per_class);
  v("noise_sigma", c.noise_sigma);
  v("latent_dim", c.latent_dim);
  v("record_wall_time", c.record_wall_time);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid config: " + what);
}

}  // namespace

void RunConfig::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  require(n_qubits >= 1 && n_qubits <= 16, "n_qubits must be in [1, 16]");
  require(n_layers >= 1, "n_layers must be positive");
  require(finite(lr) && lr > 0, "lr must be positive");
  require(finite(beta1) && beta1 >= 0 && beta1 < 1, "beta1 must be in [0, 1)");
  require(finite(beta2) && beta2 >= 0 && beta2 < 1, "beta2 must be in [0, 1)");
  require(finite(weight_decay) && weight_decay >= 0, "weight_decay must be non-negative");
  require(epochs >= 1, "epochs must be positive");
  require(batch_size >= 2, "batch_size must be at least 2");
  require(finite(tau_init), "tau_init must be finite");
  require(n_runs >= 1, "n_runs must be positive");
  require(E > 0 && T > 0 && F > 0 && G > 0 && k_t > 0 && D > 0 && D_img > 0,
          "encoder sizes must be positive");
  require(k_t <= T, "k_t must not exceed T");
  require(n_train_classes >= 1 && n_test_classes >= 1, "class counts must be positive");
  require(samples_per_class >= 1, "samples_per_class must be positive");
  require(finite(noise_sigma) && noise_sigma >= 0, "noise_sigma must be non-negative");
  require(latent_dim >= 1, "latent_dim must be positive");
}

QstConvConfig RunConfig::eeg_encoder() const {
  return QstConvConfig{E, T, F, G, k_t, D, n_qubits, n_layers};
}

ImageHeadConfig RunConfig::image_head() const {
  return ImageHeadConfig{D_img, D, n_qubits, n_layers};
}

AdamOptions RunConfig::adam() const {
  AdamOptions o;
  o.lr = lr;
  o.beta1 = beta1;
  o.beta2 = beta2;
  o.weight_decay = weight_decay;
  return o;
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  RunConfig copy = *this;
  visit_fields(copy, [&](const char* key, auto& field) { j[key] = field; });
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  std::set<std::string> known;
  visit_fields(c, [&](const char* key, auto& field) {
    known.insert(key);
    if (!j.contains(key)) return;
    using Field = std::decay_t<decltype(field)>;
    if constexpr (std::is_unsigned_v<Field> && !std::is_same_v<Field, bool>) {
      if (!j.at(key).is_number_unsigned()) {
        throw ConfigError(std::string("config key '") + key + "' must be a non-negative integer");
      }
    }
    try {
      j.at(key).get_to(field);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
  });
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

void RunConfig::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config " + path.string());
  out << to_json().dump(2) << "\n";
}

}  // namespace qmcl

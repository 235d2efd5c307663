#include "xalign/synth.hpp"

#include "xalign/errors.hpp"
#include "xalign/rng.hpp"

#include <cmath>
#include <cstdio>

namespace xalign {

namespace {

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  std::normal_distribution<double> dist(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  // Row-major fill so the stream order does not depend on storage order.
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  }
  return m;
}

std::string format_id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%05zu", prefix, i);
  return buf;
}

// Stream tags for derive_seed.
enum Stream : std::uint64_t { kLatent = 1, kPrivate = 2, kMixShared = 3, kMixPrivate = 4, kNoise = 5 };

std::uint64_t stream(std::uint64_t seed, Stream s, std::uint64_t a = 0, std::uint64_t b = 0, std::uint64_t c = 0) {
  return derive_seed(derive_seed(derive_seed(derive_seed(seed, s), a), b), c);
}

}  // namespace

std::string synth_file_name(Modality modality, int model, int layer) {
  return std::string(to_string(modality)) + "_m" + std::to_string(model) + "_L" + std::to_string(layer) + ".emb";
}

void validate(const SynthConfig& c) {
  if (c.n_items < 2) throw ArgumentError("synth: n_items must be at least 2");
  if (c.latent_dim < 1 || c.d_vision < 1 || c.d_language < 1) throw ArgumentError("synth: dimensions must be >= 1");
  if (c.noise_vision < 0.0 || c.noise_language < 0.0) throw ArgumentError("synth: noise must be nonnegative");
  if (c.shared_fraction.empty()) throw ArgumentError("synth: shared_fraction needs at least one layer");
  for (double s : c.shared_fraction) {
    if (!(s >= 0.0 && s <= 1.0)) throw ArgumentError("synth: shared_fraction must lie in [0, 1]");
  }
  if (c.n_models < 1) throw ArgumentError("synth: n_models must be >= 1");
  if (c.exemplars_per_item < 1) throw ArgumentError("synth: exemplars_per_item must be >= 1");
  if (!c.exemplar_noise.empty() && c.exemplar_noise.size() != static_cast<std::size_t>(c.exemplars_per_item)) {
    throw ArgumentError("synth: exemplar_noise needs one entry per exemplar");
  }
  if (!c.exemplar_groups.empty() && c.exemplar_groups.size() != static_cast<std::size_t>(c.exemplars_per_item)) {
    throw ArgumentError("synth: exemplar_groups needs one entry per exemplar");
  }
}

SynthData generate(const SynthConfig& c) {
  validate(c);
  const auto n = static_cast<Eigen::Index>(c.n_items);
  const Eigen::Index latent = c.latent_dim;
  const double mix_scale = 1.0 / std::sqrt(static_cast<double>(latent));
  const int exemplars = c.exemplars_per_item;

  const Eigen::MatrixXd z = gaussian(n, latent, stream(c.seed, kLatent));

  SynthData out;
  out.manifest.dataset_id = "synth_seed" + std::to_string(c.seed);

  auto ids_for = [&](Modality mod) {
    std::vector<std::string> ids;
    const bool multi = mod == c.exemplar_modality && exemplars > 1;
    for (std::size_t i = 0; i < c.n_items; ++i) {
      const std::string base = format_id(mod == Modality::vision ? "img_" : "cap_", i);
      if (!multi) {
        ids.push_back(base);
        continue;
      }
      for (int e = 0; e < exemplars; ++e) ids.push_back(base + "_" + std::to_string(e));
    }
    return ids;
  };

  for (Modality mod : {Modality::vision, Modality::language}) {
    const auto m_idx = static_cast<std::uint64_t>(mod);
    const Eigen::Index d = mod == Modality::vision ? c.d_vision : c.d_language;
    const double base_noise = mod == Modality::vision ? c.noise_vision : c.noise_language;
    const int copies = mod == c.exemplar_modality ? exemplars : 1;
    const auto ids = ids_for(mod);
    auto& models = mod == Modality::vision ? out.vision : out.language;

    for (int model = 0; model < c.n_models; ++model) {
      const auto mdl = static_cast<std::uint64_t>(model);
      const Eigen::MatrixXd priv = gaussian(n, latent, stream(c.seed, kPrivate, m_idx, mdl));
      std::vector<EmbeddingMatrix> layers;
      for (std::size_t l = 0; l < c.shared_fraction.size(); ++l) {
        const double s = c.shared_fraction[l];
        const Eigen::MatrixXd a = gaussian(latent, d, stream(c.seed, kMixShared, m_idx, mdl, l), mix_scale);
        const Eigen::MatrixXd b = gaussian(latent, d, stream(c.seed, kMixPrivate, m_idx, mdl, l), mix_scale);
        const Eigen::MatrixXd clean = s * (z * a) + (1.0 - s) * (priv * b);

        EmbeddingMatrix m;
        m.model_id = std::string("synth_") + std::string(to_string(mod)) + "_m" + std::to_string(model);
        m.layer_index = static_cast<int>(l);
        m.modality = mod;
        m.variant = "original";
        m.item_ids = ids;
        m.dtype = Dtype::f32;
        m.data.resize(n * copies, d);
        for (int e = 0; e < copies; ++e) {
          const double sigma = (copies > 1 && !c.exemplar_noise.empty()) ? c.exemplar_noise[static_cast<std::size_t>(e)]
                                                                          : base_noise;
          const Eigen::MatrixXd noise = gaussian(n, d, stream(c.seed, kNoise, m_idx * 1000003 + mdl, l, static_cast<std::uint64_t>(e)), 1.0);
          for (Eigen::Index i = 0; i < n; ++i) {
            m.data.row(i * copies + e) = clean.row(i) + sigma * noise.row(i);
          }
        }
        // Round to the storage precision so in-memory and on-disk data agree.
        m.data = m.data.cast<float>().cast<double>();
        layers.push_back(std::move(m));
      }
      models.push_back(std::move(layers));
    }
  }

  for (Modality mod : {Modality::vision, Modality::language}) {
    const int copies = mod == c.exemplar_modality ? exemplars : 1;
    const auto ids = ids_for(mod);
    for (std::size_t i = 0; i < c.n_items; ++i) {
      for (int e = 0; e < copies; ++e) {
        ManifestItem item;
        item.item_id = ids[i * static_cast<std::size_t>(copies) + static_cast<std::size_t>(e)];
        item.pair_key = format_id("p", i);
        item.modality = mod;
        if (copies > 1) {
          item.exemplar_index = e;
          if (!c.exemplar_groups.empty()) item.group = c.exemplar_groups[static_cast<std::size_t>(e)];
        }
        out.manifest.items.push_back(std::move(item));
      }
    }
  }
  return out;
}

void write_synth(const SynthData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t m = 0; m < data.vision.size(); ++m) {
    for (const auto& layer : data.vision[m]) {
      write_embeddings(layer, dir / synth_file_name(Modality::vision, static_cast<int>(m), layer.layer_index));
    }
  }
  for (std::size_t m = 0; m < data.language.size(); ++m) {
    for (const auto& layer : data.language[m]) {
      write_embeddings(layer, dir / synth_file_name(Modality::language, static_cast<int>(m), layer.layer_index));
    }
  }
  save_manifest(data.manifest, dir / "manifest.json");
}

}  // namespace xalign

#pragma once

#include "xalign/embedding.hpp"
#include "xalign/manifest.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace xalign {

/// Shared-latent world: every item has a latent code Z shared by both
/// modalities. A layer with shared fraction s emits
///   s * Z A + (1 - s) * Z_private B + noise
/// with seeded mixing matrices A, B (entries N(0, 1/latent_dim)) so the
/// clean signal has unit variance per feature.
struct SynthConfig {
  std::size_t n_items = 500;
  int latent_dim = 16;
  int d_vision = 64;
  int d_language = 64;
  double noise_vision = 0.5;
  double noise_language = 0.5;
  std::vector<double> shared_fraction{1.0};  // one entry per layer
  /// Independent model pairs over the same items (distinct mixing and private
  /// factors, same Z).
  int n_models = 1;
  /// Exemplars per item on `exemplar_modality`; each exemplar re-draws noise.
  int exemplars_per_item = 1;
  Modality exemplar_modality = Modality::language;
  /// Optional per-exemplar noise override and group labels (index = exemplar).
  std::vector<double> exemplar_noise;
  std::vector<std::string> exemplar_groups;
  std::uint64_t seed = 0;
};

struct SynthData {
  // [model][layer]
  std::vector<std::vector<EmbeddingMatrix>> vision;
  std::vector<std::vector<EmbeddingMatrix>> language;
  DatasetManifest manifest;
};

void validate(const SynthConfig& config);
SynthData generate(const SynthConfig& config);

/// Writes vision_m{M}_L{L}.emb / language_m{M}_L{L}.emb and manifest.json.
void write_synth(const SynthData& data, const std::filesystem::path& dir);

std::string synth_file_name(Modality modality, int model, int layer);

}  // namespace xalign

#pragma once

#include "xalign/embedding.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xalign {

struct ManifestItem {
  std::string item_id;
  std::string pair_key;
  std::optional<std::string> group;
  std::optional<int> exemplar_index;
  // Not part of the core schema; inferred from the matrices when absent.
  std::optional<Modality> modality;
};

/// Item identities, cross-modal pairings and group labels for one dataset.
struct DatasetManifest {
  std::string dataset_id;
  std::vector<ManifestItem> items;
};

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
/// Unique item ids, nonempty pair keys, nonnegative exemplar indices.
void validate(const DatasetManifest& manifest);

enum class PairingPolicy { one_to_one, expand_pairs };

std::string_view to_string(PairingPolicy p);
PairingPolicy parse_pairing_policy(std::string_view s);

/// Per pair_key, the ids and group labels of its vision and language items,
/// each sorted by exemplar_index.
struct PairEntry {
  std::string pair_key;
  std::vector<std::string> vision_items;
  std::vector<std::string> language_items;
  std::vector<std::optional<std::string>> vision_groups;
  std::vector<std::optional<std::string>> language_groups;
};

/// Resolves every manifest item against the matrices (inferring modality when
/// the manifest omits it) and groups items by pair_key in order of first
/// appearance. Throws FormatError naming missing items.
std::vector<PairEntry> index_pairs(std::span<const EmbeddingMatrix> matrices,
                                   const DatasetManifest& manifest);

/// Row-aligned copies of `matrices` plus the bookkeeping each row needs.
///
/// `one_to_one` keeps the first exemplar of each modality per pair_key;
/// `expand_pairs` emits every (vision, language) combination, vision-major.
/// Expanded outputs repeat item ids, so they are working copies and not
/// valid inputs to write_embeddings.
struct AlignedRows {
  std::vector<EmbeddingMatrix> matrices;
  std::vector<std::string> pair_keys;
  std::vector<std::optional<std::string>> groups;

  std::size_t size() const { return pair_keys.size(); }
};

AlignedRows align_rows(std::span<const EmbeddingMatrix> matrices,
                       const DatasetManifest& manifest, PairingPolicy policy);

/// Alignment without a manifest: item_ids must match as sets; every matrix is
/// reordered to the first one's order.
AlignedRows align_by_item_id(std::span<const EmbeddingMatrix> matrices);

/// Gathers `rows` of `m` into a new matrix (ids follow the rows).
EmbeddingMatrix select_rows(const EmbeddingMatrix& m, std::span<const Eigen::Index> rows);

}  // namespace xalign

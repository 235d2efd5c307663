#include "xalign/manifest.hpp"

#include "xalign/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace xalign {

namespace {

using json = nlohmann::json;

using RowIndex = std::unordered_map<std::string_view, Eigen::Index>;

RowIndex build_row_index(const EmbeddingMatrix& m) {
  RowIndex index;
  index.reserve(m.item_ids.size());
  for (std::size_t i = 0; i < m.item_ids.size(); ++i) {
    index.emplace(m.item_ids[i], static_cast<Eigen::Index>(i));
  }
  return index;
}

std::string join_ids(const std::vector<std::string>& ids, std::size_t limit = 20) {
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < limit; ++i) {
    if (i) out += ", ";
    out += ids[i];
  }
  if (ids.size() > limit) out += ", ... (" + std::to_string(ids.size()) + " total)";
  return out;
}

}  // namespace

std::string_view to_string(PairingPolicy p) {
  return p == PairingPolicy::one_to_one ? "one_to_one" : "expand_pairs";
}

PairingPolicy parse_pairing_policy(std::string_view s) {
  if (s == "one_to_one") return PairingPolicy::one_to_one;
  if (s == "expand_pairs") return PairingPolicy::expand_pairs;
  throw ArgumentError("unknown pairing policy \"" + std::string(s) + "\"");
}

void validate(const DatasetManifest& manifest) {
  std::unordered_set<std::string_view> seen;
  for (const auto& item : manifest.items) {
    if (item.item_id.empty()) throw FormatError("manifest item with empty item_id");
    if (item.pair_key.empty()) throw FormatError("manifest item " + item.item_id + " has no pair_key");
    if (!seen.insert(item.item_id).second) {
      throw FormatError("duplicate manifest item_id \"" + item.item_id + "\"");
    }
    if (item.exemplar_index && *item.exemplar_index < 0) {
      throw FormatError("negative exemplar_index for " + item.item_id);
    }
    if (item.group && item.group->empty()) {
      throw FormatError("empty group label for " + item.item_id);
    }
  }
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  DatasetManifest manifest;
  try {
    const json doc = json::parse(in);
    manifest.dataset_id = doc.value("dataset_id", std::string{});
    for (const auto& entry : doc.at("items")) {
      ManifestItem item;
      item.item_id = entry.at("item_id").get<std::string>();
      item.pair_key = entry.at("pair_key").get<std::string>();
      if (entry.contains("group") && !entry["group"].is_null()) {
        item.group = entry["group"].get<std::string>();
      }
      if (entry.contains("exemplar_index") && !entry["exemplar_index"].is_null()) {
        item.exemplar_index = entry["exemplar_index"].get<int>();
      }
      if (entry.contains("modality") && !entry["modality"].is_null()) {
        item.modality = parse_modality(entry["modality"].get<std::string>());
      }
      manifest.items.push_back(std::move(item));
    }
  } catch (const json::exception& e) {
    throw FormatError("manifest " + path.string() + ": " + e.what());
  }
  validate(manifest);
  return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  validate(manifest);
  json items = json::array();
  for (const auto& item : manifest.items) {
    json entry = {{"item_id", item.item_id}, {"pair_key", item.pair_key}};
    if (item.group) entry["group"] = *item.group;
    if (item.exemplar_index) entry["exemplar_index"] = *item.exemplar_index;
    if (item.modality) entry["modality"] = std::string(to_string(*item.modality));
    items.push_back(std::move(entry));
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << json{{"dataset_id", manifest.dataset_id}, {"items", items}}.dump(1) << '\n';
}

std::vector<PairEntry> index_pairs(std::span<const EmbeddingMatrix> matrices,
                                   const DatasetManifest& manifest) {
  validate(manifest);
  if (matrices.empty()) throw ArgumentError("no embedding matrices to align");

  std::vector<RowIndex> indices;
  indices.reserve(matrices.size());
  bool have[2] = {false, false};
  for (const auto& m : matrices) {
    indices.push_back(build_row_index(m));
    have[static_cast<int>(m.modality)] = true;
  }

  auto present_in = [&](const std::string& id, Modality mod) {
    for (std::size_t k = 0; k < matrices.size(); ++k) {
      if (matrices[k].modality == mod && indices[k].contains(id)) return true;
    }
    return false;
  };

  struct Resolved {
    const ManifestItem* item;
    Modality modality;
    std::size_t order;
  };
  std::vector<Resolved> resolved;
  std::vector<std::string> missing;
  std::vector<std::string> ambiguous;

  for (std::size_t pos = 0; pos < manifest.items.size(); ++pos) {
    const auto& item = manifest.items[pos];
    Modality mod;
    if (item.modality) {
      if (!have[static_cast<int>(*item.modality)]) continue;
      mod = *item.modality;
    } else {
      const bool in_v = have[0] && present_in(item.item_id, Modality::vision);
      const bool in_l = have[1] && present_in(item.item_id, Modality::language);
      if (in_v && in_l) {
        ambiguous.push_back(item.item_id);
        continue;
      }
      if (!in_v && !in_l) {
        missing.push_back(item.item_id);
        continue;
      }
      mod = in_v ? Modality::vision : Modality::language;
    }
    for (std::size_t k = 0; k < matrices.size(); ++k) {
      if (matrices[k].modality == mod && !indices[k].contains(item.item_id)) {
        missing.push_back(item.item_id);
        break;
      }
    }
    resolved.push_back({&item, mod, pos});
  }
  if (!missing.empty()) {
    throw FormatError("manifest references items absent from the embedding files: " +
                      join_ids(missing));
  }
  if (!ambiguous.empty()) {
    throw FormatError("items present in both vision and language files need an explicit "
                      "modality in the manifest: " + join_ids(ambiguous));
  }

  std::vector<PairEntry> pairs;
  std::unordered_map<std::string_view, std::size_t> by_key;
  std::vector<std::vector<const Resolved*>> members;
  for (const auto& r : resolved) {
    auto [it, inserted] = by_key.emplace(r.item->pair_key, pairs.size());
    if (inserted) {
      pairs.push_back(PairEntry{r.item->pair_key, {}, {}, {}, {}});
      members.emplace_back();
    }
    members[it->second].push_back(&r);
  }

  for (std::size_t p = 0; p < pairs.size(); ++p) {
    auto& group = members[p];
    std::stable_sort(group.begin(), group.end(), [](const Resolved* a, const Resolved* b) {
      const int ea = a->item->exemplar_index.value_or(0);
      const int eb = b->item->exemplar_index.value_or(0);
      return ea < eb;
    });
    for (const auto* r : group) {
      if (r->modality == Modality::vision) {
        pairs[p].vision_items.push_back(r->item->item_id);
        pairs[p].vision_groups.push_back(r->item->group);
      } else {
        pairs[p].language_items.push_back(r->item->item_id);
        pairs[p].language_groups.push_back(r->item->group);
      }
    }
  }
  return pairs;
}

EmbeddingMatrix select_rows(const EmbeddingMatrix& m, std::span<const Eigen::Index> rows) {
  EmbeddingMatrix out;
  out.model_id = m.model_id;
  out.layer_index = m.layer_index;
  out.modality = m.modality;
  out.variant = m.variant;
  out.dtype = m.dtype;
  out.data.resize(static_cast<Eigen::Index>(rows.size()), m.cols());
  out.item_ids.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.data.row(static_cast<Eigen::Index>(i)) = m.data.row(rows[i]);
    out.item_ids.push_back(m.item_ids[static_cast<std::size_t>(rows[i])]);
  }
  return out;
}

AlignedRows align_rows(std::span<const EmbeddingMatrix> matrices,
                       const DatasetManifest& manifest, PairingPolicy policy) {
  const auto pairs = index_pairs(matrices, manifest);

  bool have[2] = {false, false};
  for (const auto& m : matrices) have[static_cast<int>(m.modality)] = true;
  const bool cross_modal = have[0] && have[1];

  // Each output row is a (vision item, language item) pair; in the
  // single-modality case the unused side stays empty.
  struct Row {
    std::string vision;
    std::string language;
    std::string pair_key;
    std::optional<std::string> group;
  };
  std::vector<Row> rows;

  auto pick_group = [](const std::optional<std::string>& a, const std::optional<std::string>& b,
                       const std::string& key) -> std::optional<std::string> {
    if (a && b && *a != *b) {
      throw FormatError("conflicting group labels \"" + *a + "\" and \"" + *b +
                        "\" within pair_key " + key);
    }
    return a ? a : b;
  };

  for (const auto& p : pairs) {
    if (cross_modal) {
      if (p.vision_items.empty() || p.language_items.empty()) continue;
      const std::size_t nv = policy == PairingPolicy::one_to_one ? 1 : p.vision_items.size();
      const std::size_t nl = policy == PairingPolicy::one_to_one ? 1 : p.language_items.size();
      for (std::size_t v = 0; v < nv; ++v) {
        for (std::size_t l = 0; l < nl; ++l) {
          rows.push_back({p.vision_items[v], p.language_items[l], p.pair_key,
                          pick_group(p.vision_groups[v], p.language_groups[l], p.pair_key)});
        }
      }
    } else {
      const bool vision = have[0];
      const auto& items = vision ? p.vision_items : p.language_items;
      const auto& groups = vision ? p.vision_groups : p.language_groups;
      const std::size_t n = policy == PairingPolicy::one_to_one ? std::min<std::size_t>(1, items.size())
                                                                : items.size();
      for (std::size_t i = 0; i < n; ++i) {
        rows.push_back({vision ? items[i] : std::string{}, vision ? std::string{} : items[i],
                        p.pair_key, groups[i]});
      }
    }
  }
  if (rows.empty()) {
    throw FormatError("empty intersection: no pair_key links items across the given matrices");
  }

  AlignedRows out;
  out.pair_keys.reserve(rows.size());
  out.groups.reserve(rows.size());
  for (const auto& r : rows) {
    out.pair_keys.push_back(r.pair_key);
    out.groups.push_back(r.group);
  }
  for (const auto& m : matrices) {
    const auto index = build_row_index(m);
    std::vector<Eigen::Index> picks;
    picks.reserve(rows.size());
    for (const auto& r : rows) {
      const auto& id = m.modality == Modality::vision ? r.vision : r.language;
      picks.push_back(index.at(id));
    }
    out.matrices.push_back(select_rows(m, picks));
  }
  return out;
}

AlignedRows align_by_item_id(std::span<const EmbeddingMatrix> matrices) {
  if (matrices.empty()) throw ArgumentError("no embedding matrices to align");
  const auto& ref = matrices.front();
  AlignedRows out;
  out.pair_keys = ref.item_ids;
  out.groups.assign(ref.item_ids.size(), std::nullopt);
  for (const auto& m : matrices) {
    if (m.item_ids == ref.item_ids) {
      out.matrices.push_back(m);
      continue;
    }
    const auto index = build_row_index(m);
    std::vector<Eigen::Index> picks;
    std::vector<std::string> missing;
    for (const auto& id : ref.item_ids) {
      auto it = index.find(id);
      if (it == index.end()) {
        missing.push_back(id);
      } else {
        picks.push_back(it->second);
      }
    }
    if (!missing.empty() || m.item_ids.size() != ref.item_ids.size()) {
      throw FormatError("item_ids of " + m.model_id + " do not match " + ref.model_id +
                        (missing.empty() ? std::string{} : " (missing: " + join_ids(missing) + ")") +
                        "; supply a manifest to pair rows");
    }
    out.matrices.push_back(select_rows(m, picks));
  }
  return out;
}

}  // namespace xalign

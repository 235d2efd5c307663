#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace xalign {

enum class Modality { vision, language };

std::string_view to_string(Modality m);
Modality parse_modality(std::string_view s);

/// On-disk element type of an EMB1 payload.
enum class Dtype : std::uint32_t { f32 = 0, f64 = 1 };

/// N items x d features from one model, layer and input variant.
///
/// Values are held in double precision; `dtype` records how the payload is
/// stored on disk. Row i corresponds to `item_ids[i]`.
struct EmbeddingMatrix {
  std::string model_id;
  int layer_index = 0;
  Modality modality = Modality::vision;
  std::string variant = "original";
  std::vector<std::string> item_ids;
  Eigen::MatrixXd data;
  Dtype dtype = Dtype::f32;

  Eigen::Index rows() const { return data.rows(); }
  Eigen::Index cols() const { return data.cols(); }

  bool operator==(const EmbeddingMatrix&) const = default;
};

/// Throws FormatError / NumericError if `m` violates the matrix invariants
/// (N >= 2, d >= 1, finite values, unique ids matching the row count).
void validate(const EmbeddingMatrix& m);

void write_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path);
EmbeddingMatrix read_embeddings(const std::filesystem::path& path);

/// Header-only view of an EMB1 file, used by `xalign inspect`.
struct EmbeddingHeader {
  std::uint32_t version = 0;
  Dtype dtype = Dtype::f32;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::string metadata_json;
  std::uint64_t file_size = 0;
};

EmbeddingHeader read_embedding_header(const std::filesystem::path& path);

inline constexpr char kEmbMagic[4] = {'E', 'M', 'B', '1'};
inline constexpr std::uint32_t kEmbVersion = 1;
inline constexpr std::size_t kEmbFixedHeaderBytes = 32;

}  // namespace xalign

#include "xalign/embedding.hpp"

#include "xalign/errors.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <unordered_set>

namespace xalign {

namespace {

using json = nlohmann::json;

template <typename U>
void put_le(std::vector<char>& out, U value) {
  static_assert(std::is_unsigned_v<U>);
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

template <typename U>
U get_le(const char* p) {
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    value |= static_cast<U>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return value;
}

std::vector<char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t dtype_size(Dtype d) { return d == Dtype::f32 ? 4 : 8; }

struct ParsedHeader {
  EmbeddingHeader header;
  std::size_t payload_offset = 0;
};

ParsedHeader parse_header(const std::vector<char>& bytes, const std::string& name) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kEmbMagic, 4) != 0) {
    throw FormatError(name + ": bad magic (expected \"EMB1\")");
  }
  if (bytes.size() < kEmbFixedHeaderBytes) {
    throw FormatError(name + ": truncated header");
  }
  const char* p = bytes.data();
  ParsedHeader out;
  auto& h = out.header;
  h.file_size = bytes.size();
  h.version = get_le<std::uint32_t>(p + 4);
  if (h.version != kEmbVersion) {
    throw FormatError(name + ": unsupported version " + std::to_string(h.version));
  }
  const auto dtype_code = get_le<std::uint32_t>(p + 8);
  if (dtype_code > 1) {
    throw FormatError(name + ": unknown dtype code " + std::to_string(dtype_code));
  }
  h.dtype = static_cast<Dtype>(dtype_code);
  h.rows = get_le<std::uint64_t>(p + 12);
  h.cols = get_le<std::uint64_t>(p + 20);
  const auto meta_len = get_le<std::uint32_t>(p + 28);
  if (bytes.size() - kEmbFixedHeaderBytes < meta_len) {
    throw FormatError(name + ": truncated metadata");
  }
  h.metadata_json.assign(p + kEmbFixedHeaderBytes, meta_len);
  out.payload_offset = kEmbFixedHeaderBytes + meta_len;
  return out;
}

}  // namespace

std::string_view to_string(Modality m) {
  return m == Modality::vision ? "vision" : "language";
}

Modality parse_modality(std::string_view s) {
  if (s == "vision") return Modality::vision;
  if (s == "language") return Modality::language;
  throw FormatError("unknown modality \"" + std::string(s) + "\"");
}

void validate(const EmbeddingMatrix& m) {
  if (m.rows() < 2) throw FormatError("embedding matrix needs at least 2 rows");
  if (m.cols() < 1) throw FormatError("embedding matrix needs at least 1 column");
  if (static_cast<Eigen::Index>(m.item_ids.size()) != m.rows()) {
    throw FormatError("item_ids length " + std::to_string(m.item_ids.size()) +
                      " does not match row count " + std::to_string(m.rows()));
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& id : m.item_ids) {
    if (!seen.insert(id).second) throw FormatError("duplicate item_id \"" + id + "\"");
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (!std::isfinite(m.data(i, j))) {
        throw NumericError("non-finite value at row " + std::to_string(i) + ", column " +
                           std::to_string(j));
      }
    }
  }
}

void write_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path) {
  validate(m);

  json meta = {{"model_id", m.model_id},
               {"layer_index", m.layer_index},
               {"modality", std::string(to_string(m.modality))},
               {"variant", m.variant},
               {"item_ids", m.item_ids}};
  const std::string meta_text = meta.dump();

  const auto rows = static_cast<std::uint64_t>(m.rows());
  const auto cols = static_cast<std::uint64_t>(m.cols());
  std::vector<char> buf;
  buf.reserve(kEmbFixedHeaderBytes + meta_text.size() + rows * cols * dtype_size(m.dtype));
  buf.insert(buf.end(), kEmbMagic, kEmbMagic + 4);
  put_le<std::uint32_t>(buf, kEmbVersion);
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(m.dtype));
  put_le<std::uint64_t>(buf, rows);
  put_le<std::uint64_t>(buf, cols);
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(meta_text.size()));
  buf.insert(buf.end(), meta_text.begin(), meta_text.end());

  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (m.dtype == Dtype::f32) {
        put_le<std::uint32_t>(buf, std::bit_cast<std::uint32_t>(static_cast<float>(m.data(i, j))));
      } else {
        put_le<std::uint64_t>(buf, std::bit_cast<std::uint64_t>(m.data(i, j)));
      }
    }
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

EmbeddingHeader read_embedding_header(const std::filesystem::path& path) {
  return parse_header(slurp(path), path.string()).header;
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  const std::string name = path.string();
  const auto bytes = slurp(path);
  const auto [h, offset] = parse_header(bytes, name);

  json meta;
  try {
    meta = json::parse(h.metadata_json);
  } catch (const json::exception& e) {
    throw FormatError(name + ": metadata is not valid JSON: " + e.what());
  }

  EmbeddingMatrix m;
  m.dtype = h.dtype;
  try {
    m.model_id = meta.at("model_id").get<std::string>();
    m.layer_index = meta.at("layer_index").get<int>();
    m.modality = parse_modality(meta.at("modality").get<std::string>());
    m.variant = meta.at("variant").get<std::string>();
    m.item_ids = meta.at("item_ids").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw FormatError(name + ": bad metadata: " + e.what());
  }
  if (m.item_ids.size() != h.rows) {
    throw FormatError(name + ": item_ids has " + std::to_string(m.item_ids.size()) +
                      " entries but header declares " + std::to_string(h.rows) + " rows");
  }

  const std::size_t elem = dtype_size(h.dtype);
  const std::uint64_t expected = h.rows * h.cols * elem;
  const std::uint64_t available = bytes.size() - offset;
  if (available < expected) {
    throw FormatError(name + ": truncated payload (expected " + std::to_string(expected) +
                      " bytes, found " + std::to_string(available) + ")");
  }
  if (available > expected) {
    throw FormatError(name + ": " + std::to_string(available - expected) +
                      " unexpected trailing bytes after payload");
  }

  m.data.resize(static_cast<Eigen::Index>(h.rows), static_cast<Eigen::Index>(h.cols));
  const char* p = bytes.data() + offset;
  for (Eigen::Index i = 0; i < m.data.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.data.cols(); ++j, p += elem) {
      m.data(i, j) = h.dtype == Dtype::f32
                         ? static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(p)))
                         : std::bit_cast<double>(get_le<std::uint64_t>(p));
    }
  }
  try {
    validate(m);
  } catch (const Error& e) {
    throw FormatError(name + ": " + e.what());
  }
  return m;
}

}  // namespace xalign

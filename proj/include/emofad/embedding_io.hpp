#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace emofad {

/// Row-major so that each clip embedding is a contiguous run of `dim` doubles.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// n clip embeddings of one encoder. Immutable after construction.
///
/// Construction validates n >= 1, all entries finite, and (when given)
/// n unique clip ids.
class EmbeddingSet {
 public:
  EmbeddingSet(std::string encoder_id, RowMatrix vectors,
               std::vector<std::string> clip_ids = {});

  const std::string& encoder_id() const noexcept { return encoder_id_; }
  Eigen::Index size() const noexcept { return vectors_.rows(); }
  Eigen::Index dim() const noexcept { return vectors_.cols(); }
  const RowMatrix& vectors() const noexcept { return vectors_; }
  const std::vector<std::string>& clip_ids() const noexcept { return clip_ids_; }
  bool has_clip_ids() const noexcept { return !clip_ids_.empty(); }

  /// Row index of `clip_id`, if this set carries ids and contains it.
  std::optional<Eigen::Index> row_of(const std::string& clip_id) const;

 private:
  std::string encoder_id_;
  RowMatrix vectors_;
  std::vector<std::string> clip_ids_;
  std::unordered_map<std::string, Eigen::Index> index_;
};

struct ClipRecord {
  std::string clip_id;
  std::optional<double> valence;
  std::optional<double> arousal;
  std::optional<std::string> label;

  bool has_va() const noexcept { return valence.has_value() && arousal.has_value(); }
};

struct DatasetManifest {
  std::vector<ClipRecord> records;
  std::map<std::string, std::filesystem::path> embedding_sources;
};

enum class NpyDtype { kFloat32, kFloat64 };

/// Decoded `.npy` array, widened to double. `shape` is as stored in the header.
struct NpyArray {
  std::vector<std::size_t> shape;
  std::vector<double> data;
  NpyDtype stored_dtype = NpyDtype::kFloat64;
};

/// Reads a little-endian `<f4`/`<f8`, C-order `.npy` file (format 1.0 or 2.0).
/// Any dimensionality is returned; callers enforce shape.
NpyArray read_npy(const std::filesystem::path& path);
NpyArray parse_npy(std::string_view bytes, const std::string& source_name);

/// Serializes a 2-D array as format 1.0 `.npy`.
std::string encode_npy(const RowMatrix& matrix, NpyDtype dtype = NpyDtype::kFloat64);
/// Serializes an arbitrary-rank array (row-major data) as format 1.0 `.npy`.
std::string encode_npy(const std::vector<std::size_t>& shape, const std::vector<double>& data,
                       NpyDtype dtype = NpyDtype::kFloat64);

/// Loads `.npy` or `.csv` embeddings. A sidecar `<stem>.ids` next to the file,
/// when present, supplies the clip ids.
EmbeddingSet load_embeddings(const std::filesystem::path& path, const std::string& encoder_id);

/// Writes `.npy` (float64) plus the `.ids` sidecar when the set has clip ids.
void write_embeddings(const std::filesystem::path& path, const EmbeddingSet& set);

DatasetManifest load_manifest(const std::filesystem::path& path);
DatasetManifest parse_manifest(std::string_view text);

EmbeddingSet select_rows(const EmbeddingSet& set, const std::vector<std::string>& clip_ids);

/// Gives `set` manifest-aligned clip ids: kept as-is when the set already has
/// ids, otherwise assigned in manifest order (row counts must then match).
EmbeddingSet align_to_manifest(const EmbeddingSet& set, const DatasetManifest& manifest);

std::filesystem::path sidecar_path(const std::filesystem::path& embeddings_path);
std::vector<std::string> read_id_list(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary file in the same directory followed by rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace emofad

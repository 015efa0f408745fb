#include "emofad/embedding_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "emofad/error.hpp"

namespace emofad {

static_assert(std::endian::native == std::endian::little,
              ".npy handling assumes a little-endian host");

namespace {

constexpr std::string_view kNpyMagic = "\x93NUMPY";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  for (auto line : split(text, '\n')) {
    line = trim(line);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

// Value of `key` inside a numpy header dict literal, e.g. 'descr': '<f8'.
std::string_view header_field(std::string_view header, std::string_view key,
                              const std::string& source) {
  std::string quoted = "'" + std::string(key) + "'";
  auto pos = header.find(quoted);
  if (pos == std::string_view::npos) {
    throw Error(ErrorCode::kMalformedHeader, source + ": header lacks " + quoted);
  }
  pos = header.find(':', pos + quoted.size());
  if (pos == std::string_view::npos) {
    throw Error(ErrorCode::kMalformedHeader, source + ": malformed header near " + quoted);
  }
  auto rest = trim(header.substr(pos + 1));
  std::size_t end = 0;
  if (!rest.empty() && rest.front() == '(') {
    end = rest.find(')');
    if (end == std::string_view::npos) {
      throw Error(ErrorCode::kMalformedHeader, source + ": unterminated shape tuple");
    }
    return rest.substr(0, end + 1);
  }
  if (!rest.empty() && rest.front() == '\'') {
    end = rest.find('\'', 1);
    if (end == std::string_view::npos) {
      throw Error(ErrorCode::kMalformedHeader, source + ": unterminated string in header");
    }
    return rest.substr(1, end - 1);
  }
  end = rest.find_first_of(",}");
  return trim(rest.substr(0, end));
}

std::vector<std::size_t> parse_shape(std::string_view tuple, const std::string& source) {
  tuple = trim(tuple);
  if (tuple.size() < 2 || tuple.front() != '(' || tuple.back() != ')') {
    throw Error(ErrorCode::kMalformedHeader, source + ": bad shape tuple");
  }
  std::vector<std::size_t> shape;
  for (auto part : split(tuple.substr(1, tuple.size() - 2), ',')) {
    part = trim(part);
    if (part.empty()) continue;
    std::size_t dim = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), dim);
    if (ec != std::errc{} || ptr != part.data() + part.size()) {
      throw Error(ErrorCode::kMalformedHeader, source + ": bad shape entry '" + std::string(part) + "'");
    }
    shape.push_back(dim);
  }
  return shape;
}

std::string describe_shape(const std::vector<std::size_t>& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + ")";
}

std::string shape_tuple(const std::vector<std::size_t>& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    out += std::to_string(shape[i]);
    if (shape.size() == 1 || i + 1 < shape.size()) out += ",";
    if (i + 1 < shape.size()) out += " ";
  }
  return out + ")";
}

void check_finite_rows(const RowMatrix& m, const std::string& source) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (!std::isfinite(m(r, c))) {
        throw Error(ErrorCode::kNonFinite,
                    source + ": non-finite value at row " + std::to_string(r) + ", column " +
                        std::to_string(c));
      }
    }
  }
}

RowMatrix to_matrix(const NpyArray& array, const std::string& source) {
  if (array.shape.size() != 2) {
    throw Error(ErrorCode::kShape, "expected 2-D (got " + std::to_string(array.shape.size()) +
                                       "-D array " + describe_shape(array.shape) + " in " + source + ")");
  }
  RowMatrix m(static_cast<Eigen::Index>(array.shape[0]), static_cast<Eigen::Index>(array.shape[1]));
  std::copy(array.data.begin(), array.data.end(), m.data());
  return m;
}

RowMatrix parse_csv_matrix(std::string_view text, const std::string& source) {
  auto rows = lines_of(text);
  if (rows.empty()) throw Error(ErrorCode::kShape, "expected 2-D (empty CSV " + source + ")");
  std::vector<double> values;
  std::size_t dim = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto cells = split(rows[r], ',');
    if (r == 0) dim = cells.size();
    if (cells.size() != dim) {
      throw Error(ErrorCode::kShape, source + ": row " + std::to_string(r) + " has " +
                                         std::to_string(cells.size()) + " values, expected " +
                                         std::to_string(dim));
    }
    for (auto cell : cells) {
      auto v = parse_double(cell);
      if (!v) {
        throw Error(ErrorCode::kParse, source + ": row " + std::to_string(r) + ": cannot parse '" +
                                           std::string(trim(cell)) + "'");
      }
      values.push_back(*v);
    }
  }
  RowMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  std::copy(values.begin(), values.end(), m.data());
  return m;
}

}  // namespace

EmbeddingSet::EmbeddingSet(std::string encoder_id, RowMatrix vectors,
                           std::vector<std::string> clip_ids)
    : encoder_id_(std::move(encoder_id)), vectors_(std::move(vectors)), clip_ids_(std::move(clip_ids)) {
  if (vectors_.rows() < 1 || vectors_.cols() < 1) {
    throw Error(ErrorCode::kShape, "embedding set '" + encoder_id_ + "' must have n >= 1 rows and dim >= 1");
  }
  check_finite_rows(vectors_, "embedding set '" + encoder_id_ + "'");
  if (!clip_ids_.empty()) {
    if (static_cast<Eigen::Index>(clip_ids_.size()) != vectors_.rows()) {
      throw Error(ErrorCode::kRowCountMismatch,
                  "embedding set '" + encoder_id_ + "' has " + std::to_string(vectors_.rows()) +
                      " rows but " + std::to_string(clip_ids_.size()) + " clip ids");
    }
    index_.reserve(clip_ids_.size());
    for (std::size_t i = 0; i < clip_ids_.size(); ++i) {
      if (!index_.emplace(clip_ids_[i], static_cast<Eigen::Index>(i)).second) {
        throw Error(ErrorCode::kDuplicateClipId, "duplicate clip id '" + clip_ids_[i] + "' in embedding set '" +
                                                     encoder_id_ + "'");
      }
    }
  }
}

std::optional<Eigen::Index> EmbeddingSet::row_of(const std::string& clip_id) const {
  auto it = index_.find(clip_id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::kIo, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot rename " + tmp.string() + ": " + ec.message());
}

NpyArray parse_npy(std::string_view bytes, const std::string& source) {
  if (bytes.size() < 10 || bytes.substr(0, kNpyMagic.size()) != kNpyMagic) {
    throw Error(ErrorCode::kMalformedHeader, source + ": bad .npy magic");
  }
  const auto major = static_cast<unsigned char>(bytes[6]);
  const auto minor = static_cast<unsigned char>(bytes[7]);
  std::size_t header_len = 0;
  std::size_t offset = 0;
  if (major == 1 && minor == 0) {
    std::uint16_t len = 0;
    std::memcpy(&len, bytes.data() + 8, sizeof(len));
    header_len = len;
    offset = 10;
  } else if (major == 2 && minor == 0) {
    if (bytes.size() < 12) throw Error(ErrorCode::kMalformedHeader, source + ": truncated header");
    std::uint32_t len = 0;
    std::memcpy(&len, bytes.data() + 8, sizeof(len));
    header_len = len;
    offset = 12;
  } else {
    throw Error(ErrorCode::kMalformedHeader, source + ": unsupported .npy version " +
                                                 std::to_string(major) + "." + std::to_string(minor));
  }
  if (bytes.size() < offset + header_len) {
    throw Error(ErrorCode::kMalformedHeader, source + ": truncated header");
  }
  auto header = bytes.substr(offset, header_len);
  auto descr = header_field(header, "descr", source);
  auto fortran = header_field(header, "fortran_order", source);
  auto shape = parse_shape(header_field(header, "shape", source), source);

  NpyArray array;
  std::size_t item = 0;
  if (descr == "<f8") {
    array.stored_dtype = NpyDtype::kFloat64;
    item = 8;
  } else if (descr == "<f4") {
    array.stored_dtype = NpyDtype::kFloat32;
    item = 4;
  } else {
    throw Error(ErrorCode::kUnsupportedDtype, source + ": dtype '" + std::string(descr) +
                                                  "' is not supported (need <f4 or <f8)");
  }
  if (fortran == "True") {
    throw Error(ErrorCode::kShape, source + ": Fortran-order arrays are not supported");
  }
  if (fortran != "False") {
    throw Error(ErrorCode::kMalformedHeader, source + ": bad fortran_order value");
  }

  std::size_t count = 1;
  for (auto d : shape) count *= d;
  auto payload = bytes.substr(offset + header_len);
  if (payload.size() != count * item) {
    throw Error(ErrorCode::kMalformedHeader, source + ": payload has " + std::to_string(payload.size()) +
                                                 " bytes, header implies " + std::to_string(count * item));
  }
  array.shape = std::move(shape);
  array.data.resize(count);
  if (item == 8) {
    std::memcpy(array.data.data(), payload.data(), payload.size());
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      float f = 0.0f;
      std::memcpy(&f, payload.data() + i * 4, 4);
      array.data[i] = static_cast<double>(f);
    }
  }
  return array;
}

NpyArray read_npy(const std::filesystem::path& path) {
  return parse_npy(read_file(path), path.string());
}

std::string encode_npy(const std::vector<std::size_t>& shape, const std::vector<double>& data,
                       NpyDtype dtype) {
  std::string dict = std::string("{'descr': '") + (dtype == NpyDtype::kFloat64 ? "<f8" : "<f4") +
                     "', 'fortran_order': False, 'shape': " + shape_tuple(shape) + ", }";
  // Pad so magic + len + header + '\n' is a multiple of 64.
  const std::size_t unpadded = kNpyMagic.size() + 2 + 2 + dict.size() + 1;
  dict.append((64 - unpadded % 64) % 64, ' ');
  dict.push_back('\n');

  std::string out;
  out.append(kNpyMagic);
  out.push_back('\x01');
  out.push_back('\x00');
  const auto len = static_cast<std::uint16_t>(dict.size());
  out.append(reinterpret_cast<const char*>(&len), sizeof(len));
  out.append(dict);
  if (dtype == NpyDtype::kFloat64) {
    out.append(reinterpret_cast<const char*>(data.data()), data.size() * sizeof(double));
  } else {
    for (double v : data) {
      const auto f = static_cast<float>(v);
      out.append(reinterpret_cast<const char*>(&f), sizeof(f));
    }
  }
  return out;
}

std::string encode_npy(const RowMatrix& matrix, NpyDtype dtype) {
  std::vector<double> data(matrix.data(), matrix.data() + matrix.size());
  return encode_npy({static_cast<std::size_t>(matrix.rows()), static_cast<std::size_t>(matrix.cols())},
                    data, dtype);
}

std::filesystem::path sidecar_path(const std::filesystem::path& embeddings_path) {
  auto p = embeddings_path;
  p.replace_extension(".ids");
  return p;
}

std::vector<std::string> read_id_list(const std::filesystem::path& path) {
  std::vector<std::string> ids;
  const std::string text = read_file(path);
  for (auto line : lines_of(text)) ids.emplace_back(line);
  return ids;
}

EmbeddingSet load_embeddings(const std::filesystem::path& path, const std::string& encoder_id) {
  const auto source = path.string();
  RowMatrix m;
  if (path.extension() == ".csv") {
    m = parse_csv_matrix(read_file(path), source);
  } else {
    m = to_matrix(read_npy(path), source);
  }
  if (m.rows() < 1) throw Error(ErrorCode::kShape, source + ": no rows");
  check_finite_rows(m, source);
  std::vector<std::string> ids;
  auto ids_path = sidecar_path(path);
  if (std::filesystem::exists(ids_path)) ids = read_id_list(ids_path);
  return EmbeddingSet(encoder_id, std::move(m), std::move(ids));
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingSet& set) {
  write_file_atomic(path, encode_npy(set.vectors()));
  if (set.has_clip_ids()) {
    std::string text;
    for (const auto& id : set.clip_ids()) text += id + "\n";
    write_file_atomic(sidecar_path(path), text);
  }
}

DatasetManifest parse_manifest(std::string_view text) {
  auto rows = lines_of(text);
  if (rows.empty()) throw Error(ErrorCode::kMissingColumn, "manifest is empty (no header row)");
  if (rows[0].substr(0, 3) == "\xEF\xBB\xBF") rows[0].remove_prefix(3);

  auto header = split(rows[0], ',');
  auto column = [&](std::string_view name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == name) return i;
    }
    throw Error(ErrorCode::kMissingColumn, "manifest header lacks column '" + std::string(name) + "'");
  };
  const auto c_id = column("clip_id");
  const auto c_val = column("valence");
  const auto c_aro = column("arousal");
  const auto c_lab = column("label");

  DatasetManifest manifest;
  std::unordered_set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    auto cells = split(rows[r], ',');
    cells.resize(std::max(cells.size(), header.size()));
    const std::string line_no = "manifest line " + std::to_string(r + 1);

    ClipRecord rec;
    rec.clip_id = std::string(trim(cells[c_id]));
    if (rec.clip_id.empty()) throw Error(ErrorCode::kParse, line_no + ": empty clip_id");
    if (!seen.insert(rec.clip_id).second) {
      throw Error(ErrorCode::kDuplicateClipId, "duplicate clip id '" + rec.clip_id + "' in manifest");
    }
    auto va_cell = [&](std::size_t col, const char* name) -> std::optional<double> {
      auto cell = trim(cells[col]);
      if (cell.empty()) return std::nullopt;
      auto v = parse_double(cell);
      if (!v) throw Error(ErrorCode::kParse, line_no + ": cannot parse " + name + " '" + std::string(cell) + "'");
      if (!std::isfinite(*v)) throw Error(ErrorCode::kNonFinite, line_no + ": non-finite " + name);
      if (*v < -1.0 || *v > 1.0) {
        throw Error(ErrorCode::kValueOutOfRange,
                    line_no + ": " + name + " " + std::string(cell) + " outside [-1, 1] (clip '" + rec.clip_id + "')");
      }
      return v;
    };
    rec.valence = va_cell(c_val, "valence");
    rec.arousal = va_cell(c_aro, "arousal");
    if (auto lab = trim(cells[c_lab]); !lab.empty()) rec.label = std::string(lab);
    if (rec.valence.has_value() != rec.arousal.has_value()) {
      throw Error(ErrorCode::kParse, line_no + ": valence and arousal must be given together");
    }
    if (!rec.has_va() && !rec.label) {
      throw Error(ErrorCode::kMissingLabel, line_no + ": clip '" + rec.clip_id + "' has neither VA nor a label");
    }
    manifest.records.push_back(std::move(rec));
  }
  return manifest;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file(path));
}

EmbeddingSet select_rows(const EmbeddingSet& set, const std::vector<std::string>& clip_ids) {
  RowMatrix out(static_cast<Eigen::Index>(clip_ids.size()), set.dim());
  for (std::size_t i = 0; i < clip_ids.size(); ++i) {
    auto row = set.row_of(clip_ids[i]);
    if (!row) {
      throw Error(ErrorCode::kUnknownClipId,
                  "clip '" + clip_ids[i] + "' not found in embedding set '" + set.encoder_id() + "'");
    }
    out.row(static_cast<Eigen::Index>(i)) = set.vectors().row(*row);
  }
  return EmbeddingSet(set.encoder_id(), std::move(out), clip_ids);
}

EmbeddingSet align_to_manifest(const EmbeddingSet& set, const DatasetManifest& manifest) {
  if (set.has_clip_ids()) return set;
  if (static_cast<std::size_t>(set.size()) != manifest.records.size()) {
    throw Error(ErrorCode::kRowCountMismatch,
                "embedding set '" + set.encoder_id() + "' has " + std::to_string(set.size()) +
                    " rows, manifest has " + std::to_string(manifest.records.size()) +
                    " records and no .ids sidecar was found");
  }
  std::vector<std::string> ids;
  ids.reserve(manifest.records.size());
  for (const auto& rec : manifest.records) ids.push_back(rec.clip_id);
  return EmbeddingSet(set.encoder_id(), set.vectors(), std::move(ids));
}

}  // namespace emofad

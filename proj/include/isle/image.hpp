#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "isle/bytes.hpp"
#include "isle/error.hpp"

namespace isle {

/// Grayscale raster, row-major, 8 or 16 bits per sample.
struct Image {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint8_t bit_depth = 8;
  std::vector<std::uint16_t> pixels;

  std::uint32_t max_value() const { return (1u << bit_depth) - 1; }

  std::uint16_t at(std::uint32_t x, std::uint32_t y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }

  friend bool operator==(const Image&, const Image&) = default;
};

inline void validate(const Image& img) {
  if (img.width == 0 || img.height == 0) fail(ErrorKind::validation, "image has zero extent");
  if (img.bit_depth != 8 && img.bit_depth != 16) {
    fail(ErrorKind::validation, "bit depth must be 8 or 16");
  }
  if (img.pixels.size() != static_cast<std::size_t>(img.width) * img.height) {
    fail(ErrorKind::validation, "pixel count does not match width x height");
  }
  const auto top = img.max_value();
  if (std::any_of(img.pixels.begin(), img.pixels.end(), [top](auto v) { return v > top; })) {
    fail(ErrorKind::validation, "sample exceeds bit-depth range");
  }
}

namespace detail {

class PgmHeaderReader {
 public:
  explicit PgmHeaderReader(ByteView data) : data_(data) {}

  void skip_space_and_comments() {
    while (pos_ < data_.size()) {
      if (data_[pos_] == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else if (std::isspace(data_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::uint64_t number(const char* what) {
    skip_space_and_comments();
    std::uint64_t value = 0;
    std::size_t digits = 0;
    while (pos_ < data_.size() && std::isdigit(data_[pos_])) {
      value = value * 10 + (data_[pos_] - '0');
      if (value > 0xffffffffull) fail(ErrorKind::validation, std::string("PGM ") + what + " too large");
      ++pos_;
      ++digits;
    }
    if (digits == 0) fail(ErrorKind::validation, std::string("PGM header: missing ") + what);
    return value;
  }

  std::size_t& pos() { return pos_; }

 private:
  ByteView data_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Image read_pgm(ByteView data) {
  if (data.size() < 2 || data[0] != 'P' || data[1] != '5') {
    fail(ErrorKind::validation, "not a binary PGM (expected magic P5)");
  }
  detail::PgmHeaderReader reader(data);
  reader.pos() = 2;
  const auto width = reader.number("width");
  const auto height = reader.number("height");
  const auto maxval = reader.number("maxval");
  if (width == 0 || height == 0) fail(ErrorKind::validation, "PGM has zero extent");
  if (maxval < 1 || maxval > 65535) fail(ErrorKind::validation, "PGM maxval outside 1..65535");
  auto& pos = reader.pos();
  if (pos >= data.size() || !std::isspace(data[pos])) {
    fail(ErrorKind::validation, "PGM header not terminated by whitespace");
  }
  ++pos;

  Image img;
  img.width = static_cast<std::uint32_t>(width);
  img.height = static_cast<std::uint32_t>(height);
  img.bit_depth = maxval <= 255 ? 8 : 16;
  const std::size_t count = static_cast<std::size_t>(width) * height;
  const std::size_t sample_bytes = img.bit_depth / 8;
  if (data.size() - pos < count * sample_bytes) {
    fail(ErrorKind::validation, "PGM pixel payload truncated");
  }
  img.pixels.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    img.pixels[i] = sample_bytes == 1 ? data[pos + i] : get_be<std::uint16_t>(data, pos + 2 * i);
    if (img.pixels[i] > maxval) fail(ErrorKind::validation, "PGM sample exceeds maxval");
  }
  validate(img);
  return img;
}

inline Bytes write_pgm(const Image& img) {
  validate(img);
  const std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                             "\n" + std::to_string(img.max_value()) + "\n";
  Bytes out(header.begin(), header.end());
  out.reserve(out.size() + img.pixels.size() * (img.bit_depth / 8));
  for (auto v : img.pixels) {
    if (img.bit_depth == 8) {
      out.push_back(static_cast<std::uint8_t>(v));
    } else {
      put_be<std::uint16_t>(out, v);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Comma-separated tables. No quoting; "\n" line endings.

inline bool is_valid_asset_id(std::string_view id) {
  return !id.empty() && std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '.' || c == '-';
  });
}

namespace detail {

inline std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    auto end = line.find(sep, start);
    cells.emplace_back(line.substr(start, end == std::string_view::npos ? end : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return cells;
}

/// Splits into rows of cells; skips a single trailing newline.
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    rows.push_back(split(text.substr(start, end - start), ','));
    start = end + 1;
  }
  return rows;
}

}  // namespace detail

struct LabelRow {
  std::string asset_id;
  std::vector<std::uint8_t> values;

  friend bool operator==(const LabelRow&, const LabelRow&) = default;
};

struct LabelTable {
  std::vector<std::string> label_names;
  std::vector<LabelRow> rows;

  const LabelRow* find(std::string_view asset_id) const {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const auto& r) { return r.asset_id == asset_id; });
    return it == rows.end() ? nullptr : &*it;
  }

  friend bool operator==(const LabelTable&, const LabelTable&) = default;
};

inline LabelTable read_labels_csv(ByteView data) {
  const std::string_view text(reinterpret_cast<const char*>(data.data()), data.size());
  const auto rows = detail::parse_csv(text);
  if (rows.empty() || rows[0].size() < 2 || rows[0][0] != "asset_id") {
    fail(ErrorKind::validation, "labels CSV header must be asset_id,<label>,...");
  }
  LabelTable table;
  table.label_names.assign(rows[0].begin() + 1, rows[0].end());
  std::unordered_set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& cells = rows[r];
    const auto line = std::to_string(r + 1);
    if (cells.size() != rows[0].size()) fail(ErrorKind::validation, "ragged labels CSV row at line " + line);
    if (!is_valid_asset_id(cells[0])) fail(ErrorKind::validation, "invalid asset_id at line " + line);
    if (!seen.insert(cells[0]).second) fail(ErrorKind::validation, "duplicate asset_id " + cells[0]);
    LabelRow row{cells[0], {}};
    for (std::size_t c = 1; c < cells.size(); ++c) {
      if (cells[c] != "0" && cells[c] != "1") {
        fail(ErrorKind::validation, "non-binary label cell at line " + line);
      }
      row.values.push_back(cells[c] == "1" ? 1 : 0);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline std::string write_labels_csv(const LabelTable& table) {
  std::string out = "asset_id";
  for (const auto& name : table.label_names) out += "," + name;
  out += "\n";
  for (const auto& row : table.rows) {
    out += row.asset_id;
    for (auto v : row.values) out += v ? ",1" : ",0";
    out += "\n";
  }
  return out;
}

}  // namespace isle

#pragma once

// The N x R feature matrix: entry (i, j) is phi_{w_j}(x_i) / sqrt(R), so that
// the inner product of two rows is the Monte-Carlo kernel estimate
// (1/R) * sum_j phi_{w_j}(x) * phi_{w_j}(y).

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rse/edit_distance.hpp"
#include "rse/errors.hpp"
#include "rse/ingest.hpp"
#include "rse/parallel.hpp"
#include "rse/sampler.hpp"

namespace rse {

// Raw integer distances from every string to every bank string.
struct DistanceMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint32_t> values;

  [[nodiscard]] std::uint32_t at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

// Tile shape for parallel work: every task covers whole data strings
// against at least 16 bank strings.
inline constexpr std::size_t kTileRows = 8;
inline constexpr std::size_t kTileCols = 64;

inline DistanceMatrix compute_distances(std::span<const std::string_view> strings,
                                        std::span<const std::string> bank, std::size_t workers = 1) {
  DistanceMatrix d{strings.size(), bank.size(), std::vector<std::uint32_t>(strings.size() * bank.size())};
  const std::size_t row_tiles = (d.rows + kTileRows - 1) / kTileRows;
  const std::size_t col_tiles = (d.cols + kTileCols - 1) / kTileCols;
  parallel_for(row_tiles * col_tiles, workers, [&](std::size_t task) {
    const std::size_t r0 = (task / col_tiles) * kTileRows;
    const std::size_t c0 = (task % col_tiles) * kTileCols;
    const std::size_t r1 = std::min(d.rows, r0 + kTileRows);
    const std::size_t c1 = std::min(d.cols, c0 + kTileCols);
    for (std::size_t i = r0; i < r1; ++i)
      for (std::size_t j = c0; j < c1; ++j) d.values[i * d.cols + j] = levenshtein(strings[i], bank[j]);
  });
  return d;
}

inline std::vector<std::string_view> views_of(std::span<const LabeledString> records) {
  std::vector<std::string_view> v;
  v.reserve(records.size());
  for (const auto& r : records) v.push_back(r.chars);
  return v;
}

inline std::vector<std::string_view> views_of(std::span<const std::string> strings) {
  return {strings.begin(), strings.end()};
}

inline std::uint64_t embedding_fingerprint(const RandomStringBank& bank, const FeatureParams& params) {
  std::ostringstream os;
  os << ' ' << to_string(params.map);
  if (params.map == FeatureMap::soft) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, params.gamma);
    os << " gamma=" << std::string_view(buf, static_cast<std::size_t>(end - buf));
  }
  return fnv1a(os.str(), bank.fingerprint());
}

struct EmbeddingMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major
  std::vector<int> labels;
  std::vector<std::size_t> row_ids;
  std::uint64_t bank_fingerprint = 0;

  [[nodiscard]] double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  [[nodiscard]] std::span<const double> row(std::size_t i) const {
    return {values.data() + i * cols, cols};
  }
  [[nodiscard]] std::vector<float> to_float() const { return {values.begin(), values.end()}; }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;
};

// Scale by 1/sqrt(R) after the feature transform.
inline EmbeddingMatrix features_from_distances(const DistanceMatrix& d, const FeatureParams& params) {
  params.validate();
  EmbeddingMatrix z;
  z.rows = d.rows;
  z.cols = d.cols;
  z.values.resize(d.values.size());
  const double scale = 1.0 / std::sqrt(static_cast<double>(d.cols));
  for (std::size_t k = 0; k < d.values.size(); ++k) z.values[k] = feature_from_distance(d.values[k], params) * scale;
  z.row_ids.resize(d.rows);
  for (std::size_t i = 0; i < d.rows; ++i) z.row_ids[i] = i;
  z.labels.assign(d.rows, 0);
  return z;
}

inline EmbeddingMatrix embed(std::span<const LabeledString> records, const RandomStringBank& bank,
                             const FeatureParams& params, std::size_t workers = 1) {
  if (bank.empty()) throw ArgumentError("cannot embed with an empty bank");
  params.validate();
  const auto views = views_of(records);
  auto z = features_from_distances(compute_distances(views, bank.strings, workers), params);
  for (std::size_t i = 0; i < records.size(); ++i) z.labels[i] = records[i].label;
  z.bank_fingerprint = embedding_fingerprint(bank, params);
  return z;
}

inline EmbeddingMatrix embed_with_saved_bank(std::span<const LabeledString> records,
                                             const std::filesystem::path& bank_file,
                                             const FeatureParams& params, std::size_t workers = 1) {
  return embed(records, load_bank(bank_file), params, workers);
}

// Train and test features are only comparable when built from one bank.
inline void require_same_bank(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
  if (a.bank_fingerprint != b.bank_fingerprint || a.cols != b.cols) {
    std::ostringstream os;
    os << "embeddings were built from different banks (fingerprint " << std::hex << a.bank_fingerprint << " vs "
       << b.bank_fingerprint << std::dec << ", R " << a.cols << " vs " << b.cols << ")";
    throw ConsistencyError(os.str());
  }
}

enum class MatrixFormat { dense, svmlight };

inline MatrixFormat parse_matrix_format(std::string_view s) {
  if (s == "dense") return MatrixFormat::dense;
  if (s == "svmlight") return MatrixFormat::svmlight;
  throw ArgumentError("unknown matrix format '" + std::string(s) + "' (expected dense or svmlight)");
}

namespace detail {

inline void put_double(std::ostream& out, double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, end - buf);
}

inline double get_double(std::string_view tok, std::size_t line) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError("bad number '" + std::string(tok) + "'", line);
  return v;
}

inline long get_long(std::string_view tok, std::size_t line) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError("bad integer '" + std::string(tok) + "'", line);
  return v;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace detail

// Values use the shortest round-trip representation, so a write/read cycle
// reproduces every bit. `header` lines are emitted as '#' comments after the
// matrix descriptor line.
inline void write_embedding(std::ostream& out, const EmbeddingMatrix& z, MatrixFormat format,
                            std::string_view header = {}) {
  out << "# rse-embedding rows=" << z.rows << " cols=" << z.cols << " fingerprint=" << std::hex
      << z.bank_fingerprint << std::dec << '\n';
  std::istringstream lines{std::string(header)};
  for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
  for (std::size_t i = 0; i < z.rows; ++i) {
    out << z.labels[i];
    for (std::size_t j = 0; j < z.cols; ++j) {
      const double v = z.at(i, j);
      if (format == MatrixFormat::svmlight) {
        if (v == 0.0) continue;
        out << ' ' << j + 1 << ':';
      } else {
        out << ' ';
      }
      detail::put_double(out, v);
    }
    out << '\n';
  }
}

// Reads either format (detected from the first data row). Without a
// descriptor line the column count of a sparse file is its largest index.
inline EmbeddingMatrix read_embedding(std::istream& in) {
  EmbeddingMatrix z;
  bool have_cols = false;
  bool sparse = false, format_known = false;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (line.empty() || line == "\r") continue;
    if (line[0] == '#') {
      if (line.rfind("# rse-embedding ", 0) == 0) {
        for (auto tok : detail::split_ws(line.substr(16))) {
          if (tok.rfind("cols=", 0) == 0) {
            z.cols = static_cast<std::size_t>(detail::get_long(tok.substr(5), line_no));
            have_cols = true;
          } else if (tok.rfind("fingerprint=", 0) == 0) {
            tok.remove_prefix(12);
            auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), z.bank_fingerprint, 16);
            if (ec != std::errc{}) throw ParseError("bad fingerprint", line_no);
          }
        }
      }
      continue;
    }
    const auto toks = detail::split_ws(line);
    if (toks.empty()) continue;
    z.labels.push_back(static_cast<int>(detail::get_long(toks[0], line_no)));
    if (toks.size() > 1 && !format_known) {
      sparse = toks[1].find(':') != std::string_view::npos;
      format_known = true;
    }
    std::vector<std::pair<std::size_t, double>> entries;
    if (sparse || (toks.size() == 1 && !format_known)) {  // a bare label is an all-zero sparse row
      std::size_t width = 0;
      for (std::size_t t = 1; t < toks.size(); ++t) {
        const auto colon = toks[t].find(':');
        if (colon == std::string_view::npos) throw ParseError("expected index:value", line_no);
        const long idx = detail::get_long(toks[t].substr(0, colon), line_no);
        if (idx < 1) throw ParseError("feature indices are 1-based", line_no);
        entries.emplace_back(static_cast<std::size_t>(idx - 1), detail::get_double(toks[t].substr(colon + 1), line_no));
        width = std::max(width, static_cast<std::size_t>(idx));
      }
      if (width > z.cols) {
        if (have_cols)
          throw ParseError("feature index " + std::to_string(width) + " exceeds cols=" + std::to_string(z.cols), line_no);
        std::vector<double> grown(z.rows * width, 0.0);
        for (std::size_t i = 0; i < z.rows; ++i)
          std::copy_n(z.values.begin() + static_cast<std::ptrdiff_t>(i * z.cols), z.cols,
                      grown.begin() + static_cast<std::ptrdiff_t>(i * width));
        z.values = std::move(grown);
        z.cols = width;
      }
    } else {
      for (std::size_t t = 1; t < toks.size(); ++t) entries.emplace_back(t - 1, detail::get_double(toks[t], line_no));
      if (!have_cols && z.rows == 0) z.cols = entries.size();
      if (entries.size() != z.cols)
        throw ParseError("row has " + std::to_string(entries.size()) + " values, expected " + std::to_string(z.cols),
                         line_no);
    }
    z.values.resize((z.rows + 1) * z.cols, 0.0);
    for (auto& [j, v] : entries) z.values[z.rows * z.cols + j] = v;
    z.row_ids.push_back(z.rows);
    ++z.rows;
  }
  return z;
}

inline void save_embedding(const std::filesystem::path& path, const EmbeddingMatrix& z, MatrixFormat format,
                           std::string_view header = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write '" + path.string() + "'");
  write_embedding(out, z, format, header);
}

inline EmbeddingMatrix load_embedding(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open embedding file '" + path.string() + "'");
  return read_embedding(in);
}

}  // namespace rse

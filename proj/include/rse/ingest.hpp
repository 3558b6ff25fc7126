#pragma once

// Labeled string datasets: alphabet handling, TSV / FASTA-like readers and
// writers, and seeded train/test splitting.
//
// TSV:    one record per line, `label<TAB>string`, blank lines skipped.
// FASTA:  `>label` header line followed by sequence lines that are
//         concatenated until the next header.
//
// Characters are opaque single bytes; no case folding. Labels are arbitrary
// tokens mapped to dense 0-based class ids in first-seen order.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rse/errors.hpp"
#include "rse/rng.hpp"

namespace rse {

class Alphabet {
 public:
  Alphabet() { index_.fill(-1); }

  explicit Alphabet(std::string_view symbols) : Alphabet() {
    if (symbols.empty()) throw ArgumentError("alphabet must contain at least one symbol");
    for (char c : symbols) {
      auto& slot = index_[static_cast<unsigned char>(c)];
      if (slot >= 0) throw ArgumentError(std::string("duplicate alphabet symbol '") + c + "'");
      slot = static_cast<std::int16_t>(symbols_.size());
      symbols_.push_back(c);
    }
  }

  // Sorted set of distinct characters occurring in `strings`.
  template <class Range, class Proj = std::identity>
  static Alphabet infer(const Range& strings, Proj proj = {}) {
    std::array<bool, 256> seen{};
    for (const auto& s : strings)
      for (char c : std::string_view(std::invoke(proj, s))) seen[static_cast<unsigned char>(c)] = true;
    std::string symbols;
    for (int c = 0; c < 256; ++c)
      if (seen[c]) symbols.push_back(static_cast<char>(c));
    return Alphabet(symbols);
  }

  [[nodiscard]] std::size_t size() const noexcept { return symbols_.size(); }
  [[nodiscard]] bool empty() const noexcept { return symbols_.empty(); }
  [[nodiscard]] const std::string& symbols() const noexcept { return symbols_; }
  [[nodiscard]] char symbol(std::size_t i) const { return symbols_.at(i); }
  [[nodiscard]] bool contains(char c) const noexcept {
    return index_[static_cast<unsigned char>(c)] >= 0;
  }
  // Position of `c`, or -1 when absent.
  [[nodiscard]] int index(char c) const noexcept { return index_[static_cast<unsigned char>(c)]; }

  friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.symbols_ == b.symbols_; }

 private:
  std::string symbols_;
  std::array<std::int16_t, 256> index_{};
};

struct LabeledString {
  std::string chars;
  int label = 0;

  [[nodiscard]] std::size_t length() const noexcept { return chars.size(); }
  friend bool operator==(const LabeledString&, const LabeledString&) = default;
};

enum class DatasetFormat { tsv, fasta };

inline DatasetFormat parse_dataset_format(std::string_view name) {
  if (name == "tsv") return DatasetFormat::tsv;
  if (name == "fasta") return DatasetFormat::fasta;
  throw ArgumentError("unknown dataset format '" + std::string(name) + "' (expected tsv or fasta)");
}

// Immutable after construction; safe to share across threads.
struct SequenceDataset {
  Alphabet alphabet;
  std::vector<LabeledString> train;
  std::vector<LabeledString> test;
  std::vector<std::string> class_names;  // class id -> original label token
  std::size_t max_length = 0;

  [[nodiscard]] std::size_t num_classes() const noexcept { return class_names.size(); }
  [[nodiscard]] std::size_t size() const noexcept { return train.size() + test.size(); }

  friend bool operator==(const SequenceDataset&, const SequenceDataset&) = default;
};

namespace detail {

inline int intern_label(std::vector<std::string>& class_names, std::string_view token) {
  auto it = std::find(class_names.begin(), class_names.end(), token);
  if (it != class_names.end()) return static_cast<int>(it - class_names.begin());
  class_names.emplace_back(token);
  return static_cast<int>(class_names.size() - 1);
}

inline void check_symbols(std::string_view s, const Alphabet* fixed, std::size_t line,
                          std::size_t record) {
  if (!fixed) return;
  for (char c : s) {
    if (!fixed->contains(c))
      throw ParseError("record " + std::to_string(record) + ": character '" + std::string(1, c) +
                           "' is not in the alphabet \"" + fixed->symbols() + "\"",
                       line);
  }
}

inline std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

inline bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t'; });
}

}  // namespace detail

// Reads every record from `in`. Labels are interned into `class_names`
// (which may already hold labels from a previously read file). Record
// indices in error messages are 0-based.
inline std::vector<LabeledString> read_records(std::istream& in, DatasetFormat format,
                                               std::vector<std::string>& class_names,
                                               const Alphabet* fixed = nullptr) {
  std::vector<LabeledString> out;
  std::string raw;
  std::size_t line_no = 0;

  if (format == DatasetFormat::tsv) {
    while (std::getline(in, raw)) {
      ++line_no;
      const std::string_view line = detail::strip_cr(raw);
      if (detail::is_blank(line)) continue;
      const auto tab = line.find('\t');
      if (tab == std::string_view::npos)
        throw ParseError("expected 'label<TAB>string', found no tab", line_no);
      const auto label = line.substr(0, tab);
      const auto chars = line.substr(tab + 1);
      if (label.empty()) throw ParseError("empty label", line_no);
      if (chars.find('\t') != std::string_view::npos)
        throw ParseError("more than one tab in record", line_no);
      if (chars.empty())
        throw ParseError("empty string in record " + std::to_string(out.size()), line_no);
      detail::check_symbols(chars, fixed, line_no, out.size());
      out.push_back({std::string(chars), detail::intern_label(class_names, label)});
    }
    return out;
  }

  std::optional<LabeledString> current;
  std::size_t header_line = 0;
  auto flush = [&] {
    if (!current) return;
    if (current->chars.empty())
      throw ParseError("empty string in record " + std::to_string(out.size()), header_line);
    out.push_back(std::move(*current));
    current.reset();
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = detail::strip_cr(raw);
    if (detail::is_blank(line)) continue;
    if (line.front() == '>') {
      flush();
      line.remove_prefix(1);
      const auto begin = line.find_first_not_of(" \t");
      if (begin == std::string_view::npos) throw ParseError("empty label in header", line_no);
      line.remove_prefix(begin);
      const auto label = line.substr(0, line.find_first_of(" \t"));
      current = LabeledString{{}, detail::intern_label(class_names, label)};
      header_line = line_no;
      continue;
    }
    if (!current) throw ParseError("sequence line before the first '>' header", line_no);
    for (char c : line) {
      if (c == ' ' || c == '\t') continue;
      const char one[1] = {c};
      detail::check_symbols(std::string_view(one, 1), fixed, line_no, out.size());
      current->chars.push_back(c);
    }
  }
  flush();
  return out;
}

inline void write_records(std::ostream& out, std::span<const LabeledString> records,
                          std::span<const std::string> class_names, DatasetFormat format) {
  for (const auto& r : records) {
    const auto& label = class_names[static_cast<std::size_t>(r.label)];
    if (format == DatasetFormat::tsv)
      out << label << '\t' << r.chars << '\n';
    else
      out << '>' << label << '\n' << r.chars << '\n';
  }
}

// Assembles a dataset, inferring the alphabet from all records unless
// `fixed` is given, and checks that every test label also occurs in train.
inline SequenceDataset make_dataset(std::vector<LabeledString> train, std::vector<LabeledString> test,
                                    std::vector<std::string> class_names,
                                    const Alphabet* fixed = nullptr) {
  SequenceDataset ds;
  std::vector<bool> in_train(class_names.size(), false);
  for (const auto& r : train) in_train[static_cast<std::size_t>(r.label)] = true;
  for (const auto& r : test)
    if (!in_train[static_cast<std::size_t>(r.label)])
      throw ArgumentError("test label '" + class_names[static_cast<std::size_t>(r.label)] +
                          "' does not occur in the training set");
  for (const auto* part : {&train, &test})
    for (const auto& r : *part) ds.max_length = std::max(ds.max_length, r.length());
  if (fixed) {
    ds.alphabet = *fixed;
  } else if (!train.empty() || !test.empty()) {
    std::vector<std::string_view> views;
    views.reserve(train.size() + test.size());
    for (const auto* part : {&train, &test})
      for (const auto& r : *part) views.push_back(r.chars);
    ds.alphabet = Alphabet::infer(views);
  }
  ds.train = std::move(train);
  ds.test = std::move(test);
  ds.class_names = std::move(class_names);
  return ds;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open '" + path.string() + "'");
  return in;
}

// Parses one file; every record lands in `train` and `test` is empty.
inline SequenceDataset parse_dataset(const std::filesystem::path& path, DatasetFormat format,
                                     const Alphabet* fixed = nullptr) {
  auto in = open_input(path);
  std::vector<std::string> names;
  auto records = read_records(in, format, names, fixed);
  return make_dataset(std::move(records), {}, std::move(names), fixed);
}

// Parses a predefined train/test pair sharing one label map and alphabet.
inline SequenceDataset parse_dataset(const std::filesystem::path& train_path,
                                     const std::filesystem::path& test_path, DatasetFormat format,
                                     const Alphabet* fixed = nullptr) {
  std::vector<std::string> names;
  auto train_in = open_input(train_path);
  auto train = read_records(train_in, format, names, fixed);
  auto test_in = open_input(test_path);
  auto test = read_records(test_in, format, names, fixed);
  return make_dataset(std::move(train), std::move(test), std::move(names), fixed);
}

// Seeded shuffle followed by a cut at round(train_fraction * N).
inline SequenceDataset split_dataset(const SequenceDataset& ds, double train_fraction,
                                     std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ArgumentError("train fraction must lie in (0, 1), got " + std::to_string(train_fraction));
  if (!ds.test.empty()) throw ArgumentError("dataset is already split");
  const std::size_t n = ds.train.size();
  if (n < 2) throw ArgumentError("need at least 2 records to split");

  std::vector<LabeledString> records = ds.train;
  RandomStream rng(seed, "split");
  rng.shuffle(records.begin(), records.end());

  auto cut = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  cut = std::clamp<std::size_t>(cut, 1, n - 1);
  std::vector<LabeledString> test(std::make_move_iterator(records.begin() + static_cast<std::ptrdiff_t>(cut)),
                                  std::make_move_iterator(records.end()));
  records.resize(cut);
  auto out = make_dataset(std::move(records), std::move(test), ds.class_names, &ds.alphabet);
  return out;
}

}  // namespace rse

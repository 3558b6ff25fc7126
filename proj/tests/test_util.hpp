#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rse/rse.hpp"

namespace rse::testing {

inline std::string random_string(RandomStream& rng, std::string_view alphabet, std::size_t max_len,
                                 std::size_t min_len = 0) {
  std::string s(rng.between(min_len, max_len), '\0');
  for (auto& c : s) c = alphabet[rng.below(alphabet.size())];
  return s;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("rse-test-" + tag + "-" + std::to_string(std::hash<std::string>{}(tag) ^ reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline SequenceDataset dataset_from_tsv(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> names;
  auto records = read_records(in, DatasetFormat::tsv, names);
  return make_dataset(std::move(records), {}, std::move(names));
}

// Two classes of DNA-like strings that differ in composition.
inline SequenceDataset toy_dna(std::size_t n, std::uint64_t seed, std::size_t length = 40) {
  RandomStream rng(seed, "toy");
  std::vector<LabeledString> recs;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    const std::string_view alpha = label ? "AAAC" : "GGGT";
    std::string s(length, '\0');
    for (auto& c : s) c = rng.unit() < 0.8 ? alpha[rng.below(4)] : "ACGT"[rng.below(4)];
    recs.push_back({s, label});
  }
  return make_dataset(std::move(recs), {}, {"a", "b"});
}

inline std::filesystem::path splice_path() { return std::filesystem::path(RSE_DATA_DIR) / "splice.tsv"; }

}  // namespace rse::testing

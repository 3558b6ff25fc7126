#pragma once

// Random reference strings for the embedding.
//
// Four strategies:
//   RF   i.i.d. characters drawn uniformly from the alphabet
//   RFD  i.i.d. characters drawn from the training-set character histogram
//   SS   a contiguous substring of a uniformly chosen training string
//   BSS  a uniformly chosen training string is cut into consecutive blocks of
//        length D and a random subset of those blocks is returned
//
// Every bank iteration j draws from its own sub-stream derived from
// (seed, j), so a bank is a pure function of (dataset, config, R) no matter
// how many workers build it.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "rse/errors.hpp"
#include "rse/ingest.hpp"
#include "rse/parallel.hpp"
#include "rse/rng.hpp"

namespace rse {

enum class Strategy { rf, rfd, ss, bss };

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::rf: return "RF";
    case Strategy::rfd: return "RFD";
    case Strategy::ss: return "SS";
    case Strategy::bss: return "BSS";
  }
  return "?";
}

inline Strategy parse_strategy(std::string_view name) {
  std::string up(name);
  for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "RF") return Strategy::rf;
  if (up == "RFD") return Strategy::rfd;
  if (up == "SS") return Strategy::ss;
  if (up == "BSS") return Strategy::bss;
  throw ArgumentError("unknown sampling strategy '" + std::string(name) + "' (expected RF, RFD, SS or BSS)");
}

inline bool is_data_dependent(Strategy s) { return s == Strategy::ss || s == Strategy::bss; }

struct SamplerConfig {
  Strategy strategy = Strategy::bss;
  std::size_t d_max = 10;
  std::uint64_t seed = 0;

  void validate(const SequenceDataset& ds) const {
    if (d_max < 1) throw ArgumentError("d_max must be at least 1");
    if (ds.train.empty()) throw ArgumentError("sampler needs a non-empty training set");
    if (is_data_dependent(strategy) && d_max > ds.max_length)
      throw ArgumentError("d_max = " + std::to_string(d_max) + " exceeds the longest string (" +
                          std::to_string(ds.max_length) + ") for strategy " + to_string(strategy));
  }

  friend bool operator==(const SamplerConfig&, const SamplerConfig&) = default;
};

// Character frequencies over training strings.
class CharacterHistogram {
 public:
  CharacterHistogram(Alphabet alphabet, std::vector<std::uint64_t> counts)
      : alphabet_(std::move(alphabet)), counts_(std::move(counts)) {
    if (counts_.size() != alphabet_.size())
      throw ArgumentError("histogram has " + std::to_string(counts_.size()) + " bins for an alphabet of " +
                          std::to_string(alphabet_.size()));
    const std::uint64_t total = std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
    if (total == 0) throw ArgumentError("character histogram is all zero");
    probabilities_.resize(counts_.size());
    cumulative_.resize(counts_.size());
    std::size_t last_positive = 0;
    std::uint64_t running = 0;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      probabilities_[i] = static_cast<double>(counts_[i]) / static_cast<double>(total);
      running += counts_[i];
      cumulative_[i] = static_cast<double>(running) / static_cast<double>(total);
      if (counts_[i] > 0) last_positive = i;
    }
    for (std::size_t i = last_positive; i < cumulative_.size(); ++i) cumulative_[i] = 1.0;
  }

  static CharacterHistogram from_strings(const Alphabet& alphabet, std::span<const LabeledString> strings) {
    std::vector<std::uint64_t> counts(alphabet.size(), 0);
    for (const auto& s : strings)
      for (char c : s.chars) {
        const int i = alphabet.index(c);
        if (i < 0) throw ArgumentError(std::string("character '") + c + "' is not in the alphabet");
        ++counts[static_cast<std::size_t>(i)];
      }
    return CharacterHistogram(alphabet, std::move(counts));
  }

  [[nodiscard]] const Alphabet& alphabet() const noexcept { return alphabet_; }
  [[nodiscard]] std::span<const std::uint64_t> counts() const noexcept { return counts_; }
  [[nodiscard]] std::span<const double> probabilities() const noexcept { return probabilities_; }

  // Inverse-CDF draw; zero-probability symbols own an empty interval.
  char draw(RandomStream& rng) const {
    const double u = rng.unit();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return alphabet_.symbol(static_cast<std::size_t>(it - cumulative_.begin()));
  }

 private:
  Alphabet alphabet_;
  std::vector<std::uint64_t> counts_;
  std::vector<double> probabilities_;
  std::vector<double> cumulative_;
};

inline std::size_t draw_length(std::size_t d_max, RandomStream& rng) {
  if (d_max < 1) throw ArgumentError("d_max must be at least 1");
  return static_cast<std::size_t>(rng.between(1, d_max));
}

inline std::string sample_rf(const Alphabet& alphabet, std::size_t d, RandomStream& rng) {
  if (alphabet.empty()) throw ArgumentError("alphabet is empty");
  std::string out(d, '\0');
  for (auto& c : out) c = alphabet.symbol(rng.below(alphabet.size()));
  return out;
}

inline std::string sample_rfd(const CharacterHistogram& hist, std::size_t d, RandomStream& rng) {
  std::string out(d, '\0');
  for (auto& c : out) c = hist.draw(rng);
  return out;
}

// Strings shorter than d trigger up to this many redraws before the
// substring is clamped to the whole string.
inline constexpr int kSubstringRedraws = 32;

inline std::string sample_ss(std::span<const LabeledString> train, std::size_t d, RandomStream& rng) {
  if (train.empty()) throw ArgumentError("substring sampling needs a non-empty training set");
  const std::string* s = &train[rng.below(train.size())].chars;
  for (int attempt = 0; s->size() < d && attempt < kSubstringRedraws; ++attempt)
    s = &train[rng.below(train.size())].chars;
  if (s->size() <= d) return *s;
  const std::size_t start = rng.below(s->size() - d + 1);
  return s->substr(start, d);
}

// Blocks of one training string. Trailing remainder is dropped; a string
// shorter than d is a single block. Duplicate blocks are removed, keeping
// the first occurrence in draw order.
inline std::vector<std::string> sample_bss(std::span<const LabeledString> train, std::size_t d,
                                           RandomStream& rng) {
  if (train.empty()) throw ArgumentError("block sampling needs a non-empty training set");
  if (d < 1) throw ArgumentError("block length must be at least 1");
  const std::string& s = train[rng.below(train.size())].chars;
  const std::size_t blocks = s.size() / d;
  if (blocks == 0) return {s};
  const std::size_t count = rng.between(1, blocks);
  std::vector<std::string> out;
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t b = rng.below(blocks);
    const std::string_view block(s.data() + b * d, d);
    if (seen.insert(block).second) out.emplace_back(block);
  }
  return out;
}

struct RandomStringBank {
  std::vector<std::string> strings;
  SamplerConfig config;
  std::vector<std::size_t> lengths;  // drawn D_j behind each string

  [[nodiscard]] std::size_t size() const noexcept { return strings.size(); }
  [[nodiscard]] bool empty() const noexcept { return strings.empty(); }

  [[nodiscard]] std::string header() const {
    std::ostringstream os;
    os << "RSE-BANK v1 strategy=" << to_string(config.strategy) << " d_max=" << config.d_max
       << " seed=" << config.seed << " R=" << strings.size();
    return os.str();
  }

  // Hash of the header and every string; equal for a bank and its reload.
  [[nodiscard]] std::uint64_t fingerprint() const {
    std::uint64_t h = fnv1a(header());
    for (const auto& s : strings) {
      h = fnv1a("\n", h);
      h = fnv1a(s, h);
    }
    return h;
  }

  // The first r strings, as drawn. Used for nested-bank experiments.
  [[nodiscard]] RandomStringBank prefix(std::size_t r) const {
    if (r > strings.size()) throw ArgumentError("prefix longer than the bank");
    RandomStringBank out{{strings.begin(), strings.begin() + static_cast<std::ptrdiff_t>(r)}, config, {}};
    if (lengths.size() >= r) out.lengths.assign(lengths.begin(), lengths.begin() + static_cast<std::ptrdiff_t>(r));
    return out;
  }
};

namespace detail {

struct Iteration {
  std::size_t length = 0;
  std::vector<std::string> strings;
};

inline Iteration run_iteration(const SequenceDataset& ds, const SamplerConfig& config,
                               const CharacterHistogram* hist, std::uint64_t j) {
  RandomStream rng(config.seed, "sampler", j);
  Iteration it;
  it.length = draw_length(config.d_max, rng);
  switch (config.strategy) {
    case Strategy::rf: it.strings.push_back(sample_rf(ds.alphabet, it.length, rng)); break;
    case Strategy::rfd: it.strings.push_back(sample_rfd(*hist, it.length, rng)); break;
    case Strategy::ss: it.strings.push_back(sample_ss(ds.train, it.length, rng)); break;
    case Strategy::bss: it.strings = sample_bss(ds.train, it.length, rng); break;
  }
  return it;
}

}  // namespace detail

// Exactly R strings. BSS iterations contribute a variable number of blocks;
// iterations are appended in order and the last one is truncated at R.
inline RandomStringBank build_bank(const SequenceDataset& ds, const SamplerConfig& config, std::size_t r,
                                   std::size_t workers = 1) {
  if (r < 1) throw ArgumentError("bank size R must be at least 1");
  config.validate(ds);
  std::optional<CharacterHistogram> hist;
  if (config.strategy == Strategy::rfd) hist = CharacterHistogram::from_strings(ds.alphabet, ds.train);

  RandomStringBank bank;
  bank.config = config;
  bank.strings.reserve(r);
  bank.lengths.reserve(r);

  const std::size_t batch = std::max<std::size_t>(256, 64 * (workers ? workers : default_workers()));
  std::uint64_t next_iteration = 0;
  std::vector<detail::Iteration> results;
  while (bank.strings.size() < r) {
    const std::size_t want = r - bank.strings.size();
    const std::size_t n = config.strategy == Strategy::bss ? std::min(batch, want) : want;
    results.assign(n, {});
    parallel_for(n, workers, [&](std::size_t t) {
      results[t] = detail::run_iteration(ds, config, hist ? &*hist : nullptr, next_iteration + t);
    });
    next_iteration += n;
    for (auto& it : results) {
      for (auto& s : it.strings) {
        if (bank.strings.size() == r) break;
        bank.strings.push_back(std::move(s));
        bank.lengths.push_back(it.length);
      }
    }
  }
  return bank;
}

// Header line, R strings one per line, then optional '#' trailer lines.
inline void write_bank(std::ostream& out, const RandomStringBank& bank, std::string_view trailer = {}) {
  out << bank.header() << '\n';
  for (const auto& s : bank.strings) out << s << '\n';
  std::istringstream lines{std::string(trailer)};
  for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
}

namespace detail {

template <class T>
T parse_field(std::string_view token, std::string_view key, std::size_t line) {
  const std::string prefix = std::string(key) + "=";
  if (token.substr(0, prefix.size()) != prefix)
    throw FormatError("line " + std::to_string(line) + ": expected '" + prefix + "...' in bank header");
  token.remove_prefix(prefix.size());
  T value{};
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw FormatError("line " + std::to_string(line) + ": bad value for '" + std::string(key) + "'");
  return value;
}

}  // namespace detail

inline RandomStringBank read_bank(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("line 1: empty bank file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::istringstream header(line);
  std::string magic, version, strategy_tok, dmax_tok, seed_tok, r_tok, extra;
  header >> magic >> version >> strategy_tok >> dmax_tok >> seed_tok >> r_tok;
  if (magic != "RSE-BANK" || version != "v1" || (header >> extra))
    throw FormatError("line 1: expected 'RSE-BANK v1 strategy=<s> d_max=<n> seed=<n> R=<n>'");
  if (strategy_tok.rfind("strategy=", 0) != 0) throw FormatError("line 1: missing strategy=");

  RandomStringBank bank;
  try {
    bank.config.strategy = parse_strategy(std::string_view(strategy_tok).substr(9));
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("line 1: ") + e.what());
  }
  bank.config.d_max = detail::parse_field<std::size_t>(dmax_tok, "d_max", 1);
  bank.config.seed = detail::parse_field<std::uint64_t>(seed_tok, "seed", 1);
  const auto r = detail::parse_field<std::size_t>(r_tok, "R", 1);
  if (r == 0) throw FormatError("line 1: R must be positive");

  bank.strings.reserve(r);
  for (std::size_t k = 0; k < r; ++k) {
    const std::size_t line_no = k + 2;
    if (!std::getline(in, line))
      throw FormatError("line " + std::to_string(line_no) + ": truncated bank, expected string " +
                        std::to_string(k + 1) + " of " + std::to_string(r));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw FormatError("line " + std::to_string(line_no) + ": empty bank string");
    bank.strings.push_back(line);
    bank.lengths.push_back(line.size());
  }
  for (std::size_t line_no = r + 2; std::getline(in, line); ++line_no) {
    if (line.empty() || line[0] == '#' || line == "\r") continue;
    throw FormatError("line " + std::to_string(line_no) + ": unexpected content after " + std::to_string(r) +
                      " bank strings");
  }
  return bank;
}

inline void save_bank(const std::filesystem::path& path, const RandomStringBank& bank,
                      std::string_view trailer = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write '" + path.string() + "'");
  write_bank(out, bank, trailer);
}

inline RandomStringBank load_bank(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open bank file '" + path.string() + "'");
  return read_bank(in);
}

}  // namespace rse

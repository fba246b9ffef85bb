#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ghostmark {

struct CorpusEntry {
  std::string id;
  std::string text;
};

// One {"id", "text"} object per line; blank lines are skipped and a missing
// id becomes "line-<n>". Throws ValidationError naming the line on bad input.
std::vector<CorpusEntry> read_jsonl(std::istream& in);
std::vector<CorpusEntry> read_jsonl(const std::filesystem::path& path);
void write_jsonl(std::ostream& out, std::span<const CorpusEntry> entries);

// Every regular *.txt file of a directory, sorted by name; id = file stem.
std::vector<CorpusEntry> read_text_dir(const std::filesystem::path& dir);

struct SyntheticProfile {
  std::string name = "blog";
  std::size_t min_words = 200;
  double mean_words = 371;  // before the cap
  std::size_t max_words = 987;
  double newline_rate = 0.02;

  // "blog" or "poems".
  static SyntheticProfile preset(const std::string& name);
};

// Random-access generator: document(i) depends only on (seed, i, profile).
// Lengths are min_words plus an exponential tail, capped at max_words.
class SyntheticCorpus {
 public:
  SyntheticCorpus(SyntheticProfile profile, std::uint64_t seed);

  CorpusEntry document(std::size_t index) const;
  std::vector<CorpusEntry> documents(std::size_t first, std::size_t count) const;
  const SyntheticProfile& profile() const noexcept { return profile_; }

 private:
  SyntheticProfile profile_;
  std::uint64_t seed_;
};

}  // namespace ghostmark

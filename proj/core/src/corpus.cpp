#include "ghostmark/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ghostmark/error.hpp"
#include "ghostmark/lexicon.hpp"
#include "ghostmark/rng.hpp"

namespace ghostmark {

std::vector<CorpusEntry> read_jsonl(std::istream& in) {
  std::vector<CorpusEntry> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(number);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + ": " + e.what());
    }
    if (!j.is_object()) throw ValidationError(where + ": expected an object");
    if (!j.contains("text") || !j["text"].is_string()) {
      throw ValidationError(where + ": missing string field 'text'");
    }
    CorpusEntry e;
    e.text = j["text"].get<std::string>();
    if (j.contains("id") && j["id"].is_string()) {
      e.id = j["id"].get<std::string>();
    } else if (j.contains("id") && j["id"].is_number_integer()) {
      e.id = std::to_string(j["id"].get<long long>());
    } else {
      e.id = "line-" + std::to_string(number);
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<CorpusEntry> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_jsonl(in);
}

void write_jsonl(std::ostream& out, std::span<const CorpusEntry> entries) {
  for (const auto& e : entries) {
    nlohmann::ordered_json j;
    j["id"] = e.id;
    j["text"] = e.text;
    out << j.dump() << '\n';
  }
}

std::vector<CorpusEntry> read_text_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<CorpusEntry> out;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw IoError("cannot open " + f.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    out.push_back({f.stem().string(), buffer.str()});
  }
  return out;
}

SyntheticProfile SyntheticProfile::preset(const std::string& name) {
  SyntheticProfile p;
  if (name == "blog") return p;
  if (name == "poems") {
    p.name = "poems";
    p.mean_words = 460;
    p.max_words = 2280;
    p.newline_rate = 0.15;
    return p;
  }
  throw ValidationError("unknown synthetic profile '" + name + "' (blog|poems)");
}

SyntheticCorpus::SyntheticCorpus(SyntheticProfile profile, std::uint64_t seed)
    : profile_(std::move(profile)), seed_(seed) {
  if (profile_.min_words < 2 || profile_.max_words < profile_.min_words) {
    throw ValidationError("synthetic profile needs 2 <= min_words <= max_words");
  }
  if (!(profile_.newline_rate >= 0.0 && profile_.newline_rate <= 1.0)) {
    throw ValidationError("synthetic profile newline_rate must lie in [0, 1]");
  }
}

CorpusEntry SyntheticCorpus::document(std::size_t index) const {
  Rng rng(derive_seed(seed_, index));
  std::size_t words = profile_.min_words;
  const double tail = profile_.mean_words - static_cast<double>(profile_.min_words);
  if (tail > 0.0) {
    const double extra = std::exponential_distribution<double>(1.0 / tail)(rng);
    words = std::min<std::size_t>(profile_.max_words,
                                  profile_.min_words + static_cast<std::size_t>(extra));
  }
  const auto lex = lexicon();
  std::uniform_int_distribution<std::size_t> pick(0, lex.size() - 1);
  std::bernoulli_distribution newline(profile_.newline_rate);
  std::bernoulli_distribution odd_space(0.01);
  std::string text;
  text.reserve(words * 7);
  for (std::size_t w = 0; w < words; ++w) {
    if (w > 0) {
      if (newline(rng)) {
        text.push_back('\n');
      } else if (odd_space(rng)) {
        text.append("\xC2\xA0");  // no-break space
      } else {
        text.push_back(' ');
      }
    }
    text.append(lex[pick(rng)]);
  }
  text.push_back('\n');
  return {profile_.name + "-" + std::to_string(index), std::move(text)};
}

std::vector<CorpusEntry> SyntheticCorpus::documents(std::size_t first, std::size_t count) const {
  std::vector<CorpusEntry> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(document(first + i));
  return out;
}

}  // namespace ghostmark

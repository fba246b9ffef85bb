#include "ghostmark/serialization.hpp"

#include "ghostmark/error.hpp"
#include "ghostmark/utf8.hpp"

namespace ghostmark {

nlohmann::ordered_json params_to_json(const Alphabet& alphabet,
                                      const WatermarkParams& params) {
  nlohmann::ordered_json j;
  auto chars = nlohmann::ordered_json::array();
  for (char32_t cp : alphabet.code_points()) chars.push_back(utf8::format_code_point(cp));
  j["alphabet"] = std::move(chars);
  j["m"] = params.syllable_length;
  j["n"] = params.total_syllables;
  j["j"] = params.cue_syllables;
  return j;
}

Alphabet params_from_json(const nlohmann::json& j, WatermarkParams& params) {
  const auto chars = require_field<std::vector<std::string>>(j, "alphabet");
  std::vector<char32_t> code_points;
  for (const auto& c : chars) {
    const auto cp = utf8::parse_code_point(c);
    if (!cp) throw ValidationError("field 'alphabet': bad code point '" + c + "'");
    code_points.push_back(*cp);
  }
  Alphabet alphabet(std::move(code_points));
  params.alphabet_size = alphabet.size();
  params.syllable_length = require_field<std::size_t>(j, "m");
  params.total_syllables = require_field<std::size_t>(j, "n");
  params.cue_syllables = require_field<std::size_t>(j, "j");
  params.validate();
  return alphabet;
}

nlohmann::ordered_json candidate_set_to_json(const CandidateSet& set) {
  nlohmann::ordered_json j;
  j["params"] = params_to_json(set.alphabet, set.params);
  auto list = nlohmann::ordered_json::array();
  for (const auto& w : set.watermarks) list.push_back(w.canonical());
  j["watermarks"] = std::move(list);
  j["chosen_index"] = set.chosen_index;
  j["commitment"] = set.commitment;
  j["issued_at"] = set.issued_at;
  return j;
}

CandidateSet candidate_set_from_json(const nlohmann::json& j) {
  CandidateSet set;
  set.alphabet = params_from_json(require_field<nlohmann::json>(j, "params"), set.params);
  for (const auto& text : require_field<std::vector<std::string>>(j, "watermarks")) {
    Watermark w = Watermark::parse(text);
    if (!w.fits(set.params)) {
      throw ValidationError("watermark " + text + " does not fit the set parameters");
    }
    set.watermarks.push_back(std::move(w));
  }
  set.chosen_index = require_field<std::size_t>(j, "chosen_index");
  if (!set.watermarks.empty() &&
      (set.chosen_index < 1 || set.chosen_index > set.watermarks.size())) {
    throw ValidationError("field 'chosen_index' is outside [1, K]");
  }
  set.commitment = optional_field<std::string>(j, "commitment", "");
  set.issued_at = optional_field<std::string>(j, "issued_at", "");
  return set;
}

}  // namespace ghostmark

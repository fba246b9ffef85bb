#pragma once

#include <nlohmann/json.hpp>

#include "ghostmark/alphabet.hpp"
#include "ghostmark/error.hpp"
#include "ghostmark/watermark.hpp"
#include "ghostmark/watermark_space.hpp"

namespace ghostmark {

// JSON layouts shared by the registry journal, candidate-set files and the
// CLI. Parsing throws ValidationError naming the offending field.

nlohmann::ordered_json params_to_json(const Alphabet& alphabet,
                                      const WatermarkParams& params);
// Returns the alphabet; writes m, n, j (and |A|) into `params`.
Alphabet params_from_json(const nlohmann::json& j, WatermarkParams& params);

// {params, watermarks, chosen_index, commitment, issued_at}
nlohmann::ordered_json candidate_set_to_json(const CandidateSet& set);
CandidateSet candidate_set_from_json(const nlohmann::json& j);

// Typed field access with a ValidationError naming the field on failure.
template <typename T>
T require_field(const nlohmann::json& j, const char* field) {
  if (!j.is_object() || !j.contains(field)) {
    throw ValidationError(std::string("missing field '") + field + "'");
  }
  try {
    return j.at(field).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(std::string("field '") + field + "' has the wrong type");
  }
}

template <typename T>
T optional_field(const nlohmann::json& j, const char* field, T fallback) {
  if (!j.is_object() || !j.contains(field) || j.at(field).is_null()) return fallback;
  try {
    return j.at(field).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(std::string("field '") + field + "' has the wrong type");
  }
}

}  // namespace ghostmark

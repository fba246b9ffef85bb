#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ghostmark {

struct GenerationSettings {
  std::size_t max_new_tokens = 200;
  double temperature = 1.0;
  double top_p = 1.0;
  int top_k = 0;
  std::optional<std::uint64_t> seed;
};

// Black-box text generator. Implementations must be safe to call from
// several threads at once. Failures are reported as TransportError.
class ChallengeOracle {
 public:
  virtual ~ChallengeOracle() = default;
  virtual std::string generate(std::string_view prompt, const GenerationSettings& settings) = 0;
};

}  // namespace ghostmark

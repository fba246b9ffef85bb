#include "ghostmark/verifier.hpp"

#include <algorithm>
#include <thread>

#include "ghostmark/rng.hpp"

namespace ghostmark {

std::vector<Challenge> build_challenges(const MarkedDocument& md, const Alphabet& alphabet) {
  const std::size_t j = md.watermark().cue_length();
  const std::size_t cap = md.params().overlap * (1 + md.params().step);
  const auto chunks = md.chunks();
  const auto elements = md.elements();
  const std::string watermark_id = md.watermark_id();

  std::vector<Challenge> out;
  for (std::size_t c = 0; c + 1 < chunks.size(); ++c) {
    if (chunks[c].kind != ChunkKind::kCue || chunks[c + 1].kind != ChunkKind::kReply) continue;
    const Chunk& reply = chunks[c + 1];
    std::size_t end = reply.first_element;
    while (end < reply.end_element && end - reply.first_element < cap) {
      const Element& el = elements[end];
      if (!el.is_word() && el.index >= j) break;
      ++end;
    }
    Challenge ch;
    ch.doc_id = md.original().id();
    ch.index = out.size() + 1;
    md.render_range(ch.prompt, chunks[c].first_element, end, alphabet);
    ch.watermark_id = watermark_id;
    const auto reply_letters = md.watermark().reply_letters();
    ch.expected_reply.assign(reply_letters.begin(), reply_letters.end());
    if (detect_reply(ch.prompt, ch.expected_reply, alphabet)) {
      throw ValidationError("challenge " + std::to_string(ch.index) + " of '" + ch.doc_id +
                            "' would carry the reply of " + watermark_id);
    }
    out.push_back(std::move(ch));
  }
  return out;
}

std::string generate_with_retry(ChallengeOracle& oracle, std::string_view prompt,
                                const GenerationSettings& settings, const RetryPolicy& retry) {
  auto backoff = retry.initial_backoff;
  const std::size_t attempts = std::max<std::size_t>(retry.max_attempts, 1);
  for (std::size_t attempt = 1;; ++attempt) {
    try {
      return oracle.generate(prompt, settings);
    } catch (const TransportError& e) {
      if (!e.retryable() || attempt >= attempts) throw;
    }
    std::this_thread::sleep_for(backoff);
    backoff = std::chrono::milliseconds(
        static_cast<std::chrono::milliseconds::rep>(backoff.count() * retry.multiplier));
  }
}

ChunkResult verif_chunk(ChallengeOracle& oracle, const Challenge& challenge,
                        const VerifParams& params, const Alphabet& alphabet,
                        const TranscriptSink& sink) {
  if (params.lambda == 0) throw ValidationError("lambda must be at least 1");
  ChunkResult result;
  result.doc_id = challenge.doc_id;
  result.challenge_index = challenge.index;
  for (std::size_t attempt = 1; attempt <= params.lambda; ++attempt) {
    GenerationSettings settings = params.settings;
    if (settings.seed) settings.seed = derive_seed(*settings.seed, attempt);
    const std::string output =
        generate_with_retry(oracle, challenge.prompt, settings, params.retry);
    const Extraction extraction = extract_invisible(output, alphabet);
    const bool hit = contains_run(extraction.letters, challenge.expected_reply);
    result.attempts = attempt;
    result.raw_invisible_lengths.push_back(extraction.letters.size());
    if (sink) {
      TranscriptEntry entry;
      entry.doc_id = challenge.doc_id;
      entry.watermark_id = challenge.watermark_id;
      entry.challenge_index = challenge.index;
      entry.attempt = attempt;
      entry.seed = settings.seed;
      entry.prompt = &challenge.prompt;
      entry.output = &output;
      entry.invisible_length = extraction.letters.size();
      entry.invalid_bytes = extraction.invalid_bytes;
      entry.hit = hit;
      sink(entry);
    }
    if (hit) {
      result.hit = true;
      result.first_hit_attempt = attempt;
      break;
    }
  }
  return result;
}

DocResult verif_doc(ChallengeOracle& oracle, const MarkedDocument& md,
                    const VerifParams& params, const Alphabet& alphabet,
                    const TranscriptSink& sink) {
  DocResult result;
  result.doc_id = md.original().id();
  for (const Challenge& ch : build_challenges(md, alphabet)) {
    ChunkResult r = verif_chunk(oracle, ch, params, alphabet, sink);
    if (r.hit) ++result.score;
    result.chunks.push_back(std::move(r));
  }
  return result;
}

CollectionResult verif_collection(ChallengeOracle& oracle,
                                  std::span<const MarkedDocument> docs,
                                  const VerifParams& params, const Alphabet& alphabet,
                                  const TranscriptSink& sink) {
  CollectionResult result;
  for (const MarkedDocument& md : docs) {
    try {
      DocResult doc = verif_doc(oracle, md, params, alphabet, sink);
      result.score += doc.score;
      result.challenges += doc.chunks.size();
      result.docs.push_back(std::move(doc));
    } catch (const TransportError& e) {
      if (e.kind() == ErrorKind::kAuth) throw;
      result.errors.push_back({md.original().id(), e.kind(), e.what()});
    }
  }
  return result;
}

}  // namespace ghostmark

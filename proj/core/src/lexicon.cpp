#include "ghostmark/lexicon.hpp"

#include <array>

namespace ghostmark {

namespace {

constexpr std::array kWords = {
    "the",
    "of",
    "and",
    "to",
    "in",
    "a",
    "is",
    "that",
    "for",
    "it",
    "as",
    "was",
    "with",
    "be",
    "by",
    "on",
    "not",
    "he",
    "this",
    "are",
    "or",
    "his",
    "from",
    "at",
    "which",
    "but",
    "have",
    "an",
    "they",
    "you",
    "were",
    "her",
    "she",
    "there",
    "been",
    "one",
    "all",
    "we",
    "their",
    "has",
    "would",
    "when",
    "if",
    "so",
    "no",
    "will",
    "more",
    "out",
    "up",
    "into",
    "do",
    "any",
    "your",
    "what",
    "some",
    "can",
    "about",
    "them",
    "than",
    "only",
    "other",
    "then",
    "its",
    "our",
    "two",
    "over",
    "such",
    "these",
    "also",
    "new",
    "most",
    "could",
    "like",
    "time",
    "very",
    "just",
    "first",
    "where",
    "after",
    "people",
    "years",
    "made",
    "well",
    "way",
    "many",
    "even",
    "back",
    "much",
    "good",
    "because",
    "through",
    "long",
    "down",
    "before",
    "should",
    "same",
    "world",
    "own",
    "life",
    "work",
    "still",
    "great",
    "between",
    "part",
    "being",
    "under",
    "never",
    "while",
    "last",
    "might",
    "state",
    "us",
    "another",
    "year",
    "around",
    "know",
    "those",
    "place",
    "again",
    "right",
    "however",
    "take",
    "end",
    "both",
    "three",
    "found",
    "here",
    "each",
    "without",
    "number",
    "public",
    "small",
    "given",
    "large",
    "since",
    "few",
    "high",
    "system",
    "during",
    "café",
    "naïve",
    "façade",
    "déjà",
    "über",
    "straße",
    "smörgåsbord",
    "jalapeño",
    "piñata",
    "résumé",
    "coöperate",
    "fiancée",
    "Ærø",
    "Ωmega",
    "πόλη",
    "λόγος",
    "мир",
    "слово",
    "время",
    "東京",
    "言葉",
    "春",
    "海",
    "山",
    "café-au-lait",
    "crème",
    "brûlée",
    "Zürich",
    "São",
    "Paulo",
    "日本語",
    "한국어",
    "mañana",
    "año",
    "niño",
    "øre",
    "Ångström",
    "Şehir",
    "İstanbul",
    "ğ",
    "ﬁne",
    "…",
    "«quote»",
    "“curly”",
    "emoji🙂",
    "🌊",
    "🎵",
    "𝄞",
    "नमस्ते",
    "العربية",
    "שלום",
};

}  // namespace

std::span<const std::string_view> lexicon() {
  static const auto words = [] {
    std::array<std::string_view, kWords.size()> out{};
    for (std::size_t i = 0; i < kWords.size(); ++i) out[i] = kWords[i];
    return out;
  }();
  return words;
}

}  // namespace ghostmark

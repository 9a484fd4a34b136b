#include "nexc/features.hpp"

namespace nexc {

const std::set<std::string>& default_stopwords() {
    static const std::set<std::string> words = {
        "a",       "about",   "above",   "after",   "again",  "against", "all",     "am",
        "an",      "and",     "any",     "are",     "as",     "at",      "based",   "be",
        "because", "been",    "before",  "being",   "below",  "between", "both",    "but",
        "by",      "can",     "cannot",  "could",   "did",    "do",      "does",    "doing",
        "down",    "during",  "each",    "few",     "for",    "from",    "further", "had",
        "has",     "have",    "having",  "he",      "her",    "here",    "hers",    "him",
        "his",     "how",     "i",       "if",      "in",     "into",    "is",      "it",
        "its",     "itself",  "more",    "most",    "my",     "new",     "no",      "nor",
        "not",     "of",      "off",     "on",      "once",   "only",    "or",      "other",
        "ought",   "our",     "ours",    "out",     "over",   "own",     "same",    "she",
        "should",  "so",      "some",    "such",    "than",   "that",    "the",     "their",
        "theirs",  "them",    "then",    "there",   "these",  "they",    "this",    "those",
        "through", "to",      "too",     "toward",  "towards", "under",  "until",   "up",
        "upon",    "us",      "using",   "very",    "via",    "was",     "we",      "were",
        "what",    "when",    "where",   "which",   "while",  "who",     "whom",    "why",
        "with",    "within",  "without", "would",   "you",    "your",    "yours",   "yourself",
    };
    return words;
}

} // namespace nexc

#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "nexc/linalg.hpp"
#include "nexc/records.hpp"

namespace nexc {

/// Which feature blocks participate in vocabulary construction.
struct FeatureSet {
    bool authors = true;
    bool keywords = true;
    bool venues = true;

    static FeatureSet all() { return {}; }
    std::string name() const;
};

/// Column layout over author / title-token / venue features. Built from the
/// training window only and frozen afterwards; blocks are contiguous with
/// lexicographic order inside each block.
struct Vocabulary {
    std::map<std::string, int> author_index;
    std::map<std::string, int> token_index;
    std::map<std::string, int> venue_index;
    int dims = 0;
    FeatureSet features;
};

/// Presence-only feature vector: sorted column indices, no values.
struct BinaryFeatureVector {
    int dims = 0;
    std::vector<int> active;
};

// The stopword list shipped with the repo (~120 English function words).
const std::set<std::string>& default_stopwords();

std::string normalize_name(const std::string& name);

// Lowercase, strip ASCII punctuation, split on whitespace, drop stopwords.
std::vector<std::string> tokenize_title(const std::string& title,
                                        const std::set<std::string>& stopwords);

// One column per distinct co-author, surviving title token, and venue.
// Throws EmptyTrainingSet on an empty record list.
Vocabulary build_vocabulary(const std::vector<RawRecord>& records,
                            const std::set<std::string>& stopwords,
                            const FeatureSet& features = FeatureSet::all());

// Features absent from the vocabulary are dropped silently; the basis is
// frozen after training, so online records cannot grow the column space.
BinaryFeatureVector vectorize(const RawRecord& record, const Vocabulary& vocab,
                              const std::set<std::string>& stopwords);

/// Dense 0/1 matrix, one row per record in order.
Matrix feature_matrix(const std::vector<RawRecord>& records, const Vocabulary& vocab,
                      const std::set<std::string>& stopwords);

Vector to_dense(const BinaryFeatureVector& v);

} // namespace nexc

#include "nexc/features.hpp"

#include <algorithm>
#include <cctype>

#include "nexc/errors.hpp"

namespace nexc {

namespace {

bool is_ascii_punct(unsigned char c) { return c < 128 && std::ispunct(c); }

std::string fold(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (unsigned char c : s) {
        if (is_ascii_punct(c))
            out.push_back(' ');
        else
            out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

std::string collapse_ws(const std::string& s) {
    std::string out;
    bool in_ws = true;
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            if (!in_ws) out.push_back(' ');
            in_ws = true;
        } else {
            out.push_back(c);
            in_ws = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

std::string normalize_venue(const std::string& venue) { return collapse_ws(fold(venue)); }

int index_block(const std::set<std::string>& values, std::map<std::string, int>& index,
                int offset) {
    int col = offset;
    for (const auto& v : values) index[v] = col++;
    return col;
}

} // namespace

std::string FeatureSet::name() const {
    std::string out;
    if (authors) out += "authors";
    if (keywords) out += out.empty() ? "keywords" : "+keywords";
    if (venues) out += out.empty() ? "venues" : "+venues";
    return out.empty() ? "none" : out;
}

std::string normalize_name(const std::string& name) { return collapse_ws(fold(name)); }

std::vector<std::string> tokenize_title(const std::string& title,
                                        const std::set<std::string>& stopwords) {
    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty() && !stopwords.count(cur)) tokens.push_back(cur);
        cur.clear();
    };
    for (char c : fold(title)) {
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n')
            flush();
        else
            cur.push_back(c);
    }
    flush();
    return tokens;
}

Vocabulary build_vocabulary(const std::vector<RawRecord>& records,
                            const std::set<std::string>& stopwords, const FeatureSet& features) {
    if (records.empty()) throw EmptyTrainingSet("build_vocabulary: no training records");

    std::set<std::string> authors, tokens, venues;
    for (const auto& r : records) {
        const std::string self = normalize_name(r.name_ref);
        if (features.authors) {
            for (const auto& a : r.authors) {
                const std::string n = normalize_name(a);
                if (!n.empty() && n != self) authors.insert(n);
            }
        }
        if (features.keywords)
            for (auto& t : tokenize_title(r.title, stopwords)) tokens.insert(t);
        if (features.venues) {
            const std::string v = normalize_venue(r.venue);
            if (!v.empty()) venues.insert(v);
        }
    }

    Vocabulary vocab;
    vocab.features = features;
    int col = index_block(authors, vocab.author_index, 0);
    col = index_block(tokens, vocab.token_index, col);
    col = index_block(venues, vocab.venue_index, col);
    vocab.dims = col;
    return vocab;
}

BinaryFeatureVector vectorize(const RawRecord& record, const Vocabulary& vocab,
                              const std::set<std::string>& stopwords) {
    std::set<int> active;
    const std::string self = normalize_name(record.name_ref);
    if (vocab.features.authors) {
        for (const auto& a : record.authors) {
            const std::string n = normalize_name(a);
            if (n.empty() || n == self) continue;
            if (auto it = vocab.author_index.find(n); it != vocab.author_index.end())
                active.insert(it->second);
        }
    }
    if (vocab.features.keywords) {
        for (const auto& t : tokenize_title(record.title, stopwords))
            if (auto it = vocab.token_index.find(t); it != vocab.token_index.end())
                active.insert(it->second);
    }
    if (vocab.features.venues) {
        const std::string v = normalize_venue(record.venue);
        if (auto it = vocab.venue_index.find(v); it != vocab.venue_index.end())
            active.insert(it->second);
    }
    return BinaryFeatureVector{vocab.dims, {active.begin(), active.end()}};
}

Matrix feature_matrix(const std::vector<RawRecord>& records, const Vocabulary& vocab,
                      const std::set<std::string>& stopwords) {
    Matrix x = Matrix::Zero(static_cast<Eigen::Index>(records.size()), vocab.dims);
    for (std::size_t i = 0; i < records.size(); ++i)
        for (int col : vectorize(records[i], vocab, stopwords).active)
            x(static_cast<Eigen::Index>(i), col) = 1.0;
    return x;
}

Vector to_dense(const BinaryFeatureVector& v) {
    Vector x = Vector::Zero(v.dims);
    for (int col : v.active) x(col) = 1.0;
    return x;
}

} // namespace nexc

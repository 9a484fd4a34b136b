#include <doctest.h>

#include <algorithm>
#include <random>

#include "nexc/errors.hpp"
#include "nexc/features.hpp"

using namespace nexc;

namespace {

RawRecord rec(std::string id, std::vector<std::string> authors, std::string title,
              std::string venue, int year = 2005) {
    RawRecord r;
    r.id = std::move(id);
    r.name_ref = "wei chen";
    r.year = year;
    r.authors = std::move(authors);
    r.title = std::move(title);
    r.venue = std::move(venue);
    return r;
}

} // namespace

TEST_CASE("tokenize_title splits, folds case, strips punctuation") {
    const std::set<std::string> none;
    CHECK(tokenize_title("Online Name Disambiguation", none) ==
          std::vector<std::string>{"online", "name", "disambiguation"});
    CHECK(tokenize_title("A Study of the Graphs", default_stopwords()) ==
          std::vector<std::string>{"study", "graphs"});
    CHECK(tokenize_title("", none).empty());
    CHECK(tokenize_title("graph-based, streaming!", none) ==
          std::vector<std::string>{"graph", "based", "streaming"});
}

TEST_CASE("build_vocabulary counts disjoint blocks") {
    const std::set<std::string> none;
    // shared coauthor, disjoint 2+2 tokens, distinct venues: d = 1 + 4 + 2
    const std::vector<RawRecord> two = {
        rec("r1", {"Alice Smith"}, "alpha beta", "VLDB"),
        rec("r2", {"Alice Smith"}, "gamma delta", "ICML"),
    };
    CHECK(build_vocabulary(two, none).dims == 7);

    const std::vector<RawRecord> one = {rec("r1", {"Alice Smith"}, "alpha", "VLDB")};
    CHECK(build_vocabulary(one, none).dims == 3);

    CHECK_THROWS_AS(build_vocabulary({}, none), EmptyTrainingSet);
}

TEST_CASE("vectorize activates matched columns and drops novel features") {
    const std::set<std::string> none;
    const std::vector<RawRecord> train = {
        rec("r1", {"Alice Smith", "Bob Jones"}, "alpha beta", "VLDB"),
        rec("r2", {"Alice Smith"}, "gamma", "ICML"),
    };
    const Vocabulary vocab = build_vocabulary(train, none);

    const auto full = vectorize(train[0], vocab, none);
    CHECK(full.active.size() == 2 + 2 + 1);

    const auto novel = vectorize(rec("rx", {"Carol Wu"}, "zeta", "KDD"), vocab, none);
    CHECK(novel.active.empty());

    // self-consistency: a training record activates exactly its own columns
    const Vocabulary solo = build_vocabulary({train[0]}, none);
    const auto self = vectorize(train[0], solo, none);
    CHECK(static_cast<int>(self.active.size()) == solo.dims);
}

TEST_CASE("the name reference itself is not a co-author feature") {
    const std::set<std::string> none;
    RawRecord r = rec("r1", {"Wei Chen", "Alice Smith"}, "", "");
    const Vocabulary vocab = build_vocabulary({r}, none);
    CHECK(vocab.author_index.size() == 1);
    CHECK(vocab.author_index.count("alice smith") == 1);
}

TEST_CASE("shuffling training records only permutes columns") {
    const std::set<std::string> none;
    std::vector<RawRecord> train;
    for (int i = 0; i < 12; ++i)
        train.push_back(rec("r" + std::to_string(i), {"author " + std::to_string(i % 5)},
                            "word" + std::to_string(i) + " common", "venue " + std::to_string(i % 3)));

    const Vocabulary base = build_vocabulary(train, none);
    std::vector<std::size_t> base_counts;
    for (const auto& r : train) base_counts.push_back(vectorize(r, base, none).active.size());

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 4; ++trial) {
        std::shuffle(train.begin(), train.end(), rng);
        const Vocabulary shuffled = build_vocabulary(train, none);
        CHECK(shuffled.dims == base.dims);
        std::vector<std::size_t> counts;
        for (const auto& r : train) counts.push_back(vectorize(r, shuffled, none).active.size());
        // compare as multisets: record order changed with the shuffle
        std::sort(counts.begin(), counts.end());
        std::vector<std::size_t> sorted_base = base_counts;
        std::sort(sorted_base.begin(), sorted_base.end());
        CHECK(counts == sorted_base);
    }
}

TEST_CASE("feature subsets restrict vocabulary blocks") {
    const std::set<std::string> none;
    const std::vector<RawRecord> train = {rec("r1", {"Alice Smith"}, "alpha beta", "VLDB")};
    const Vocabulary authors_only = build_vocabulary(train, none, FeatureSet{true, false, false});
    CHECK(authors_only.dims == 1);
    CHECK(authors_only.token_index.empty());
    const Vocabulary no_venue = build_vocabulary(train, none, FeatureSet{true, true, false});
    CHECK(no_venue.dims == 3);
}

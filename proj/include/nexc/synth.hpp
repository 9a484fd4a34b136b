#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nexc/linalg.hpp"
#include "nexc/records.hpp"

namespace nexc {

struct EmbeddedTrainingSet {
    Matrix embeds; // n x h
    std::vector<std::string> labels;
    std::vector<int> years;
};

struct EmbeddedStream {
    Matrix embeds; // r x h, time order
    std::vector<std::string> ids;
    std::vector<int> years;
};

namespace synth {

/// Gaussian mixture stream in embedding space: known training classes plus
/// classes that first appear after the split, non-negative by shifting.
struct GaussianStreamSpec {
    int h = 8;
    int classes_train = 5;
    int classes_emerging = 3;
    int n_train = 300;
    int n_test = 150;
    double separation = 8.0; // pairwise mean distance in within-class std units
    std::uint64_t seed = 12345;
    int train_year_begin = 2000;
    int train_year_end = 2009;
    int test_year = 2010;
};

struct GaussianStream {
    EmbeddedTrainingSet train;
    EmbeddedStream test;
    std::vector<std::string> test_gold;
};

GaussianStream make_gaussian_stream(const GaussianStreamSpec& spec);

/// Synthetic bibliographic dataset with a declared emergence schedule, for
/// exercising the full pipeline. separation in [0, 1] is the probability a
/// record draws features from its class pool instead of the shared pool;
/// 0 makes the classes statistically indistinguishable.
struct RecordDatasetSpec {
    std::string name_ref = "synthetic name";
    int classes = 3;
    int emerging = 1;
    int records = 60;
    double separation = 0.9;
    std::uint64_t seed = 1;
    int year_begin = 2000;
    int n_years = 8;
    int emerge_after = 5; // emerging classes appear only in later years
};

std::vector<RawRecord> make_record_dataset(const RecordDatasetSpec& spec);

} // namespace synth
} // namespace nexc

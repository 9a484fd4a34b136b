#include "nexc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "nexc/errors.hpp"

namespace nexc::synth {

namespace {

// class means on signed coordinate axes: any two distinct means are at least
// `separation` apart when within-class covariance is the identity
Matrix axis_means(int k, int h, double separation) {
    if (k > 2 * h) throw Error("make_gaussian_stream: need classes <= 2h for axis placement");
    Matrix means = Matrix::Zero(k, h);
    const double c = separation / std::sqrt(2.0);
    for (int j = 0; j < k; ++j) means(j, j % h) = (j < h) ? c : -c;
    return means;
}

std::string pad_id(int i, int width) {
    std::string s = std::to_string(i);
    return std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(s.size()))),
                       '0') +
           s;
}

} // namespace

GaussianStream make_gaussian_stream(const GaussianStreamSpec& spec) {
    if (spec.classes_train < 1 || spec.classes_emerging < 0)
        throw Error("make_gaussian_stream: bad class counts");
    if (spec.n_train < spec.classes_train + 1 || spec.n_test < 1)
        throw Error("make_gaussian_stream: too few records");

    const int k_all = spec.classes_train + spec.classes_emerging;
    const Matrix means = axis_means(k_all, spec.h, spec.separation);

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    GaussianStream out;
    out.train.embeds.resize(spec.n_train, spec.h);
    out.train.labels.reserve(static_cast<std::size_t>(spec.n_train));
    out.train.years.reserve(static_cast<std::size_t>(spec.n_train));
    const int n_train_years = spec.train_year_end - spec.train_year_begin + 1;
    for (int i = 0; i < spec.n_train; ++i) {
        const int c = i % spec.classes_train; // balanced round-robin
        for (int j = 0; j < spec.h; ++j) out.train.embeds(i, j) = means(c, j) + gauss(rng);
        out.train.labels.push_back("train_" + std::to_string(c));
        out.train.years.push_back(spec.train_year_begin + (i * n_train_years) / spec.n_train);
    }
    std::sort(out.train.years.begin(), out.train.years.end());

    out.test.embeds.resize(spec.n_test, spec.h);
    for (int i = 0; i < spec.n_test; ++i) {
        const int c = i % k_all;
        for (int j = 0; j < spec.h; ++j) out.test.embeds(i, j) = means(c, j) + gauss(rng);
        out.test.ids.push_back("t" + pad_id(i, 4));
        out.test.years.push_back(spec.test_year);
        out.test_gold.push_back(c < spec.classes_train
                                    ? "train_" + std::to_string(c)
                                    : "emerging_" + std::to_string(c - spec.classes_train));
    }

    // shift everything into the non-negative orthant
    const double low = std::min(out.train.embeds.minCoeff(), out.test.embeds.minCoeff());
    if (low < 0.0) {
        out.train.embeds.array() -= low;
        out.test.embeds.array() -= low;
    }
    return out;
}

std::vector<RawRecord> make_record_dataset(const RecordDatasetSpec& spec) {
    if (spec.classes < 2) throw Error("make_record_dataset: need at least 2 classes");
    if (spec.emerging < 0 || spec.emerging >= spec.classes)
        throw Error("make_record_dataset: emerging must be in [0, classes)");
    if (spec.records < spec.classes) throw Error("make_record_dataset: too few records");
    if (spec.separation < 0.0 || spec.separation > 1.0)
        throw Error("make_record_dataset: separation must be in [0, 1]");
    if (spec.emerge_after < 1 || spec.emerge_after >= spec.n_years)
        throw Error("make_record_dataset: emerge_after must be in [1, n_years)");

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto pick = [&](int n) { return static_cast<int>(unif(rng) * n) % n; };

    // per-class and shared feature pools
    const int n_authors_class = 5, n_words_class = 8;
    std::vector<std::vector<std::string>> class_authors(static_cast<std::size_t>(spec.classes));
    std::vector<std::vector<std::string>> class_words(static_cast<std::size_t>(spec.classes));
    std::vector<std::string> class_venue(static_cast<std::size_t>(spec.classes));
    for (int c = 0; c < spec.classes; ++c) {
        for (int a = 0; a < n_authors_class; ++a)
            class_authors[static_cast<std::size_t>(c)].push_back(
                "coauthor c" + std::to_string(c) + " a" + std::to_string(a));
        for (int w = 0; w < n_words_class; ++w)
            class_words[static_cast<std::size_t>(c)].push_back("topic" + std::to_string(c) +
                                                               "word" + std::to_string(w));
        class_venue[static_cast<std::size_t>(c)] = "venue " + std::to_string(c);
    }
    std::vector<std::string> shared_authors, shared_words, shared_venues;
    for (int a = 0; a < 10; ++a) shared_authors.push_back("coauthor shared " + std::to_string(a));
    for (int w = 0; w < 20; ++w) shared_words.push_back("commonword" + std::to_string(w));
    for (int v = 0; v < 3; ++v) shared_venues.push_back("shared venue " + std::to_string(v));

    const int first_emerging = spec.classes - spec.emerging;
    const int emerge_year = spec.year_begin + spec.emerge_after;

    std::vector<RawRecord> records;
    records.reserve(static_cast<std::size_t>(spec.records));
    for (int i = 0; i < spec.records; ++i) {
        const int year = spec.year_begin + (i * spec.n_years) / spec.records;
        const int eligible =
            (year >= emerge_year) ? spec.classes : first_emerging; // emergence schedule
        const int c = pick(eligible);
        const auto cs = static_cast<std::size_t>(c);

        RawRecord r;
        r.id = "s" + pad_id(i, 4);
        r.name_ref = spec.name_ref;
        r.year = year;
        r.gold_label = "entity_" + std::to_string(c);

        const int n_coauthors = 2 + pick(2);
        for (int a = 0; a < n_coauthors; ++a)
            r.authors.push_back(unif(rng) < spec.separation
                                    ? class_authors[cs][static_cast<std::size_t>(
                                          pick(n_authors_class))]
                                    : shared_authors[static_cast<std::size_t>(pick(10))]);
        const int n_words = 4 + pick(3);
        for (int w = 0; w < n_words; ++w) {
            if (w) r.title += ' ';
            r.title += unif(rng) < spec.separation
                           ? class_words[cs][static_cast<std::size_t>(pick(n_words_class))]
                           : shared_words[static_cast<std::size_t>(pick(20))];
        }
        r.venue = unif(rng) < spec.separation ? class_venue[cs]
                                              : shared_venues[static_cast<std::size_t>(pick(3))];
        records.push_back(std::move(r));
    }
    return records;
}

} // namespace nexc::synth

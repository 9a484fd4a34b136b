#include <doctest.h>

#include <algorithm>
#include <set>

#include "nexc/assignment.hpp"
#include "nexc/errors.hpp"
#include "nexc/harness.hpp"

using namespace nexc;

namespace {

RawRecord rec(std::string id, int year, std::string label, std::vector<std::string> authors,
              std::string title = "some title words", std::string venue = "venue") {
    RawRecord r;
    r.id = std::move(id);
    r.name_ref = "test name";
    r.year = year;
    r.authors = std::move(authors);
    r.title = std::move(title);
    r.venue = std::move(venue);
    r.gold_label = std::move(label);
    return r;
}

// two far-apart entities with disjoint co-author pools across several years;
// co-author subsets and titles rotate per record so no two records share the
// exact same feature vector
std::vector<RawRecord> two_entity_dataset() {
    const std::vector<std::string> a_authors = {"alice one", "amy two", "aaron three", "ada four"};
    const std::vector<std::string> b_authors = {"bob five", "bill six", "brad seven", "ben eight"};
    const std::vector<std::string> a_words = {"matrix", "factorization", "streams", "sketches",
                                              "sparse"};
    const std::vector<std::string> b_words = {"protein", "folding", "pathways", "membrane",
                                              "kinetics"};
    const std::vector<std::string> fillers = {"analysis", "methods", "evaluation"};

    auto title = [&](const std::vector<std::string>& words, int i) {
        return words[i % words.size()] + " " + words[(i + 2) % words.size()] + " " +
               fillers[i % fillers.size()];
    };
    std::vector<RawRecord> records;
    int id = 0;
    for (int year = 2000; year <= 2007; ++year) {
        for (int i = 0; i < 3; ++i) {
            const int v = id;
            records.push_back(rec("a" + std::to_string(id++), year, "ent_a",
                                  {a_authors[v % 4], a_authors[(v + 1) % 4]}, title(a_words, v),
                                  v % 2 ? "conf alpha" : "journal alpha"));
            records.push_back(rec("b" + std::to_string(id++), year, "ent_b",
                                  {b_authors[v % 4], b_authors[(v + 2) % 4]}, title(b_words, v),
                                  v % 2 ? "conf beta" : "journal beta"));
        }
    }
    return records;
}

PipelineConfig small_config() {
    PipelineConfig c;
    c.h = 4;
    c.kappa = 1.0;
    c.m_offset = 20.0;
    c.mode = Mode::map;
    c.seed = 5;
    c.nmf_max_iters = 300;
    c.nmf_inner_steps = 4;
    c.crp_samples = 500;
    return c;
}

} // namespace

TEST_CASE("split_by_recent_years keeps the N most recent distinct years for test") {
    std::vector<RawRecord> records;
    for (int year : {2000, 2001, 2001, 2002, 2002, 2002})
        records.push_back(rec("r" + std::to_string(records.size()), year, "x", {}));

    const TemporalSplit split = split_by_recent_years(records, 1);
    CHECK(split.test.size() == 3);
    for (const auto& r : split.test) CHECK(r.year == 2002);
    CHECK(split.train.size() == 3);
    CHECK(split.t0 == 2001);

    const TemporalSplit split2 = split_by_recent_years(records, 2);
    CHECK(split2.train.size() == 1);
    CHECK(split2.test.size() == 5);

    CHECK_THROWS_AS(split_by_recent_years(records, 3), DegenerateSplit);

    // deterministic order: year ascending, id ascending inside a year
    const TemporalSplit again = split_by_recent_years(records, 1);
    for (std::size_t i = 0; i < split.test.size(); ++i)
        CHECK(again.test[i].id == split.test[i].id);
}

TEST_CASE("max_score_assignment picks the total-score-maximizing matching") {
    Matrix scores(2, 2);
    scores << 0.9, 0.1, 0.8, 0.7;
    const auto match = max_score_assignment(scores);
    CHECK(match[0] == 0); // greedy would also take 0.9, but 0.9 + 0.7 beats 0.8 + 0.1
    CHECK(match[1] == 1);

    Matrix wide(1, 3);
    wide << 0.1, 0.9, 0.3;
    CHECK(max_score_assignment(wide)[0] == 1);

    Matrix tall(3, 1);
    tall << 0.1, 0.9, 0.3;
    const auto tall_match = max_score_assignment(tall);
    CHECK(tall_match[1] == 0);
    CHECK(tall_match[0] == -1);
    CHECK(tall_match[2] == -1);
}

TEST_CASE("macro_f1 on the hand-computed fixtures") {
    const std::set<std::string> no_train;

    std::map<std::string, std::string> gold = {{"1", "a"}, {"2", "a"}, {"3", "b"}, {"4", "b"}};
    std::map<std::string, std::string> perfect = {
        {"1", "new_1"}, {"2", "new_1"}, {"3", "new_2"}, {"4", "new_2"}};
    CHECK(macro_f1(gold, perfect, no_train).macro_f1 == doctest::Approx(1.0));

    // all records predicted into one new class: (2/3 + 0) / 2 = 1/3
    std::map<std::string, std::string> merged = {
        {"1", "new_1"}, {"2", "new_1"}, {"3", "new_1"}, {"4", "new_1"}};
    const EvalReport merged_report = macro_f1(gold, merged, no_train);
    CHECK(merged_report.macro_f1 == doctest::Approx(1.0 / 3.0));
    CHECK(merged_report.predicted_authors == 1);
    CHECK(merged_report.actual_authors == 2);

    // renaming predicted new labels changes nothing
    std::map<std::string, std::string> renamed = {
        {"1", "zz_9"}, {"2", "zz_9"}, {"3", "zz_9"}, {"4", "zz_9"}};
    CHECK(macro_f1(gold, renamed, no_train).macro_f1 == doctest::Approx(1.0 / 3.0));

    // training labels map to themselves
    std::map<std::string, std::string> mixed_gold = {{"1", "t"}, {"2", "t"}, {"3", "e"}};
    std::map<std::string, std::string> mixed_pred = {{"1", "t"}, {"2", "t"}, {"3", "new_1"}};
    CHECK(macro_f1(mixed_gold, mixed_pred, {"t"}).macro_f1 == doctest::Approx(1.0));

    CHECK_THROWS_AS(macro_f1(gold, {{"1", "a"}}, no_train), IdMismatch);
    CHECK_THROWS_AS(macro_f1({}, {}, no_train), IdMismatch);
}

TEST_CASE("run_stream is deterministic and separates the two-entity fixture") {
    const TemporalSplit split = split_by_recent_years(two_entity_dataset(), 2);
    PipelineConfig config = small_config();

    const StreamResult a = run_stream(split, config);
    const StreamResult b = run_stream(split, config);
    REQUIRE(a.assignments.size() == b.assignments.size());
    for (std::size_t i = 0; i < a.assignments.size(); ++i) {
        CHECK(a.assignments[i].label == b.assignments[i].label);
        CHECK(a.assignments[i].weights.log_weight_new ==
              b.assignments[i].weights.log_weight_new);
    }

    const EvalReport report = evaluate_run(split, a);
    CHECK(report.macro_f1 == doctest::Approx(1.0));
    CHECK(count_predicted_authors(a) == 2);
}

TEST_CASE("run_stream refuses an unresolved auto grid or an empty side") {
    const TemporalSplit split = split_by_recent_years(two_entity_dataset(), 2);
    PipelineConfig config = small_config();
    config.auto_h = true;
    CHECK_THROWS_AS(run_stream(split, config), Error);

    TemporalSplit empty_test = split;
    empty_test.test.clear();
    CHECK_THROWS_AS(run_stream(empty_test, small_config()), DegenerateSplit);
}

TEST_CASE("a held-out entity lands mostly in one fresh class") {
    // train on entities a/b, stream records of an unseen entity c whose titles
    // still contain in-vocabulary filler words
    std::vector<RawRecord> records = two_entity_dataset();
    const std::vector<std::string> c_authors = {"carol nine", "chris ten", "cora eleven"};
    const std::vector<std::string> c_words = {"quantum", "error", "correction", "codes"};
    int id = 0;
    for (int year = 2006; year <= 2007; ++year)
        for (int i = 0; i < 6; ++i) {
            const int v = id;
            records.push_back(rec("c" + std::to_string(id++), year, "ent_c",
                                  {c_authors[v % 3], c_authors[(v + 1) % 3]},
                                  c_words[v % 4] + " " + c_words[(v + 1) % 4] + " " +
                                      (v % 2 ? "analysis" : "methods"),
                                  "conf gamma"));
        }

    const TemporalSplit split = split_by_recent_years(records, 2);
    PipelineConfig config = small_config();
    config.h = 5;
    const StreamResult result = run_stream(split, config);

    std::map<std::string, int> c_labels;
    for (std::size_t i = 0; i < result.assignments.size(); ++i)
        if (split.test[i].gold_label == "ent_c") ++c_labels[result.assignments[i].label];
    REQUIRE(!c_labels.empty());
    int best = 0, total = 0;
    bool best_is_new = false;
    for (const auto& [label, count] : c_labels) {
        total += count;
        if (count > best) {
            best = count;
            best_is_new = label.rfind("new_", 0) == 0;
        }
    }
    CHECK(best_is_new);
    CHECK(best * 2 > total); // majority of the held-out records share one fresh label
}

TEST_CASE("repeat_runs reports mean and dispersion") {
    const TemporalSplit split = split_by_recent_years(two_entity_dataset(), 2);
    PipelineConfig config = small_config();

    const RepeatStats map_stats = repeat_runs(split, config, 3);
    CHECK(map_stats.std_f1 == 0.0); // map mode is deterministic
    CHECK(map_stats.mean_f1 == doctest::Approx(1.0));

    const RepeatStats one = repeat_runs(split, config, 1);
    CHECK(one.degenerate_std);
    CHECK(one.std_f1 == 0.0);

    config.mode = Mode::sample;
    const RepeatStats sampled = repeat_runs(split, config, 4);
    CHECK(sampled.reports.size() == 4);
    CHECK(sampled.mean_f1 > 0.5);
    CHECK(sampled.std_f1 >= 0.0);
}

TEST_CASE("feature ablation emits three scores in fixed order") {
    std::vector<RawRecord> records = two_entity_dataset();
    const TemporalSplit split = split_by_recent_years(records, 2);
    const PipelineConfig config = small_config();

    const auto rows = feature_ablation(split, config);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].first == "authors");
    CHECK(rows[1].first == "authors+keywords");
    CHECK(rows[2].first == "authors+keywords+venues");

    // the full set equals a plain run with the same seed
    const StreamResult full = run_stream(split, config);
    CHECK(rows[2].second.macro_f1 == doctest::Approx(evaluate_run(split, full).macro_f1));

    // co-authors alone carry the entire signal in this fixture
    CHECK(rows[0].second.macro_f1 == doctest::Approx(rows[2].second.macro_f1).epsilon(0.05));
}

TEST_CASE("epsilon baseline behaves at its limits") {
    const TemporalSplit split = split_by_recent_years(two_entity_dataset(), 2);
    const PipelineConfig config = small_config();

    const StreamResult tiny = epsilon_density_classify(split, config, 1e-9);
    for (const auto& a : tiny.assignments) CHECK(a.was_new);
    CHECK(count_predicted_authors(tiny) == static_cast<int>(split.test.size()));

    const StreamResult huge = epsilon_density_classify(split, config, 1e9);
    for (const auto& a : huge.assignments) CHECK(!a.was_new);

    // well-separated entities, ball sized to the intra-entity spread
    const StreamResult mid = epsilon_density_classify(split, config, 0.75);
    const EvalReport report = evaluate_run(split, mid);
    CHECK(report.macro_f1 > 0.9);
}

TEST_CASE("gaussian synthetic stream flows through the embedded engine") {
    synth::GaussianStreamSpec spec;
    spec.h = 4;
    spec.classes_train = 3;
    spec.classes_emerging = 1;
    spec.n_train = 90;
    spec.n_test = 40;
    spec.separation = 8.0;
    const synth::GaussianStream data = synth::make_gaussian_stream(spec);

    CHECK(data.train.embeds.minCoeff() >= 0.0);
    CHECK(data.test.embeds.minCoeff() >= 0.0);

    PipelineConfig config;
    config.h = 4;
    config.kappa = 0.1;
    config.m_offset = 50.0;
    config.mode = Mode::sample;
    config.seed = 3;
    config.crp_samples = 500;

    const StreamResult result = stream_embedded(data.train, data.test, config);
    std::map<std::string, std::string> gold, pred;
    for (std::size_t i = 0; i < data.test.ids.size(); ++i) {
        gold[data.test.ids[i]] = data.test_gold[i];
        pred[data.test.ids[i]] = result.assignments[i].label;
    }
    std::set<std::string> train_labels(data.train.labels.begin(), data.train.labels.end());
    const EvalReport report = macro_f1(gold, pred, train_labels);
    CHECK(report.macro_f1 > 0.8);
}

TEST_CASE("select_hyperparameters picks a feasible grid point") {
    const std::vector<RawRecord> records = two_entity_dataset();
    PipelineConfig config = small_config();
    config.auto_kappa = true; // keep the grid small: 3 candidates
    const GridSelection pick = select_hyperparameters(records, config);
    CHECK(pick.h == config.h);
    CHECK((pick.kappa == 10.0 || pick.kappa == 50.0 || pick.kappa == 100.0));
    CHECK(pick.cv_f1 >= 0.0);
}

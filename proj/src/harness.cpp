#include "nexc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>

#include "nexc/assignment.hpp"
#include "nexc/errors.hpp"

namespace nexc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void sort_by_year_then_id(std::vector<RawRecord>& records) {
    std::sort(records.begin(), records.end(), [](const RawRecord& a, const RawRecord& b) {
        return a.year != b.year ? a.year < b.year : a.id < b.id;
    });
}

std::string require_label(const RawRecord& r) {
    if (!r.gold_label)
        throw Error("record '" + r.id + "' has no gold label; training records must be labeled");
    return *r.gold_label;
}

// second-largest distinct year: the most recent training year becomes the
// emergence-measurement window of the p prior
int default_sub_split_year(const std::vector<int>& years) {
    std::set<int> distinct(years.begin(), years.end());
    if (distinct.size() < 2)
        throw DegenerateSplit("p prior needs at least two distinct training years");
    return *std::next(distinct.rbegin());
}

EmbeddedTrainingSet embed_training(const TemporalSplit& split, const FactorModel& model) {
    EmbeddedTrainingSet out;
    out.embeds = model.train_coeffs;
    out.labels.reserve(split.train.size());
    out.years.reserve(split.train.size());
    for (const auto& r : split.train) {
        out.labels.push_back(require_label(r));
        out.years.push_back(r.year);
    }
    return out;
}

double f1_from_counts(long tp, long pred_count, long gold_count) {
    if (tp == 0 || pred_count == 0 || gold_count == 0) return 0.0;
    const double prec = static_cast<double>(tp) / static_cast<double>(pred_count);
    const double rec = static_cast<double>(tp) / static_cast<double>(gold_count);
    return 2.0 * prec * rec / (prec + rec);
}

} // namespace

TemporalSplit split_by_recent_years(std::vector<RawRecord> records, int n_test_years) {
    if (n_test_years < 1) throw Error("split_by_recent_years: N must be >= 1");
    std::set<int> years;
    for (const auto& r : records) years.insert(r.year);
    if (static_cast<int>(years.size()) <= n_test_years)
        throw DegenerateSplit("split_by_recent_years: records span only " +
                              std::to_string(years.size()) + " distinct years, need > " +
                              std::to_string(n_test_years));

    auto it = years.rbegin();
    std::advance(it, n_test_years - 1);
    const int first_test_year = *it;

    TemporalSplit split;
    split.n_test_years = n_test_years;
    for (auto& r : records) {
        if (r.year >= first_test_year)
            split.test.push_back(std::move(r));
        else
            split.train.push_back(std::move(r));
    }
    if (split.train.empty() || split.test.empty())
        throw DegenerateSplit("split_by_recent_years: empty train or test side");
    sort_by_year_then_id(split.train);
    sort_by_year_then_id(split.test);
    split.t0 = split.train.back().year;
    return split;
}

Hyperparameters prepare_hyperparameters(const EmbeddedTrainingSet& train,
                                        const PipelineConfig& config, double* p_prior_out) {
    const int h = static_cast<int>(train.embeds.cols());
    const double m = h + config.m_offset;

    Hyperparameters hyper;
    try {
        hyper = estimate_hyperparameters(train.embeds, train.labels, config.kappa, m);
    } catch (const DegenerateCovariance&) {
        // pooled covariance can be singular with tiny classes; ridge and retry
        hyper = Hyperparameters{};
        hyper.mu0 = train.embeds.colwise().mean().transpose();
        hyper.kappa = config.kappa;
        hyper.m = m;
        Matrix scatter_sum = Matrix::Zero(h, h);
        std::map<std::string, ClassStats> per_class;
        for (Eigen::Index i = 0; i < train.embeds.rows(); ++i) {
            const auto& label = train.labels[static_cast<std::size_t>(i)];
            const Vector e = train.embeds.row(i).transpose();
            auto it = per_class.find(label);
            if (it == per_class.end())
                per_class.emplace(label, new_class_stats(label, e));
            else
                it->second = update_stats(it->second, e);
        }
        for (const auto& [label, stats] : per_class) scatter_sum += stats.scatter;
        const double n = static_cast<double>(train.embeds.rows());
        const double k = static_cast<double>(per_class.size());
        Matrix sp = (m - h - 1.0) * scatter_sum / (n - k);
        const double lambda = std::max(1e-6 * sp.trace() / h, 1e-9);
        hyper.sigma0 = sp + lambda * Matrix::Identity(h, h);
        std::cerr << "nexc: warning: pooled covariance singular, ridged with " << lambda << "\n";
    }

    const int sub_split = default_sub_split_year(train.years);
    const double p = estimate_p_prior(train.years, train.labels, sub_split);
    if (p_prior_out) *p_prior_out = p;
    hyper.alpha = calibrate_alpha(p, static_cast<long>(train.labels.size()), config.crp_samples,
                                  config.crp_seed);
    hyper.validate();
    return hyper;
}

StreamResult stream_embedded(const EmbeddedTrainingSet& train, const EmbeddedStream& stream,
                             const PipelineConfig& config) {
    if (stream.embeds.rows() == 0)
        throw DegenerateSplit("stream_embedded: empty stream, nothing to assign");

    StreamResult result;
    Hyperparameters hyper = prepare_hyperparameters(train, config, &result.p_prior);
    result.alpha = hyper.alpha;

    ClassRegistry registry = ClassRegistry::from_training(train.embeds, train.labels);
    result.k_train = registry.k_train();
    OnlineClassifier clf(std::move(registry), std::move(hyper), config.mode, config.seed);

    const auto start = Clock::now();
    for (Eigen::Index i = 0; i < stream.embeds.rows(); ++i) {
        const Vector e = stream.embeds.row(i).transpose();
        StreamAssignment a;
        a.id = stream.ids[static_cast<std::size_t>(i)];
        a.year = stream.years[static_cast<std::size_t>(i)];
        a.weights = clf.assignment_weights(e);
        auto [label, was_new] = clf.decide(e);
        clf.absorb(e, label);
        a.label = std::move(label);
        a.was_new = was_new;
        result.assignments.push_back(std::move(a));
    }
    result.elapsed_seconds = seconds_since(start);
    return result;
}

StreamResult run_stream(const TemporalSplit& split, const PipelineConfig& config) {
    if (config.auto_h || config.auto_kappa || config.auto_m)
        throw Error("run_stream: resolve auto hyperparameters with select_hyperparameters first");
    if (split.train.empty() || split.test.empty())
        throw DegenerateSplit("run_stream: empty train or test side");

    const Vocabulary vocab = build_vocabulary(split.train, config.stopwords, config.features);
    const Matrix x = feature_matrix(split.train, vocab, config.stopwords);
    const int h = std::min<int>(config.h, static_cast<int>(std::min(x.rows(), x.cols())));
    const FactorModel model =
        fit_nnmf(x, h, config.nmf_max_iters, config.nmf_tol, config.seed, config.nmf_inner_steps);

    const EmbeddedTrainingSet train = embed_training(split, model);

    StreamResult result;
    Hyperparameters hyper = prepare_hyperparameters(train, config, &result.p_prior);
    result.alpha = hyper.alpha;
    ClassRegistry registry = ClassRegistry::from_training(train.embeds, train.labels);
    result.k_train = registry.k_train();
    OnlineClassifier clf(std::move(registry), std::move(hyper), config.mode, config.seed);

    const auto start = Clock::now();
    for (std::size_t i = 0; i < split.test.size(); ++i) {
        const Vector xe = to_dense(vectorize(split.test[i], vocab, config.stopwords));
        const Vector e = project(xe, model, config.project_tol);

        StreamAssignment a;
        a.id = split.test[i].id;
        a.year = split.test[i].year;
        a.weights = clf.assignment_weights(e);
        auto [label, was_new] = clf.decide(e);
        clf.absorb(e, label);
        a.label = std::move(label);
        a.was_new = was_new;
        result.assignments.push_back(std::move(a));
    }
    result.elapsed_seconds = seconds_since(start);
    return result;
}

EvalReport macro_f1(const std::map<std::string, std::string>& gold,
                    const std::map<std::string, std::string>& predicted,
                    const std::set<std::string>& train_labels) {
    if (gold.empty()) throw IdMismatch("macro_f1: empty gold set");
    if (gold.size() != predicted.size())
        throw IdMismatch("macro_f1: gold and predicted id sets differ in size");
    for (const auto& [id, label] : gold)
        if (!predicted.count(id)) throw IdMismatch("macro_f1: no prediction for id '" + id + "'");

    std::vector<std::string> gold_labels, pred_labels;
    for (const auto& [id, g] : gold) {
        gold_labels.push_back(g);
        pred_labels.push_back(predicted.at(id));
    }
    const std::size_t n = gold_labels.size();

    std::set<std::string> gold_classes(gold_labels.begin(), gold_labels.end());
    std::vector<std::string> emerging_gold;
    for (const auto& g : gold_classes)
        if (!train_labels.count(g)) emerging_gold.push_back(g);
    std::set<std::string> new_pred_set;
    for (const auto& p : pred_labels)
        if (!train_labels.count(p)) new_pred_set.insert(p);
    std::vector<std::string> new_preds(new_pred_set.begin(), new_pred_set.end());

    std::map<std::string, long> pred_counts, gold_counts;
    std::map<std::pair<std::string, std::string>, long> joint;
    for (std::size_t i = 0; i < n; ++i) {
        ++pred_counts[pred_labels[i]];
        ++gold_counts[gold_labels[i]];
        ++joint[{gold_labels[i], pred_labels[i]}];
    }
    auto pair_f1 = [&](const std::string& g, const std::string& p) {
        auto it = joint.find({g, p});
        const long tp = it == joint.end() ? 0 : it->second;
        return f1_from_counts(tp, pred_counts[p], gold_counts[g]);
    };

    // gold label -> predicted label that represents it
    std::map<std::string, std::string> matched;
    for (const auto& g : gold_classes)
        if (train_labels.count(g)) matched[g] = g;

    if (!emerging_gold.empty() && !new_preds.empty()) {
        Matrix scores(static_cast<Eigen::Index>(emerging_gold.size()),
                      static_cast<Eigen::Index>(new_preds.size()));
        for (std::size_t a = 0; a < emerging_gold.size(); ++a)
            for (std::size_t b = 0; b < new_preds.size(); ++b)
                scores(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                    pair_f1(emerging_gold[a], new_preds[b]);
        const std::vector<int> row_to_col = max_score_assignment(scores);
        for (std::size_t a = 0; a < emerging_gold.size(); ++a)
            if (row_to_col[a] >= 0)
                matched[emerging_gold[a]] = new_preds[static_cast<std::size_t>(row_to_col[a])];
    }

    EvalReport report;
    double total = 0.0;
    for (const auto& g : gold_classes) {
        double score = 0.0;
        if (auto it = matched.find(g); it != matched.end()) score = pair_f1(g, it->second);
        report.per_class_f1[g] = score;
        total += score;
    }
    report.macro_f1 = total / static_cast<double>(gold_classes.size());
    report.actual_authors = static_cast<int>(gold_classes.size());
    std::set<std::string> distinct_preds(pred_labels.begin(), pred_labels.end());
    report.predicted_authors = static_cast<int>(distinct_preds.size());
    return report;
}

EvalReport evaluate_run(const TemporalSplit& split, const StreamResult& result) {
    std::map<std::string, std::string> gold, predicted;
    for (const auto& r : split.test) gold[r.id] = require_label(r);
    for (const auto& a : result.assignments) predicted[a.id] = a.label;
    std::set<std::string> train_labels;
    for (const auto& r : split.train) train_labels.insert(require_label(r));
    return macro_f1(gold, predicted, train_labels);
}

int count_predicted_authors(const StreamResult& result) {
    std::set<std::string> labels;
    for (const auto& a : result.assignments) labels.insert(a.label);
    return static_cast<int>(labels.size());
}

RepeatStats repeat_runs(const TemporalSplit& split, const PipelineConfig& config, int runs) {
    if (runs < 1) throw Error("repeat_runs: runs must be >= 1");
    RepeatStats stats;
    stats.reports.resize(static_cast<std::size_t>(runs));
    stats.elapsed_seconds.resize(static_cast<std::size_t>(runs));

#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < runs; ++i) {
        PipelineConfig run_config = config;
        run_config.seed = config.seed + static_cast<std::uint64_t>(i);
        const StreamResult result = run_stream(split, run_config);
        stats.reports[static_cast<std::size_t>(i)] = evaluate_run(split, result);
        stats.elapsed_seconds[static_cast<std::size_t>(i)] = result.elapsed_seconds;
    }

    double sum = 0.0;
    for (const auto& r : stats.reports) sum += r.macro_f1;
    stats.mean_f1 = sum / static_cast<double>(runs);
    if (runs == 1) {
        stats.std_f1 = 0.0;
        stats.degenerate_std = true;
    } else {
        double ss = 0.0;
        for (const auto& r : stats.reports) {
            const double d = r.macro_f1 - stats.mean_f1;
            ss += d * d;
        }
        stats.std_f1 = std::sqrt(ss / static_cast<double>(runs - 1));
    }
    return stats;
}

std::vector<std::pair<std::string, EvalReport>> feature_ablation(const TemporalSplit& split,
                                                                 const PipelineConfig& config) {
    const std::vector<FeatureSet> sets = {
        FeatureSet{true, false, false},
        FeatureSet{true, true, false},
        FeatureSet{true, true, true},
    };
    std::vector<std::pair<std::string, EvalReport>> out;
    for (const auto& fs : sets) {
        PipelineConfig c = config;
        c.features = fs;
        const StreamResult result = run_stream(split, c);
        out.emplace_back(fs.name(), evaluate_run(split, result));
    }
    return out;
}

StreamResult epsilon_density_classify(const TemporalSplit& split, const PipelineConfig& config,
                                      double epsilon) {
    if (!(epsilon > 0.0)) throw Error("epsilon_density_classify: epsilon must be positive");
    if (split.train.empty() || split.test.empty())
        throw DegenerateSplit("epsilon_density_classify: empty split side");

    const Vocabulary vocab = build_vocabulary(split.train, config.stopwords, config.features);
    const Matrix x = feature_matrix(split.train, vocab, config.stopwords);
    const int h = std::min<int>(config.h, static_cast<int>(std::min(x.rows(), x.cols())));
    const FactorModel model =
        fit_nnmf(x, h, config.nmf_max_iters, config.nmf_tol, config.seed, config.nmf_inner_steps);

    std::vector<Vector> pool;
    std::vector<std::string> pool_labels;
    for (std::size_t i = 0; i < split.train.size(); ++i) {
        pool.push_back(model.train_coeffs.row(static_cast<Eigen::Index>(i)).transpose());
        pool_labels.push_back(require_label(split.train[i]));
    }

    StreamResult result;
    std::set<std::string> train_labels(pool_labels.begin(), pool_labels.end());
    result.k_train = static_cast<int>(train_labels.size());

    const auto start = Clock::now();
    long fresh = 0;
    const double eps2 = epsilon * epsilon;
    for (const auto& r : split.test) {
        const Vector e = project(to_dense(vectorize(r, vocab, config.stopwords)), model,
                                 config.project_tol);
        std::map<std::string, long> inside; // members of each class within the ball
        for (std::size_t i = 0; i < pool.size(); ++i)
            if ((pool[i] - e).squaredNorm() <= eps2) ++inside[pool_labels[i]];

        StreamAssignment a;
        a.id = r.id;
        a.year = r.year;
        if (inside.empty()) {
            a.label = "new_" + std::to_string(++fresh);
            a.was_new = true;
        } else {
            auto best = inside.begin();
            for (auto it = inside.begin(); it != inside.end(); ++it)
                if (it->second > best->second) best = it;
            a.label = best->first;
            a.was_new = false;
        }
        pool.push_back(e);
        pool_labels.push_back(a.label);
        result.assignments.push_back(std::move(a));
    }
    result.elapsed_seconds = seconds_since(start);
    return result;
}

GridSelection select_hyperparameters(const std::vector<RawRecord>& train,
                                     const PipelineConfig& config) {
    std::vector<RawRecord> sorted = train;
    sort_by_year_then_id(sorted);
    if (sorted.size() < 4)
        throw DegenerateSplit("select_hyperparameters: too few training records for a 2-fold split");

    TemporalSplit fold;
    const std::size_t half = sorted.size() / 2;
    fold.train.assign(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(half));
    fold.test.assign(sorted.begin() + static_cast<std::ptrdiff_t>(half), sorted.end());
    fold.t0 = fold.train.back().year;
    fold.n_test_years = 0;

    std::vector<int> h_grid;
    if (config.auto_h)
        for (int h = 5; h <= 20; ++h) h_grid.push_back(h);
    else
        h_grid.push_back(config.h);
    const std::vector<double> kappa_grid =
        config.auto_kappa ? std::vector<double>{10.0, 50.0, 100.0}
                          : std::vector<double>{config.kappa};
    const std::vector<double> m_grid = config.auto_m ? std::vector<double>{10.0, 50.0, 100.0}
                                                     : std::vector<double>{config.m_offset};

    GridSelection best;
    for (int h : h_grid) {
        for (double kappa : kappa_grid) {
            for (double m_offset : m_grid) {
                PipelineConfig c = config;
                c.h = h;
                c.kappa = kappa;
                c.m_offset = m_offset;
                c.auto_h = c.auto_kappa = c.auto_m = false;
                c.mode = Mode::map; // deterministic validation pass
                double f1 = -1.0;
                try {
                    const StreamResult result = run_stream(fold, c);
                    f1 = evaluate_run(fold, result).macro_f1;
                } catch (const Error&) {
                    continue; // candidate infeasible on this fold (e.g. h too large)
                }
                if (f1 > best.cv_f1) best = GridSelection{h, kappa, m_offset, f1};
            }
        }
    }
    if (best.cv_f1 < 0.0)
        throw Error("select_hyperparameters: no feasible grid point on the validation fold");
    return best;
}

} // namespace nexc

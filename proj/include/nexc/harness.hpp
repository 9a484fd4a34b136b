#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "nexc/dp.hpp"
#include "nexc/features.hpp"
#include "nexc/innmf.hpp"
#include "nexc/records.hpp"
#include "nexc/synth.hpp"

namespace nexc {

/// Train/test partition by publication year: the test side holds the records
/// of the N most recent distinct years, both sides sorted by (year, id).
struct TemporalSplit {
    int n_test_years = 0;
    int t0 = 0; // most recent training year
    std::vector<RawRecord> train;
    std::vector<RawRecord> test;
};

TemporalSplit split_by_recent_years(std::vector<RawRecord> records, int n_test_years);

struct PipelineConfig {
    int h = 10;
    double kappa = 10.0;
    double m_offset = 50.0; // m = h + m_offset
    bool auto_h = false;
    bool auto_kappa = false;
    bool auto_m = false;
    Mode mode = Mode::sample;
    std::uint64_t seed = 1;
    FeatureSet features = FeatureSet::all();
    std::set<std::string> stopwords = default_stopwords();

    int nmf_max_iters = 500;
    double nmf_tol = 1e-5;
    int nmf_inner_steps = 1;
    double project_tol = 1e-8;

    int crp_samples = 2000;
    std::uint64_t crp_seed = 77; // fixed across repeated runs: alpha is a training-time quantity
};

struct StreamAssignment {
    std::string id;
    int year = 0;
    std::string label;
    bool was_new = false;
    AssignmentWeights weights; // snapshot at decision time
};

struct StreamResult {
    std::vector<StreamAssignment> assignments;
    double elapsed_seconds = 0.0; // streaming phase only (projection + assignment)
    int k_train = 0;
    double alpha = 0.0;
    double p_prior = 0.0;
};

struct EvalReport {
    double macro_f1 = 0.0;
    int predicted_authors = 0;
    int actual_authors = 0;
    std::map<std::string, double> per_class_f1; // gold classes present in test
};

// Hyperparameter estimation plus empirical-Bayes alpha from the training
// side: pooled-covariance prior, emergence probability from the most recent
// training year, CRP calibration with horizon n = training size. A singular
// pooled covariance is ridged once (logged) before giving up.
Hyperparameters prepare_hyperparameters(const EmbeddedTrainingSet& train,
                                        const PipelineConfig& config, double* p_prior_out = nullptr);

/// Core engine on embedded streams (no feature pipeline): estimate, calibrate,
/// then one sweep over the stream with self-training absorption.
StreamResult stream_embedded(const EmbeddedTrainingSet& train, const EmbeddedStream& stream,
                             const PipelineConfig& config);

/// Full pipeline: vocabulary + NNMF on the training window, hyperparameter
/// and alpha estimation, then the one-sweep streaming pass over the test side.
StreamResult run_stream(const TemporalSplit& split, const PipelineConfig& config);

// Macro-F1 with emerging-class matching: training labels map to themselves,
// predicted new labels are matched one-to-one to emerging gold classes by
// maximum-F1 assignment, unmatched gold classes score zero, and the mean runs
// over gold classes present in the test window.
EvalReport macro_f1(const std::map<std::string, std::string>& gold,
                    const std::map<std::string, std::string>& predicted,
                    const std::set<std::string>& train_labels);

EvalReport evaluate_run(const TemporalSplit& split, const StreamResult& result);

int count_predicted_authors(const StreamResult& result);

struct RepeatStats {
    double mean_f1 = 0.0;
    double std_f1 = 0.0;
    bool degenerate_std = false; // single run: std reported as 0
    std::vector<EvalReport> reports;
    std::vector<double> elapsed_seconds;
};

/// Repeats run_stream with seeds base_seed + run index; sample standard deviation.
RepeatStats repeat_runs(const TemporalSplit& split, const PipelineConfig& config, int runs = 20);

/// Pipeline reruns over {authors}, {authors+keywords}, {authors+keywords+venues}.
std::vector<std::pair<std::string, EvalReport>> feature_ablation(const TemporalSplit& split,
                                                                 const PipelineConfig& config);

// Khabsa-style density baseline on the same embeddings: a test record joins
// the class with the most members within Euclidean distance epsilon, or opens
// a new class when the neighborhood is empty.
StreamResult epsilon_density_classify(const TemporalSplit& split, const PipelineConfig& config,
                                      double epsilon);

struct GridSelection {
    int h = 0;
    double kappa = 0.0;
    double m_offset = 0.0;
    double cv_f1 = -1.0;
};

// Temporal 2-fold grid search on the training window (older half trains,
// newer half validates, map mode): h over 5..20, kappa over {10,50,100},
// m_offset over {10,50,100}, each dimension only when its auto flag is set.
GridSelection select_hyperparameters(const std::vector<RawRecord>& train,
                                     const PipelineConfig& config);

} // namespace nexc

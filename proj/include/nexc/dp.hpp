#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "nexc/niw.hpp"

namespace nexc {

enum class Mode { sample, map };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& s);

/// Dynamic label -> ClassStats map in insertion order. Grows as classes are
/// discovered online; n_total counts every absorbed record (training plus
/// online), which is the n + i - 1 term of the assignment weights.
class ClassRegistry {
public:
    ClassRegistry() = default;

    static ClassRegistry from_training(const Matrix& embeds,
                                       const std::vector<std::string>& labels);

    const std::vector<ClassStats>& classes() const { return classes_; }
    const ClassStats* find(const std::string& label) const;
    long n_total() const { return n_total_; }
    int k_train() const { return k_train_; }
    int k_new() const { return k_new_; }
    int size() const { return static_cast<int>(classes_.size()); }

    /// Adds a brand-new online class around e (k_new grows).
    void add_online_class(const std::string& label, const Vector& e);
    /// Absorbs e into an existing class. Throws UnknownLabel.
    void absorb_existing(const std::string& label, const Vector& e);

    // used by checkpoint restore
    void restore_class(const ClassStats& stats);
    void set_counters(long n_total, int k_train, int k_new);

private:
    std::vector<ClassStats> classes_;
    std::unordered_map<std::string, std::size_t> index_;
    long n_total_ = 0;
    int k_train_ = 0;
    int k_new_ = 0;
};

/// Log-weights of the one-sweep Gibbs conditional: one entry per existing
/// class (n_j / (alpha + n_total) times its predictive density) plus the
/// emerging-class entry (alpha / (alpha + n_total) times the marginal).
struct AssignmentWeights {
    std::vector<std::string> labels; // registry order
    std::vector<double> log_weights; // aligned with labels
    double log_weight_new = 0.0;

    /// exp-normalized probabilities; the last entry is the new-class mass.
    std::vector<double> normalized() const;
    /// index of the largest existing weight, ties to the earliest class
    int argmax_existing() const;
};

/// Streaming non-exhaustive classifier: Dirichlet-process prior over known
/// and emerging classes with NNIW Student-t predictives, assigning each
/// record once (one sweep) and absorbing it under its predicted label.
class OnlineClassifier {
public:
    OnlineClassifier(ClassRegistry registry, Hyperparameters hyper, Mode mode,
                     std::uint64_t seed);

    AssignmentWeights assignment_weights(const Vector& e) const;

    // Picks a label without absorbing: a categorical draw from the
    // normalized weights in sample mode, the decision rule (existing j* when
    // its weight >= the new-class weight) in map mode. Advances the RNG only
    // in sample mode.
    std::pair<std::string, bool> decide(const Vector& e);

    /// decide() followed by absorb(); the one-sweep step for one record.
    std::pair<std::string, bool> classify(const Vector& e);

    // Adds e to an existing class, or creates the class when label is the
    // next fresh label ("new_<k_new+1>"). Anything else throws UnknownLabel.
    void absorb(const Vector& e, const std::string& label);

    std::string next_fresh_label() const;

    const ClassRegistry& registry() const { return registry_; }
    const Hyperparameters& hyper() const { return hyper_; }
    Mode mode() const { return mode_; }

    // Bit-reproducible checkpoint (JSON): registry, hyperparameters,
    // counters, mode, and the exact RNG state, so a paused stream resumes
    // with identical behavior.
    void save(const std::string& path) const;
    static OnlineClassifier load(const std::string& path);

private:
    ClassRegistry registry_;
    Hyperparameters hyper_;
    Mode mode_;
    std::mt19937_64 rng_;
    std::uint64_t seed_ = 0;
    long new_label_counter_ = 0;

    friend struct ClassifierCheckpoint;
};

/// Table sizes of one Chinese-restaurant-process draw.
struct CrpSample {
    std::vector<long> table_sizes;
    int k_tables = 0;
};

// Sequential seating: customer i opens a new table with probability
// alpha / (alpha + i - 1), otherwise joins a table proportionally to its size.
CrpSample simulate_crp(double alpha, long n, std::uint64_t seed);
CrpSample simulate_crp(double alpha, long n, std::mt19937_64& rng);

// Empirical-Bayes concentration: returns the alpha whose expected fraction of
// new-table customers over n seatings, estimated from num_samples CRP draws,
// is closest to p_target. Golden-section search over log10(alpha) in [-6, 6]
// with common random numbers across candidate alphas.
double calibrate_alpha(double p_target, long n, int num_samples, std::uint64_t seed);

// Emergence prior from a temporal sub-partition of the training data:
// the fraction of records after sub_split_year whose label never occurs on or
// before it, clamped to [1/(2n), 1 - 1/(2n)] with n the post-split count.
double estimate_p_prior(const std::vector<int>& years, const std::vector<std::string>& labels,
                        int sub_split_year);

} // namespace nexc

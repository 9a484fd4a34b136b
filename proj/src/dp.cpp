#include "nexc/dp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "nexc/errors.hpp"

namespace nexc {

std::string to_string(Mode mode) { return mode == Mode::sample ? "sample" : "map"; }

Mode mode_from_string(const std::string& s) {
    if (s == "sample") return Mode::sample;
    if (s == "map") return Mode::map;
    throw Error("unknown mode '" + s + "' (expected sample|map)");
}

ClassRegistry ClassRegistry::from_training(const Matrix& embeds,
                                           const std::vector<std::string>& labels) {
    if (static_cast<std::size_t>(embeds.rows()) != labels.size())
        throw DimensionError("ClassRegistry: one label per embedding row required");
    ClassRegistry reg;
    for (Eigen::Index i = 0; i < embeds.rows(); ++i) {
        const auto& label = labels[static_cast<std::size_t>(i)];
        const Vector e = embeds.row(i).transpose();
        auto it = reg.index_.find(label);
        if (it == reg.index_.end()) {
            reg.index_.emplace(label, reg.classes_.size());
            reg.classes_.push_back(new_class_stats(label, e));
        } else {
            reg.classes_[it->second] = update_stats(reg.classes_[it->second], e);
        }
        ++reg.n_total_;
    }
    reg.k_train_ = static_cast<int>(reg.classes_.size());
    return reg;
}

const ClassStats* ClassRegistry::find(const std::string& label) const {
    auto it = index_.find(label);
    return it == index_.end() ? nullptr : &classes_[it->second];
}

void ClassRegistry::add_online_class(const std::string& label, const Vector& e) {
    if (index_.count(label)) throw Error("ClassRegistry: class '" + label + "' already exists");
    index_.emplace(label, classes_.size());
    classes_.push_back(new_class_stats(label, e));
    ++k_new_;
    ++n_total_;
}

void ClassRegistry::absorb_existing(const std::string& label, const Vector& e) {
    auto it = index_.find(label);
    if (it == index_.end()) throw UnknownLabel("ClassRegistry: no class '" + label + "'");
    classes_[it->second] = update_stats(classes_[it->second], e);
    ++n_total_;
}

void ClassRegistry::restore_class(const ClassStats& stats) {
    index_.emplace(stats.label, classes_.size());
    classes_.push_back(stats);
}

void ClassRegistry::set_counters(long n_total, int k_train, int k_new) {
    n_total_ = n_total;
    k_train_ = k_train;
    k_new_ = k_new;
}

std::vector<double> AssignmentWeights::normalized() const {
    std::vector<double> probs(log_weights.size() + 1);
    double max_lw = log_weight_new;
    for (double lw : log_weights) max_lw = std::max(max_lw, lw);
    double total = 0.0;
    for (std::size_t j = 0; j < log_weights.size(); ++j) {
        probs[j] = std::exp(log_weights[j] - max_lw);
        total += probs[j];
    }
    probs.back() = std::exp(log_weight_new - max_lw);
    total += probs.back();
    for (double& p : probs) p /= total;
    return probs;
}

int AssignmentWeights::argmax_existing() const {
    int best = -1;
    for (std::size_t j = 0; j < log_weights.size(); ++j)
        if (best < 0 || log_weights[j] > log_weights[static_cast<std::size_t>(best)])
            best = static_cast<int>(j);
    return best;
}

OnlineClassifier::OnlineClassifier(ClassRegistry registry, Hyperparameters hyper, Mode mode,
                                   std::uint64_t seed)
    : registry_(std::move(registry)), hyper_(std::move(hyper)), mode_(mode), rng_(seed),
      seed_(seed) {
    if (!hyper_.has_alpha()) throw Error("OnlineClassifier: hyperparameters carry no alpha");
    hyper_.validate();
}

AssignmentWeights OnlineClassifier::assignment_weights(const Vector& e) const {
    AssignmentWeights w;
    const double log_denom = std::log(hyper_.alpha + static_cast<double>(registry_.n_total()));
    w.labels.reserve(registry_.classes().size());
    w.log_weights.reserve(registry_.classes().size());
    for (const auto& stats : registry_.classes()) {
        const double lw = std::log(static_cast<double>(stats.n)) - log_denom +
                          log_density(posterior_predictive(stats, hyper_), e);
        w.labels.push_back(stats.label);
        w.log_weights.push_back(lw);
    }
    w.log_weight_new =
        std::log(hyper_.alpha) - log_denom + log_density(marginal_predictive(hyper_), e);
    return w;
}

std::string OnlineClassifier::next_fresh_label() const {
    return "new_" + std::to_string(registry_.k_new() + 1);
}

std::pair<std::string, bool> OnlineClassifier::decide(const Vector& e) {
    const AssignmentWeights w = assignment_weights(e);
    if (mode_ == Mode::map) {
        const int j = w.argmax_existing();
        if (j >= 0 && w.log_weights[static_cast<std::size_t>(j)] >= w.log_weight_new)
            return {w.labels[static_cast<std::size_t>(j)], false};
        return {next_fresh_label(), true};
    }
    const std::vector<double> probs = w.normalized();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng_);
    double cum = 0.0;
    for (std::size_t j = 0; j + 1 < probs.size(); ++j) {
        cum += probs[j];
        if (u < cum) return {w.labels[j], false};
    }
    return {next_fresh_label(), true};
}

std::pair<std::string, bool> OnlineClassifier::classify(const Vector& e) {
    auto decision = decide(e);
    absorb(e, decision.first);
    return decision;
}

void OnlineClassifier::absorb(const Vector& e, const std::string& label) {
    if (registry_.find(label)) {
        registry_.absorb_existing(label, e);
        return;
    }
    if (label == next_fresh_label()) {
        registry_.add_online_class(label, e);
        ++new_label_counter_;
        return;
    }
    throw UnknownLabel("absorb: '" + label + "' is neither an existing class nor the next fresh label");
}

void OnlineClassifier::save(const std::string& path) const {
    nlohmann::json j;
    j["format"] = "nexc-classifier-v1";
    j["mode"] = to_string(mode_);
    j["seed"] = seed_;
    std::ostringstream rng_state;
    rng_state << rng_;
    j["rng_state"] = rng_state.str();
    j["new_label_counter"] = new_label_counter_;
    j["n_total"] = registry_.n_total();
    j["k_train"] = registry_.k_train();
    j["k_new"] = registry_.k_new();

    auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    auto mat = [](const Matrix& m) {
        std::vector<double> out;
        out.reserve(static_cast<std::size_t>(m.size()));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(i, c));
        return out;
    };
    j["hyper"] = {{"mu0", vec(hyper_.mu0)}, {"kappa", hyper_.kappa},
                  {"sigma0", mat(hyper_.sigma0)}, {"m", hyper_.m}, {"alpha", hyper_.alpha}};
    auto& classes = j["classes"] = nlohmann::json::array();
    for (const auto& s : registry_.classes())
        classes.push_back({{"label", s.label}, {"n", s.n}, {"mean", vec(s.mean)},
                           {"scatter", mat(s.scatter)}});

    std::ofstream out(path);
    if (!out) throw Error(path + ": cannot open for writing");
    out << j.dump() << '\n';
}

OnlineClassifier OnlineClassifier::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(path + ": cannot open");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    if (j.value("format", "") != "nexc-classifier-v1")
        throw ParseError(path + ": not a nexc classifier checkpoint");

    auto vec = [](const std::vector<double>& v) {
        return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())).eval();
    };
    auto mat = [](const std::vector<double>& v, Eigen::Index dim) {
        if (static_cast<Eigen::Index>(v.size()) != dim * dim)
            throw ParseError("classifier checkpoint: matrix entry count mismatch");
        Matrix m(dim, dim);
        std::size_t idx = 0;
        for (Eigen::Index i = 0; i < dim; ++i)
            for (Eigen::Index c = 0; c < dim; ++c) m(i, c) = v[idx++];
        return m;
    };

    Hyperparameters hyper;
    const auto& jh = j.at("hyper");
    hyper.mu0 = vec(jh.at("mu0").get<std::vector<double>>());
    hyper.kappa = jh.at("kappa").get<double>();
    hyper.sigma0 = mat(jh.at("sigma0").get<std::vector<double>>(), hyper.mu0.size());
    hyper.m = jh.at("m").get<double>();
    hyper.alpha = jh.at("alpha").get<double>();

    ClassRegistry reg;
    for (const auto& jc : j.at("classes")) {
        ClassStats s;
        s.label = jc.at("label").get<std::string>();
        s.n = jc.at("n").get<long>();
        s.mean = vec(jc.at("mean").get<std::vector<double>>());
        s.scatter = mat(jc.at("scatter").get<std::vector<double>>(), s.mean.size());
        reg.restore_class(s);
    }
    reg.set_counters(j.at("n_total").get<long>(), j.at("k_train").get<int>(),
                     j.at("k_new").get<int>());

    OnlineClassifier clf(std::move(reg), std::move(hyper),
                         mode_from_string(j.at("mode").get<std::string>()),
                         j.at("seed").get<std::uint64_t>());
    clf.new_label_counter_ = j.at("new_label_counter").get<long>();
    std::istringstream rng_state(j.at("rng_state").get<std::string>());
    rng_state >> clf.rng_;
    if (!rng_state) throw ParseError(path + ": bad rng state");
    return clf;
}

CrpSample simulate_crp(double alpha, long n, std::mt19937_64& rng) {
    if (!(alpha > 0.0)) throw Error("simulate_crp: alpha must be positive");
    if (n < 1) throw Error("simulate_crp: n must be >= 1");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    CrpSample sample;
    for (long i = 1; i <= n; ++i) {
        const double u = unif(rng);
        const double p_new = alpha / (alpha + static_cast<double>(i - 1));
        if (u < p_new) {
            sample.table_sizes.push_back(1);
            continue;
        }
        // conditional remainder is uniform; reuse it for the table choice
        const double v = (u - p_new) / (1.0 - p_new) * static_cast<double>(i - 1);
        double cum = 0.0;
        std::size_t pick = sample.table_sizes.size() - 1;
        for (std::size_t t = 0; t < sample.table_sizes.size(); ++t) {
            cum += static_cast<double>(sample.table_sizes[t]);
            if (v < cum) {
                pick = t;
                break;
            }
        }
        ++sample.table_sizes[pick];
    }
    sample.k_tables = static_cast<int>(sample.table_sizes.size());
    return sample;
}

CrpSample simulate_crp(double alpha, long n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return simulate_crp(alpha, n, rng);
}

double calibrate_alpha(double p_target, long n, int num_samples, std::uint64_t seed) {
    if (!(p_target > 0.0 && p_target < 1.0))
        throw Error("calibrate_alpha: p_target must lie in (0, 1)");
    if (n < 1 || num_samples < 1) throw Error("calibrate_alpha: n and num_samples must be >= 1");

    // common random numbers: one uniform per seating, shared across alphas,
    // so p_hat(alpha) is monotone and the search is stable
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> u(static_cast<std::size_t>(num_samples) * static_cast<std::size_t>(n));
    for (double& x : u) x = unif(rng);

    const auto p_hat = [&](double alpha) {
        long tables = 0;
        std::size_t idx = 0;
        for (int s = 0; s < num_samples; ++s)
            for (long i = 1; i <= n; ++i, ++idx)
                if (u[idx] < alpha / (alpha + static_cast<double>(i - 1))) ++tables;
        return static_cast<double>(tables) /
               (static_cast<double>(num_samples) * static_cast<double>(n));
    };

    const auto objective = [&](double log10_alpha) {
        return std::abs(p_hat(std::pow(10.0, log10_alpha)) - p_target);
    };

    double lo = -6.0, hi = 6.0;
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - ratio * (hi - lo), x2 = lo + ratio * (hi - lo);
    double f1 = objective(x1), f2 = objective(x2);
    for (int it = 0; it < 72; ++it) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = objective(x2);
        }
    }
    return std::pow(10.0, 0.5 * (lo + hi));
}

double estimate_p_prior(const std::vector<int>& years, const std::vector<std::string>& labels,
                        int sub_split_year) {
    if (years.size() != labels.size())
        throw DimensionError("estimate_p_prior: years and labels must align");
    std::set<std::string> seen;
    long n_post = 0, n_emerging = 0;
    for (std::size_t i = 0; i < years.size(); ++i) {
        if (years[i] <= sub_split_year) {
            seen.insert(labels[i]);
        } else {
            ++n_post;
            if (!seen.count(labels[i])) ++n_emerging;
        }
    }
    const long n_pre = static_cast<long>(years.size()) - n_post;
    if (n_pre == 0 || n_post == 0)
        throw DegenerateSplit("estimate_p_prior: sub-split year leaves one side empty");
    const double lo = 1.0 / (2.0 * static_cast<double>(n_post));
    const double p = static_cast<double>(n_emerging) / static_cast<double>(n_post);
    return std::clamp(p, lo, 1.0 - lo);
}

} // namespace nexc

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "nexc/errors.hpp"
#include "nexc/harness.hpp"
#include "nexc/synth.hpp"

namespace fs = std::filesystem;
using namespace nexc;

namespace {

std::string slug(const std::string& s) {
    std::string out;
    for (char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    return out;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    return s.substr(begin, s.find_last_not_of(" \t\r") - begin + 1);
}

// Expands `--config FILE` into per-option tokens inserted right after the
// subcommand name, before the explicit flags. Options are parsed take-last,
// so precedence is flags > config file > defaults. The file is flat
// `key = value` lines, `#` comments.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
    }
    if (path.empty()) return args;

    std::ifstream in(path);
    if (!in) throw Error(path + ": cannot open config file");
    std::vector<std::string> expanded;
    if (!args.empty()) expanded.push_back(args[0]); // keep the subcommand first
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string text = trim(line);
        if (text.empty() || text[0] == '#') continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw ParseError(path + ": line " + std::to_string(lineno) +
                             ": expected key = value");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty()) throw ParseError(path + ": line " + std::to_string(lineno) + ": empty key");
        expanded.push_back("--" + key);
        expanded.push_back(value);
    }
    for (std::size_t i = 1; i < args.size(); ++i) expanded.push_back(args[i]);
    return expanded;
}

std::string fmt(double v, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

struct HyperArgs {
    std::string h = "10";
    std::string kappa = "10";
    std::string m_offset = "50";
    std::string mode = "sample";
    std::uint64_t seed = 1;
    int nmf_max_iters = 500;
    double nmf_tol = 1e-5;
    int nmf_inner_steps = 1;
    int crp_samples = 2000;
    std::string features = "authors,keywords,venues";
    std::string stopword_file;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--latent-dim", h, "latent dimensionality, or 'auto' for the 5..20 grid");
        cmd.add_option("--kappa", kappa, "mean-shrinkage strength, or 'auto' for {10,50,100}");
        cmd.add_option("--m-offset", m_offset, "m = h + offset, or 'auto' for {10,50,100}");
        cmd.add_option("--mode", mode, "sample | map")->check(CLI::IsMember({"sample", "map"}));
        cmd.add_option("--seed", seed, "base seed");
        cmd.add_option("--nmf-max-iters", nmf_max_iters, "NNMF iteration cap");
        cmd.add_option("--nmf-tol", nmf_tol, "NNMF relative objective tolerance");
        cmd.add_option("--nmf-inner-steps", nmf_inner_steps, "multiplicative sub-updates per sweep");
        cmd.add_option("--crp-samples", crp_samples, "CRP draws per alpha candidate");
        cmd.add_option("--features", features, "comma list out of authors,keywords,venues");
        cmd.add_option("--stopwords", stopword_file, "override the built-in stopword list");
    }

    PipelineConfig to_config() const {
        PipelineConfig c;
        auto parse_dim = [](const std::string& text, bool& auto_flag, auto& slot, const char* what) {
            if (text == "auto") {
                auto_flag = true;
                return;
            }
            try {
                slot = static_cast<std::remove_reference_t<decltype(slot)>>(std::stod(text));
            } catch (const std::exception&) {
                throw Error(std::string(what) + ": expected a number or 'auto', got '" + text + "'");
            }
        };
        parse_dim(h, c.auto_h, c.h, "--latent-dim");
        parse_dim(kappa, c.auto_kappa, c.kappa, "--kappa");
        parse_dim(m_offset, c.auto_m, c.m_offset, "--m-offset");
        c.mode = mode_from_string(mode);
        c.seed = seed;
        c.nmf_max_iters = nmf_max_iters;
        c.nmf_tol = nmf_tol;
        c.nmf_inner_steps = nmf_inner_steps;
        c.crp_samples = crp_samples;

        c.features = FeatureSet{false, false, false};
        std::stringstream ss(features);
        std::string part;
        while (std::getline(ss, part, ',')) {
            if (part == "authors")
                c.features.authors = true;
            else if (part == "keywords")
                c.features.keywords = true;
            else if (part == "venues")
                c.features.venues = true;
            else if (!part.empty())
                throw Error("--features: unknown block '" + part + "'");
        }
        if (!c.features.authors && !c.features.keywords && !c.features.venues)
            throw Error("--features: at least one block required");

        if (!stopword_file.empty()) {
            std::ifstream in(stopword_file);
            if (!in) throw Error(stopword_file + ": cannot open stopword list");
            c.stopwords.clear();
            std::string w;
            while (in >> w) c.stopwords.insert(w);
        }
        return c;
    }
};

std::vector<std::string> resolve_refs(const std::vector<RawRecord>& records,
                                      const std::string& requested) {
    const std::vector<std::string> all = list_name_refs(records);
    if (requested.empty() || requested == "all") return all;
    for (const auto& r : all)
        if (r == requested) return {requested};
    std::string msg = "unknown name reference '" + requested + "'; available:";
    for (const auto& r : all) msg += " '" + r + "'";
    throw Error(msg);
}

void write_assignment_rows(std::ofstream& out, const std::string& name_ref, std::uint64_t seed,
                           const TemporalSplit& split, const StreamResult& result) {
    std::map<std::string, std::string> gold;
    for (const auto& r : split.test)
        gold[r.id] = r.gold_label ? *r.gold_label : std::string("?");
    long seq = 0;
    for (const auto& a : result.assignments) {
        double logw_assigned = a.weights.log_weight_new;
        for (std::size_t j = 0; j < a.weights.labels.size(); ++j)
            if (a.weights.labels[j] == a.label) logw_assigned = a.weights.log_weights[j];
        out << name_ref << '\t' << seed << '\t' << seq++ << '\t' << a.id << '\t' << a.year << '\t'
            << gold[a.id] << '\t' << a.label << '\t' << (a.was_new ? 1 : 0) << '\t'
            << fmt(logw_assigned) << '\t' << fmt(a.weights.log_weight_new) << '\t'
            << a.weights.labels.size() << '\n';
    }
}

PipelineConfig resolve_auto(const TemporalSplit& split, const PipelineConfig& config,
                            const std::string& name_ref) {
    if (!(config.auto_h || config.auto_kappa || config.auto_m)) return config;
    const GridSelection pick = select_hyperparameters(split.train, config);
    std::cerr << "nexc: " << name_ref << ": grid search chose h=" << pick.h
              << " kappa=" << pick.kappa << " m_offset=" << pick.m_offset
              << " (validation macro-F1 " << fmt(pick.cv_f1, 3) << ")\n";
    PipelineConfig out = config;
    out.h = pick.h;
    out.kappa = pick.kappa;
    out.m_offset = pick.m_offset;
    out.auto_h = out.auto_kappa = out.auto_m = false;
    return out;
}

int cmd_prepare(const std::string& dataset, const std::string& out_dir,
                const std::string& name_ref, const HyperArgs& hyper) {
    const PipelineConfig config = hyper.to_config();
    const auto records = load_records(dataset);
    fs::create_directories(out_dir);

    for (const auto& ref : resolve_refs(records, name_ref)) {
        const auto subset = filter_name_ref(records, ref);
        const Vocabulary vocab = build_vocabulary(subset, config.stopwords, config.features);

        nlohmann::json jv;
        jv["format"] = "nexc-vocab-v1";
        jv["name_ref"] = ref;
        jv["d"] = vocab.dims;
        jv["features"] = config.features.name();
        auto block = [](const std::map<std::string, int>& index) {
            std::vector<std::string> names(index.size());
            std::size_t i = 0;
            for (const auto& [name, col] : index) names[i++] = name;
            return names; // std::map iterates lexicographically == column order
        };
        jv["authors"] = block(vocab.author_index);
        jv["tokens"] = block(vocab.token_index);
        jv["venues"] = block(vocab.venue_index);

        const std::string base = (fs::path(out_dir) / slug(ref)).string();
        std::ofstream vout(base + ".vocab.json");
        vout << jv.dump(2) << '\n';

        std::ofstream mout(base + ".matrix.tsv");
        mout << "# nexc-matrix v1\n# name_ref: " << ref << "\td: " << vocab.dims << '\n';
        for (const auto& r : subset) {
            mout << r.id << '\t';
            const auto bv = vectorize(r, vocab, config.stopwords);
            for (std::size_t i = 0; i < bv.active.size(); ++i)
                mout << (i ? " " : "") << bv.active[i];
            mout << '\n';
        }
        std::cout << ref << ": d=" << vocab.dims << ", records=" << subset.size() << '\n';
    }
    return 0;
}

int cmd_run(const std::string& dataset, const std::string& out_dir, const std::string& name_ref,
            int test_years, int runs, const HyperArgs& hyper) {
    const PipelineConfig base_config = hyper.to_config();
    const auto records = load_records(dataset);
    fs::create_directories(out_dir);

    std::ofstream metrics(fs::path(out_dir) / "metrics.tsv");
    metrics << "# nexc-metrics v1\n"
            << "name_ref\tN\tseed\tmacro_f1\tpredicted_authors\tactual_authors\telapsed_seconds\n";
    std::ofstream summary(fs::path(out_dir) / "summary.tsv");
    summary << "# nexc-summary v1\n"
            << "name_ref\tN\truns\tmacro_f1_mean\tmacro_f1_std\tpredicted_authors_mean\tactual_authors\n";
    std::ofstream assignments(fs::path(out_dir) / "assignments.tsv");
    assignments << "# nexc-assignments v1\n"
                << "name_ref\tseed\tseq\tid\tyear\tgold\tpredicted\twas_new\tlogw_assigned\tlogw_new\tn_classes\n";

    for (const auto& ref : resolve_refs(records, name_ref)) {
        TemporalSplit split;
        try {
            split = split_by_recent_years(filter_name_ref(records, ref), test_years);
        } catch (const DegenerateSplit& e) {
            std::cerr << "nexc: skipping '" << ref << "': " << e.what() << '\n';
            continue;
        }
        const PipelineConfig config = resolve_auto(split, base_config, ref);

        double pred_sum = 0.0;
        RepeatStats stats;
        stats.reports.reserve(static_cast<std::size_t>(runs));
        std::vector<StreamResult> results(static_cast<std::size_t>(runs));
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < runs; ++i) {
            PipelineConfig rc = config;
            rc.seed = config.seed + static_cast<std::uint64_t>(i);
            results[static_cast<std::size_t>(i)] = run_stream(split, rc);
        }
        int actual_authors = 0;
        std::vector<double> f1s;
        for (int i = 0; i < runs; ++i) {
            const auto& result = results[static_cast<std::size_t>(i)];
            const EvalReport report = evaluate_run(split, result);
            const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(i);
            metrics << ref << '\t' << test_years << '\t' << seed << '\t' << fmt(report.macro_f1)
                    << '\t' << report.predicted_authors << '\t' << report.actual_authors << '\t'
                    << fmt(result.elapsed_seconds, 4) << '\n';
            write_assignment_rows(assignments, ref, seed, split, result);
            f1s.push_back(report.macro_f1);
            pred_sum += report.predicted_authors;
            actual_authors = report.actual_authors;
        }
        double mean = 0.0;
        for (double f : f1s) mean += f;
        mean /= static_cast<double>(runs);
        double sd = 0.0;
        if (runs > 1) {
            for (double f : f1s) sd += (f - mean) * (f - mean);
            sd = std::sqrt(sd / static_cast<double>(runs - 1));
        }
        summary << ref << '\t' << test_years << '\t' << runs << '\t' << fmt(mean) << '\t'
                << fmt(sd) << '\t' << fmt(pred_sum / runs, 2) << '\t' << actual_authors << '\n';
        std::cout << ref << ": macro-F1 " << fmt(mean, 3) << " (" << fmt(sd, 3) << ") over "
                  << runs << " runs\n";
    }
    return 0;
}

int cmd_calibrate_alpha(double p, long n, int samples, std::uint64_t seed) {
    const double alpha = calibrate_alpha(p, n, samples, seed);
    // fresh draws at the calibrated alpha, for an honest achieved-p readout
    std::mt19937_64 rng(seed + 1);
    double k_sum = 0.0;
    for (int s = 0; s < samples; ++s)
        k_sum += static_cast<double>(simulate_crp(alpha, n, rng).k_tables);
    const double p_hat = k_sum / static_cast<double>(samples) / static_cast<double>(n);
    std::cout << "alpha\t" << fmt(alpha) << "\nachieved_p\t" << fmt(p_hat) << "\ntarget_p\t"
              << fmt(p) << '\n';
    return 0;
}

int cmd_ablate(const std::string& dataset, const std::string& out_dir,
               const std::string& name_ref, int test_years, const HyperArgs& hyper) {
    const PipelineConfig base_config = hyper.to_config();
    const auto records = load_records(dataset);
    fs::create_directories(out_dir);

    std::ofstream out(fs::path(out_dir) / "ablation.tsv");
    out << "# nexc-ablation v1\nname_ref\tfeatures\tmacro_f1\tpredicted_authors\tactual_authors\n";
    for (const auto& ref : resolve_refs(records, name_ref)) {
        const TemporalSplit split =
            split_by_recent_years(filter_name_ref(records, ref), test_years);
        const PipelineConfig config = resolve_auto(split, base_config, ref);
        for (const auto& [features, report] : feature_ablation(split, config)) {
            out << ref << '\t' << features << '\t' << fmt(report.macro_f1) << '\t'
                << report.predicted_authors << '\t' << report.actual_authors << '\n';
            std::cout << ref << " [" << features << "]: macro-F1 " << fmt(report.macro_f1, 3)
                      << '\n';
        }
    }
    return 0;
}

int cmd_synth(const std::string& out_file, int classes, int emerging, int records,
              double separation, std::uint64_t seed, const std::string& name_ref) {
    synth::RecordDatasetSpec spec;
    spec.classes = classes;
    spec.emerging = emerging;
    spec.records = records;
    spec.separation = separation;
    spec.seed = seed;
    if (!name_ref.empty()) spec.name_ref = name_ref;
    save_records(synth::make_record_dataset(spec), out_file);
    std::cout << out_file << ": " << records << " records, " << classes << " classes ("
              << emerging << " emerging)\n";
    return 0;
}

int cmd_baseline_eps(const std::string& dataset, const std::string& out_dir,
                     const std::string& name_ref, int test_years, double epsilon,
                     const HyperArgs& hyper) {
    const PipelineConfig base_config = hyper.to_config();
    const auto records = load_records(dataset);
    fs::create_directories(out_dir);

    std::ofstream metrics(fs::path(out_dir) / "baseline_metrics.tsv");
    metrics << "# nexc-metrics v1\n"
            << "name_ref\tN\tseed\tmacro_f1\tpredicted_authors\tactual_authors\telapsed_seconds\n";
    std::ofstream assignments(fs::path(out_dir) / "baseline_assignments.tsv");
    assignments << "# nexc-assignments v1\n"
                << "name_ref\tseed\tseq\tid\tyear\tgold\tpredicted\twas_new\tlogw_assigned\tlogw_new\tn_classes\n";

    for (const auto& ref : resolve_refs(records, name_ref)) {
        const TemporalSplit split =
            split_by_recent_years(filter_name_ref(records, ref), test_years);
        const PipelineConfig config = resolve_auto(split, base_config, ref);
        const StreamResult result = epsilon_density_classify(split, config, epsilon);
        const EvalReport report = evaluate_run(split, result);
        metrics << ref << '\t' << test_years << '\t' << config.seed << '\t'
                << fmt(report.macro_f1) << '\t' << report.predicted_authors << '\t'
                << report.actual_authors << '\t' << fmt(result.elapsed_seconds, 4) << '\n';
        write_assignment_rows(assignments, ref, config.seed, split, result);
        std::cout << ref << " [eps=" << epsilon << "]: macro-F1 " << fmt(report.macro_f1, 3)
                  << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Streaming non-exhaustive name disambiguation"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    std::string dataset, out_path, name_ref;
    int test_years = 2, runs = 20;
    HyperArgs hyper;

    auto* prepare = app.add_subcommand("prepare", "build vocabulary and feature matrix files");
    prepare->add_option("--dataset", dataset)->required();
    prepare->add_option("--out", out_path)->required();
    prepare->add_option("--name-ref", name_ref, "one reference, or all");
    hyper.add_to(*prepare);

    auto* run = app.add_subcommand("run", "train, stream, evaluate");
    run->add_option("--dataset", dataset)->required();
    run->add_option("--out", out_path)->required();
    run->add_option("--name-ref", name_ref, "one reference, or all");
    run->add_option("--test-years", test_years, "most recent N years form the test stream");
    run->add_option("--runs", runs, "repeated sampled runs per reference");
    hyper.add_to(*run);

    double p_target = 0.1;
    long crp_n = 100;
    int crp_samples = 10000;
    std::uint64_t crp_seed = 1;
    auto* cal = app.add_subcommand("calibrate-alpha", "empirical-Bayes DP concentration");
    cal->add_option("--p", p_target, "target emergence probability")->required();
    cal->add_option("--n", crp_n, "CRP horizon (training-set size)")->required();
    cal->add_option("--samples", crp_samples);
    cal->add_option("--seed", crp_seed);

    auto* ablate = app.add_subcommand("ablate", "feature-contribution analysis");
    ablate->add_option("--dataset", dataset)->required();
    ablate->add_option("--out", out_path)->required();
    ablate->add_option("--name-ref", name_ref);
    ablate->add_option("--test-years", test_years);
    hyper.add_to(*ablate);

    std::string synth_out = "synthetic.jsonl", synth_ref;
    int synth_classes = 3, synth_emerging = 1, synth_records = 60;
    double synth_separation = 0.9;
    std::uint64_t synth_seed = 1;
    auto* synth_cmd = app.add_subcommand("synth", "generate a labeled synthetic dataset");
    synth_cmd->add_option("--out", synth_out)->required();
    synth_cmd->add_option("--classes", synth_classes);
    synth_cmd->add_option("--emerging", synth_emerging);
    synth_cmd->add_option("--records", synth_records);
    synth_cmd->add_option("--separation", synth_separation, "0 = indistinguishable classes");
    synth_cmd->add_option("--seed", synth_seed);
    synth_cmd->add_option("--name-ref", synth_ref);

    double epsilon = 1.0;
    auto* baseline = app.add_subcommand("baseline-eps", "epsilon-neighborhood density baseline");
    baseline->add_option("--dataset", dataset)->required();
    baseline->add_option("--out", out_path)->required();
    baseline->add_option("--name-ref", name_ref);
    baseline->add_option("--test-years", test_years);
    baseline->add_option("--epsilon", epsilon)->required();
    hyper.add_to(*baseline);

    std::string config_path;
    for (auto* cmd : app.get_subcommands(std::function<bool(CLI::App*)>()))
        cmd->add_option("--config", config_path, "flat key=value configuration file");

    try {
        std::vector<std::string> args = expand_config(argc, argv);
        std::reverse(args.begin(), args.end()); // CLI11 consumes tokens back to front
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "nexc: error: " << e.what() << '\n';
        return 1;
    }

    try {
        if (prepare->parsed()) return cmd_prepare(dataset, out_path, name_ref, hyper);
        if (run->parsed()) return cmd_run(dataset, out_path, name_ref, test_years, runs, hyper);
        if (cal->parsed()) return cmd_calibrate_alpha(p_target, crp_n, crp_samples, crp_seed);
        if (ablate->parsed()) return cmd_ablate(dataset, out_path, name_ref, test_years, hyper);
        if (synth_cmd->parsed())
            return cmd_synth(synth_out, synth_classes, synth_emerging, synth_records,
                             synth_separation, synth_seed, synth_ref);
        if (baseline->parsed())
            return cmd_baseline_eps(dataset, out_path, name_ref, test_years, epsilon, hyper);
    } catch (const std::exception& e) {
        std::cerr << "nexc: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

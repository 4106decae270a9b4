// Command-line front end for the greg toolkit.
//
// Subcommands: preprocess, augment, train, infer, eval, transfer, topics.
// Every artifact-producing run writes its outputs plus exactly one
// manifest.json (command, effective config, input hashes, output paths, seed,
// tool version, wall time) into --out. Errors leave as a single JSON object
// on stderr and a nonzero exit code. No command reads and writes the same
// path.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "greg/augment.hpp"
#include "greg/config.hpp"
#include "greg/corpus.hpp"
#include "greg/embeddings.hpp"
#include "greg/eval.hpp"
#include "greg/hash.hpp"
#include "greg/ntm.hpp"
#include "greg/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Shared option plumbing

struct CommonOpts {
    std::string config_path;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out_dir;
};

void add_common(CLI::App* sub, CommonOpts& opts, bool out_required = true) {
    sub->add_option("--config,-c", opts.config_path, "key = value configuration file");
    sub->add_option("--seed", opts.seed, "override the configured random seed");
    sub->add_option("--threads", opts.threads, "cap library parallelism (>= 1)");
    auto* out = sub->add_option("--out,-o", opts.out_dir, "output directory");
    if (out_required) out->required();
}

// Resolve defaults <- config file <- (caller applies flag overrides after).
greg::ToolSettings load_settings(const CLI::App& sub, const CommonOpts& opts) {
    greg::ToolSettings settings = opts.config_path.empty()
                                      ? greg::resolve_settings(greg::ParsedConfig{})
                                      : greg::resolve_settings(
                                            greg::parse_config_file(opts.config_path));
    if (sub.count("--seed")) settings.train.seed = opts.seed;
    if (sub.count("--threads")) {
        if (opts.threads < 1) throw std::invalid_argument("--threads must be >= 1");
        greg::set_max_threads(opts.threads);
    }
    return settings;
}

json settings_json(const greg::ToolSettings& s) {
    return json{
        {"model", {{"topics", s.train.topics}, {"hidden", s.train.hidden}}},
        {"regulariser",
         {{"gamma", s.train.gamma},
          {"beta", s.train.aug_beta},
          {"augment", greg::to_string(s.train.augment)},
          {"neighbor_pool", s.train.neighbor_pool},
          {"top_i", s.train.top_i}}},
        {"sinkhorn",
         {{"lambda", s.train.sinkhorn.lambda},
          {"max_iters", s.train.sinkhorn.max_iters},
          {"stop_threshold", s.train.sinkhorn.stop_threshold}}},
        {"train",
         {{"batch_size", s.train.batch_size},
          {"learning_rate", s.train.learning_rate},
          {"epochs", s.train.epochs},
          {"seed", s.train.seed}}},
        {"eval",
         {{"trees", s.eval.forest.trees},
          {"max_depth", s.eval.forest.max_depth},
          {"npmi_top_words", s.eval.npmi_top_words},
          {"npmi_top_fraction", s.eval.npmi_top_fraction}}},
        {"pipeline",
         {{"noise_strength", s.noise_strength},
          {"min_df", s.min_df},
          {"max_df_frac", s.max_df_frac},
          {"split_ratio", s.split_ratio}}},
    };
}

// ---------------------------------------------------------------------------
// Manifest

class ManifestWriter {
public:
    ManifestWriter(std::string command, const greg::ToolSettings& settings, std::uint64_t seed)
        : start_(std::chrono::steady_clock::now()) {
        j_["command"] = std::move(command);
        j_["config"] = settings_json(settings);
        j_["inputs"] = json::object();
        j_["outputs"] = json::array();
        j_["seed"] = seed;
        j_["tool_version"] = kToolVersion;
    }

    void input(const std::string& role, const fs::path& path, std::uint64_t hash) {
        j_["inputs"][role] = {{"path", path.string()}, {"hash", greg::hash_hex(hash)}};
    }

    void output(const fs::path& path) { j_["outputs"].push_back(path.string()); }

    void write(const fs::path& dir) {
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
        j_["wall_seconds"] = elapsed.count();
        const fs::path file = dir / "manifest.json";
        std::ofstream out(file, std::ios::binary);
        out << j_.dump(2) << "\n";
        if (!out) throw std::runtime_error("cannot write '" + file.string() + "'");
    }

private:
    json j_;
    std::chrono::steady_clock::time_point start_;
};

// ---------------------------------------------------------------------------
// Small helpers

fs::path prepare_out_dir(const std::string& out_dir, const std::vector<fs::path>& inputs) {
    const fs::path out(out_dir);
    std::error_code ec;
    const fs::path out_canon = fs::weakly_canonical(out, ec);
    for (const fs::path& in : inputs) {
        if (fs::weakly_canonical(in, ec) == out_canon) {
            throw std::invalid_argument("output path '" + out.string() +
                                        "' is also an input; no command reads and writes "
                                        "the same path");
        }
    }
    fs::create_directories(out);
    return out;
}

std::ofstream open_out(const fs::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + file.string() + "' for writing");
    return out;
}

greg::Corpus load_corpus_checked(const fs::path& dir, const greg::Checkpoint& ckpt,
                                 const std::string& role) {
    greg::Corpus corpus = greg::load_corpus(dir);
    if (corpus.vocab.content_hash() != ckpt.vocab_hash) {
        throw std::invalid_argument(
            role + " corpus '" + dir.string() +
            "' does not match the checkpoint vocabulary (hash mismatch); preprocess the "
            "corpora against a united vocabulary before mixing them with this model");
    }
    return corpus;
}

std::uint64_t parse_seed(const CLI::App& sub, const CommonOpts& opts,
                         const greg::ToolSettings& settings) {
    return sub.count("--seed") ? opts.seed : settings.train.seed;
}

// ---------------------------------------------------------------------------
// preprocess

struct PreprocessOpts {
    CommonOpts common;
    std::string input;
    std::string embeddings;
    std::string stop_words;
    std::int64_t min_df = 0;
    double max_df_frac = 0.0;
    double split_ratio = 0.0;
};

void run_preprocess(const CLI::App& sub, const PreprocessOpts& o) {
    greg::ToolSettings s = load_settings(sub, o.common);
    if (sub.count("--min-df")) s.min_df = o.min_df;
    if (sub.count("--max-df-frac")) s.max_df_frac = o.max_df_frac;
    if (sub.count("--split-ratio")) s.split_ratio = o.split_ratio;
    const std::uint64_t seed = parse_seed(sub, o.common, s);

    std::vector<fs::path> inputs = {o.input, o.embeddings};
    if (!o.stop_words.empty()) inputs.push_back(o.stop_words);
    if (!o.common.config_path.empty()) inputs.push_back(o.common.config_path);
    const fs::path out = prepare_out_dir(o.common.out_dir, inputs);

    const std::vector<greg::RawDocument> raw = greg::read_jsonl(o.input);
    const greg::StopWordList stops = o.stop_words.empty()
                                         ? greg::builtin_stop_words()
                                         : greg::load_stop_words(o.stop_words);
    const auto embeddable = greg::load_embedding_words(o.embeddings);
    greg::PreprocessResult result =
        greg::preprocess_corpus(raw, stops, s.min_df, s.max_df_frac, embeddable);
    greg::Corpus corpus = greg::split_train_test(std::move(result.corpus), s.split_ratio, seed);
    greg::save_corpus(corpus, out, result.summary);

    ManifestWriter manifest("preprocess", s, seed);
    manifest.input("input", o.input, greg::fnv1a64_file(o.input));
    manifest.input("embeddings", o.embeddings, greg::fnv1a64_file(o.embeddings));
    if (!o.stop_words.empty()) {
        manifest.input("stop_words", o.stop_words, greg::fnv1a64_file(o.stop_words));
    }
    if (!o.common.config_path.empty()) {
        manifest.input("config", o.common.config_path, greg::fnv1a64_file(o.common.config_path));
    }
    manifest.output(out);
    manifest.write(out);

    std::cout << "kept " << result.summary.n_kept << " of " << result.summary.n_input
              << " documents, vocabulary " << corpus.vocab.size() << ", train "
              << corpus.train_idx.size() << " / test " << corpus.test_idx.size() << " -> "
              << out.string() << "\n";
}

// ---------------------------------------------------------------------------
// augment

struct AugmentOpts {
    CommonOpts common;
    std::string corpus;
    std::string embeddings;
    double strength = 0.0;
    int neighbor_pool = 0;
};

void run_augment(const CLI::App& sub, const AugmentOpts& o) {
    greg::ToolSettings s = load_settings(sub, o.common);
    if (sub.count("--strength")) s.noise_strength = o.strength;
    if (sub.count("--neighbor-pool")) s.train.neighbor_pool = o.neighbor_pool;
    const std::uint64_t seed = parse_seed(sub, o.common, s);

    std::vector<fs::path> inputs = {o.corpus, o.embeddings};
    if (!o.common.config_path.empty()) inputs.push_back(o.common.config_path);
    const fs::path out = prepare_out_dir(o.common.out_dir, inputs);

    const greg::Corpus corpus = greg::load_corpus(o.corpus);
    const std::uint64_t source_hash = greg::corpus_content_hash(corpus);
    const greg::EmbeddingTable table = greg::load_embeddings(o.embeddings, corpus.vocab);
    const greg::NeighborIndex neighbors =
        greg::build_neighbor_index(table, s.train.neighbor_pool);
    const greg::NoisyCorpusResult noisy =
        greg::make_noisy_corpus(corpus, s.noise_strength, seed, neighbors);

    greg::PreprocessSummary summary;
    summary.n_input = corpus.size();
    summary.n_kept = noisy.corpus.size();
    summary.max_df_frac = 1.0;
    greg::save_corpus(noisy.corpus, out, summary);

    int degenerate = 0;
    json traces = json::array();
    for (std::size_t d = 0; d < noisy.traces.size(); ++d) {
        json ops = json::array();
        for (const greg::AugmentKind kind : noisy.traces[d]) ops.push_back(greg::to_string(kind));
        traces.push_back(json{{"doc", noisy.corpus.doc_ids[d]},
                              {"ops", std::move(ops)},
                              {"degenerate", static_cast<bool>(noisy.degenerate[d])}});
        if (noisy.degenerate[d]) ++degenerate;
    }
    const json augment_meta = {{"source", o.corpus},
                               {"source_hash", greg::hash_hex(source_hash)},
                               {"strength", noisy.strength},
                               {"seed", noisy.seed},
                               {"degenerate_documents", degenerate},
                               {"traces", std::move(traces)}};
    const fs::path meta_file = out / "augment.json";
    open_out(meta_file) << augment_meta.dump(2) << "\n";

    ManifestWriter manifest("augment", s, seed);
    manifest.input("corpus", o.corpus, source_hash);
    manifest.input("embeddings", o.embeddings, greg::fnv1a64_file(o.embeddings));
    if (!o.common.config_path.empty()) {
        manifest.input("config", o.common.config_path, greg::fnv1a64_file(o.common.config_path));
    }
    manifest.output(out);
    manifest.output(meta_file);
    manifest.write(out);

    std::cout << "augmented " << noisy.corpus.size() << " documents at strength "
              << noisy.strength << " (" << degenerate << " degenerate) -> " << out.string()
              << "\n";
}

// ---------------------------------------------------------------------------
// train

struct TrainOpts {
    CommonOpts common;
    std::string corpus;
    std::string embeddings;
    int topics = 0;
    int hidden = 0;
    double gamma = 0.0;
    double beta = 0.0;
    std::string augment;
    int neighbor_pool = 0;
    int top_i = 0;
    double lambda = 0.0;
    int max_iters = 0;
    double stop_threshold = 0.0;
    int batch_size = 0;
    double learning_rate = 0.0;
    int epochs = 0;
};

void run_train(const CLI::App& sub, const TrainOpts& o) {
    greg::ToolSettings s = load_settings(sub, o.common);
    if (sub.count("--topics")) s.train.topics = o.topics;
    if (sub.count("--hidden")) s.train.hidden = o.hidden;
    if (sub.count("--gamma")) s.train.gamma = o.gamma;
    if (sub.count("--beta")) s.train.aug_beta = o.beta;
    if (sub.count("--augment")) s.train.augment = greg::augment_kind_from_string(o.augment);
    if (sub.count("--neighbor-pool")) s.train.neighbor_pool = o.neighbor_pool;
    if (sub.count("--top-i")) s.train.top_i = o.top_i;
    if (sub.count("--lambda")) s.train.sinkhorn.lambda = o.lambda;
    if (sub.count("--max-iters")) s.train.sinkhorn.max_iters = o.max_iters;
    if (sub.count("--stop-threshold")) s.train.sinkhorn.stop_threshold = o.stop_threshold;
    if (sub.count("--batch-size")) s.train.batch_size = o.batch_size;
    if (sub.count("--learning-rate")) s.train.learning_rate = o.learning_rate;
    if (sub.count("--epochs")) s.train.epochs = o.epochs;

    std::vector<fs::path> inputs = {o.corpus, o.embeddings};
    if (!o.common.config_path.empty()) inputs.push_back(o.common.config_path);
    const fs::path out = prepare_out_dir(o.common.out_dir, inputs);

    const greg::Corpus corpus = greg::load_corpus(o.corpus);
    const std::uint64_t corpus_hash = greg::corpus_content_hash(corpus);
    const greg::EmbeddingTable table = greg::load_embeddings(o.embeddings, corpus.vocab);

    const fs::path log_file = out / "train_log.jsonl";
    const fs::path ckpt_file = out / "model.ckpt";
    const fs::path meta_file = out / "model_meta.json";
    greg::TrainResult result;
    {
        std::ofstream log = open_out(log_file);
        result = greg::train(corpus, s.train, table, &log);
    }
    greg::save_checkpoint(result.params, corpus.vocab.content_hash(), ckpt_file);

    const json meta = {{"vocab_hash", greg::hash_hex(corpus.vocab.content_hash())},
                       {"corpus_hash", greg::hash_hex(corpus_hash)},
                       {"params_hash", greg::hash_hex(greg::params_content_hash(result.params))},
                       {"vocab", result.params.vocab()},
                       {"topics", result.params.topics()},
                       {"hidden", result.params.hidden()},
                       {"steps_completed", result.steps_completed},
                       {"halted", result.halted},
                       {"halt_reason", result.halt_reason},
                       {"config", settings_json(s)}};
    open_out(meta_file) << meta.dump(2) << "\n";

    ManifestWriter manifest("train", s, s.train.seed);
    manifest.input("corpus", o.corpus, corpus_hash);
    manifest.input("embeddings", o.embeddings, greg::fnv1a64_file(o.embeddings));
    if (!o.common.config_path.empty()) {
        manifest.input("config", o.common.config_path, greg::fnv1a64_file(o.common.config_path));
    }
    manifest.output(ckpt_file);
    manifest.output(meta_file);
    manifest.output(log_file);
    manifest.write(out);

    if (result.halted) {
        std::cout << "training halted (" << result.halt_reason << "); checkpoint holds the "
                  << "last finite parameters after " << result.steps_completed << " steps -> "
                  << ckpt_file.string() << "\n";
    } else {
        std::cout << "trained " << result.params.topics() << " topics in "
                  << result.steps_completed << " steps -> " << ckpt_file.string() << "\n";
    }
}

// ---------------------------------------------------------------------------
// infer

struct InferOpts {
    CommonOpts common;
    std::string corpus;
    std::string model;
    std::string split = "all";
};

void run_infer(const CLI::App& sub, const InferOpts& o) {
    const greg::ToolSettings s = load_settings(sub, o.common);
    const std::uint64_t seed = parse_seed(sub, o.common, s);

    std::vector<fs::path> inputs = {o.corpus, o.model};
    if (!o.common.config_path.empty()) inputs.push_back(o.common.config_path);
    const fs::path out = prepare_out_dir(o.common.out_dir, inputs);

    const greg::Checkpoint ckpt = greg::load_checkpoint(o.model);
    const greg::Corpus corpus = load_corpus_checked(o.corpus, ckpt, "input");

    std::vector<int> indices;
    if (o.split == "train") {
        indices = corpus.train_idx;
    } else if (o.split == "test") {
        indices = corpus.test_idx;
    } else if (o.split != "all") {
        throw std::invalid_argument("--split must be one of all, train, test");
    }
    if (o.split != "all" && indices.empty()) {
        throw std::invalid_argument("corpus has no " + o.split +
                                    " split; run split_train_test via preprocess first");
    }
    const Eigen::MatrixXd reps = greg::infer(corpus, indices, ckpt.params);

    const fs::path reps_file = out / "representations.tsv";
    {
        std::ofstream tsv = open_out(reps_file);
        tsv.precision(17);
        const std::vector<int>* rows = nullptr;
        std::vector<int> all;
        if (indices.empty()) {
            all.resize(static_cast<std::size_t>(corpus.size()));
            for (int i = 0; i < corpus.size(); ++i) all[static_cast<std::size_t>(i)] = i;
            rows = &all;
        } else {
            rows = &indices;
        }
        for (Eigen::Index r = 0; r < reps.rows(); ++r) {
            tsv << corpus.doc_ids[static_cast<std::size_t>((*rows)[static_cast<std::size_t>(r)])];
            for (Eigen::Index k = 0; k < reps.cols(); ++k) tsv << '\t' << reps(r, k);
            tsv << '\n';
        }
        if (!tsv) throw std::runtime_error("cannot write '" + reps_file.string() + "'");
    }

    ManifestWriter manifest("infer", s, seed);
    manifest.input("corpus", o.corpus, greg::corpus_content_hash(corpus));
    manifest.input("model", o.model, greg::fnv1a64_file(o.model));
    if (!o.common.config_path.empty()) {
        manifest.input("config", o.common.config_path, greg::fnv1a64_file(o.common.config_path));
    }
    manifest.output(reps_file);
    manifest.write(out);

    std::cout << "wrote " << reps.rows() << " topical representations (" << o.split << ") -> "
              << reps_file.string() << "\n";
}

// ---------------------------------------------------------------------------
// eval / transfer share their reporting

void add_eval_flags(CLI::App* sub, int& trees, int& max_depth, int& npmi_top_words,
                    double& npmi_top_fraction) {
    sub->add_option("--trees", trees, "random-forest size");
    sub->add_option("--max-depth", max_depth, "random-forest depth limit");
    sub->add_option("--npmi-top-words", npmi_top_words, "words per topic for coherence");
    sub->add_option("--npmi-top-fraction", npmi_top_fraction,
                    "fraction of topics kept for coherence");
}

void apply_eval_flags(const CLI::App& sub, greg::ToolSettings& s, int trees, int max_depth,
                      int npmi_top_words, double npmi_top_fraction) {
    if (sub.count("--trees")) s.eval.forest.trees = trees;
    if (sub.count("--max-depth")) s.eval.forest.max_depth = max_depth;
    if (sub.count("--npmi-top-words")) s.eval.npmi_top_words = npmi_top_words;
    if (sub.count("--npmi-top-fraction")) s.eval.npmi_top_fraction = npmi_top_fraction;
}

std::string report_table(const std::vector<greg::EvalReport>& reports) {
    std::vector<std::string> rows;
    std::vector<std::vector<greg::MetricSummary>> cells;
    for (const greg::EvalReport& r : reports) {
        rows.push_back(r.target);
        cells.push_back({{r.ca, 0.0}, {r.tp, 0.0}, {r.tn, 0.0}, {r.npmi, 0.0}});
    }
    return greg::format_mean_std_table(rows, {"CA", "TP", "TN", "NPMI"}, cells);
}

struct EvalOpts {
    CommonOpts common;
    std::string corpus;
    std::string model;
    int trees = 0;
    int max_depth = 0;
    int npmi_top_words = 0;
    double npmi_top_fraction = 0.0;
};

void run_eval(const CLI::App& sub, const EvalOpts& o) {
    greg::ToolSettings s = load_settings(sub, o.common);
    apply_eval_flags(sub, s, o.trees, o.max_depth, o.npmi_top_words, o.npmi_top_fraction);
    const std::uint64_t seed = parse_seed(sub, o.common, s);
    s.eval.forest.seed = seed;

    std::vector<fs::path> inputs = {o.corpus, o.model};
    if (!o.common.config_path.empty()) inputs.push_back(o.common.config_path);
    const fs::path out = prepare_out_dir(o.common.out_dir, inputs);

    const greg::Checkpoint ckpt = greg::load_checkpoint(o.model);
    const greg::Corpus corpus = load_corpus_checked(o.corpus, ckpt, "input");

    std::vector<greg::EvalReport> reports =
        greg::transfer_eval(ckpt.params, corpus, {&corpus}, s.eval);
    reports.front().target = o.corpus;

    const fs::path report_file = out / "report.json";
    open_out(report_file) << greg::eval_report_json(reports.front()) << "\n";

    ManifestWriter manifest("eval", s, seed);
    manifest.input("corpus", o.corpus, greg::corpus_content_hash(corpus));
    manifest.input("model", o.model, greg::fnv1a64_file(o.model));
    if (!o.common.config_path.empty()) {
        manifest.input("config", o.common.config_path, greg::fnv1a64_file(o.common.config_path));
    }
    manifest.output(report_file);
    manifest.write(out);

    std::cout << report_table(reports);
}

struct TransferOpts {
    CommonOpts common;
    std::string model;
    std::string source;
    std::vector<std::string> targets;
    int trees = 0;
    int max_depth = 0;
    int npmi_top_words = 0;
    double npmi_top_fraction = 0.0;
};

void run_transfer(const CLI::App& sub, const TransferOpts& o) {
    greg::ToolSettings s = load_settings(sub, o.common);
    apply_eval_flags(sub, s, o.trees, o.max_depth, o.npmi_top_words, o.npmi_top_fraction);
    const std::uint64_t seed = parse_seed(sub, o.common, s);
    s.eval.forest.seed = seed;

    std::vector<fs::path> inputs = {o.model, o.source};
    for (const std::string& t : o.targets) inputs.emplace_back(t);
    if (!o.common.config_path.empty()) inputs.push_back(o.common.config_path);
    const fs::path out = prepare_out_dir(o.common.out_dir, inputs);

    const greg::Checkpoint ckpt = greg::load_checkpoint(o.model);
    const greg::Corpus source = load_corpus_checked(o.source, ckpt, "source");
    std::vector<greg::Corpus> targets;
    targets.reserve(o.targets.size());
    std::vector<const greg::Corpus*> target_ptrs;
    for (const std::string& t : o.targets) {
        targets.push_back(load_corpus_checked(t, ckpt, "target"));
    }
    for (const greg::Corpus& t : targets) target_ptrs.push_back(&t);

    std::vector<greg::EvalReport> reports =
        greg::transfer_eval(ckpt.params, source, target_ptrs, s.eval);
    for (std::size_t i = 0; i < reports.size(); ++i) reports[i].target = o.targets[i];

    const fs::path reports_file = out / "reports.jsonl";
    {
        std::ofstream jsonl = open_out(reports_file);
        for (const greg::EvalReport& r : reports) jsonl << greg::eval_report_json(r) << "\n";
    }
    const std::string table = report_table(reports);
    const fs::path table_file = out / "table.txt";
    open_out(table_file) << table;

    ManifestWriter manifest("transfer", s, seed);
    manifest.input("model", o.model, greg::fnv1a64_file(o.model));
    manifest.input("source", o.source, greg::corpus_content_hash(source));
    for (std::size_t i = 0; i < targets.size(); ++i) {
        manifest.input("target" + std::to_string(i), o.targets[i],
                       greg::corpus_content_hash(targets[i]));
    }
    if (!o.common.config_path.empty()) {
        manifest.input("config", o.common.config_path, greg::fnv1a64_file(o.common.config_path));
    }
    manifest.output(reports_file);
    manifest.output(table_file);
    manifest.write(out);

    std::cout << table;
}

// ---------------------------------------------------------------------------
// topics

struct TopicsOpts {
    CommonOpts common;
    std::string model;
    std::string corpus;
    int top = 10;
};

void run_topics(const CLI::App& sub, const TopicsOpts& o) {
    const greg::ToolSettings s = load_settings(sub, o.common);
    const std::uint64_t seed = parse_seed(sub, o.common, s);

    const greg::Checkpoint ckpt = greg::load_checkpoint(o.model);
    const greg::Corpus corpus = load_corpus_checked(o.corpus, ckpt, "input");
    if (o.top < 1) throw std::invalid_argument("--top must be >= 1");

    const std::vector<std::vector<int>> top_ids =
        greg::top_topic_words(ckpt.params.dec_w, o.top);
    std::string listing;
    for (std::size_t k = 0; k < top_ids.size(); ++k) {
        listing += "topic " + std::to_string(k) + ":";
        for (const int w : top_ids[k]) listing += " " + corpus.vocab.word(w);
        listing += "\n";
    }
    std::cout << listing;

    if (!o.common.out_dir.empty()) {
        std::vector<fs::path> inputs = {o.model, o.corpus};
        if (!o.common.config_path.empty()) inputs.push_back(o.common.config_path);
        const fs::path out = prepare_out_dir(o.common.out_dir, inputs);
        const fs::path topics_file = out / "topics.txt";
        open_out(topics_file) << listing;

        ManifestWriter manifest("topics", s, seed);
        manifest.input("model", o.model, greg::fnv1a64_file(o.model));
        manifest.input("corpus", o.corpus, greg::corpus_content_hash(corpus));
        if (!o.common.config_path.empty()) {
            manifest.input("config", o.common.config_path,
                           greg::fnv1a64_file(o.common.config_path));
        }
        manifest.output(topics_file);
        manifest.write(out);
    }
}

}  // namespace

// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
    CLI::App app{"neural topic models with an optimal-transport generalisation regulariser"};
    app.require_subcommand(1);

    auto pre = std::make_shared<PreprocessOpts>();
    CLI::App* pre_sub =
        app.add_subcommand("preprocess", "tokenise, filter, vectorise, and split a JSONL corpus");
    pre_sub->add_option("--input,-i", pre->input, "JSONL documents, one object per line")
        ->required();
    pre_sub->add_option("--embeddings,-e", pre->embeddings, "word-embedding text file")
        ->required();
    pre_sub->add_option("--stop-words", pre->stop_words,
                        "stop-word file (one word per line); omit for the built-in list");
    pre_sub->add_option("--min-df", pre->min_df, "keep words with doc freq strictly above this");
    pre_sub->add_option("--max-df-frac", pre->max_df_frac,
                        "drop words in at least this fraction of documents");
    pre_sub->add_option("--split-ratio", pre->split_ratio, "train share of the split");
    add_common(pre_sub, pre->common);
    pre_sub->callback([pre, pre_sub]() { run_preprocess(*pre_sub, *pre); });

    auto aug = std::make_shared<AugmentOpts>();
    CLI::App* aug_sub =
        app.add_subcommand("augment", "write a noisy copy of a corpus for robustness studies");
    aug_sub->add_option("--corpus", aug->corpus, "processed corpus directory")->required();
    aug_sub->add_option("--embeddings,-e", aug->embeddings, "word-embedding text file")
        ->required();
    aug_sub->add_option("--strength", aug->strength, "expected perturbation share per document");
    aug_sub->add_option("--neighbor-pool", aug->neighbor_pool,
                        "candidate pool size for replacements");
    add_common(aug_sub, aug->common);
    aug_sub->callback([aug, aug_sub]() { run_augment(*aug_sub, *aug); });

    auto tr = std::make_shared<TrainOpts>();
    CLI::App* tr_sub = app.add_subcommand("train", "fit a topic model on a processed corpus");
    tr_sub->add_option("--corpus", tr->corpus, "processed corpus directory")->required();
    tr_sub->add_option("--embeddings,-e", tr->embeddings, "word-embedding text file")->required();
    tr_sub->add_option("--topics", tr->topics, "latent topics");
    tr_sub->add_option("--hidden", tr->hidden, "encoder hidden width");
    tr_sub->add_option("--gamma", tr->gamma, "regulariser weight (0 disables it)");
    tr_sub->add_option("--beta", tr->beta, "augmentation strength");
    tr_sub->add_option("--augment", tr->augment, "augmentation operator name");
    tr_sub->add_option("--neighbor-pool", tr->neighbor_pool,
                       "candidate pool size for replacements");
    tr_sub->add_option("--top-i", tr->top_i, "topic truncation size");
    tr_sub->add_option("--lambda", tr->lambda, "entropic coefficient (epsilon = 1/lambda)");
    tr_sub->add_option("--max-iters", tr->max_iters, "solver iteration cap");
    tr_sub->add_option("--stop-threshold", tr->stop_threshold, "solver marginal tolerance");
    tr_sub->add_option("--batch-size", tr->batch_size, "documents per step");
    tr_sub->add_option("--learning-rate", tr->learning_rate, "Adam step size");
    tr_sub->add_option("--epochs", tr->epochs, "passes over the training split");
    add_common(tr_sub, tr->common);
    tr_sub->callback([tr, tr_sub]() { run_train(*tr_sub, *tr); });

    auto inf = std::make_shared<InferOpts>();
    CLI::App* inf_sub =
        app.add_subcommand("infer", "write mean-mode topical representations as TSV");
    inf_sub->add_option("--corpus", inf->corpus, "processed corpus directory")->required();
    inf_sub->add_option("--model", inf->model, "model checkpoint file")->required();
    inf_sub->add_option("--split", inf->split, "all, train, or test");
    add_common(inf_sub, inf->common);
    inf_sub->callback([inf, inf_sub]() { run_infer(*inf_sub, *inf); });

    auto ev = std::make_shared<EvalOpts>();
    CLI::App* ev_sub =
        app.add_subcommand("eval", "classification, clustering, and coherence on one corpus");
    ev_sub->add_option("--corpus", ev->corpus, "processed corpus directory")->required();
    ev_sub->add_option("--model", ev->model, "model checkpoint file")->required();
    add_eval_flags(ev_sub, ev->trees, ev->max_depth, ev->npmi_top_words, ev->npmi_top_fraction);
    add_common(ev_sub, ev->common);
    ev_sub->callback([ev, ev_sub]() { run_eval(*ev_sub, *ev); });

    auto tf = std::make_shared<TransferOpts>();
    CLI::App* tf_sub =
        app.add_subcommand("transfer", "evaluate a frozen model on held-out target corpora");
    tf_sub->add_option("--model", tf->model, "model checkpoint file")->required();
    tf_sub->add_option("--source", tf->source, "corpus the model was trained on")->required();
    tf_sub->add_option("--target", tf->targets, "target corpus directory (repeatable)")
        ->required();
    add_eval_flags(tf_sub, tf->trees, tf->max_depth, tf->npmi_top_words, tf->npmi_top_fraction);
    add_common(tf_sub, tf->common);
    tf_sub->callback([tf, tf_sub]() { run_transfer(*tf_sub, *tf); });

    auto tp = std::make_shared<TopicsOpts>();
    CLI::App* tp_sub = app.add_subcommand("topics", "print the top words of every topic");
    tp_sub->add_option("--model", tp->model, "model checkpoint file")->required();
    tp_sub->add_option("--corpus", tp->corpus, "processed corpus directory (for the vocabulary)")
        ->required();
    tp_sub->add_option("--top", tp->top, "words per topic");
    add_common(tp_sub, tp->common, /*out_required=*/false);
    tp_sub->callback([tp, tp_sub]() { run_topics(*tp_sub, *tp); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        std::cerr << json{{"error", std::string("argument error: ") + e.what()}}.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", e.what()}}.dump() << "\n";
        return 1;
    }
    return 0;
}

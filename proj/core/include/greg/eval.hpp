#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "greg/corpus.hpp"
#include "greg/ntm.hpp"

namespace greg {

// ---------------------------------------------------------------------------
// Document classification accuracy (CA) with a small random forest.

struct RandomForestConfig {
    int trees = 10;
    int max_depth = 8;
    bool bootstrap = true;
    std::uint64_t seed = 1;
    // Features per split follow the square-root rule: max(1, floor(sqrt(K))).

    void validate() const;
};

struct CaResult {
    double accuracy = 0.0;
    bool single_class = false;  // training labels held one class: constant classifier
};

// Trains the forest on (train_z, train_labels) with Gini impurity, bootstrap
// sampling, and midpoint split candidates between consecutive sorted unique
// feature values; reports majority-vote accuracy on the test rows. Trees are
// grown in parallel from per-tree seeded streams, so the result only depends
// on the config seed.
CaResult classify_ca(const Eigen::MatrixXd& train_z, const std::vector<int>& train_labels,
                     const Eigen::MatrixXd& test_z, const std::vector<int>& test_labels,
                     const RandomForestConfig& cfg);

// ---------------------------------------------------------------------------
// Top-topic clustering metrics.

// Argmax per row; ties go to the smaller index.
std::vector<int> top_topic_assign(const Eigen::MatrixXd& z);

struct PurityNmi {
    double purity = 0.0;
    double nmi = 0.0;
};

// Purity = (1/N) sum over clusters of their largest label overlap. NMI uses
// natural logs and the arithmetic-mean normalisation I(C;L) / ((H(C)+H(L))/2),
// with 0/0 defined as 0.
PurityNmi purity_nmi(const std::vector<int>& clusters, const std::vector<int>& labels);

// ---------------------------------------------------------------------------
// Internal NPMI topic coherence.

// Top `top_words` word ids per topic, ranked by decoder weight (ties to the
// smaller id). dec_w is V x K; one list per topic.
std::vector<std::vector<int>> top_topic_words(const Eigen::MatrixXd& dec_w, int top_words);

struct NpmiResult {
    std::vector<double> per_topic;  // mean pair score per topic, topic order
    double score = 0.0;             // mean over the top `fraction` of topics
};

// Pair score (ln p(i,j) - ln p(i)p(j)) / (-ln p(i,j)) with probabilities from
// boolean document co-occurrence over `corpus` and a symmetric 1e-12 epsilon
// inside the logs. Pairs that never co-occur score -1; pairs sharing every
// document score 1. The reported mean covers the best `top_fraction` of
// topics (at least one).
NpmiResult npmi(const std::vector<std::vector<int>>& topics, const Corpus& corpus,
                double top_fraction = 0.5);

// ---------------------------------------------------------------------------
// Transfer evaluation.

struct EvalConfig {
    RandomForestConfig forest;
    int npmi_top_words = 10;
    double npmi_top_fraction = 0.5;

    void validate() const;
};

struct EvalReport {
    std::string target;  // doc-id tag supplied by the caller (archive path etc.)
    double ca = 0.0;
    double tp = 0.0;
    double tn = 0.0;
    double npmi = 0.0;
    bool ca_single_class = false;
    int topics = 0;
    std::uint64_t corpus_hash = 0;  // the target
    std::uint64_t source_hash = 0;  // the training corpus
    std::uint64_t model_hash = 0;
};

// Serialised forms: one JSON object per report, and an aligned text table in
// the mean±std percentage style. `summarize` uses the sample standard
// deviation (n-1 denominator; 0 for a single run).
std::string eval_report_json(const EvalReport& report);

struct MetricSummary {
    double mean = 0.0;
    double std_dev = 0.0;
};

MetricSummary summarize(const std::vector<double>& runs);

// Rows x columns of mean±std cells, values scaled to percentages.
std::string format_mean_std_table(const std::vector<std::string>& row_names,
                                  const std::vector<std::string>& col_names,
                                  const std::vector<std::vector<MetricSummary>>& cells);

// Evaluates a frozen model on each target corpus: mean-mode representations
// of the target's own train/test split feed the classifier, top-topic metrics
// are taken on the test split, and coherence uses the whole target as the
// reference collection. The model is never updated. Targets must carry a
// split (see split_train_test) and labels, and must be aligned to the model's
// vocabulary (see unite_vocabularies).
std::vector<EvalReport> transfer_eval(const NtmParams& model, const Corpus& source,
                                      const std::vector<const Corpus*>& targets,
                                      const EvalConfig& cfg);

// ---------------------------------------------------------------------------
// Paired significance test.

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    bool significant = false;
    bool computable = false;  // false when the difference variance degenerates
};

// Two-sided paired t-test; significant iff computable and p < alpha.
TTestResult paired_t_test(const std::vector<double>& runs_a, const std::vector<double>& runs_b,
                          double alpha);

}  // namespace greg

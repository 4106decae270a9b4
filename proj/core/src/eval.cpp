#include "greg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <boost/math/distributions/students_t.hpp>

#include "greg/hash.hpp"
#include "greg/parallel.hpp"
#include "greg/rng.hpp"
#include "json.hpp"

namespace greg {

namespace {

using Eigen::MatrixXd;

// Majority label; ties go to the smaller id.
int majority_label(const std::vector<int>& counts) {
    int best = 0;
    for (int l = 1; l < static_cast<int>(counts.size()); ++l) {
        if (counts[static_cast<std::size_t>(l)] > counts[static_cast<std::size_t>(best)]) best = l;
    }
    return best;
}

double gini(const std::vector<int>& counts, int n) {
    if (n == 0) return 0.0;
    double sum_sq = 0.0;
    for (const int c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(n);
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = 0;
};

struct TreeBuilder {
    const MatrixXd& x;
    const std::vector<int>& y;
    int n_labels;
    int max_depth;
    int m_features;
    Rng& rng;
    std::vector<TreeNode> nodes;

    int build(std::vector<int>& rows, int depth) {
        std::vector<int> counts(static_cast<std::size_t>(n_labels), 0);
        for (const int r : rows) ++counts[static_cast<std::size_t>(y[static_cast<std::size_t>(r)])];
        const int node_label = majority_label(counts);
        const bool pure =
            counts[static_cast<std::size_t>(node_label)] == static_cast<int>(rows.size());

        TreeNode node;
        node.label = node_label;
        if (depth >= max_depth || pure || rows.size() < 2) {
            nodes.push_back(node);
            return static_cast<int>(nodes.size()) - 1;
        }

        // Random feature subset, then the best midpoint split by Gini. Ties
        // keep the first candidate in (draw order, ascending threshold).
        const int k = static_cast<int>(x.cols());
        std::vector<int> features(static_cast<std::size_t>(k));
        std::iota(features.begin(), features.end(), 0);
        for (int j = 0; j < m_features; ++j) {
            const int pick = j + static_cast<int>(rng.uniform_u64(
                                     static_cast<std::uint64_t>(k - j)));
            std::swap(features[static_cast<std::size_t>(j)],
                      features[static_cast<std::size_t>(pick)]);
        }

        double best_impurity = std::numeric_limits<double>::infinity();
        int best_feature = -1;
        double best_threshold = 0.0;
        const int n = static_cast<int>(rows.size());
        std::vector<int> sorted = rows;
        for (int j = 0; j < m_features; ++j) {
            const int f = features[static_cast<std::size_t>(j)];
            std::sort(sorted.begin(), sorted.end(), [&](int a, int b) {
                const double va = x(a, f), vb = x(b, f);
                return va != vb ? va < vb : a < b;
            });
            std::vector<int> left_counts(static_cast<std::size_t>(n_labels), 0);
            std::vector<int> right_counts = counts;
            for (int i = 0; i + 1 < n; ++i) {
                const int r = sorted[static_cast<std::size_t>(i)];
                const int label = y[static_cast<std::size_t>(r)];
                ++left_counts[static_cast<std::size_t>(label)];
                --right_counts[static_cast<std::size_t>(label)];
                const double lo = x(r, f);
                const double hi = x(sorted[static_cast<std::size_t>(i + 1)], f);
                if (lo == hi) continue;  // not a boundary between unique values
                const int nl = i + 1;
                const double impurity = (nl * gini(left_counts, nl) +
                                         (n - nl) * gini(right_counts, n - nl)) /
                                        static_cast<double>(n);
                if (impurity < best_impurity) {
                    best_impurity = impurity;
                    best_feature = f;
                    best_threshold = lo + 0.5 * (hi - lo);
                }
            }
        }
        if (best_feature < 0) {  // every drawn feature is constant here
            nodes.push_back(node);
            return static_cast<int>(nodes.size()) - 1;
        }

        std::vector<int> left_rows, right_rows;
        for (const int r : rows) {
            (x(r, best_feature) < best_threshold ? left_rows : right_rows).push_back(r);
        }
        node.feature = best_feature;
        node.threshold = best_threshold;
        nodes.push_back(node);
        const int index = static_cast<int>(nodes.size()) - 1;
        const int left = build(left_rows, depth + 1);
        const int right = build(right_rows, depth + 1);
        nodes[static_cast<std::size_t>(index)].left = left;
        nodes[static_cast<std::size_t>(index)].right = right;
        return index;
    }
};

int tree_predict(const std::vector<TreeNode>& nodes, const Eigen::RowVectorXd& row) {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const TreeNode& node = nodes[static_cast<std::size_t>(i)];
        i = row(node.feature) < node.threshold ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(i)].label;
}

void check_features_and_labels(const MatrixXd& z, const std::vector<int>& labels,
                               const char* which) {
    if (z.rows() != static_cast<Eigen::Index>(labels.size())) {
        throw std::invalid_argument(std::string("classify_ca: ") + which + " has " +
                                    std::to_string(z.rows()) + " rows but " +
                                    std::to_string(labels.size()) + " labels");
    }
    if (z.rows() == 0) {
        throw std::invalid_argument(std::string("classify_ca: ") + which + " is empty");
    }
    for (const int l : labels) {
        if (l < 0) {
            throw std::invalid_argument(std::string("classify_ca: ") + which +
                                        " contains an unlabeled row");
        }
    }
}

}  // namespace

void RandomForestConfig::validate() const {
    if (trees < 1) throw std::invalid_argument("RandomForestConfig: trees must be >= 1");
    if (max_depth < 1) throw std::invalid_argument("RandomForestConfig: max_depth must be >= 1");
}

CaResult classify_ca(const MatrixXd& train_z, const std::vector<int>& train_labels,
                     const MatrixXd& test_z, const std::vector<int>& test_labels,
                     const RandomForestConfig& cfg) {
    cfg.validate();
    check_features_and_labels(train_z, train_labels, "training set");
    check_features_and_labels(test_z, test_labels, "test set");
    if (train_z.cols() != test_z.cols()) {
        throw std::invalid_argument("classify_ca: train and test feature counts differ");
    }

    int n_labels = 0;
    for (const int l : train_labels) n_labels = std::max(n_labels, l + 1);
    for (const int l : test_labels) n_labels = std::max(n_labels, l + 1);

    CaResult result;
    const int n_train = static_cast<int>(train_z.rows());
    const int n_test = static_cast<int>(test_z.rows());

    result.single_class =
        std::all_of(train_labels.begin(), train_labels.end(),
                    [&](int l) { return l == train_labels.front(); });
    std::vector<int> predictions(static_cast<std::size_t>(n_test), train_labels.front());
    if (!result.single_class) {
        const int m_features = std::max(
            1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(train_z.cols())))));
        std::vector<std::vector<TreeNode>> forest(static_cast<std::size_t>(cfg.trees));
        const Rng root(cfg.seed);
        parallel_for(static_cast<std::size_t>(cfg.trees), [&](std::size_t t) {
            Rng rng = root.fork(t);
            std::vector<int> rows(static_cast<std::size_t>(n_train));
            if (cfg.bootstrap) {
                for (int i = 0; i < n_train; ++i) {
                    rows[static_cast<std::size_t>(i)] = static_cast<int>(
                        rng.uniform_u64(static_cast<std::uint64_t>(n_train)));
                }
            } else {
                std::iota(rows.begin(), rows.end(), 0);
            }
            TreeBuilder builder{train_z, train_labels, n_labels, cfg.max_depth, m_features, rng,
                                {}};
            builder.build(rows, 0);
            forest[t] = std::move(builder.nodes);
        });
        parallel_for(static_cast<std::size_t>(n_test), [&](std::size_t i) {
            std::vector<int> votes(static_cast<std::size_t>(n_labels), 0);
            for (const auto& tree : forest) {
                ++votes[static_cast<std::size_t>(
                    tree_predict(tree, test_z.row(static_cast<Eigen::Index>(i))))];
            }
            predictions[i] = majority_label(votes);
        });
    }

    int correct = 0;
    for (int i = 0; i < n_test; ++i) {
        if (predictions[static_cast<std::size_t>(i)] == test_labels[static_cast<std::size_t>(i)]) {
            ++correct;
        }
    }
    result.accuracy = static_cast<double>(correct) / static_cast<double>(n_test);
    return result;
}

std::vector<int> top_topic_assign(const MatrixXd& z) {
    if (z.rows() == 0 || z.cols() == 0) {
        throw std::invalid_argument("top_topic_assign: empty representation matrix");
    }
    std::vector<int> clusters(static_cast<std::size_t>(z.rows()));
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
        if (std::abs(z.row(r).sum() - 1.0) > 1e-6 || z.row(r).minCoeff() < -1e-9) {
            throw std::invalid_argument("top_topic_assign: row " + std::to_string(r) +
                                        " is not on the simplex");
        }
        int best = 0;
        for (int k = 1; k < z.cols(); ++k) {
            if (z(r, k) > z(r, best)) best = k;  // ties keep the smaller index
        }
        clusters[static_cast<std::size_t>(r)] = best;
    }
    return clusters;
}

PurityNmi purity_nmi(const std::vector<int>& clusters, const std::vector<int>& labels) {
    if (clusters.size() != labels.size()) {
        throw std::invalid_argument("purity_nmi: clusters and labels differ in length");
    }
    if (clusters.empty()) throw std::invalid_argument("purity_nmi: empty input");
    const double n = static_cast<double>(clusters.size());

    // Compact arbitrary ids; the metrics are invariant under relabeling.
    std::map<int, int> cluster_id, label_id;
    for (const int c : clusters) cluster_id.emplace(c, static_cast<int>(cluster_id.size()));
    for (const int l : labels) label_id.emplace(l, static_cast<int>(label_id.size()));
    const int nc = static_cast<int>(cluster_id.size());
    const int nl = static_cast<int>(label_id.size());
    MatrixXd table = MatrixXd::Zero(nc, nl);
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        table(cluster_id[clusters[i]], label_id[labels[i]]) += 1.0;
    }

    PurityNmi out;
    for (int c = 0; c < nc; ++c) out.purity += table.row(c).maxCoeff();
    out.purity /= n;

    double h_c = 0.0, h_l = 0.0, mutual = 0.0;
    for (int c = 0; c < nc; ++c) {
        const double p = table.row(c).sum() / n;
        if (p > 0.0) h_c -= p * std::log(p);
    }
    for (int l = 0; l < nl; ++l) {
        const double p = table.col(l).sum() / n;
        if (p > 0.0) h_l -= p * std::log(p);
    }
    for (int c = 0; c < nc; ++c) {
        for (int l = 0; l < nl; ++l) {
            const double joint = table(c, l) / n;
            if (joint > 0.0) {
                mutual += joint * std::log(joint * n * n / (table.row(c).sum() * table.col(l).sum()));
            }
        }
    }
    const double denom = 0.5 * (h_c + h_l);
    out.nmi = denom > 0.0 ? std::clamp(mutual / denom, 0.0, 1.0) : 0.0;  // 0/0 -> 0
    return out;
}

std::vector<std::vector<int>> top_topic_words(const MatrixXd& dec_w, int top_words) {
    const int v = static_cast<int>(dec_w.rows());
    const int k = static_cast<int>(dec_w.cols());
    if (v == 0 || k == 0) throw std::invalid_argument("top_topic_words: empty decoder matrix");
    if (top_words < 1 || top_words > v) {
        throw std::invalid_argument("top_topic_words: top_words must lie in [1, " +
                                    std::to_string(v) + "], got " + std::to_string(top_words));
    }
    std::vector<std::vector<int>> topics(static_cast<std::size_t>(k));
    for (int t = 0; t < k; ++t) {
        std::vector<int> ids(static_cast<std::size_t>(v));
        std::iota(ids.begin(), ids.end(), 0);
        std::partial_sort(ids.begin(), ids.begin() + top_words, ids.end(), [&](int a, int b) {
            const double wa = dec_w(a, t), wb = dec_w(b, t);
            return wa != wb ? wa > wb : a < b;  // ties to the smaller id
        });
        ids.resize(static_cast<std::size_t>(top_words));
        topics[static_cast<std::size_t>(t)] = std::move(ids);
    }
    return topics;
}

NpmiResult npmi(const std::vector<std::vector<int>>& topics, const Corpus& corpus,
                double top_fraction) {
    if (topics.empty()) throw std::invalid_argument("npmi: no topics given");
    if (!(top_fraction > 0.0) || top_fraction > 1.0) {
        throw std::invalid_argument("npmi: top_fraction must lie in (0, 1]");
    }
    if (corpus.size() == 0) throw std::invalid_argument("npmi: empty reference corpus");
    for (const auto& topic : topics) {
        if (topic.size() < 2) {
            throw std::invalid_argument("npmi: every topic needs at least two words");
        }
        for (const int w : topic) {
            if (w < 0 || w >= corpus.vocab.size()) {
                throw std::invalid_argument("npmi: word id " + std::to_string(w) +
                                            " outside the corpus vocabulary");
            }
        }
    }

    // Boolean document frequencies and pair co-occurrence over the words the
    // topics actually use.
    std::unordered_map<int, int> compact;
    for (const auto& topic : topics) {
        for (const int w : topic) compact.emplace(w, static_cast<int>(compact.size()));
    }
    const int u = static_cast<int>(compact.size());
    std::vector<int> df(static_cast<std::size_t>(u), 0);
    Eigen::MatrixXi co = Eigen::MatrixXi::Zero(u, u);
    for (const BowVector& doc : corpus.docs) {
        std::vector<int> present;
        for (const auto& [word, count] : doc.entries()) {
            const auto it = compact.find(word);
            if (it != compact.end()) present.push_back(it->second);
        }
        for (const int a : present) ++df[static_cast<std::size_t>(a)];
        for (std::size_t i = 0; i < present.size(); ++i) {
            for (std::size_t j = i + 1; j < present.size(); ++j) {
                co(present[i], present[j]) += 1;
                co(present[j], present[i]) += 1;
            }
        }
    }

    const double d = static_cast<double>(corpus.size());
    constexpr double kEps = 1e-12;
    const auto pair_score = [&](int a, int b) {
        const int cij = co(a, b);
        if (cij == 0) return -1.0;  // never co-occurring, by convention
        const int ci = df[static_cast<std::size_t>(a)];
        const int cj = df[static_cast<std::size_t>(b)];
        if (cij == ci && cij == cj) return 1.0;  // identical document support
        const double pij = cij / d;
        const double value = (std::log(pij + kEps) - std::log((ci / d) * (cj / d) + kEps)) /
                             (-std::log(pij + kEps));
        return std::clamp(value, -1.0, 1.0);
    };

    NpmiResult out;
    out.per_topic.reserve(topics.size());
    for (const auto& topic : topics) {
        double sum = 0.0;
        int pairs = 0;
        for (std::size_t i = 0; i < topic.size(); ++i) {
            for (std::size_t j = i + 1; j < topic.size(); ++j) {
                sum += pair_score(compact[topic[i]], compact[topic[j]]);
                ++pairs;
            }
        }
        out.per_topic.push_back(sum / static_cast<double>(pairs));
    }

    std::vector<double> ranked = out.per_topic;
    std::sort(ranked.begin(), ranked.end(), std::greater<>());
    const int selected = std::max(
        1, static_cast<int>(std::llround(top_fraction * static_cast<double>(ranked.size()))));
    out.score = std::accumulate(ranked.begin(), ranked.begin() + selected, 0.0) /
                static_cast<double>(selected);
    return out;
}

void EvalConfig::validate() const {
    forest.validate();
    if (npmi_top_words < 2) {
        throw std::invalid_argument("EvalConfig: npmi_top_words must be >= 2");
    }
    if (!(npmi_top_fraction > 0.0) || npmi_top_fraction > 1.0) {
        throw std::invalid_argument("EvalConfig: npmi_top_fraction must lie in (0, 1]");
    }
}

std::vector<EvalReport> transfer_eval(const NtmParams& model, const Corpus& source,
                                      const std::vector<const Corpus*>& targets,
                                      const EvalConfig& cfg) {
    cfg.validate();
    if (targets.empty()) throw std::invalid_argument("transfer_eval: no targets given");
    const std::uint64_t model_hash = params_content_hash(model);
    const std::uint64_t source_hash = corpus_content_hash(source);
    const std::vector<std::vector<int>> topic_words =
        top_topic_words(model.dec_w, cfg.npmi_top_words);

    std::vector<EvalReport> reports;
    reports.reserve(targets.size());
    for (std::size_t ti = 0; ti < targets.size(); ++ti) {
        const Corpus& target = *targets[ti];
        const std::string tag = "target" + std::to_string(ti);
        if (target.vocab.size() != model.vocab()) {
            throw std::invalid_argument(
                "transfer_eval: " + tag + " has vocabulary size " +
                std::to_string(target.vocab.size()) + " but the model expects " +
                std::to_string(model.vocab()) +
                "; rebuild every corpus over the united vocabulary (unite_vocabularies)");
        }
        if (target.train_idx.empty() || target.test_idx.empty()) {
            throw std::invalid_argument("transfer_eval: " + tag +
                                        " has no train/test split (run split_train_test)");
        }
        const auto gather_labels = [&](const std::vector<int>& idx) {
            std::vector<int> out;
            out.reserve(idx.size());
            for (const int i : idx) {
                const int label = target.labels[static_cast<std::size_t>(i)];
                if (label < 0) {
                    throw std::invalid_argument("transfer_eval: " + tag + " document '" +
                                                target.doc_ids[static_cast<std::size_t>(i)] +
                                                "' is unlabeled");
                }
                out.push_back(label);
            }
            return out;
        };
        const std::vector<int> train_labels = gather_labels(target.train_idx);
        const std::vector<int> test_labels = gather_labels(target.test_idx);

        const MatrixXd train_z = infer(target, target.train_idx, model);
        const MatrixXd test_z = infer(target, target.test_idx, model);
        const CaResult ca = classify_ca(train_z, train_labels, test_z, test_labels, cfg.forest);
        const PurityNmi pn = purity_nmi(top_topic_assign(test_z), test_labels);
        const NpmiResult coherence = npmi(topic_words, target, cfg.npmi_top_fraction);

        EvalReport report;
        report.target = tag;
        report.ca = ca.accuracy;
        report.ca_single_class = ca.single_class;
        report.tp = pn.purity;
        report.tn = pn.nmi;
        report.npmi = coherence.score;
        report.topics = model.topics();
        report.corpus_hash = corpus_content_hash(target);
        report.source_hash = source_hash;
        report.model_hash = model_hash;
        reports.push_back(std::move(report));
    }
    return reports;
}

std::string eval_report_json(const EvalReport& report) {
    nlohmann::json j;
    j["target"] = report.target;
    j["ca"] = report.ca;
    j["tp"] = report.tp;
    j["tn"] = report.tn;
    j["npmi"] = report.npmi;
    j["ca_single_class"] = report.ca_single_class;
    j["topics"] = report.topics;
    j["corpus_hash"] = hash_hex(report.corpus_hash);
    j["source_hash"] = hash_hex(report.source_hash);
    j["model_hash"] = hash_hex(report.model_hash);
    return j.dump();
}

MetricSummary summarize(const std::vector<double>& runs) {
    if (runs.empty()) throw std::invalid_argument("summarize: no runs");
    MetricSummary s;
    s.mean = std::accumulate(runs.begin(), runs.end(), 0.0) / static_cast<double>(runs.size());
    if (runs.size() > 1) {
        double ss = 0.0;
        for (const double r : runs) ss += (r - s.mean) * (r - s.mean);
        s.std_dev = std::sqrt(ss / static_cast<double>(runs.size() - 1));
    }
    return s;
}

std::string format_mean_std_table(const std::vector<std::string>& row_names,
                                  const std::vector<std::string>& col_names,
                                  const std::vector<std::vector<MetricSummary>>& cells) {
    if (cells.size() != row_names.size()) {
        throw std::invalid_argument("format_mean_std_table: row count mismatch");
    }
    const auto cell_text = [](const MetricSummary& s) {
        std::ostringstream out;
        out << std::fixed << std::setprecision(2) << 100.0 * s.mean << "±" << 100.0 * s.std_dev;
        return out.str();
    };
    std::vector<std::vector<std::string>> texts;
    for (std::size_t r = 0; r < cells.size(); ++r) {
        if (cells[r].size() != col_names.size()) {
            throw std::invalid_argument("format_mean_std_table: column count mismatch in row " +
                                        std::to_string(r));
        }
        std::vector<std::string> row;
        for (const MetricSummary& s : cells[r]) row.push_back(cell_text(s));
        texts.push_back(std::move(row));
    }

    // The ± sign is two bytes in UTF-8; pad by display width, not byte count.
    const auto width = [](const std::string& s) {
        return s.size() - (s.find("±") != std::string::npos ? 1 : 0);
    };
    std::size_t name_width = 0;
    for (const auto& name : row_names) name_width = std::max(name_width, name.size());
    std::vector<std::size_t> col_widths(col_names.size());
    for (std::size_t c = 0; c < col_names.size(); ++c) {
        col_widths[c] = col_names[c].size();
        for (const auto& row : texts) col_widths[c] = std::max(col_widths[c], width(row[c]));
    }

    std::ostringstream out;
    out << std::string(name_width, ' ');
    for (std::size_t c = 0; c < col_names.size(); ++c) {
        out << "  " << std::string(col_widths[c] - col_names[c].size(), ' ') << col_names[c];
    }
    out << '\n';
    for (std::size_t r = 0; r < row_names.size(); ++r) {
        out << row_names[r] << std::string(name_width - row_names[r].size(), ' ');
        for (std::size_t c = 0; c < col_names.size(); ++c) {
            out << "  " << std::string(col_widths[c] - width(texts[r][c]), ' ') << texts[r][c];
        }
        out << '\n';
    }
    return out.str();
}

TTestResult paired_t_test(const std::vector<double>& runs_a, const std::vector<double>& runs_b,
                          double alpha) {
    if (runs_a.size() != runs_b.size()) {
        throw std::invalid_argument("paired_t_test: run lists differ in length");
    }
    if (runs_a.size() < 2) {
        throw std::invalid_argument("paired_t_test: need at least two paired runs");
    }
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw std::invalid_argument("paired_t_test: alpha must lie in (0, 1)");
    }
    const std::size_t n = runs_a.size();
    std::vector<double> diffs(n);
    for (std::size_t i = 0; i < n; ++i) diffs[i] = runs_a[i] - runs_b[i];

    TTestResult out;
    const bool constant =
        std::all_of(diffs.begin(), diffs.end(), [&](double d) { return d == diffs.front(); });
    double mean = std::accumulate(diffs.begin(), diffs.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (const double d : diffs) var += (d - mean) * (d - mean);
    var /= static_cast<double>(n - 1);
    if (constant || var <= 0.0) {
        return out;  // degenerate variance: non-computable, not significant
    }
    out.computable = true;
    out.t = mean / std::sqrt(var / static_cast<double>(n));
    const boost::math::students_t dist(static_cast<double>(n - 1));
    out.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.t)));
    out.significant = out.p < alpha;
    return out;
}

}  // namespace greg

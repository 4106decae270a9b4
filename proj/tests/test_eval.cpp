// Evaluation suite: the random-forest classifier against synthetic-blob and
// exhaustive-scan oracles, clustering metrics against independent
// direct-from-definition recomputation, internal NPMI on corpora constructed
// to realise each convention, frozen transfer-evaluation behaviour, and the
// paired t-test against externally computed reference numbers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <unistd.h>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "greg/corpus.hpp"
#include "greg/eval.hpp"
#include "greg/ntm.hpp"
#include "greg/parallel.hpp"
#include "greg/rng.hpp"
#include "json.hpp"

namespace greg {
namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("greg_eval_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

// Two Gaussian blobs with the given separation.
void make_blobs(Rng& rng, int per_class, double separation, Eigen::MatrixXd& z,
                std::vector<int>& labels) {
    z.resize(2 * per_class, 3);
    labels.assign(static_cast<std::size_t>(2 * per_class), 0);
    for (int i = 0; i < 2 * per_class; ++i) {
        const int label = i < per_class ? 0 : 1;
        labels[static_cast<std::size_t>(i)] = label;
        for (int c = 0; c < 3; ++c) {
            z(i, c) = label * separation + 0.5 * rng.normal();
        }
    }
}

// Labeled corpus over an 8-word vocabulary; documents draw from one of two
// word blocks chosen by label, shifted by `block_offset` to emulate corpora
// living in different regions of a united vocabulary.
Corpus labeled_corpus(int n_docs, int block_offset, std::uint64_t seed) {
    std::vector<std::string> words;
    std::vector<std::int64_t> freqs;
    for (int w = 0; w < 8; ++w) {
        words.push_back("w" + std::to_string(w));
        freqs.push_back(std::max<std::int64_t>(1, n_docs / 2));
    }
    Corpus c;
    c.vocab = Vocabulary(words, freqs);
    Rng rng(seed);
    for (int d = 0; d < n_docs; ++d) {
        const int label = d % 2;
        const int base = block_offset + 2 * label;
        std::vector<std::pair<int, int>> entries;
        entries.emplace_back(base, 1 + static_cast<int>(rng.uniform_u64(3)));
        entries.emplace_back(base + 1, 1 + static_cast<int>(rng.uniform_u64(2)));
        c.docs.emplace_back(8, std::move(entries));
        c.labels.push_back(label);
        c.doc_ids.push_back("doc" + std::to_string(d));
    }
    c.label_names = {"neg", "pos"};
    return split_train_test(std::move(c), 0.75, seed + 1);
}

TEST_CASE("classify_ca separates Gaussian blobs and is seeded") {
    Rng rng(3);
    Eigen::MatrixXd train_z, test_z;
    std::vector<int> train_y, test_y;
    make_blobs(rng, 100, 3.0, train_z, train_y);
    make_blobs(rng, 100, 3.0, test_z, test_y);

    RandomForestConfig cfg;
    const CaResult res = classify_ca(train_z, train_y, test_z, test_y, cfg);
    CHECK(!res.single_class);
    CHECK(res.accuracy > 0.95);

    // Same seed, any thread count: identical forest, identical accuracy.
    const CaResult again = classify_ca(train_z, train_y, test_z, test_y, cfg);
    CHECK(again.accuracy == res.accuracy);
    const int prev = max_threads();
    set_max_threads(3);
    const CaResult threaded = classify_ca(train_z, train_y, test_z, test_y, cfg);
    set_max_threads(prev);
    CHECK(threaded.accuracy == res.accuracy);
}

TEST_CASE("classify_ca sits at chance on label noise") {
    Rng rng(11);
    const int n = 2000;
    Eigen::MatrixXd train_z(n, 3), test_z(n, 3);
    std::vector<int> train_y, test_y;
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < 3; ++c) {
            train_z(i, c) = rng.normal();
            test_z(i, c) = rng.normal();
        }
        train_y.push_back(i % 2);
        test_y.push_back((i / 2) % 2);
    }
    const CaResult res = classify_ca(train_z, train_y, test_z, test_y, RandomForestConfig{});
    CHECK(res.accuracy > 0.45);
    CHECK(res.accuracy < 0.55);
}

TEST_CASE("a depth-1 stump matches the exhaustive threshold scan") {
    // Perfectly separable single-feature data: the stump must find the split.
    const int n = 40;
    Eigen::MatrixXd x(n, 1);
    std::vector<int> y;
    for (int i = 0; i < n; ++i) {
        x(i, 0) = static_cast<double>(i) / n;
        y.push_back(x(i, 0) < 0.35 ? 0 : 1);
    }
    RandomForestConfig cfg;
    cfg.trees = 1;
    cfg.max_depth = 1;
    cfg.bootstrap = false;
    const CaResult clean = classify_ca(x, y, x, y, cfg);
    CHECK(clean.accuracy == 1.0);

    // Overlapping labels: the stump cannot beat the best single threshold
    // (exhaustive oracle) and cannot fall below the majority baseline.
    Rng rng(7);
    std::vector<int> noisy = y;
    for (int i = 0; i < n; ++i) {
        if (rng.uniform_u64(4) == 0) noisy[static_cast<std::size_t>(i)] ^= 1;
    }
    double best = 0.0;
    for (int cut = 0; cut <= n; ++cut) {  // threshold between positions cut-1 and cut
        int agree = 0;
        for (int i = 0; i < n; ++i) {
            agree += ((i < cut ? 0 : 1) == noisy[static_cast<std::size_t>(i)]) ? 1 : 0;
        }
        best = std::max({best, agree / double(n), 1.0 - agree / double(n)});
    }
    const int ones = static_cast<int>(std::count(noisy.begin(), noisy.end(), 1));
    const double majority = std::max(ones, n - ones) / double(n);
    const CaResult stump = classify_ca(x, noisy, x, noisy, cfg);
    CHECK(stump.accuracy <= best + 1e-12);
    CHECK(stump.accuracy >= majority - 1e-12);
}

TEST_CASE("classify_ca flags single-class training data") {
    Eigen::MatrixXd z = Eigen::MatrixXd::Random(6, 2);
    const std::vector<int> constant(6, 2);
    const std::vector<int> mixed = {2, 2, 2, 0, 0, 2};
    const CaResult res = classify_ca(z, constant, z, mixed, RandomForestConfig{});
    CHECK(res.single_class);
    CHECK(res.accuracy == doctest::Approx(4.0 / 6.0));

    CHECK_THROWS_WITH_AS(classify_ca(z, {1, 2}, z, mixed, RandomForestConfig{}),
                         doctest::Contains("labels"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        classify_ca(Eigen::MatrixXd(0, 2), {}, z, mixed, RandomForestConfig{}),
        doctest::Contains("empty"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(classify_ca(z, constant, Eigen::MatrixXd::Random(6, 3), mixed,
                                     RandomForestConfig{}),
                         doctest::Contains("feature counts"), std::invalid_argument);
    const std::vector<int> negative = {0, 0, 0, 0, 0, -1};
    CHECK_THROWS_WITH_AS(classify_ca(z, negative, z, mixed, RandomForestConfig{}),
                         doctest::Contains("unlabeled"), std::invalid_argument);
    RandomForestConfig bad;
    bad.trees = 0;
    CHECK_THROWS_WITH_AS(classify_ca(z, constant, z, mixed, bad), doctest::Contains("trees"),
                         std::invalid_argument);
}

TEST_CASE("top_topic_assign takes the argmax with ties to the smaller index") {
    Eigen::MatrixXd z(2, 3);
    z << 0.1, 0.7, 0.2,  //
        1.0 / 3, 1.0 / 3, 1.0 / 3;
    const std::vector<int> assigned = top_topic_assign(z);
    CHECK(assigned == std::vector<int>{1, 0});

    // Permuting coordinates permutes the assignment.
    Rng rng(5);
    Eigen::MatrixXd rows(6, 4);
    for (int r = 0; r < 6; ++r) {
        Eigen::VectorXd raw(4);
        for (int c = 0; c < 4; ++c) raw(c) = rng.normal();
        raw(r % 4) += 3.0;  // a clear, unique peak
        const Eigen::VectorXd e = raw.array().exp();
        rows.row(r) = (e / e.sum()).transpose();
    }
    const std::vector<int> perm = {2, 0, 3, 1};  // column c moves to perm[c]
    Eigen::MatrixXd shuffled(6, 4);
    for (int c = 0; c < 4; ++c) {
        shuffled.col(perm[static_cast<std::size_t>(c)]) = rows.col(c);
    }
    const std::vector<int> before = top_topic_assign(rows);
    const std::vector<int> after = top_topic_assign(shuffled);
    for (int r = 0; r < 6; ++r) {
        CHECK(after[static_cast<std::size_t>(r)] ==
              perm[static_cast<std::size_t>(before[static_cast<std::size_t>(r)])]);
    }

    Eigen::MatrixXd off(1, 2);
    off << 0.9, 0.3;
    CHECK_THROWS_WITH_AS(top_topic_assign(off), doctest::Contains("simplex"),
                         std::invalid_argument);
}

TEST_CASE("purity and NMI hit their pinned values") {
    const PurityNmi perfect = purity_nmi({0, 1, 0, 1}, {0, 1, 0, 1});
    CHECK(perfect.purity == doctest::Approx(1.0));
    CHECK(perfect.nmi == doctest::Approx(1.0));

    const PurityNmi lump = purity_nmi({0, 0, 0, 0}, {0, 1, 0, 1});
    CHECK(lump.purity == doctest::Approx(0.5));
    CHECK(lump.nmi == 0.0);

    const PurityNmi independent = purity_nmi({0, 0, 1, 1}, {0, 1, 0, 1});
    CHECK(independent.purity == doctest::Approx(0.5));
    CHECK(independent.nmi == doctest::Approx(0.0));

    // Pure clusters: purity 1 even when a label is split across clusters.
    const PurityNmi split = purity_nmi({0, 0, 1, 1, 2, 2}, {0, 0, 1, 1, 1, 1});
    CHECK(split.purity == doctest::Approx(1.0));
    CHECK(split.nmi < 1.0);

    CHECK_THROWS_AS(purity_nmi({0, 1}, {0}), std::invalid_argument);
    CHECK_THROWS_AS(purity_nmi({}, {}), std::invalid_argument);
}

TEST_CASE("purity and NMI agree with direct definition recomputation") {
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 5 + static_cast<int>(rng.uniform_u64(56));
        const int nc = 1 + static_cast<int>(rng.uniform_u64(4));
        const int nl = 1 + static_cast<int>(rng.uniform_u64(4));
        std::vector<int> clusters, labels;
        for (int i = 0; i < n; ++i) {
            clusters.push_back(static_cast<int>(rng.uniform_u64(static_cast<std::uint64_t>(nc))));
            labels.push_back(static_cast<int>(rng.uniform_u64(static_cast<std::uint64_t>(nl))));
        }
        const PurityNmi got = purity_nmi(clusters, labels);

        // Independent recomputation straight from the definitions.
        std::map<int, std::map<int, int>> joint;
        std::map<int, int> by_cluster, by_label;
        for (int i = 0; i < n; ++i) {
            ++joint[clusters[static_cast<std::size_t>(i)]][labels[static_cast<std::size_t>(i)]];
            ++by_cluster[clusters[static_cast<std::size_t>(i)]];
            ++by_label[labels[static_cast<std::size_t>(i)]];
        }
        double purity = 0.0;
        for (const auto& [c, row] : joint) {
            int top = 0;
            for (const auto& [l, count] : row) top = std::max(top, count);
            purity += top;
        }
        purity /= n;
        double hc = 0.0, hl = 0.0, mi = 0.0;
        for (const auto& [c, count] : by_cluster) {
            hc -= (double(count) / n) * std::log(double(count) / n);
        }
        for (const auto& [l, count] : by_label) {
            hl -= (double(count) / n) * std::log(double(count) / n);
        }
        for (const auto& [c, row] : joint) {
            for (const auto& [l, count] : row) {
                const double p = double(count) / n;
                mi += p * std::log(p / ((double(by_cluster[c]) / n) * (double(by_label[l]) / n)));
            }
        }
        const double expected_nmi = (hc + hl) > 0.0 ? mi / (0.5 * (hc + hl)) : 0.0;
        CHECK(std::abs(got.purity - purity) < 1e-10);
        CHECK(std::abs(got.nmi - std::clamp(expected_nmi, 0.0, 1.0)) < 1e-10);
        CHECK(got.nmi >= 0.0);
        CHECK(got.nmi <= 1.0);
        CHECK(got.purity > 0.0);
        CHECK(got.purity <= 1.0);

        // Invariance under relabeling of both id spaces.
        std::vector<int> clusters2, labels2;
        for (const int c : clusters) clusters2.push_back(9 - c);
        for (const int l : labels) labels2.push_back(l * 3 + 1);
        const PurityNmi relabeled = purity_nmi(clusters2, labels2);
        CHECK(relabeled.purity == doctest::Approx(got.purity).epsilon(1e-12));
        CHECK(relabeled.nmi == doctest::Approx(got.nmi).epsilon(1e-12));
    }
}

TEST_CASE("top_topic_words ranks decoder columns with deterministic ties") {
    Eigen::MatrixXd dec_w(4, 2);
    dec_w << 0.5, 0.1,  //
        0.5, 0.4,       //
        0.2, 0.4,       //
        0.9, 0.0;
    const auto topics = top_topic_words(dec_w, 3);
    REQUIRE(topics.size() == 2);
    CHECK(topics[0] == std::vector<int>{3, 0, 1});  // 0.5 tie: smaller id first
    CHECK(topics[1] == std::vector<int>{1, 2, 0});  // 0.4 tie: smaller id first

    CHECK_THROWS_WITH_AS(top_topic_words(dec_w, 0), doctest::Contains("top_words"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(top_topic_words(dec_w, 5), doctest::Contains("top_words"),
                         std::invalid_argument);
}

TEST_CASE("npmi realises the pinned pair conventions") {
    // Vocabulary a,b,e,x,y = ids 0..4. Supports: a{0,1}, b{0,1}, e{2,3},
    // x{0,1}, y{0,2}.
    Corpus c;
    c.vocab = Vocabulary({"a", "b", "e", "x", "y"}, {2, 2, 2, 2, 2});
    const auto add = [&](std::vector<int> ids) {
        std::vector<std::pair<int, int>> entries;
        for (const int w : ids) entries.emplace_back(w, 1);
        c.docs.emplace_back(5, std::move(entries));
        c.labels.push_back(-1);
        c.doc_ids.push_back("doc" + std::to_string(c.docs.size() - 1));
    };
    add({0, 1, 3, 4});
    add({0, 1, 3});
    add({2, 4});
    add({2});

    CHECK(npmi({{0, 1}}, c).score == 1.0);   // identical support
    CHECK(npmi({{0, 2}}, c).score == -1.0);  // never co-occur
    CHECK(npmi({{3, 4}}, c).score == 0.0);   // p(x,y) = p(x)p(y) exactly

    // Mean over pairs within one topic: (a,e) = -1, (a,x) = 1, (e,x) = -1.
    const NpmiResult mixed = npmi({{0, 2, 3}}, c);
    CHECK(mixed.per_topic[0] == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));

    // Top-fraction selection over per-topic means.
    const NpmiResult half = npmi({{0, 1}, {0, 2}}, c, 0.5);
    CHECK(half.per_topic == std::vector<double>{1.0, -1.0});
    CHECK(half.score == 1.0);
    CHECK(npmi({{0, 1}, {0, 2}}, c, 1.0).score == 0.0);

    for (const double s : mixed.per_topic) {
        CHECK(s >= -1.0);
        CHECK(s <= 1.0);
    }

    CHECK_THROWS_WITH_AS(npmi({{0}}, c), doctest::Contains("two words"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(npmi({{0, 9}}, c), doctest::Contains("outside"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(npmi({}, c), doctest::Contains("no topics"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(npmi({{0, 1}}, c, 0.0), doctest::Contains("top_fraction"),
                         std::invalid_argument);
}

TEST_CASE("transfer_eval scores targets without touching the model") {
    const NtmParams model = init_params(8, 2, 4, 5);
    const Corpus source = labeled_corpus(40, 0, 21);
    const Corpus far = labeled_corpus(32, 4, 22);  // disjoint word block

    EvalConfig cfg;
    cfg.npmi_top_words = 3;

    TempDir tmp;
    save_checkpoint(model, 1, tmp.path / "before.ckpt");
    const std::uint64_t hash_before = params_content_hash(model);

    const std::vector<EvalReport> reports =
        transfer_eval(model, source, {&source, &far}, cfg);
    REQUIRE(reports.size() == 2);

    save_checkpoint(model, 1, tmp.path / "after.ckpt");
    CHECK(params_content_hash(model) == hash_before);
    std::ifstream fa(tmp.path / "before.ckpt", std::ios::binary);
    std::ifstream fb(tmp.path / "after.ckpt", std::ios::binary);
    const std::string bytes_a((std::istreambuf_iterator<char>(fa)),
                              std::istreambuf_iterator<char>());
    const std::string bytes_b((std::istreambuf_iterator<char>(fb)),
                              std::istreambuf_iterator<char>());
    CHECK(bytes_a == bytes_b);

    // target = source reproduces the in-domain evaluation, step by step.
    const Eigen::MatrixXd train_z = infer(source, source.train_idx, model);
    const Eigen::MatrixXd test_z = infer(source, source.test_idx, model);
    std::vector<int> train_y, test_y;
    for (const int i : source.train_idx) train_y.push_back(source.labels[std::size_t(i)]);
    for (const int i : source.test_idx) test_y.push_back(source.labels[std::size_t(i)]);
    const CaResult ca = classify_ca(train_z, train_y, test_z, test_y, cfg.forest);
    const PurityNmi pn = purity_nmi(top_topic_assign(test_z), test_y);
    const NpmiResult coherence =
        npmi(top_topic_words(model.dec_w, 3), source, cfg.npmi_top_fraction);
    CHECK(reports[0].ca == ca.accuracy);
    CHECK(reports[0].tp == pn.purity);
    CHECK(reports[0].tn == pn.nmi);
    CHECK(reports[0].npmi == coherence.score);
    CHECK(reports[0].topics == 2);
    CHECK(reports[0].corpus_hash == corpus_content_hash(source));
    CHECK(reports[0].source_hash == corpus_content_hash(source));
    CHECK(reports[0].model_hash == hash_before);

    // The disjoint-block target evaluates cleanly through the united model.
    CHECK(reports[1].corpus_hash == corpus_content_hash(far));
    CHECK(reports[1].ca >= 0.0);
    CHECK(reports[1].npmi >= -1.0);
    CHECK(reports[1].npmi <= 1.0);

    Corpus narrow;
    narrow.vocab = Vocabulary({"a", "b"}, {1, 1});
    narrow.docs.emplace_back(2, std::vector<std::pair<int, int>>{{0, 1}});
    narrow.docs.emplace_back(2, std::vector<std::pair<int, int>>{{1, 1}});
    narrow.labels = {0, 1};
    narrow.doc_ids = {"d0", "d1"};
    narrow.train_idx = {0};
    narrow.test_idx = {1};
    CHECK_THROWS_WITH_AS(transfer_eval(model, source, {&narrow}, cfg),
                         doctest::Contains("unite_vocabularies"), std::invalid_argument);

    Corpus unsplit = labeled_corpus(10, 0, 23);
    unsplit.train_idx.clear();
    unsplit.test_idx.clear();
    CHECK_THROWS_WITH_AS(transfer_eval(model, source, {&unsplit}, cfg),
                         doctest::Contains("split_train_test"), std::invalid_argument);

    Corpus unlabeled = labeled_corpus(10, 0, 24);
    unlabeled.labels[static_cast<std::size_t>(unlabeled.test_idx.front())] = -1;
    CHECK_THROWS_WITH_AS(transfer_eval(model, source, {&unlabeled}, cfg),
                         doctest::Contains("unlabeled"), std::invalid_argument);

    CHECK_THROWS_WITH_AS(transfer_eval(model, source, {}, cfg), doctest::Contains("no targets"),
                         std::invalid_argument);
}

TEST_CASE("paired_t_test matches the externally computed reference") {
    const TTestResult res = paired_t_test({1.0, 2.0, 3.0}, {1.9, 3.1, 3.9}, 0.05);
    CHECK(res.computable);
    CHECK(res.t == doctest::Approx(-14.499999999999988).epsilon(1e-12));
    CHECK(res.p == doctest::Approx(0.004722576570858673).epsilon(1e-10));
    CHECK(res.significant);

    // Same numbers at a stricter level: no longer significant.
    CHECK(!paired_t_test({1.0, 2.0, 3.0}, {1.9, 3.1, 3.9}, 0.001).significant);

    // Degenerate-variance branches.
    const TTestResult same = paired_t_test({0.4, 0.6, 0.5}, {0.4, 0.6, 0.5}, 0.05);
    CHECK(!same.computable);
    CHECK(!same.significant);
    const TTestResult shifted =
        paired_t_test({1, 2, 3, 4, 5}, {2, 3, 4, 5, 6}, 0.05);
    CHECK(!shifted.computable);
    CHECK(!shifted.significant);

    CHECK_THROWS_WITH_AS(paired_t_test({1.0}, {2.0}, 0.05), doctest::Contains("two paired"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(paired_t_test({1.0, 2.0}, {1.0}, 0.05), doctest::Contains("length"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(paired_t_test({1.0, 2.0}, {2.0, 1.0}, 0.0), doctest::Contains("alpha"),
                         std::invalid_argument);
}

TEST_CASE("report serialisation and the mean-std table") {
    EvalReport report;
    report.target = "target0";
    report.ca = 0.8125;
    report.tp = 0.75;
    report.tn = 0.5;
    report.npmi = -0.125;
    report.topics = 10;
    report.corpus_hash = 0xABCD;
    report.source_hash = 0x1234;
    report.model_hash = 0xEF01;
    const nlohmann::json j = nlohmann::json::parse(eval_report_json(report));
    CHECK(j["target"] == "target0");
    CHECK(j["ca"] == 0.8125);
    CHECK(j["tp"] == 0.75);
    CHECK(j["tn"] == 0.5);
    CHECK(j["npmi"] == -0.125);
    CHECK(j["ca_single_class"] == false);
    CHECK(j["topics"] == 10);
    CHECK(j["corpus_hash"] == "000000000000abcd");
    CHECK(j["model_hash"] == "000000000000ef01");

    const MetricSummary single = summarize({0.5});
    CHECK(single.mean == 0.5);
    CHECK(single.std_dev == 0.0);
    const MetricSummary three = summarize({0.1, 0.2, 0.3});
    CHECK(three.mean == doctest::Approx(0.2));
    CHECK(three.std_dev == doctest::Approx(0.1));
    CHECK_THROWS_AS(summarize({}), std::invalid_argument);

    const std::string table = format_mean_std_table(
        {"greg", "baseline"}, {"CA", "TP"},
        {{{0.1234, 0.0056}, {0.5, 0.0}}, {{0.0999, 0.011}, {0.25, 0.005}}});
    CHECK(table.find("12.34±0.56") != std::string::npos);
    CHECK(table.find("50.00±0.00") != std::string::npos);
    CHECK(table.find("9.99±1.10") != std::string::npos);
    CHECK(table.find("greg") != std::string::npos);
    CHECK(table.find("CA") != std::string::npos);
    // Row order is preserved and the header comes first.
    CHECK(table.find("CA") < table.find("greg"));
    CHECK(table.find("greg") < table.find("baseline"));

    CHECK_THROWS_AS(format_mean_std_table({"a"}, {"x"}, {}), std::invalid_argument);
    CHECK_THROWS_AS(format_mean_std_table({"a"}, {"x", "y"}, {{{0.0, 0.0}}}),
                    std::invalid_argument);
}

}  // namespace
}  // namespace greg

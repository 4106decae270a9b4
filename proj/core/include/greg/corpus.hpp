#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace greg {

// A tokenised source document. `label` is -1 when the input carried none.
struct Document {
    std::string id;
    std::vector<std::string> tokens;
    int label = -1;
};

// Ordered word list with its inverse map. Word ids are positions in `words`,
// which is kept lexicographic so artifacts are byte-stable across runs.
// `doc_freq` counts documents (not occurrences); it is marked unavailable on
// vocabularies produced by set union, where the source counts are not
// comparable.
class Vocabulary {
public:
    Vocabulary() = default;
    Vocabulary(std::vector<std::string> words, std::vector<std::int64_t> doc_freq);

    int size() const { return static_cast<int>(words_.size()); }
    const std::vector<std::string>& words() const { return words_; }
    const std::string& word(int id) const { return words_.at(static_cast<std::size_t>(id)); }

    // Word id, or -1 when absent.
    int id_of(const std::string& word) const;
    bool contains(const std::string& word) const { return id_of(word) >= 0; }

    bool doc_freq_available() const { return doc_freq_available_; }
    const std::vector<std::int64_t>& doc_freq() const;

    // Order-insensitive fingerprint input: hashes the word list (which is
    // itself deterministic), for use in metadata.
    std::uint64_t content_hash() const;

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, int> index_;
    std::vector<std::int64_t> doc_freq_;
    bool doc_freq_available_ = false;
};

// Sparse bag-of-words counts over a fixed vocabulary. Entries are kept sorted
// by word id with strictly positive counts.
class BowVector {
public:
    BowVector() = default;
    BowVector(int vocab_size, std::vector<std::pair<int, int>> entries);

    int vocab_size() const { return vocab_size_; }
    const std::vector<std::pair<int, int>>& entries() const { return entries_; }

    // Total token count (sum of entries).
    std::int64_t total() const;
    bool empty() const { return entries_.empty(); }
    int count_of(int word_id) const;

    Eigen::VectorXd to_dense() const;

private:
    int vocab_size_ = 0;
    std::vector<std::pair<int, int>> entries_;  // (word id, count), sorted by id
};

// An ingested corpus: aligned documents, labels, and ids over one vocabulary.
// `train_idx` / `test_idx` are empty until split_train_test runs.
struct Corpus {
    Vocabulary vocab;
    std::vector<BowVector> docs;
    std::vector<int> labels;           // -1 where the source had no label
    std::vector<std::string> doc_ids;  // aligned with docs
    std::vector<std::string> label_names;
    std::vector<int> train_idx;
    std::vector<int> test_idx;

    int size() const { return static_cast<int>(docs.size()); }
    bool has_split() const { return !train_idx.empty() || !test_idx.empty(); }
};

// ---------------------------------------------------------------------------
// Preprocessing

// Stop words plus a fingerprint of the exact list, recorded in corpus
// metadata so archives are traceable to the filter that produced them.
struct StopWordList {
    std::unordered_set<std::string> words;
    std::uint64_t hash = 0;
};

StopWordList builtin_stop_words();

// One lowercase word per line; '#' comments and blank lines ignored.
StopWordList load_stop_words(const std::filesystem::path& file);

// Lowercases, maps every non-alphanumeric byte to a space, splits on
// whitespace, and drops stop words. ASCII-only case folding; multi-byte
// sequences pass through untouched.
std::vector<std::string> tokenize(const std::string& text, const StopWordList& stops);

// ---------------------------------------------------------------------------
// Vocabulary construction

// Words kept: doc_freq > min_df (strict), doc_freq < max_df_frac * |docs|
// (strict), and present in `embeddable` (the word set of an embedding file).
// Result is lexicographic. Throws when the result is empty, naming the
// filters.
Vocabulary build_vocabulary(const std::vector<Document>& docs, std::int64_t min_df,
                            double max_df_frac,
                            const std::unordered_set<std::string>& embeddable);

// Set union with deterministic (lexicographic) order. Document frequencies
// from different corpora are not comparable, so the result has none.
Vocabulary unite_vocabularies(const std::vector<Vocabulary>& vocabs);

// ---------------------------------------------------------------------------
// Vectorisation

// Multiplicity of each vocabulary word; out-of-vocabulary tokens are dropped.
// A document whose tokens are all OOV yields an empty BowVector (callers
// decide drop vs keep). Throws on an empty token list.
BowVector to_bow(const Document& doc, const Vocabulary& vocab);

// idf(v) = ln(N / df(v)). Requires document frequencies.
Eigen::VectorXd idf_weights(const Vocabulary& vocab, std::int64_t n_docs);

// Per-word tf-idf for one document: raw count times idf. Dense length-V.
Eigen::VectorXd tfidf_weights(const BowVector& bow, const Eigen::VectorXd& idf);

// Per-document tf-idf rows for a whole corpus (document frequencies taken
// from the corpus vocabulary, N from its document count).
std::vector<Eigen::VectorXd> tfidf_weights(const Corpus& corpus);

// ---------------------------------------------------------------------------
// Splitting

// Fills train/test index sets: |train| = round(ratio * N), partition drawn by
// Fisher-Yates on the given seed, both sides sorted ascending. Throws on
// corpora with fewer than two documents.
Corpus split_train_test(Corpus corpus, double ratio, std::uint64_t seed);

// Content fingerprint over vocabulary, documents, labels, and split; used in
// report metadata and run manifests.
std::uint64_t corpus_content_hash(const Corpus& corpus);

// ---------------------------------------------------------------------------
// Input / output

// One JSON object per line: {"id": str, "text": str, "label": str|int
// optional}. Missing ids get "line<k>" (1-based). Malformed lines throw with
// the line number.
struct RawDocument {
    std::string id;
    std::string text;
    std::string label;  // empty = unlabeled; integer labels are stringified
    bool has_label = false;
};

std::vector<RawDocument> read_jsonl(const std::filesystem::path& file);

// End-to-end ingestion: tokenize, drop documents that end up empty (before or
// after vocabulary filtering), build the vocabulary, vectorise, and map label
// strings to ids by lexicographic order of the distinct names.
struct PreprocessSummary {
    int n_input = 0;
    int n_kept = 0;
    std::vector<std::string> dropped_ids;  // empty after tokenize or all-OOV
    std::int64_t min_df = 0;
    double max_df_frac = 0.0;
    std::uint64_t stop_hash = 0;
};

struct PreprocessResult {
    Corpus corpus;
    PreprocessSummary summary;
};

PreprocessResult preprocess_corpus(const std::vector<RawDocument>& raw,
                                   const StopWordList& stops, std::int64_t min_df,
                                   double max_df_frac,
                                   const std::unordered_set<std::string>& embeddable);

// Processed-corpus archive: a directory holding vocab.tsv (word, docFreq),
// bow.tsv (docId, wordId, count triplets), labels.tsv (one label id per
// document line), and meta.json (counts, filter settings, stop-list hash,
// label names, doc ids, split).
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir,
                 const PreprocessSummary& summary);

Corpus load_corpus(const std::filesystem::path& dir);

}  // namespace greg

#include "greg/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "greg/hash.hpp"
#include "greg/rng.hpp"
#include "json.hpp"

namespace greg {

namespace {

using nlohmann::json;

// Kept sorted so the list (and its hash) is independent of lookup order.
const char* const kBuiltinStopWords[] = {
    "a",       "about",   "above",  "after",   "again",   "against", "all",     "am",
    "an",      "and",     "any",    "are",     "aren",    "as",      "at",      "be",
    "because", "been",    "before", "being",   "below",   "between", "both",    "but",
    "by",      "can",     "cannot", "could",   "couldn",  "did",     "didn",    "do",
    "does",    "doesn",   "doing",  "don",     "down",    "during",  "each",    "few",
    "for",     "from",    "further", "had",    "hadn",    "has",     "hasn",    "have",
    "haven",   "having",  "he",     "her",     "here",    "hers",    "herself", "him",
    "himself", "his",     "how",    "i",       "if",      "in",      "into",    "is",
    "isn",     "it",      "its",    "itself",  "just",    "ll",      "me",      "more",
    "most",    "mustn",   "my",     "myself",  "no",      "nor",     "not",     "now",
    "of",      "off",     "on",     "once",    "only",    "or",      "other",   "ought",
    "our",     "ours",    "ourselves", "out",  "over",    "own",     "re",      "s",
    "same",    "shan",    "she",    "should",  "shouldn", "so",      "some",    "such",
    "t",       "than",    "that",   "the",     "their",   "theirs",  "them",    "themselves",
    "then",    "there",   "these",  "they",    "this",    "those",   "through", "to",
    "too",     "under",   "until",  "up",      "ve",      "very",    "was",     "wasn",
    "we",      "were",    "weren",  "what",    "when",    "where",   "which",   "while",
    "who",     "whom",    "why",    "will",    "with",    "won",     "would",   "wouldn",
    "you",     "your",    "yours",  "yourself", "yourselves",
};

std::uint64_t stop_list_hash(const std::unordered_set<std::string>& words) {
    std::vector<std::string> sorted(words.begin(), words.end());
    std::sort(sorted.begin(), sorted.end());
    return fnv1a64_strings(sorted);
}

void write_text_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("save_corpus: cannot open " + path.string() + " for writing");
    }
    out << body;
    if (!out) {
        throw std::runtime_error("save_corpus: write failed for " + path.string());
    }
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

std::int64_t parse_int(const std::string& text, const std::string& where) {
    try {
        std::size_t used = 0;
        const long long value = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw std::runtime_error(where + ": expected an integer, got '" + text + "'");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary(std::vector<std::string> words, std::vector<std::int64_t> doc_freq)
    : words_(std::move(words)), doc_freq_(std::move(doc_freq)) {
    if (!doc_freq_.empty() && doc_freq_.size() != words_.size()) {
        throw std::invalid_argument("Vocabulary: doc_freq size " +
                                    std::to_string(doc_freq_.size()) + " does not match " +
                                    std::to_string(words_.size()) + " words");
    }
    doc_freq_available_ = !doc_freq_.empty();
    index_.reserve(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) {
        if (words_[i].empty()) {
            throw std::invalid_argument("Vocabulary: empty word at position " + std::to_string(i));
        }
        const auto [it, inserted] = index_.emplace(words_[i], static_cast<int>(i));
        if (!inserted) {
            throw std::invalid_argument("Vocabulary: duplicate word '" + words_[i] + "'");
        }
    }
}

int Vocabulary::id_of(const std::string& word) const {
    const auto it = index_.find(word);
    return it == index_.end() ? -1 : it->second;
}

const std::vector<std::int64_t>& Vocabulary::doc_freq() const {
    if (!doc_freq_available_) {
        throw std::logic_error("Vocabulary: document frequencies unavailable on this vocabulary");
    }
    return doc_freq_;
}

std::uint64_t Vocabulary::content_hash() const { return fnv1a64_strings(words_); }

// ---------------------------------------------------------------------------
// BowVector

BowVector::BowVector(int vocab_size, std::vector<std::pair<int, int>> entries)
    : vocab_size_(vocab_size), entries_(std::move(entries)) {
    if (vocab_size_ < 0) throw std::invalid_argument("BowVector: negative vocabulary size");
    std::sort(entries_.begin(), entries_.end());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto [id, count] = entries_[i];
        if (id < 0 || id >= vocab_size_) {
            throw std::invalid_argument("BowVector: word id " + std::to_string(id) +
                                        " outside vocabulary of size " +
                                        std::to_string(vocab_size_));
        }
        if (count <= 0) {
            throw std::invalid_argument("BowVector: nonpositive count for word id " +
                                        std::to_string(id));
        }
        if (i > 0 && entries_[i - 1].first == id) {
            throw std::invalid_argument("BowVector: duplicate entry for word id " +
                                        std::to_string(id));
        }
    }
}

std::int64_t BowVector::total() const {
    std::int64_t sum = 0;
    for (const auto& [id, count] : entries_) sum += count;
    return sum;
}

int BowVector::count_of(int word_id) const {
    const auto it = std::lower_bound(entries_.begin(), entries_.end(),
                                     std::make_pair(word_id, 0));
    return (it != entries_.end() && it->first == word_id) ? it->second : 0;
}

Eigen::VectorXd BowVector::to_dense() const {
    Eigen::VectorXd dense = Eigen::VectorXd::Zero(vocab_size_);
    for (const auto& [id, count] : entries_) dense(id) = static_cast<double>(count);
    return dense;
}

// ---------------------------------------------------------------------------
// Preprocessing

StopWordList builtin_stop_words() {
    StopWordList list;
    for (const char* word : kBuiltinStopWords) list.words.insert(word);
    list.hash = stop_list_hash(list.words);
    return list;
}

StopWordList load_stop_words(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("load_stop_words: cannot open " + file.string());
    StopWordList list;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.erase(hash_pos);
        std::istringstream fields(line);
        std::string word;
        while (fields >> word) list.words.insert(word);
    }
    list.hash = stop_list_hash(list.words);
    return list;
}

std::vector<std::string> tokenize(const std::string& text, const StopWordList& stops) {
    std::string cleaned(text.size(), ' ');
    for (std::size_t i = 0; i < text.size(); ++i) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        if (c >= 0x80) {
            cleaned[i] = text[i];  // multi-byte sequences pass through
        } else if (std::isalnum(c)) {
            cleaned[i] = static_cast<char>(std::tolower(c));
        }
    }
    std::vector<std::string> tokens;
    std::size_t start = 0;
    while (start < cleaned.size()) {
        const std::size_t end = cleaned.find(' ', start);
        const std::size_t stop = (end == std::string::npos) ? cleaned.size() : end;
        if (stop > start) {
            std::string token = cleaned.substr(start, stop - start);
            if (!stops.words.count(token)) tokens.push_back(std::move(token));
        }
        start = stop + 1;
    }
    return tokens;
}

// ---------------------------------------------------------------------------
// Vocabulary construction

Vocabulary build_vocabulary(const std::vector<Document>& docs, std::int64_t min_df,
                            double max_df_frac,
                            const std::unordered_set<std::string>& embeddable) {
    if (docs.empty()) {
        throw std::invalid_argument("build_vocabulary: document list is empty");
    }
    if (!(max_df_frac > 0.0) || max_df_frac > 1.0) {
        throw std::invalid_argument("build_vocabulary: max_df_frac must lie in (0, 1], got " +
                                    std::to_string(max_df_frac));
    }
    std::unordered_map<std::string, std::int64_t> df;
    std::vector<std::string> seen;  // per-document unique words, reused
    for (const Document& doc : docs) {
        seen.assign(doc.tokens.begin(), doc.tokens.end());
        std::sort(seen.begin(), seen.end());
        seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
        for (const std::string& word : seen) ++df[word];
    }
    // Both document-frequency bounds are strict: a word must appear in more
    // than min_df documents and in less than max_df_frac of them.
    const double cap = max_df_frac * static_cast<double>(docs.size());
    std::vector<std::pair<std::string, std::int64_t>> kept;
    for (const auto& [word, count] : df) {
        if (count > min_df && static_cast<double>(count) < cap && embeddable.count(word)) {
            kept.emplace_back(word, count);
        }
    }
    if (kept.empty()) {
        throw std::runtime_error(
            "build_vocabulary: no word survives the filters (document frequency > " +
            std::to_string(min_df) + ", document frequency < " + std::to_string(max_df_frac) +
            " of " + std::to_string(docs.size()) + " documents, embedding presence)");
    }
    std::sort(kept.begin(), kept.end());
    std::vector<std::string> words;
    std::vector<std::int64_t> freqs;
    words.reserve(kept.size());
    freqs.reserve(kept.size());
    for (auto& [word, count] : kept) {
        words.push_back(std::move(word));
        freqs.push_back(count);
    }
    return Vocabulary(std::move(words), std::move(freqs));
}

Vocabulary unite_vocabularies(const std::vector<Vocabulary>& vocabs) {
    if (vocabs.empty()) {
        throw std::invalid_argument("unite_vocabularies: need at least one vocabulary");
    }
    std::set<std::string> merged;
    for (const Vocabulary& vocab : vocabs) {
        merged.insert(vocab.words().begin(), vocab.words().end());
    }
    // Document frequencies from different corpora do not share a denominator,
    // so the union carries none.
    return Vocabulary(std::vector<std::string>(merged.begin(), merged.end()), {});
}

// ---------------------------------------------------------------------------
// Vectorisation

BowVector to_bow(const Document& doc, const Vocabulary& vocab) {
    if (doc.tokens.empty()) {
        throw std::invalid_argument("to_bow: document '" + doc.id + "' has an empty token list");
    }
    std::map<int, int> counts;
    for (const std::string& token : doc.tokens) {
        const int id = vocab.id_of(token);
        if (id >= 0) ++counts[id];
    }
    return BowVector(vocab.size(),
                     std::vector<std::pair<int, int>>(counts.begin(), counts.end()));
}

Eigen::VectorXd idf_weights(const Vocabulary& vocab, std::int64_t n_docs) {
    if (n_docs < 1) {
        throw std::invalid_argument("idf_weights: document count must be positive");
    }
    const std::vector<std::int64_t>& df = vocab.doc_freq();
    Eigen::VectorXd idf(vocab.size());
    for (int v = 0; v < vocab.size(); ++v) {
        if (df[static_cast<std::size_t>(v)] < 1) {
            throw std::invalid_argument("idf_weights: word '" + vocab.word(v) +
                                        "' has document frequency 0");
        }
        if (df[static_cast<std::size_t>(v)] > n_docs) {
            throw std::invalid_argument("idf_weights: word '" + vocab.word(v) +
                                        "' has document frequency above the document count");
        }
        idf(v) = std::log(static_cast<double>(n_docs) /
                          static_cast<double>(df[static_cast<std::size_t>(v)]));
    }
    return idf;
}

Eigen::VectorXd tfidf_weights(const BowVector& bow, const Eigen::VectorXd& idf) {
    if (bow.vocab_size() != idf.size()) {
        throw std::invalid_argument("tfidf_weights: vocabulary size " +
                                    std::to_string(bow.vocab_size()) +
                                    " does not match idf length " + std::to_string(idf.size()));
    }
    Eigen::VectorXd weights = Eigen::VectorXd::Zero(idf.size());
    for (const auto& [id, count] : bow.entries()) {
        weights(id) = static_cast<double>(count) * idf(id);
    }
    return weights;
}

std::vector<Eigen::VectorXd> tfidf_weights(const Corpus& corpus) {
    if (corpus.size() == 0) throw std::invalid_argument("tfidf_weights: corpus is empty");
    const Eigen::VectorXd idf = idf_weights(corpus.vocab, corpus.size());
    std::vector<Eigen::VectorXd> rows;
    rows.reserve(corpus.docs.size());
    for (const BowVector& bow : corpus.docs) rows.push_back(tfidf_weights(bow, idf));
    return rows;
}

// ---------------------------------------------------------------------------
// Splitting

Corpus split_train_test(Corpus corpus, double ratio, std::uint64_t seed) {
    const int n = corpus.size();
    if (n < 2) {
        throw std::invalid_argument("split_train_test: need at least two documents, got " +
                                    std::to_string(n));
    }
    if (!(ratio > 0.0) || !(ratio < 1.0)) {
        throw std::invalid_argument("split_train_test: ratio must lie in (0, 1)");
    }
    const int n_train = static_cast<int>(std::llround(ratio * static_cast<double>(n)));
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng rng(seed);
    rng.shuffle(order);
    corpus.train_idx.assign(order.begin(), order.begin() + n_train);
    corpus.test_idx.assign(order.begin() + n_train, order.end());
    std::sort(corpus.train_idx.begin(), corpus.train_idx.end());
    std::sort(corpus.test_idx.begin(), corpus.test_idx.end());
    return corpus;
}

std::uint64_t corpus_content_hash(const Corpus& corpus) {
    std::uint64_t h = corpus.vocab.content_hash();
    const auto mix_int = [&h](std::int64_t value) {
        char buf[sizeof(value)];
        std::memcpy(buf, &value, sizeof(value));
        h = fnv1a64(std::string_view(buf, sizeof(buf)), h);
    };
    mix_int(corpus.size());
    for (int d = 0; d < corpus.size(); ++d) {
        const auto ud = static_cast<std::size_t>(d);
        h = fnv1a64(corpus.doc_ids[ud], h);
        mix_int(corpus.labels[ud]);
        for (const auto& [word, count] : corpus.docs[ud].entries()) {
            mix_int(word);
            mix_int(count);
        }
        mix_int(-1);  // document terminator keeps entry runs unambiguous
    }
    for (const std::string& name : corpus.label_names) h = fnv1a64(name, h);
    for (const int i : corpus.train_idx) mix_int(i);
    mix_int(-2);
    for (const int i : corpus.test_idx) mix_int(i);
    return h;
}

// ---------------------------------------------------------------------------
// Input / output

std::vector<RawDocument> read_jsonl(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("read_jsonl: cannot open " + file.string());
    std::vector<RawDocument> docs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = "read_jsonl: " + file.filename().string() + " line " +
                                  std::to_string(lineno);
        json obj;
        try {
            obj = json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error(where + ": " + e.what());
        }
        if (!obj.is_object()) throw std::runtime_error(where + ": expected a JSON object");
        if (!obj.contains("text") || !obj["text"].is_string()) {
            throw std::runtime_error(where + ": missing string field \"text\"");
        }
        RawDocument doc;
        doc.text = obj["text"].get<std::string>();
        if (obj.contains("id") && !obj["id"].is_null()) {
            if (obj["id"].is_string()) {
                doc.id = obj["id"].get<std::string>();
            } else if (obj["id"].is_number_integer()) {
                doc.id = std::to_string(obj["id"].get<std::int64_t>());
            } else {
                throw std::runtime_error(where + ": field \"id\" must be a string or integer");
            }
        } else {
            doc.id = "line" + std::to_string(lineno);
        }
        if (obj.contains("label") && !obj["label"].is_null()) {
            if (obj["label"].is_string()) {
                doc.label = obj["label"].get<std::string>();
            } else if (obj["label"].is_number_integer()) {
                doc.label = std::to_string(obj["label"].get<std::int64_t>());
            } else {
                throw std::runtime_error(where + ": field \"label\" must be a string or integer");
            }
            doc.has_label = true;
        }
        docs.push_back(std::move(doc));
    }
    return docs;
}

PreprocessResult preprocess_corpus(const std::vector<RawDocument>& raw,
                                   const StopWordList& stops, std::int64_t min_df,
                                   double max_df_frac,
                                   const std::unordered_set<std::string>& embeddable) {
    PreprocessResult result;
    PreprocessSummary& summary = result.summary;
    summary.n_input = static_cast<int>(raw.size());
    summary.min_df = min_df;
    summary.max_df_frac = max_df_frac;
    summary.stop_hash = stops.hash;

    std::vector<Document> docs;
    std::vector<std::string> labels;  // raw label strings, aligned with docs
    std::vector<bool> labeled;
    for (const RawDocument& r : raw) {
        Document doc;
        doc.id = r.id;
        doc.tokens = tokenize(r.text, stops);
        if (doc.tokens.empty()) {
            summary.dropped_ids.push_back(r.id);
            continue;
        }
        docs.push_back(std::move(doc));
        labels.push_back(r.label);
        labeled.push_back(r.has_label);
    }
    if (docs.empty()) {
        throw std::runtime_error("preprocess_corpus: every document is empty after tokenisation");
    }

    Corpus& corpus = result.corpus;
    corpus.vocab = build_vocabulary(docs, min_df, max_df_frac, embeddable);

    // Label ids follow the lexicographic order of the distinct label strings,
    // fixed before any document is dropped for being out-of-vocabulary.
    std::set<std::string> distinct;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labeled[i]) distinct.insert(labels[i]);
    }
    corpus.label_names.assign(distinct.begin(), distinct.end());
    std::unordered_map<std::string, int> label_id;
    for (std::size_t i = 0; i < corpus.label_names.size(); ++i) {
        label_id[corpus.label_names[i]] = static_cast<int>(i);
    }

    for (std::size_t i = 0; i < docs.size(); ++i) {
        BowVector bow = to_bow(docs[i], corpus.vocab);
        if (bow.empty()) {
            summary.dropped_ids.push_back(docs[i].id);
            continue;
        }
        corpus.docs.push_back(std::move(bow));
        corpus.doc_ids.push_back(docs[i].id);
        corpus.labels.push_back(labeled[i] ? label_id.at(labels[i]) : -1);
    }
    if (corpus.docs.empty()) {
        throw std::runtime_error(
            "preprocess_corpus: every document is empty after vocabulary filtering");
    }
    summary.n_kept = corpus.size();
    return result;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& dir,
                 const PreprocessSummary& summary) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error("save_corpus: cannot create directory " + dir.string() + ": " +
                                 ec.message());
    }

    std::string vocab_body;
    for (int v = 0; v < corpus.vocab.size(); ++v) {
        const std::int64_t df =
            corpus.vocab.doc_freq_available() ? corpus.vocab.doc_freq()[static_cast<std::size_t>(v)]
                                              : -1;
        vocab_body += corpus.vocab.word(v) + '\t' + std::to_string(df) + '\n';
    }
    write_text_file(dir / "vocab.tsv", vocab_body);

    std::string bow_body;
    for (int d = 0; d < corpus.size(); ++d) {
        for (const auto& [word, count] : corpus.docs[static_cast<std::size_t>(d)].entries()) {
            bow_body += std::to_string(d) + '\t' + std::to_string(word) + '\t' +
                        std::to_string(count) + '\n';
        }
    }
    write_text_file(dir / "bow.tsv", bow_body);

    std::string label_body;
    for (int label : corpus.labels) label_body += std::to_string(label) + '\n';
    write_text_file(dir / "labels.tsv", label_body);

    json meta;
    meta["n_docs"] = corpus.size();
    meta["vocab_size"] = corpus.vocab.size();
    meta["doc_freq_available"] = corpus.vocab.doc_freq_available();
    meta["n_labels"] = corpus.label_names.size();
    meta["label_names"] = corpus.label_names;
    meta["doc_ids"] = corpus.doc_ids;
    meta["train_idx"] = corpus.train_idx;
    meta["test_idx"] = corpus.test_idx;
    meta["filters"] = {{"min_df", summary.min_df},
                       {"max_df_frac", summary.max_df_frac},
                       {"stop_hash", hash_hex(summary.stop_hash)}};
    meta["preprocess"] = {{"n_input", summary.n_input},
                          {"n_kept", summary.n_kept},
                          {"dropped_ids", summary.dropped_ids}};
    write_text_file(dir / "meta.json", meta.dump(2) + '\n');
}

Corpus load_corpus(const std::filesystem::path& dir) {
    const auto open = [&](const char* name) {
        std::ifstream in(dir / name);
        if (!in) {
            throw std::runtime_error("load_corpus: cannot open " + (dir / name).string());
        }
        return in;
    };

    json meta;
    {
        std::ifstream in = open("meta.json");
        try {
            in >> meta;
        } catch (const std::exception& e) {
            throw std::runtime_error("load_corpus: meta.json: " + std::string(e.what()));
        }
    }
    const int n_docs = meta.at("n_docs").get<int>();
    const int vocab_size = meta.at("vocab_size").get<int>();
    const bool df_available = meta.at("doc_freq_available").get<bool>();

    Corpus corpus;
    {
        std::ifstream in = open("vocab.tsv");
        std::vector<std::string> words;
        std::vector<std::int64_t> freqs;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            const std::vector<std::string> fields = split_tabs(line);
            if (fields.size() != 2) {
                throw std::runtime_error("load_corpus: vocab.tsv line " + std::to_string(lineno) +
                                         ": expected 2 tab-separated fields");
            }
            words.push_back(fields[0]);
            freqs.push_back(parse_int(fields[1], "load_corpus: vocab.tsv line " +
                                                     std::to_string(lineno)));
        }
        if (static_cast<int>(words.size()) != vocab_size) {
            throw std::runtime_error("load_corpus: vocab.tsv has " +
                                     std::to_string(words.size()) + " words but meta.json says " +
                                     std::to_string(vocab_size));
        }
        corpus.vocab = df_available ? Vocabulary(std::move(words), std::move(freqs))
                                    : Vocabulary(std::move(words), {});
    }

    std::vector<std::vector<std::pair<int, int>>> entries(static_cast<std::size_t>(n_docs));
    {
        std::ifstream in = open("bow.tsv");
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            const std::string where = "load_corpus: bow.tsv line " + std::to_string(lineno);
            const std::vector<std::string> fields = split_tabs(line);
            if (fields.size() != 3) {
                throw std::runtime_error(where + ": expected 3 tab-separated fields");
            }
            const std::int64_t doc = parse_int(fields[0], where);
            const std::int64_t word = parse_int(fields[1], where);
            const std::int64_t count = parse_int(fields[2], where);
            if (doc < 0 || doc >= n_docs) {
                throw std::runtime_error(where + ": document id " + std::to_string(doc) +
                                         " outside [0, " + std::to_string(n_docs) + ")");
            }
            entries[static_cast<std::size_t>(doc)].emplace_back(static_cast<int>(word),
                                                                static_cast<int>(count));
        }
    }
    corpus.docs.reserve(static_cast<std::size_t>(n_docs));
    for (auto& doc_entries : entries) {
        corpus.docs.emplace_back(vocab_size, std::move(doc_entries));
    }

    {
        std::ifstream in = open("labels.tsv");
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            corpus.labels.push_back(static_cast<int>(
                parse_int(line, "load_corpus: labels.tsv line " + std::to_string(lineno))));
        }
        if (static_cast<int>(corpus.labels.size()) != n_docs) {
            throw std::runtime_error("load_corpus: labels.tsv has " +
                                     std::to_string(corpus.labels.size()) +
                                     " lines but meta.json says " + std::to_string(n_docs));
        }
    }

    corpus.label_names = meta.at("label_names").get<std::vector<std::string>>();
    corpus.doc_ids = meta.at("doc_ids").get<std::vector<std::string>>();
    corpus.train_idx = meta.at("train_idx").get<std::vector<int>>();
    corpus.test_idx = meta.at("test_idx").get<std::vector<int>>();
    if (static_cast<int>(corpus.doc_ids.size()) != n_docs) {
        throw std::runtime_error("load_corpus: meta.json doc_ids count does not match n_docs");
    }
    const int n_labels = static_cast<int>(corpus.label_names.size());
    for (int label : corpus.labels) {
        if (label < -1 || label >= n_labels) {
            throw std::runtime_error("load_corpus: label id " + std::to_string(label) +
                                     " outside [-1, " + std::to_string(n_labels) + ")");
        }
    }
    for (const std::vector<int>* side : {&corpus.train_idx, &corpus.test_idx}) {
        for (int idx : *side) {
            if (idx < 0 || idx >= n_docs) {
                throw std::runtime_error("load_corpus: split index " + std::to_string(idx) +
                                         " outside [0, " + std::to_string(n_docs) + ")");
            }
        }
    }
    return corpus;
}

}  // namespace greg

#include "greg/augment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "greg/hash.hpp"
#include "greg/parallel.hpp"
#include "greg/rng.hpp"

namespace greg {

namespace {

constexpr const char* kKindNames[] = {
    "random_drop",          "random_insertion",     "random_to_similar",
    "highest_to_similar",   "lowest_to_similar",    "random_to_dissimilar",
    "highest_to_dissimilar", "lowest_to_dissimilar",
};

bool is_replacement(AugmentKind kind) {
    return kind != AugmentKind::RandomDrop && kind != AugmentKind::RandomInsertion;
}

bool uses_tfidf(AugmentKind kind) {
    switch (kind) {
        case AugmentKind::HighestToSimilar:
        case AugmentKind::HighestToDissimilar:
        case AugmentKind::LowestToSimilar:
        case AugmentKind::LowestToDissimilar:
            return true;
        default:
            return false;
    }
}

bool highest_first(AugmentKind kind) {
    return kind == AugmentKind::HighestToSimilar || kind == AugmentKind::HighestToDissimilar;
}

NeighborDirection direction_of(AugmentKind kind) {
    switch (kind) {
        case AugmentKind::RandomToSimilar:
        case AugmentKind::HighestToSimilar:
        case AugmentKind::LowestToSimilar:
            return NeighborDirection::Similar;
        default:
            return NeighborDirection::Dissimilar;
    }
}

// Ranks all words against the query by cosine, excluding the query itself.
// `sims` holds cosine similarities of the query against every word.
std::vector<int> select_neighbors(const Eigen::VectorXd& sims, int word, int top_words,
                                  NeighborDirection direction) {
    const int v = static_cast<int>(sims.size());
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(v) - 1);
    for (int u = 0; u < v; ++u) {
        if (u != word) order.push_back(u);
    }
    const auto better = [&](int u, int w) {
        if (sims(u) != sims(w)) {
            return direction == NeighborDirection::Similar ? sims(u) > sims(w) : sims(u) < sims(w);
        }
        return u < w;  // deterministic tie-break
    };
    const std::size_t k = std::min<std::size_t>(order.size(), static_cast<std::size_t>(top_words));
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      better);
    order.resize(k);
    return order;
}

Eigen::MatrixXd normalized_rows(const EmbeddingTable& embeddings, const char* who) {
    Eigen::MatrixXd unit = embeddings.vectors;
    for (Eigen::Index r = 0; r < unit.rows(); ++r) {
        const double norm = unit.row(r).norm();
        if (!(norm > 0.0) || !unit.row(r).allFinite()) {
            throw std::invalid_argument(std::string(who) + ": zero-norm embedding at row " +
                                        std::to_string(r));
        }
        unit.row(r) /= norm;
    }
    return unit;
}

std::filesystem::path cache_path(const std::filesystem::path& dir, std::uint64_t hash,
                                 int top_words) {
    return dir / ("neighbors-" + hash_hex(hash) + "-k" + std::to_string(top_words) + ".txt");
}

// Cache layout: one header line, then V similar lines and V dissimilar lines
// of space-separated word ids (a line may be empty when a word has no
// neighbors). Returns false on any mismatch so the caller rebuilds.
bool try_load_neighbor_cache(const std::filesystem::path& path, std::uint64_t hash,
                             int top_words, int vocab_size, NeighborIndex& out) {
    std::ifstream in(path);
    if (!in) return false;
    std::string line;
    if (!std::getline(in, line)) return false;
    std::istringstream header(line);
    std::string magic, version, hex;
    int k = 0;
    int v = 0;
    header >> magic >> version >> hex >> k >> v;
    if (!header || magic != "greg-neighbors" || version != "1" || hex != hash_hex(hash) ||
        k != top_words || v != vocab_size) {
        return false;
    }
    const auto read_lists = [&](std::vector<std::vector<int>>& lists) {
        lists.assign(static_cast<std::size_t>(vocab_size), {});
        for (int w = 0; w < vocab_size; ++w) {
            if (!std::getline(in, line)) return false;
            std::istringstream fields(line);
            int id = 0;
            while (fields >> id) {
                if (id < 0 || id >= vocab_size || id == w) return false;
                lists[static_cast<std::size_t>(w)].push_back(id);
            }
            if (!fields.eof()) return false;
        }
        return true;
    };
    NeighborIndex index;
    index.top_words = top_words;
    index.embedding_hash = hash;
    if (!read_lists(index.similar) || !read_lists(index.dissimilar)) return false;
    out = std::move(index);
    return true;
}

void save_neighbor_cache(const std::filesystem::path& path, const NeighborIndex& index) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("load_or_build_neighbor_index: cannot write " + path.string());
    }
    out << "greg-neighbors 1 " << hash_hex(index.embedding_hash) << ' ' << index.top_words << ' '
        << index.size() << '\n';
    const auto write_lists = [&](const std::vector<std::vector<int>>& lists) {
        for (const auto& list : lists) {
            for (std::size_t i = 0; i < list.size(); ++i) {
                if (i > 0) out << ' ';
                out << list[i];
            }
            out << '\n';
        }
    };
    write_lists(index.similar);
    write_lists(index.dissimilar);
    if (!out) {
        throw std::runtime_error("load_or_build_neighbor_index: write failed for " +
                                 path.string());
    }
}

// Token-occurrence expansion of a bag-of-words: word ids repeated by count,
// ascending. Gives perturbations a stable occurrence indexing.
std::vector<int> expand_tokens(const BowVector& x) {
    std::vector<int> tokens;
    tokens.reserve(static_cast<std::size_t>(x.total()));
    for (const auto& [word, count] : x.entries()) {
        tokens.insert(tokens.end(), static_cast<std::size_t>(count), word);
    }
    return tokens;
}

BowVector collect_bow(int vocab_size, const std::map<int, int>& counts) {
    std::vector<std::pair<int, int>> entries;
    entries.reserve(counts.size());
    for (const auto& [word, count] : counts) {
        if (count > 0) entries.emplace_back(word, count);
    }
    return BowVector(vocab_size, std::move(entries));
}

}  // namespace

const char* to_string(AugmentKind kind) {
    return kKindNames[static_cast<std::size_t>(kind)];
}

AugmentKind augment_kind_from_string(const std::string& name) {
    for (std::size_t i = 0; i < kAllAugmentKinds.size(); ++i) {
        if (name == kKindNames[i]) return kAllAugmentKinds[i];
    }
    std::string valid;
    for (const char* kind_name : kKindNames) {
        if (!valid.empty()) valid += ", ";
        valid += kind_name;
    }
    throw std::invalid_argument("augment_kind_from_string: unknown kind '" + name +
                                "' (expected one of: " + valid + ")");
}

void AugmentConfig::validate() const {
    if (!(beta > 0.0) || beta > 1.0) {
        throw std::invalid_argument("AugmentConfig: beta must lie in (0, 1], got " +
                                    std::to_string(beta));
    }
    if (top_words < 1) {
        throw std::invalid_argument("AugmentConfig: top_words must be at least 1");
    }
}

int num_perturbed(double beta, std::int64_t doc_length) {
    if (doc_length < 1) {
        throw std::invalid_argument("num_perturbed: document length must be positive");
    }
    if (!(beta > 0.0) || beta > 1.0) {
        throw std::invalid_argument("num_perturbed: beta must lie in (0, 1]");
    }
    // The epsilon keeps an integral beta * length from rounding up when the
    // product lands a hair above the integer.
    const auto n = static_cast<std::int64_t>(
        std::ceil(beta * static_cast<double>(doc_length) - 1e-9));
    return static_cast<int>(std::clamp<std::int64_t>(n, 1, doc_length));
}

std::vector<int> word_neighbors(int word, const EmbeddingTable& embeddings, int top_words,
                                NeighborDirection direction) {
    if (word < 0 || word >= embeddings.size()) {
        throw std::invalid_argument("word_neighbors: word id " + std::to_string(word) +
                                    " outside vocabulary of size " +
                                    std::to_string(embeddings.size()));
    }
    if (top_words < 1) throw std::invalid_argument("word_neighbors: top_words must be positive");
    const Eigen::MatrixXd unit = normalized_rows(embeddings, "word_neighbors");
    const Eigen::VectorXd sims = unit * unit.row(word).transpose();
    return select_neighbors(sims, word, top_words, direction);
}

const std::vector<int>& NeighborIndex::list(int word, NeighborDirection direction) const {
    if (word < 0 || word >= size()) {
        throw std::invalid_argument("NeighborIndex: word id " + std::to_string(word) +
                                    " outside vocabulary of size " + std::to_string(size()));
    }
    return direction == NeighborDirection::Similar ? similar[static_cast<std::size_t>(word)]
                                                   : dissimilar[static_cast<std::size_t>(word)];
}

std::uint64_t embedding_content_hash(const EmbeddingTable& embeddings) {
    const std::string dims = std::to_string(embeddings.size()) + "x" +
                             std::to_string(embeddings.dim());
    std::uint64_t h = fnv1a64(dims);
    const auto* bytes = reinterpret_cast<const char*>(embeddings.vectors.data());
    return fnv1a64(
        std::string_view(bytes, sizeof(double) * static_cast<std::size_t>(
                                    embeddings.vectors.size())),
        h);
}

NeighborIndex build_neighbor_index(const EmbeddingTable& embeddings, int top_words) {
    if (top_words < 1) {
        throw std::invalid_argument("build_neighbor_index: top_words must be positive");
    }
    const int v = embeddings.size();
    if (v == 0) throw std::invalid_argument("build_neighbor_index: empty embedding table");
    const Eigen::MatrixXd unit = normalized_rows(embeddings, "build_neighbor_index");
    NeighborIndex index;
    index.top_words = top_words;
    index.embedding_hash = embedding_content_hash(embeddings);
    index.similar.resize(static_cast<std::size_t>(v));
    index.dissimilar.resize(static_cast<std::size_t>(v));
    parallel_for(static_cast<std::size_t>(v), [&](std::size_t w) {
        const Eigen::VectorXd sims = unit * unit.row(static_cast<Eigen::Index>(w)).transpose();
        index.similar[w] =
            select_neighbors(sims, static_cast<int>(w), top_words, NeighborDirection::Similar);
        index.dissimilar[w] =
            select_neighbors(sims, static_cast<int>(w), top_words, NeighborDirection::Dissimilar);
    });
    return index;
}

NeighborIndex load_or_build_neighbor_index(const EmbeddingTable& embeddings, int top_words,
                                           const std::filesystem::path& cache_dir) {
    const std::uint64_t hash = embedding_content_hash(embeddings);
    const std::filesystem::path path = cache_path(cache_dir, hash, top_words);
    NeighborIndex index;
    if (try_load_neighbor_cache(path, hash, top_words, embeddings.size(), index)) {
        return index;
    }
    index = build_neighbor_index(embeddings, top_words);
    save_neighbor_cache(path, index);
    return index;
}

AugmentResult augment_bow(const BowVector& x, const AugmentConfig& cfg,
                          const Eigen::VectorXd& tfidf, const NeighborIndex& neighbors) {
    cfg.validate();
    if (x.empty()) {
        throw std::invalid_argument("augment_bow: document has no tokens");
    }
    if (is_replacement(cfg.kind)) {
        if (neighbors.size() != x.vocab_size()) {
            throw std::invalid_argument("augment_bow: neighbor index covers " +
                                        std::to_string(neighbors.size()) +
                                        " words but the document has vocabulary size " +
                                        std::to_string(x.vocab_size()));
        }
        if (neighbors.top_words != cfg.top_words) {
            throw std::invalid_argument("augment_bow: config asks for top_words = " +
                                        std::to_string(cfg.top_words) +
                                        " but the neighbor index was built with " +
                                        std::to_string(neighbors.top_words));
        }
    }
    if (uses_tfidf(cfg.kind) && tfidf.size() != x.vocab_size()) {
        throw std::invalid_argument("augment_bow: tf-idf weights have length " +
                                    std::to_string(tfidf.size()) +
                                    " but the vocabulary has size " +
                                    std::to_string(x.vocab_size()));
    }

    Rng rng(cfg.seed);
    const std::int64_t length = x.total();
    const int n = num_perturbed(cfg.beta, length);
    std::map<int, int> counts;
    for (const auto& [word, count] : x.entries()) counts[word] = count;

    AugmentResult result;
    switch (cfg.kind) {
        case AugmentKind::RandomDrop: {
            // Never drop the final token: a document must stay non-empty.
            const int applied = static_cast<int>(
                std::min<std::int64_t>(n, length - 1));
            result.clamped = applied < n;
            result.n = applied;
            const std::vector<int> tokens = expand_tokens(x);
            for (const std::size_t pos :
                 rng.sample_without_replacement(tokens.size(), static_cast<std::size_t>(applied))) {
                --counts[tokens[pos]];
            }
            break;
        }
        case AugmentKind::RandomInsertion: {
            result.n = n;
            for (int i = 0; i < n; ++i) {
                ++counts[static_cast<int>(rng.uniform_u64(static_cast<std::uint64_t>(
                    x.vocab_size())))];
            }
            break;
        }
        default: {  // replacement kinds
            // (word, occurrences to replace), in the order replacements run.
            std::vector<std::pair<int, int>> selected;
            if (uses_tfidf(cfg.kind)) {
                std::vector<std::pair<int, int>> ranked(x.entries().begin(), x.entries().end());
                const bool top_first = highest_first(cfg.kind);
                std::sort(ranked.begin(), ranked.end(), [&](const auto& u, const auto& v) {
                    if (tfidf(u.first) != tfidf(v.first)) {
                        return top_first ? tfidf(u.first) > tfidf(v.first)
                                         : tfidf(u.first) < tfidf(v.first);
                    }
                    return u.first < v.first;
                });
                // Walk down the ranking until n occurrences are covered.
                int remaining = n;
                for (const auto& [word, count] : ranked) {
                    if (remaining == 0) break;
                    const int take = std::min(count, remaining);
                    selected.emplace_back(word, take);
                    remaining -= take;
                }
            } else {
                const std::vector<int> tokens = expand_tokens(x);
                std::vector<std::size_t> positions =
                    rng.sample_without_replacement(tokens.size(), static_cast<std::size_t>(n));
                std::sort(positions.begin(), positions.end());
                for (const std::size_t pos : positions) {
                    if (!selected.empty() && selected.back().first == tokens[pos]) {
                        ++selected.back().second;  // adjacent positions share the word
                    } else {
                        selected.emplace_back(tokens[pos], 1);
                    }
                }
            }
            const NeighborDirection direction = direction_of(cfg.kind);
            for (const auto& [word, take] : selected) {
                const std::vector<int>& pool = neighbors.list(word, direction);
                if (pool.empty()) {
                    result.no_neighbors = true;  // keep the original occurrences
                    continue;
                }
                for (int i = 0; i < take; ++i) {
                    const int substitute =
                        pool[static_cast<std::size_t>(rng.uniform_u64(pool.size()))];
                    --counts[word];
                    ++counts[substitute];
                    ++result.n;
                }
            }
            break;
        }
    }
    result.bow = collect_bow(x.vocab_size(), counts);
    return result;
}

NoisyCorpusResult make_noisy_corpus(const Corpus& corpus, double strength, std::uint64_t seed,
                                    const NeighborIndex& neighbors) {
    if (corpus.size() == 0) {
        throw std::invalid_argument("make_noisy_corpus: corpus is empty");
    }
    if (!(strength > 0.0) || strength > 1.0) {
        throw std::invalid_argument("make_noisy_corpus: strength must lie in (0, 1]");
    }
    if (neighbors.size() != corpus.vocab.size()) {
        throw std::invalid_argument("make_noisy_corpus: neighbor index covers " +
                                    std::to_string(neighbors.size()) +
                                    " words but the vocabulary has size " +
                                    std::to_string(corpus.vocab.size()));
    }
    const Eigen::VectorXd idf = idf_weights(corpus.vocab, corpus.size());

    NoisyCorpusResult result;
    result.strength = strength;
    result.seed = seed;
    result.corpus = corpus;
    result.traces.resize(corpus.docs.size());
    result.degenerate.assign(corpus.docs.size(), false);

    const Rng root(seed);
    std::vector<std::string> failures(corpus.docs.size());
    parallel_for(corpus.docs.size(), [&](std::size_t d) {
        try {
            // Every document gets its own generator stream, so results do not
            // depend on the thread count or document processing order.
            Rng rng = root.fork(static_cast<std::uint64_t>(d));
            const int steps = 1 + static_cast<int>(rng.uniform_u64(3));
            BowVector current = corpus.docs[d];
            for (int s = 0; s < steps; ++s) {
                AugmentConfig cfg;
                cfg.kind = kAllAugmentKinds[rng.uniform_u64(kAllAugmentKinds.size())];
                cfg.beta = strength;
                cfg.top_words = neighbors.top_words;
                cfg.seed = rng.next_u64();
                Eigen::VectorXd weights;
                if (uses_tfidf(cfg.kind)) {
                    // Rank against the document's current counts but the
                    // source corpus idf.
                    weights = tfidf_weights(current, idf);
                }
                AugmentResult step = augment_bow(current, cfg, weights, neighbors);
                current = std::move(step.bow);
                result.traces[d].push_back(cfg.kind);
                if (step.clamped || step.no_neighbors) result.degenerate[d] = true;
            }
            result.corpus.docs[d] = std::move(current);
        } catch (const std::exception& e) {
            failures[d] = e.what();
        }
    });
    for (std::size_t d = 0; d < failures.size(); ++d) {
        if (!failures[d].empty()) {
            throw std::runtime_error("make_noisy_corpus: document '" + corpus.doc_ids[d] +
                                     "': " + failures[d]);
        }
    }
    return result;
}

}  // namespace greg

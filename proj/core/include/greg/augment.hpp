#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "greg/corpus.hpp"
#include "greg/embeddings.hpp"

namespace greg {

// The eight word-level augmentation operators. Replacement kinds name the
// selection rule (random / highest tf-idf / lowest tf-idf) and the direction
// of the substitute (a similar or dissimilar word under cosine).
enum class AugmentKind {
    RandomDrop,
    RandomInsertion,
    RandomToSimilar,
    HighestToSimilar,
    LowestToSimilar,
    RandomToDissimilar,
    HighestToDissimilar,
    LowestToDissimilar,
};

inline constexpr std::array<AugmentKind, 8> kAllAugmentKinds = {
    AugmentKind::RandomDrop,          AugmentKind::RandomInsertion,
    AugmentKind::RandomToSimilar,     AugmentKind::HighestToSimilar,
    AugmentKind::LowestToSimilar,     AugmentKind::RandomToDissimilar,
    AugmentKind::HighestToDissimilar, AugmentKind::LowestToDissimilar,
};

const char* to_string(AugmentKind kind);
AugmentKind augment_kind_from_string(const std::string& name);

struct AugmentConfig {
    AugmentKind kind = AugmentKind::RandomDrop;
    double beta = 0.5;   // fraction of the document to perturb, in (0, 1]
    int top_words = 20;  // candidate pool size for replacements
    std::uint64_t seed = 0;

    void validate() const;
};

// n = ceil(beta * length), clamped into [1, length]. A small epsilon guards
// the ceiling against floating-point noise when beta * length is integral.
int num_perturbed(double beta, std::int64_t doc_length);

enum class NeighborDirection { Similar, Dissimilar };

// Top-k word ids ranked by cosine similarity (descending for Similar,
// ascending for Dissimilar), excluding the query word, ties broken by the
// smaller word id. Asking for more neighbors than exist returns all others.
std::vector<int> word_neighbors(int word, const EmbeddingTable& embeddings, int top_words,
                                NeighborDirection direction);

// Precomputed neighbor lists for every word, both directions. Building is
// O(V^2) in cosine evaluations, so indexes can be cached on disk keyed by
// (embedding hash, top_words); a stale or foreign cache file is rebuilt.
struct NeighborIndex {
    int top_words = 0;
    std::uint64_t embedding_hash = 0;
    std::vector<std::vector<int>> similar;
    std::vector<std::vector<int>> dissimilar;

    int size() const { return static_cast<int>(similar.size()); }
    const std::vector<int>& list(int word, NeighborDirection direction) const;
};

std::uint64_t embedding_content_hash(const EmbeddingTable& embeddings);

NeighborIndex build_neighbor_index(const EmbeddingTable& embeddings, int top_words);

NeighborIndex load_or_build_neighbor_index(const EmbeddingTable& embeddings, int top_words,
                                           const std::filesystem::path& cache_dir);

// One augmented document plus the flags the operators may raise.
struct AugmentResult {
    BowVector bow;
    int n = 0;                // perturbation count actually applied
    bool clamped = false;     // drop would have emptied the document; one token kept
    bool no_neighbors = false;  // some replacement kept its word (empty candidate list)
};

// Applies one operator to one document:
//   RandomDrop       removes n token occurrences, chosen uniformly without
//                    replacement (never the last one: the document keeps at
//                    least one token, flagging the clamp);
//   RandomInsertion  adds n words drawn uniformly from the vocabulary;
//   replacements     pick n occurrences — uniformly for Random*, by walking
//                    the tf-idf ranking of the document's distinct words
//                    (highest or lowest first, ties to the smaller word id)
//                    for Highest*/Lowest* — and swap each for a uniform draw
//                    from the word's top-k neighbor list.
// Total count changes by exactly -n (drop), +n (insertion), 0 (replacement).
// `tfidf` must be a dense length-V weight vector for Highest*/Lowest* kinds
// and may be empty otherwise. Throws on an empty document.
AugmentResult augment_bow(const BowVector& x, const AugmentConfig& cfg,
                          const Eigen::VectorXd& tfidf, const NeighborIndex& neighbors);

// A whole-corpus noisy transform: each document goes through a composition of
// 1-3 operators sampled uniformly (kinds and length seeded per document, so
// the result is reproducible and independent of thread count). Perturbation
// counts use the document's *current* length at each step, and tf-idf ranks
// are recomputed from current counts against the source corpus idf. Labels,
// ids, vocabulary, and split carry over unchanged.
struct NoisyCorpusResult {
    Corpus corpus;
    std::vector<std::vector<AugmentKind>> traces;  // per-document composition
    std::vector<bool> degenerate;                  // any clamp / empty-neighbor flag
    double strength = 0.0;
    std::uint64_t seed = 0;
};

NoisyCorpusResult make_noisy_corpus(const Corpus& corpus, double strength, std::uint64_t seed,
                                    const NeighborIndex& neighbors);

}  // namespace greg

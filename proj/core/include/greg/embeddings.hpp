#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <unordered_set>
#include <vector>

namespace greg {

class Vocabulary;

// Word vectors aligned with a vocabulary: row w is the embedding of word id w.
struct EmbeddingTable {
    Eigen::MatrixXd vectors;  // V x L

    int size() const { return static_cast<int>(vectors.rows()); }
    int dim() const { return static_cast<int>(vectors.cols()); }
};

// Reads "word v1 v2 ... vL" lines (GloVe-style text format) and aligns them
// with the vocabulary. Every vocabulary word must appear with a consistent
// dimension and a nonzero norm; failures name the word. Dimension consistency
// is checked on every line, including words outside the vocabulary.
EmbeddingTable load_embeddings(const std::filesystem::path& file, const Vocabulary& vocab);

// Whole-file load without a vocabulary: rows in file insertion order, first
// occurrence wins on duplicate words.
struct LoadedEmbeddings {
    std::vector<std::string> words;
    Eigen::MatrixXd vectors;
};

LoadedEmbeddings load_embeddings(const std::filesystem::path& file);

// Scans an embedding file for its word set (first token per line) without
// parsing the numbers — the cheap presence filter used when building a
// vocabulary.
std::unordered_set<std::string> load_embedding_words(const std::filesystem::path& file);

// Builds a table from in-memory rows, applying the same checks as the loader.
EmbeddingTable make_embedding_table(const Eigen::MatrixXd& vectors);

}  // namespace greg

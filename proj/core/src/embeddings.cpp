#include "greg/embeddings.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "greg/corpus.hpp"

namespace greg {

namespace {

// Splits "word f1 f2 ... fL" on single spaces/tabs. Returns false for blank
// lines. Values are parsed with from_chars so the result is locale-free.
bool parse_embedding_line(const std::string& line, const std::string& where, std::string& word,
                          std::vector<double>& values) {
    word.clear();
    values.clear();
    std::size_t pos = 0;
    const auto skip_blanks = [&] {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) {
            ++pos;
        }
    };
    skip_blanks();
    if (pos == line.size()) return false;
    const std::size_t word_end = line.find_first_of(" \t", pos);
    if (word_end == std::string::npos) {
        throw std::runtime_error(where + ": no values after word");
    }
    word = line.substr(pos, word_end - pos);
    pos = word_end;
    while (true) {
        skip_blanks();
        if (pos == line.size()) break;
        const std::size_t value_end_search = line.find_first_of(" \t\r", pos);
        const std::size_t value_end =
            (value_end_search == std::string::npos) ? line.size() : value_end_search;
        double value = 0.0;
        const auto [ptr, err] =
            std::from_chars(line.data() + pos, line.data() + value_end, value);
        if (err != std::errc() || ptr != line.data() + value_end) {
            throw std::runtime_error(where + ": malformed number '" +
                                     line.substr(pos, value_end - pos) + "'");
        }
        values.push_back(value);
        pos = value_end;
    }
    if (values.empty()) {
        throw std::runtime_error(where + ": no values after word '" + word + "'");
    }
    return true;
}

void check_row_norm(const Eigen::VectorXd& row, const std::string& who) {
    if (!row.allFinite()) {
        throw std::runtime_error(who + " has non-finite values");
    }
    if (row.norm() == 0.0) {
        throw std::runtime_error(who + " is the all-zero vector (cosine undefined)");
    }
}

}  // namespace

EmbeddingTable load_embeddings(const std::filesystem::path& file, const Vocabulary& vocab) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("load_embeddings: cannot open " + file.string());
    Eigen::MatrixXd vectors;
    std::vector<bool> filled(static_cast<std::size_t>(vocab.size()), false);
    int dim = -1;
    std::string line;
    std::string word;
    std::vector<double> values;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where =
            "load_embeddings: " + file.filename().string() + " line " + std::to_string(lineno);
        if (!parse_embedding_line(line, where, word, values)) continue;
        if (dim < 0) {
            dim = static_cast<int>(values.size());
            vectors.setZero(vocab.size(), dim);
        } else if (static_cast<int>(values.size()) != dim) {
            throw std::runtime_error(where + ": word '" + word + "' has " +
                                     std::to_string(values.size()) + " values, expected " +
                                     std::to_string(dim));
        }
        const int id = vocab.id_of(word);
        if (id < 0 || filled[static_cast<std::size_t>(id)]) continue;  // first occurrence wins
        vectors.row(id) = Eigen::Map<const Eigen::VectorXd>(values.data(), dim);
        check_row_norm(vectors.row(id), where + ": embedding for word '" + word + "'");
        filled[static_cast<std::size_t>(id)] = true;
    }
    for (int v = 0; v < vocab.size(); ++v) {
        if (!filled[static_cast<std::size_t>(v)]) {
            throw std::runtime_error("load_embeddings: vocabulary word '" + vocab.word(v) +
                                     "' missing from " + file.string());
        }
    }
    return EmbeddingTable{std::move(vectors)};
}

LoadedEmbeddings load_embeddings(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("load_embeddings: cannot open " + file.string());
    LoadedEmbeddings out;
    std::vector<std::vector<double>> rows;
    std::unordered_map<std::string, std::size_t> seen;
    int dim = -1;
    std::string line;
    std::string word;
    std::vector<double> values;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where =
            "load_embeddings: " + file.filename().string() + " line " + std::to_string(lineno);
        if (!parse_embedding_line(line, where, word, values)) continue;
        if (dim < 0) {
            dim = static_cast<int>(values.size());
        } else if (static_cast<int>(values.size()) != dim) {
            throw std::runtime_error(where + ": word '" + word + "' has " +
                                     std::to_string(values.size()) + " values, expected " +
                                     std::to_string(dim));
        }
        if (!seen.emplace(word, rows.size()).second) continue;  // first occurrence wins
        out.words.push_back(word);
        rows.push_back(values);
    }
    out.vectors.setZero(static_cast<Eigen::Index>(rows.size()), dim < 0 ? 0 : dim);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.vectors.row(static_cast<Eigen::Index>(r)) =
            Eigen::Map<const Eigen::VectorXd>(rows[r].data(), dim);
        check_row_norm(out.vectors.row(static_cast<Eigen::Index>(r)),
                       "load_embeddings: embedding for word '" + out.words[r] + "'");
    }
    return out;
}

std::unordered_set<std::string> load_embedding_words(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("load_embedding_words: cannot open " + file.string());
    std::unordered_set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos) continue;
        const std::size_t end = line.find_first_of(" \t\r", start);
        if (end == std::string::npos) continue;  // a bare word carries no vector
        words.insert(line.substr(start, end - start));
    }
    return words;
}

EmbeddingTable make_embedding_table(const Eigen::MatrixXd& vectors) {
    if (vectors.rows() == 0 || vectors.cols() == 0) {
        throw std::invalid_argument("make_embedding_table: empty matrix");
    }
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
        check_row_norm(vectors.row(r), "make_embedding_table: row " + std::to_string(r));
    }
    return EmbeddingTable{vectors};
}

}  // namespace greg

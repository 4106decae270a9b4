#include "greg/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace greg {

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

bool valid_key(const std::string& key) {
    if (key.empty()) return false;
    for (unsigned char c : key) {
        if (!std::isalnum(c) && c != '_') return false;
    }
    return true;
}

[[noreturn]] void fail_at(const std::string& name, int line, const std::string& what) {
    throw std::invalid_argument("config " + name + " line " + std::to_string(line) + ": " + what);
}

}  // namespace

ParsedConfig parse_config_text(const std::string& text, const std::string& name) {
    ParsedConfig out;
    out.name = name;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                fail_at(name, line_no, "malformed section header '" + line + "'");
            }
            continue;  // sections organise the file; keys stay global
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            fail_at(name, line_no, "expected 'key = value', got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!valid_key(key)) {
            fail_at(name, line_no, "invalid key '" + key + "'");
        }
        if (value.empty()) {
            fail_at(name, line_no, "key '" + key + "' has no value");
        }
        if (auto it = out.entries.find(key); it != out.entries.end()) {
            fail_at(name, line_no,
                    "duplicate key '" + key + "' (first set on line " +
                        std::to_string(it->second.line) + ")");
        }
        out.entries.emplace(key, ConfigEntry{value, line_no});
    }
    return out;
}

ParsedConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::invalid_argument("config: cannot open '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path.string());
}

// ---------------------------------------------------------------------------
// ConfigReader

ConfigReader::ConfigReader(const ParsedConfig& config) : config_(&config) {}

bool ConfigReader::has(const std::string& key) const {
    return config_->entries.count(key) != 0;
}

const ConfigEntry* ConfigReader::consume(const std::string& key) {
    auto it = config_->entries.find(key);
    if (it == config_->entries.end()) return nullptr;
    consumed_.insert(key);
    return &it->second;
}

void ConfigReader::fail_type(const std::string& key, const ConfigEntry& entry,
                             const std::string& expected) const {
    fail_at(config_->name, entry.line,
            "key '" + key + "' expects " + expected + ", got '" + entry.value + "'");
}

std::string ConfigReader::get_string(const std::string& key, const std::string& fallback) {
    const ConfigEntry* entry = consume(key);
    return entry ? entry->value : fallback;
}

std::int64_t ConfigReader::get_int64(const std::string& key, std::int64_t fallback) {
    const ConfigEntry* entry = consume(key);
    if (!entry) return fallback;
    std::int64_t value = 0;
    const char* begin = entry->value.data();
    const char* end = begin + entry->value.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) fail_type(key, *entry, "an integer");
    return value;
}

int ConfigReader::get_int(const std::string& key, int fallback) {
    const std::int64_t wide = get_int64(key, fallback);
    if (wide < std::numeric_limits<int>::min() || wide > std::numeric_limits<int>::max()) {
        fail_type(key, config_->entries.at(key), "an integer in int range");
    }
    return static_cast<int>(wide);
}

std::uint64_t ConfigReader::get_u64(const std::string& key, std::uint64_t fallback) {
    const ConfigEntry* entry = consume(key);
    if (!entry) return fallback;
    std::uint64_t value = 0;
    const char* begin = entry->value.data();
    const char* end = begin + entry->value.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) fail_type(key, *entry, "a non-negative integer");
    return value;
}

double ConfigReader::get_double(const std::string& key, double fallback) {
    const ConfigEntry* entry = consume(key);
    if (!entry) return fallback;
    double value = 0.0;
    const char* begin = entry->value.data();
    const char* end = begin + entry->value.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) fail_type(key, *entry, "a number");
    return value;
}

AugmentKind ConfigReader::get_augment(const std::string& key, AugmentKind fallback) {
    const ConfigEntry* entry = consume(key);
    if (!entry) return fallback;
    try {
        return augment_kind_from_string(entry->value);
    } catch (const std::invalid_argument& e) {
        fail_at(config_->name, entry->line, "key '" + key + "': " + e.what());
    }
}

void ConfigReader::finish() const {
    std::vector<const std::pair<const std::string, ConfigEntry>*> unknown;
    for (const auto& item : config_->entries) {
        if (!consumed_.count(item.first)) unknown.push_back(&item);
    }
    if (unknown.empty()) return;
    std::sort(unknown.begin(), unknown.end(),
              [](const auto* a, const auto* b) { return a->second.line < b->second.line; });
    std::string message = "config " + config_->name + ":";
    for (const auto* item : unknown) {
        message += " unknown key '" + item->first + "' (line " +
                   std::to_string(item->second.line) + ");";
    }
    message.pop_back();
    throw std::invalid_argument(message);
}

// ---------------------------------------------------------------------------
// Settings resolution

ToolSettings resolve_settings(const ParsedConfig& file) {
    ToolSettings s;
    ConfigReader reader(file);

    s.train.topics = reader.get_int("topics", s.train.topics);
    s.train.hidden = reader.get_int("hidden", s.train.hidden);
    s.train.gamma = reader.get_double("gamma", s.train.gamma);
    s.train.aug_beta = reader.get_double("beta", s.train.aug_beta);
    s.train.augment = reader.get_augment("augment", s.train.augment);
    s.train.neighbor_pool = reader.get_int("neighbor_pool", s.train.neighbor_pool);
    s.train.top_i = reader.get_int("top_i", s.train.top_i);
    s.train.sinkhorn.lambda = reader.get_double("lambda", s.train.sinkhorn.lambda);
    s.train.sinkhorn.max_iters = reader.get_int("max_iters", s.train.sinkhorn.max_iters);
    s.train.sinkhorn.stop_threshold =
        reader.get_double("stop_threshold", s.train.sinkhorn.stop_threshold);
    s.train.batch_size = reader.get_int("batch_size", s.train.batch_size);
    s.train.learning_rate = reader.get_double("learning_rate", s.train.learning_rate);
    s.train.epochs = reader.get_int("epochs", s.train.epochs);
    s.train.seed = reader.get_u64("seed", s.train.seed);

    s.eval.forest.trees = reader.get_int("trees", s.eval.forest.trees);
    s.eval.forest.max_depth = reader.get_int("max_depth", s.eval.forest.max_depth);
    s.eval.npmi_top_words = reader.get_int("npmi_top_words", s.eval.npmi_top_words);
    s.eval.npmi_top_fraction =
        reader.get_double("npmi_top_fraction", s.eval.npmi_top_fraction);

    s.noise_strength = reader.get_double("noise_strength", s.noise_strength);
    s.min_df = reader.get_int64("min_df", s.min_df);
    s.max_df_frac = reader.get_double("max_df_frac", s.max_df_frac);
    s.split_ratio = reader.get_double("split_ratio", s.split_ratio);

    reader.finish();
    return s;
}

std::string settings_to_text(const ToolSettings& s) {
    std::ostringstream out;
    out.precision(17);
    out << "[model]\n";
    out << "topics = " << s.train.topics << "\n";
    out << "hidden = " << s.train.hidden << "\n";
    out << "\n[regulariser]\n";
    out << "gamma = " << s.train.gamma << "\n";
    out << "beta = " << s.train.aug_beta << "\n";
    out << "augment = " << to_string(s.train.augment) << "\n";
    out << "neighbor_pool = " << s.train.neighbor_pool << "\n";
    out << "top_i = " << s.train.top_i << "\n";
    out << "\n[sinkhorn]\n";
    out << "lambda = " << s.train.sinkhorn.lambda << "\n";
    out << "max_iters = " << s.train.sinkhorn.max_iters << "\n";
    out << "stop_threshold = " << s.train.sinkhorn.stop_threshold << "\n";
    out << "\n[train]\n";
    out << "batch_size = " << s.train.batch_size << "\n";
    out << "learning_rate = " << s.train.learning_rate << "\n";
    out << "epochs = " << s.train.epochs << "\n";
    out << "seed = " << s.train.seed << "\n";
    out << "\n[eval]\n";
    out << "trees = " << s.eval.forest.trees << "\n";
    out << "max_depth = " << s.eval.forest.max_depth << "\n";
    out << "npmi_top_words = " << s.eval.npmi_top_words << "\n";
    out << "npmi_top_fraction = " << s.eval.npmi_top_fraction << "\n";
    out << "\n[pipeline]\n";
    out << "noise_strength = " << s.noise_strength << "\n";
    out << "min_df = " << s.min_df << "\n";
    out << "max_df_frac = " << s.max_df_frac << "\n";
    out << "split_ratio = " << s.split_ratio << "\n";
    return out.str();
}

}  // namespace greg

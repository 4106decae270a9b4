#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>

#include "greg/augment.hpp"
#include "greg/eval.hpp"
#include "greg/ntm.hpp"

namespace greg {

// ---------------------------------------------------------------------------
// Key-value configuration files.
//
// Grammar: one `key = value` pair per line, `#` starts a comment anywhere,
// blank lines are skipped, and `[section]` lines are purely organisational --
// keys live in a single global namespace regardless of the section they
// appear under, and setting the same key twice is an error no matter where.

struct ConfigEntry {
    std::string value;
    int line = 0;
};

struct ParsedConfig {
    std::string name;  // file path or caller-supplied tag; used in errors
    std::map<std::string, ConfigEntry> entries;
};

ParsedConfig parse_config_text(const std::string& text, const std::string& name);
ParsedConfig parse_config_file(const std::filesystem::path& path);

// Typed, consumption-tracked access. Every getter marks its key as read;
// finish() throws if any key was never consumed, naming the stragglers, so a
// misspelled key ("gama") fails loudly instead of silently keeping the
// default.
class ConfigReader {
public:
    explicit ConfigReader(const ParsedConfig& config);

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback);
    int get_int(const std::string& key, int fallback);
    std::int64_t get_int64(const std::string& key, std::int64_t fallback);
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback);
    double get_double(const std::string& key, double fallback);
    AugmentKind get_augment(const std::string& key, AugmentKind fallback);

    void finish() const;

private:
    const ConfigEntry* consume(const std::string& key);
    [[noreturn]] void fail_type(const std::string& key, const ConfigEntry& entry,
                                const std::string& expected) const;

    const ParsedConfig* config_;
    std::set<std::string> consumed_;
};

// ---------------------------------------------------------------------------
// Tool settings: everything the command-line front end can configure, at
// library defaults until a file or a flag overrides them.

struct ToolSettings {
    TrainConfig train;
    EvalConfig eval;

    // Corpus-noising strength used by the standalone augmentation command.
    double noise_strength = 0.75;

    // Preprocessing knobs: words are kept when doc_freq > min_df (strict)
    // and doc_freq < max_df_frac * N (strict); the train share of the split
    // is round(split_ratio * N).
    std::int64_t min_df = 5;
    double max_df_frac = 0.8;
    double split_ratio = 0.8;
};

// Library defaults overlaid with the file's values. Unknown keys are an
// error (see ConfigReader::finish). Flag overrides are the caller's job and
// take precedence over anything resolved here.
ToolSettings resolve_settings(const ParsedConfig& file);

// The full settings bundle as configuration-file text, one `key = value`
// per line under the documented sections. resolve_settings on the output
// reproduces the input; used for manifest snapshots.
std::string settings_to_text(const ToolSettings& settings);

}  // namespace greg

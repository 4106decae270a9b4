#include <stdexcept>
#include <string>

#include "doctest.h"
#include "greg/config.hpp"

namespace {

greg::ParsedConfig parse(const std::string& text) {
    return greg::parse_config_text(text, "test.cfg");
}

}  // namespace

TEST_CASE("config: empty text resolves to library defaults") {
    const greg::ToolSettings s = greg::resolve_settings(parse(""));
    CHECK(s.train.topics == 50);
    CHECK(s.train.hidden == 100);
    CHECK(s.train.gamma == 300.0);
    CHECK(s.train.aug_beta == 0.5);
    CHECK(s.train.augment == greg::AugmentKind::HighestToSimilar);
    CHECK(s.train.neighbor_pool == 20);
    CHECK(s.train.top_i == 20);
    CHECK(s.train.sinkhorn.lambda == 100.0);
    CHECK(s.train.sinkhorn.max_iters == 5000);
    CHECK(s.train.sinkhorn.stop_threshold == 0.005);
    CHECK(s.train.batch_size == 64);
    CHECK(s.train.learning_rate == 1e-3);
    CHECK(s.train.epochs == 20);
    CHECK(s.train.seed == 1);
    CHECK(s.eval.forest.trees == 10);
    CHECK(s.eval.forest.max_depth == 8);
    CHECK(s.eval.npmi_top_words == 10);
    CHECK(s.eval.npmi_top_fraction == 0.5);
    CHECK(s.noise_strength == 0.75);
    CHECK(s.min_df == 5);
    CHECK(s.max_df_frac == 0.8);
    CHECK(s.split_ratio == 0.8);
}

TEST_CASE("config: values, comments, sections, and whitespace") {
    const auto cfg = parse(
        "# run settings\n"
        "[model]\n"
        "topics = 25   # inline comment\n"
        "\n"
        "  [regulariser]  \n"
        "gamma=12.5\n"
        "augment =  lowest_to_dissimilar\n"
        "seed = 18446744073709551615\n");
    const greg::ToolSettings s = greg::resolve_settings(cfg);
    CHECK(s.train.topics == 25);
    CHECK(s.train.gamma == 12.5);
    CHECK(s.train.augment == greg::AugmentKind::LowestToDissimilar);
    CHECK(s.train.seed == 18446744073709551615ULL);
    CHECK(s.train.hidden == 100);  // untouched keys keep defaults
}

TEST_CASE("config: sections are decorative, keys are global") {
    // The same key under two different sections is still a duplicate.
    CHECK_THROWS_WITH_AS(parse("[a]\ngamma = 1\n[b]\ngamma = 2\n"),
                         doctest::Contains("duplicate key 'gamma' (first set on line 2)"),
                         std::invalid_argument);
}

TEST_CASE("config: unknown key is rejected by name") {
    const auto cfg = parse("gama = 300\n");
    CHECK_THROWS_WITH_AS(greg::resolve_settings(cfg), doctest::Contains("unknown key 'gama'"),
                         std::invalid_argument);
}

TEST_CASE("config: several unknown keys are all reported in line order") {
    const auto cfg = parse("zeta = 1\ntopics = 4\ngama = 300\n");
    try {
        greg::resolve_settings(cfg);
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        const auto zeta = msg.find("unknown key 'zeta' (line 1)");
        const auto gama = msg.find("unknown key 'gama' (line 3)");
        CHECK(zeta != std::string::npos);
        CHECK(gama != std::string::npos);
        CHECK(zeta < gama);
        CHECK(msg.find("'topics'") == std::string::npos);
    }
}

TEST_CASE("config: malformed lines carry the file name and line number") {
    CHECK_THROWS_WITH_AS(parse("topics\n"), doctest::Contains("test.cfg line 1"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse("\n[broken\n"), doctest::Contains("line 2"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse("topics = \n"), doctest::Contains("has no value"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse("bad key = 1\n"), doctest::Contains("invalid key"),
                         std::invalid_argument);
}

TEST_CASE("config: type errors name the key, the value, and the line") {
    CHECK_THROWS_WITH_AS(greg::resolve_settings(parse("epochs = abc\n")),
                         doctest::Contains("key 'epochs' expects an integer, got 'abc'"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(greg::resolve_settings(parse("gamma = 1.2.3\n")),
                         doctest::Contains("key 'gamma' expects a number"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(greg::resolve_settings(parse("seed = -4\n")),
                         doctest::Contains("non-negative integer"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(greg::resolve_settings(parse("epochs = 2.5\n")),
                         doctest::Contains("expects an integer"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(greg::resolve_settings(parse("\n\naugment = sideways\n")),
                         doctest::Contains("line 3"), std::invalid_argument);
}

TEST_CASE("config: integer overflow of int-sized keys is a type error") {
    CHECK_THROWS_WITH_AS(greg::resolve_settings(parse("topics = 99999999999\n")),
                         doctest::Contains("int range"), std::invalid_argument);
}

TEST_CASE("config: settings round-trip through settings_to_text") {
    greg::ToolSettings s;
    s.train.topics = 7;
    s.train.gamma = 41.25;
    s.train.aug_beta = 0.625;
    s.train.augment = greg::AugmentKind::RandomInsertion;
    s.train.sinkhorn.lambda = 55.5;
    s.train.sinkhorn.max_iters = 123;
    s.train.sinkhorn.stop_threshold = 1e-4;
    s.train.batch_size = 17;
    s.train.learning_rate = 0.0625;
    s.train.epochs = 3;
    s.train.seed = 99;
    s.eval.forest.trees = 4;
    s.eval.forest.max_depth = 3;
    s.eval.npmi_top_words = 6;
    s.eval.npmi_top_fraction = 0.25;
    s.noise_strength = 0.375;
    s.min_df = 2;
    s.max_df_frac = 0.9;
    s.split_ratio = 0.75;

    const std::string text = greg::settings_to_text(s);
    const greg::ToolSettings back = greg::resolve_settings(greg::parse_config_text(text, "rt"));
    CHECK(back.train.topics == s.train.topics);
    CHECK(back.train.hidden == s.train.hidden);
    CHECK(back.train.gamma == s.train.gamma);
    CHECK(back.train.aug_beta == s.train.aug_beta);
    CHECK(back.train.augment == s.train.augment);
    CHECK(back.train.neighbor_pool == s.train.neighbor_pool);
    CHECK(back.train.top_i == s.train.top_i);
    CHECK(back.train.sinkhorn.lambda == s.train.sinkhorn.lambda);
    CHECK(back.train.sinkhorn.max_iters == s.train.sinkhorn.max_iters);
    CHECK(back.train.sinkhorn.stop_threshold == s.train.sinkhorn.stop_threshold);
    CHECK(back.train.batch_size == s.train.batch_size);
    CHECK(back.train.learning_rate == s.train.learning_rate);
    CHECK(back.train.epochs == s.train.epochs);
    CHECK(back.train.seed == s.train.seed);
    CHECK(back.eval.forest.trees == s.eval.forest.trees);
    CHECK(back.eval.forest.max_depth == s.eval.forest.max_depth);
    CHECK(back.eval.npmi_top_words == s.eval.npmi_top_words);
    CHECK(back.eval.npmi_top_fraction == s.eval.npmi_top_fraction);
    CHECK(back.noise_strength == s.noise_strength);
    CHECK(back.min_df == s.min_df);
    CHECK(back.max_df_frac == s.max_df_frac);
    CHECK(back.split_ratio == s.split_ratio);
}

TEST_CASE("config: reader tracks consumption only for known keys") {
    const auto cfg = parse("topics = 3\nlambda = 9\n");
    greg::ConfigReader reader(cfg);
    CHECK(reader.has("topics"));
    CHECK(!reader.has("hidden"));
    CHECK(reader.get_int("topics", 50) == 3);
    // 'lambda' was never consumed.
    CHECK_THROWS_WITH_AS(reader.finish(), doctest::Contains("unknown key 'lambda'"),
                         std::invalid_argument);
}

TEST_CASE("config: missing file is reported by path") {
    CHECK_THROWS_WITH_AS(greg::parse_config_file("/nonexistent/greg.cfg"),
                         doctest::Contains("/nonexistent/greg.cfg"), std::invalid_argument);
}

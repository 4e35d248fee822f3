#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace mgcmn;
using namespace mgcmn::testing;

namespace {

std::string error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Config, ParsesKeysCommentsAndWhitespace) {
    const auto cfg = parse_config(
        "# leading comment\n"
        "dataset.kind = ego\n"
        "dataset.name=414   # trailing comment\n"
        "\n"
        "model.recipe = edge:4,triangle:1\n"
        "model.h1 = 3\n"
        "train.learning_rate = 0.02\n"
        "train.dropout = 0.25\n"
        "ego.circle_rule = largest\n"
        "split.train_fraction = 0.4\n"
        "runs = 7\n"
        "seed = 9\n");
    EXPECT_EQ(cfg.kind, DatasetKind::kEgo);
    EXPECT_EQ(cfg.dataset_name, "414");
    EXPECT_EQ(cfg.model.recipe, MixRecipe::parse("edge:4,triangle:1"));
    EXPECT_EQ(cfg.model.h1, 3u);
    EXPECT_EQ(cfg.model.optimizer.learning_rate, 0.02);
    EXPECT_EQ(cfg.model.optimizer.dropout_rate, 0.25);
    EXPECT_EQ(cfg.ego.circle_rule, CircleRule::kLargestCircle);
    EXPECT_EQ(cfg.split.train_fraction, 0.4);
    EXPECT_EQ(cfg.runs, 7u);
    EXPECT_EQ(cfg.model.seed, 9u);
    EXPECT_EQ(cfg.effective_split_mode(), SplitMode::kGenerated);
    EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, DefaultsMatchReferenceHyperparameters) {
    const RunConfig cfg;
    EXPECT_EQ(cfg.model.hidden_dim, 16u);
    EXPECT_EQ(cfg.model.optimizer.learning_rate, 0.01);
    EXPECT_EQ(cfg.model.optimizer.weight_decay, 5e-4);
    EXPECT_EQ(cfg.model.optimizer.dropout_rate, 0.5);
    EXPECT_EQ(cfg.model.max_epochs, 200u);
    EXPECT_EQ(cfg.model.patience, 10u);
}

TEST(Config, UnknownAndDuplicateKeys) {
    auto msg = error_of([] { parse_config("model.h1 = 1\nmodel.depth = 3\n", "x.conf"); });
    EXPECT_NE(msg.find("x.conf:2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("unknown config key 'model.depth'"), std::string::npos) << msg;
    msg = error_of([] { parse_config("seed = 1\nseed = 2\n", "x.conf"); });
    EXPECT_NE(msg.find("x.conf:2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("given twice"), std::string::npos) << msg;
    EXPECT_THROW(parse_config("just words\n"), ConfigError);
}

TEST(Config, BadValuesAreConfigErrors) {
    for (const char* text : {"model.h1 = two\n", "model.h1 = -1\n", "train.learning_rate = fast\n",
                             "dataset.kind = mystery\n", "model.recipe = edge\n", "model.semantics = co-occurrence\n",
                             "ego.include_ego = maybe\n", "split.mode = sometimes\n", "runs = 1.5\n"}) {
        EXPECT_THROW(parse_config(text), ConfigError) << text;
    }
}

TEST(Config, ValidationCatchesInconsistentSettings) {
    EXPECT_THROW(parse_config("dataset.kind = planetoid\ndataset.name = imagenet\n").validate(), ConfigError);
    EXPECT_THROW(parse_config("dataset.kind = ego\ndataset.name = abc\n").validate(), ConfigError);
    EXPECT_THROW(parse_config("dataset.kind = generic\ndataset.edges = e.txt\n").validate(), ConfigError);
    EXPECT_THROW(parse_config("split.mode = public\n").validate(), ConfigError);
    EXPECT_THROW(parse_config("train.dropout = 1\n").validate(), ConfigError);
    EXPECT_THROW(parse_config("runs = 0\n").validate(), ConfigError);
    EXPECT_THROW(parse_config("split.val_fraction = 0.9\n").validate(), ConfigError);
}

TEST(Config, DatasetShorthand) {
    RunConfig cfg;
    apply_dataset_shorthand(cfg, "citeseer");
    EXPECT_EQ(cfg.kind, DatasetKind::kPlanetoid);
    EXPECT_EQ(cfg.effective_split_mode(), SplitMode::kPublic);
    apply_dataset_shorthand(cfg, "ego1684");
    EXPECT_EQ(cfg.kind, DatasetKind::kEgo);
    EXPECT_EQ(cfg.dataset_name, "1684");
    apply_dataset_shorthand(cfg, "107");
    EXPECT_EQ(cfg.dataset_name, "107");
    apply_dataset_shorthand(cfg, "synthetic");
    EXPECT_EQ(cfg.kind, DatasetKind::kSynthetic);
    EXPECT_THROW(apply_dataset_shorthand(cfg, "imagenet"), ConfigError);
}

TEST(Config, TextFormRoundTrips) {
    auto cfg = parse_config("dataset.kind = ego\ndataset.name = 1912\nmodel.recipe = edge:4,wedge:1\n"
                            "train.weight_decay = 0.001\nsplit.seed = 3\ngrid.recipes = edge:1;edge:8,wedge:2\n");
    const auto text = cfg.to_text();
    const auto again = parse_config(text);
    EXPECT_EQ(again.to_text(), text);
    EXPECT_EQ(again.model.recipe, cfg.model.recipe);
    EXPECT_EQ(again.grid.size(), 2u);
    EXPECT_EQ(again.split_seed, 3u);
    EXPECT_FALSE(again.normalize_features.has_value());
    // Sorted, one key per line.
    std::vector<std::string> keys;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) keys.push_back(line.substr(0, line.find(' ')));
    EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
}

TEST(Config, ShippedConfigsParseAndValidate) {
    const std::map<std::string, std::pair<std::string, std::size_t>> expected{
        {"cora", {"edge:8,triangle:1,wedge:3", 2}},   {"citeseer", {"edge:8,triangle:1,wedge:2", 1}},
        {"pubmed", {"edge:9,wedge:1", 1}},            {"ego107", {"edge:9,wedge:1", 2}},
        {"ego414", {"edge:4,triangle:1", 2}},         {"ego1684", {"edge:1,wedge:1", 2}},
        {"ego1912", {"edge:4,wedge:1", 2}}};
    for (const auto& [name, want] : expected) {
        const auto cfg = load_config(source_dir() / "configs" / (name + ".conf"));
        EXPECT_NO_THROW(cfg.validate()) << name;
        EXPECT_EQ(cfg.model.recipe, MixRecipe::parse(want.first)) << name;
        EXPECT_EQ(cfg.model.h1, want.second) << name;
        EXPECT_EQ(cfg.model.hidden_dim, 16u) << name;
        EXPECT_EQ(cfg.base_dir, source_dir() / "configs");
    }
}

TEST(Config, GenericPathsResolveAgainstConfigDirectory) {
    const auto dir = scratch_dir("config_generic");
    const auto k3 = data_fixture("k3");
    write_text(dir / "k3.conf", "dataset.kind = generic\ndataset.edges = " + (k3 / "edges.txt").string() +
                                    "\ndataset.features = " + (k3 / "features.csv").string() +
                                    "\ndataset.labels = " + (k3 / "labels.csv").string() +
                                    "\nsplit.per_class_train = 1\nsplit.val_fraction = 0\nsplit.test_fraction = 0.3\n");
    const auto cfg = load_config(dir / "k3.conf");
    EXPECT_TRUE(dataset_available(cfg));
    const auto loaded = load_dataset(cfg);
    EXPECT_EQ(loaded.dataset.graph.n_nodes(), 3u);
    EXPECT_EQ(loaded.splits.train.size(), 2u);
    EXPECT_EQ(resolve_path(cfg, "rel.txt"), dir / "rel.txt");
}

TEST(Config, MissingDataRootMakesDataUnavailable) {
    RunConfig cfg;
    apply_dataset_shorthand(cfg, "cora");
    cfg.dataset_dir = scratch_dir("config_empty_root");
    EXPECT_FALSE(dataset_available(cfg));
    EXPECT_THROW(load_dataset(cfg), DataError);
    cfg.kind = DatasetKind::kSynthetic;
    EXPECT_TRUE(dataset_available(cfg));
}

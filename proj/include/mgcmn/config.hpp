#pragma once

// Flat "key = value" run configuration with typed validation.

#include "mgcmn/data_io.hpp"
#include "mgcmn/model.hpp"
#include "mgcmn/motif.hpp"

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mgcmn {

/// Unknown keys, malformed values, or inconsistent settings.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class DatasetKind { kPlanetoid, kEgo, kGeneric, kSynthetic };

inline std::string_view to_string(DatasetKind k) {
    switch (k) {
        case DatasetKind::kPlanetoid: return "planetoid";
        case DatasetKind::kEgo: return "ego";
        case DatasetKind::kGeneric: return "generic";
        case DatasetKind::kSynthetic: return "synthetic";
    }
    return "?";
}

enum class SplitMode { kPublic, kGenerated };

struct RunConfig {
    DatasetKind kind = DatasetKind::kSynthetic;
    std::string dataset_name;          // cora / citeseer / pubmed, or an ego id
    std::filesystem::path dataset_dir; // explicit data directory (else MGCMN_DATA_ROOT)
    std::filesystem::path edges_file, features_file, labels_file;
    std::optional<bool> normalize_features;  // default depends on kind

    PlanetoidOptions planetoid;
    EgoOptions ego;
    SyntheticSpec synthetic;

    std::optional<SplitMode> split_mode;  // default: public for planetoid
    SplitSpec split;
    std::uint64_t split_seed = 0;

    ModelConfig model;
    std::size_t runs = 1;
    unsigned threads = 1;
    std::size_t grid_seeds = 5;
    std::vector<MixRecipe> grid;
    std::filesystem::path out;

    /// Directory relative file paths are resolved against.
    std::filesystem::path base_dir = ".";

    SplitMode effective_split_mode() const {
        return split_mode.value_or(kind == DatasetKind::kPlanetoid ? SplitMode::kPublic : SplitMode::kGenerated);
    }

    void validate() const {
        try {
            model.validate();
            split.validate();
            synthetic.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        if (runs < 1) throw ConfigError("runs must be at least 1");
        if (threads < 1) throw ConfigError("threads must be at least 1");
        if (grid_seeds < 1) throw ConfigError("grid.seeds must be at least 1");
        switch (kind) {
            case DatasetKind::kPlanetoid:
                if (!planetoid_reference(dataset_name) && dataset_dir.empty())
                    throw ConfigError("dataset.name must be cora, citeseer or pubmed (or set dataset.dir for other "
                                      "Planetoid-format data), got '" + dataset_name + "'");
                if (dataset_name.empty()) throw ConfigError("dataset.name is required for planetoid data");
                break;
            case DatasetKind::kEgo:
                if (dataset_name.empty() || !detail::parse_integer(dataset_name))
                    throw ConfigError("dataset.name must be a numeric ego id for ego data, got '" + dataset_name + "'");
                break;
            case DatasetKind::kGeneric:
                if (edges_file.empty() || labels_file.empty())
                    throw ConfigError("generic data needs dataset.edges and dataset.labels");
                break;
            case DatasetKind::kSynthetic:
                break;
        }
        if (kind == DatasetKind::kPlanetoid && effective_split_mode() == SplitMode::kPublic) return;
        if (effective_split_mode() == SplitMode::kPublic)
            throw ConfigError("split.mode=public is only available for planetoid data");
    }

    /// Canonical text form: every key, sorted, one per line.
    std::string to_text() const;
};

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline bool parse_bool_value(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("key '" + key + "': expected true/false, got '" + v + "'");
}

inline std::uint64_t parse_uint_value(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
        throw ConfigError("key '" + key + "': expected a nonnegative integer, got '" + v + "'");
    return out;
}

inline double parse_double_value(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
    }
}

struct KeyHandler {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

inline const std::map<std::string, KeyHandler>& config_keys() {
    using R = RunConfig;
    static const std::map<std::string, KeyHandler> keys = [] {
        std::map<std::string, KeyHandler> k;
        auto str_key = [&](const char* name, std::function<std::string&(R&)> ref) {
            k[name] = {[ref](R& c, const std::string& v) { ref(c) = v; },
                       [ref](const R& c) { return ref(const_cast<R&>(c)); }};
        };
        auto path_key = [&](const char* name, std::function<std::filesystem::path&(R&)> ref) {
            k[name] = {[ref](R& c, const std::string& v) { ref(c) = v; },
                       [ref](const R& c) { return ref(const_cast<R&>(c)).generic_string(); }};
        };
        auto bool_key = [&](const char* name, std::function<bool&(R&)> ref) {
            const std::string key = name;
            k[name] = {[ref, key](R& c, const std::string& v) { ref(c) = parse_bool_value(key, v); },
                       [ref](const R& c) { return std::string(ref(const_cast<R&>(c)) ? "true" : "false"); }};
        };
        auto size_key = [&](const char* name, std::function<std::size_t&(R&)> ref) {
            const std::string key = name;
            k[name] = {[ref, key](R& c, const std::string& v) { ref(c) = static_cast<std::size_t>(parse_uint_value(key, v)); },
                       [ref](const R& c) { return std::to_string(ref(const_cast<R&>(c))); }};
        };
        auto u64_key = [&](const char* name, std::function<std::uint64_t&(R&)> ref) {
            const std::string key = name;
            k[name] = {[ref, key](R& c, const std::string& v) { ref(c) = parse_uint_value(key, v); },
                       [ref](const R& c) { return std::to_string(ref(const_cast<R&>(c))); }};
        };
        auto real_key = [&](const char* name, std::function<double&(R&)> ref) {
            const std::string key = name;
            k[name] = {[ref, key](R& c, const std::string& v) { ref(c) = parse_double_value(key, v); },
                       [ref](const R& c) { return format_double(ref(const_cast<R&>(c))); }};
        };

        k["dataset.kind"] = {[](R& c, const std::string& v) {
                                 if (v == "planetoid") c.kind = DatasetKind::kPlanetoid;
                                 else if (v == "ego") c.kind = DatasetKind::kEgo;
                                 else if (v == "generic") c.kind = DatasetKind::kGeneric;
                                 else if (v == "synthetic") c.kind = DatasetKind::kSynthetic;
                                 else throw ConfigError("key 'dataset.kind': expected planetoid, ego, generic or synthetic, got '" + v + "'");
                             },
                             [](const R& c) { return std::string(to_string(c.kind)); }};
        str_key("dataset.name", [](R& c) -> std::string& { return c.dataset_name; });
        path_key("dataset.dir", [](R& c) -> std::filesystem::path& { return c.dataset_dir; });
        path_key("dataset.edges", [](R& c) -> std::filesystem::path& { return c.edges_file; });
        path_key("dataset.features", [](R& c) -> std::filesystem::path& { return c.features_file; });
        path_key("dataset.labels", [](R& c) -> std::filesystem::path& { return c.labels_file; });
        k["dataset.normalize_features"] = {
            [](R& c, const std::string& v) {
                if (v == "default") c.normalize_features.reset();
                else c.normalize_features = parse_bool_value("dataset.normalize_features", v);
            },
            [](const R& c) {
                return c.normalize_features ? std::string(*c.normalize_features ? "true" : "false") : std::string("default");
            }};

        bool_key("planetoid.strict_edge_check", [](R& c) -> bool& { return c.planetoid.strict_edge_check; });
        size_key("planetoid.validation_size", [](R& c) -> std::size_t& { return c.planetoid.validation_size; });

        k["ego.circle_rule"] = {[](R& c, const std::string& v) {
                                    try {
                                        c.ego.circle_rule = parse_circle_rule(v);
                                    } catch (const std::invalid_argument& e) {
                                        throw ConfigError(std::string("key 'ego.circle_rule': ") + e.what());
                                    }
                                },
                                [](const R& c) { return std::string(to_string(c.ego.circle_rule)); }};
        bool_key("ego.include_ego", [](R& c) -> bool& { return c.ego.include_ego; });
        bool_key("ego.drop_unlabeled", [](R& c) -> bool& { return c.ego.drop_unlabeled; });

        size_key("synthetic.nodes_per_class", [](R& c) -> std::size_t& { return c.synthetic.nodes_per_class; });
        size_key("synthetic.classes", [](R& c) -> std::size_t& { return c.synthetic.classes; });
        real_key("synthetic.p_in", [](R& c) -> double& { return c.synthetic.p_in; });
        real_key("synthetic.p_out", [](R& c) -> double& { return c.synthetic.p_out; });
        size_key("synthetic.feature_dim", [](R& c) -> std::size_t& { return c.synthetic.feature_dim; });
        real_key("synthetic.signal", [](R& c) -> double& { return c.synthetic.signal; });
        u64_key("synthetic.seed", [](R& c) -> std::uint64_t& { return c.synthetic.seed; });

        k["split.mode"] = {[](R& c, const std::string& v) {
                               if (v == "public") c.split_mode = SplitMode::kPublic;
                               else if (v == "generated") c.split_mode = SplitMode::kGenerated;
                               else throw ConfigError("key 'split.mode': expected public or generated, got '" + v + "'");
                           },
                           [](const R& c) {
                               return std::string(c.effective_split_mode() == SplitMode::kPublic ? "public" : "generated");
                           }};
        size_key("split.per_class_train", [](R& c) -> std::size_t& { return c.split.per_class_train; });
        real_key("split.train_fraction", [](R& c) -> double& { return c.split.train_fraction; });
        real_key("split.val_fraction", [](R& c) -> double& { return c.split.val_fraction; });
        real_key("split.test_fraction", [](R& c) -> double& { return c.split.test_fraction; });
        u64_key("split.seed", [](R& c) -> std::uint64_t& { return c.split_seed; });

        size_key("model.h1", [](R& c) -> std::size_t& { return c.model.h1; });
        size_key("model.h2", [](R& c) -> std::size_t& { return c.model.h2; });
        size_key("model.hidden_dim", [](R& c) -> std::size_t& { return c.model.hidden_dim; });
        k["model.recipe"] = {[](R& c, const std::string& v) {
                                 try {
                                     c.model.recipe = MixRecipe::parse(v);
                                 } catch (const std::invalid_argument& e) {
                                     throw ConfigError(std::string("key 'model.recipe': ") + e.what());
                                 }
                             },
                             [](const R& c) { return c.model.recipe.to_string(); }};
        k["model.semantics"] = {[](R& c, const std::string& v) {
                                    try {
                                        c.model.semantics = parse_semantics(v);
                                    } catch (const std::invalid_argument& e) {
                                        throw ConfigError(std::string("key 'model.semantics': ") + e.what());
                                    }
                                },
                                [](const R& c) { return std::string(to_string(c.model.semantics)); }};

        real_key("train.learning_rate", [](R& c) -> double& { return c.model.optimizer.learning_rate; });
        real_key("train.weight_decay", [](R& c) -> double& { return c.model.optimizer.weight_decay; });
        real_key("train.dropout", [](R& c) -> double& { return c.model.optimizer.dropout_rate; });
        real_key("train.beta1", [](R& c) -> double& { return c.model.optimizer.beta1; });
        real_key("train.beta2", [](R& c) -> double& { return c.model.optimizer.beta2; });
        real_key("train.epsilon", [](R& c) -> double& { return c.model.optimizer.epsilon; });
        size_key("train.max_epochs", [](R& c) -> std::size_t& { return c.model.max_epochs; });
        size_key("train.patience", [](R& c) -> std::size_t& { return c.model.patience; });
        u64_key("seed", [](R& c) -> std::uint64_t& { return c.model.seed; });

        size_key("runs", [](R& c) -> std::size_t& { return c.runs; });
        k["threads"] = {[](R& c, const std::string& v) { c.threads = static_cast<unsigned>(parse_uint_value("threads", v)); },
                        [](const R& c) { return std::to_string(c.threads); }};
        path_key("out", [](R& c) -> std::filesystem::path& { return c.out; });

        size_key("grid.seeds", [](R& c) -> std::size_t& { return c.grid_seeds; });
        k["grid.recipes"] = {[](R& c, const std::string& v) {
                                 c.grid.clear();
                                 std::size_t start = 0;
                                 while (start <= v.size()) {
                                     const auto semi = v.find(';', start);
                                     const auto part = trim(std::string_view(v).substr(start, semi == std::string::npos ? std::string::npos : semi - start));
                                     if (!part.empty()) {
                                         try {
                                             c.grid.push_back(MixRecipe::parse(part));
                                         } catch (const std::invalid_argument& e) {
                                             throw ConfigError(std::string("key 'grid.recipes': ") + e.what());
                                         }
                                     }
                                     if (semi == std::string::npos) break;
                                     start = semi + 1;
                                 }
                             },
                             [](const R& c) {
                                 std::string s;
                                 for (std::size_t i = 0; i < c.grid.size(); ++i) s += (i ? ";" : "") + c.grid[i].to_string();
                                 return s;
                             }};
        return k;
    }();
    return keys;
}

}  // namespace detail

inline std::string RunConfig::to_text() const {
    std::string text;
    for (const auto& [key, h] : detail::config_keys()) text += key + " = " + h.get(*this) + "\n";
    return text;
}

/// Applies one "key=value" assignment; throws ConfigError naming unknown keys.
inline void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    const auto& keys = detail::config_keys();
    auto it = keys.find(key);
    if (it == keys.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second.set(cfg, value);
}

/// Parses a config document. Lines are "key = value"; '#' starts a comment
/// (at line start or after whitespace). Each key may appear once.
inline RunConfig parse_config(std::string_view text, const std::string& origin = "<config>") {
    RunConfig cfg;
    std::set<std::string> seen;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = origin + ":" + std::to_string(line_no) + ": ";
        std::string_view body = line;
        for (std::size_t i = 0; i < body.size(); ++i)
            if (body[i] == '#' && (i == 0 || body[i - 1] == ' ' || body[i - 1] == '\t')) {
                body = body.substr(0, i);
                break;
            }
        body = detail::trim(body);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
        const std::string key(detail::trim(body.substr(0, eq)));
        const std::string value(detail::trim(body.substr(eq + 1)));
        if (key.empty()) throw ConfigError(where + "empty key");
        if (!seen.insert(key).second) throw ConfigError(where + "key '" + key + "' given twice");
        try {
            apply_config_value(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    RunConfig cfg = parse_config(buf.str(), path.string());
    cfg.base_dir = path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path();
    return cfg;
}

/// Maps a --dataset shorthand (cora, ego107, 107, synthetic) onto the config.
inline void apply_dataset_shorthand(RunConfig& cfg, const std::string& name) {
    if (planetoid_reference(name)) {
        cfg.kind = DatasetKind::kPlanetoid;
        cfg.dataset_name = name;
    } else if (name == "synthetic") {
        cfg.kind = DatasetKind::kSynthetic;
    } else if (const std::string id = name.rfind("ego", 0) == 0 ? name.substr(3) : name; detail::parse_integer(id)) {
        cfg.kind = DatasetKind::kEgo;
        cfg.dataset_name = id;
    } else {
        throw ConfigError("unknown dataset '" + name + "' (expected cora, citeseer, pubmed, ego<id> or synthetic)");
    }
}

/// Environment variable naming the dataset root directory.
inline constexpr const char* kDataRootEnv = "MGCMN_DATA_ROOT";

inline std::filesystem::path resolve_path(const RunConfig& cfg, const std::filesystem::path& p) {
    return p.is_absolute() ? p : cfg.base_dir / p;
}

/// Directory holding the dataset files: dataset.dir if set, else
/// $MGCMN_DATA_ROOT/<planetoid|facebook> when that exists, else the root.
inline std::filesystem::path resolve_data_dir(const RunConfig& cfg) {
    if (!cfg.dataset_dir.empty()) return resolve_path(cfg, cfg.dataset_dir);
    const char* root = std::getenv(kDataRootEnv);
    if (!root || !*root)
        throw DataError(std::string("no data directory: set dataset.dir or the ") + kDataRootEnv + " environment variable");
    const std::filesystem::path base(root);
    const auto sub = base / (cfg.kind == DatasetKind::kPlanetoid ? "planetoid" : "facebook");
    return std::filesystem::is_directory(sub) ? sub : base;
}

/// True when the files a config needs are present (used to skip data-gated checks).
inline bool dataset_available(const RunConfig& cfg) {
    try {
        switch (cfg.kind) {
            case DatasetKind::kPlanetoid:
                return std::filesystem::exists(resolve_data_dir(cfg) / ("ind." + cfg.dataset_name + ".graph"));
            case DatasetKind::kEgo:
                return std::filesystem::exists(resolve_data_dir(cfg) / (cfg.dataset_name + ".edges"));
            case DatasetKind::kGeneric:
                return std::filesystem::exists(resolve_path(cfg, cfg.edges_file));
            case DatasetKind::kSynthetic:
                return true;
        }
    } catch (const DataError&) {
    }
    return false;
}

/// Loads the configured dataset and its splits.
inline LoadedDataset load_dataset(const RunConfig& cfg) {
    LoadedDataset out;
    switch (cfg.kind) {
        case DatasetKind::kPlanetoid: {
            PlanetoidOptions opt = cfg.planetoid;
            opt.normalize_features = cfg.normalize_features.value_or(true);
            out = load_planetoid(resolve_data_dir(cfg), cfg.dataset_name, opt);
            break;
        }
        case DatasetKind::kEgo: {
            EgoOptions opt = cfg.ego;
            opt.normalize_features = cfg.normalize_features.value_or(false);
            out.dataset = load_ego_facebook(resolve_data_dir(cfg), cfg.dataset_name, opt);
            break;
        }
        case DatasetKind::kGeneric: {
            GenericOptions opt;
            opt.normalize_features = cfg.normalize_features.value_or(false);
            out.dataset = load_generic(resolve_path(cfg, cfg.edges_file),
                                       cfg.features_file.empty() ? std::filesystem::path() : resolve_path(cfg, cfg.features_file),
                                       resolve_path(cfg, cfg.labels_file), opt,
                                       cfg.dataset_name.empty() ? "generic" : cfg.dataset_name);
            break;
        }
        case DatasetKind::kSynthetic:
            out.dataset = make_planted_partition(cfg.synthetic);
            if (cfg.normalize_features.value_or(false)) {
                const auto& g = out.dataset.graph;
                out.dataset.graph = g.with_attributes(row_normalize(g.features()), g.labels(), g.n_classes());
            }
            break;
    }
    if (cfg.effective_split_mode() == SplitMode::kGenerated) out.splits = make_splits(out.dataset, cfg.split, cfg.split_seed);
    return out;
}

}  // namespace mgcmn

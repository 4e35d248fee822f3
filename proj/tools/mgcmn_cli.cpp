// mgcmn command-line driver. Every command prints one JSON document.
// Exit codes: 0 success, 1 computational failure, 2 configuration error.

#include "mgcmn/mgcmn.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

/// Settings shared by the data-driven commands.
struct CommonArgs {
    std::string config_path;
    std::string dataset;
    std::string recipe;
    std::optional<std::size_t> runs;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::string out;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--config", a.config_path, "Run configuration file (key = value)");
    cmd->add_option("--dataset", a.dataset, "Dataset shorthand: cora, citeseer, pubmed, ego<id>, synthetic");
    cmd->add_option("--recipe", a.recipe, "Mix recipe, e.g. edge:8,triangle:1,wedge:3");
    cmd->add_option("--runs", a.runs, "Number of training runs");
    cmd->add_option("--seed", a.seed, "Base seed");
    cmd->add_option("--threads", a.threads, "Worker threads (0 = all cores)");
    cmd->add_option("--out", a.out, "Also write the JSON report to this file");
    cmd->add_option("--set", a.overrides, "Override a config key (key=value); repeatable");
}

mgcmn::RunConfig resolve_config(const CommonArgs& a) {
    mgcmn::RunConfig cfg = a.config_path.empty() ? mgcmn::RunConfig{} : mgcmn::load_config(a.config_path);
    for (const auto& kv : a.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw mgcmn::ConfigError("--set expects key=value, got '" + kv + "'");
        mgcmn::apply_config_value(cfg, std::string(mgcmn::detail::trim(kv.substr(0, eq))),
                                  std::string(mgcmn::detail::trim(kv.substr(eq + 1))));
    }
    if (!a.dataset.empty()) mgcmn::apply_dataset_shorthand(cfg, a.dataset);
    if (!a.recipe.empty()) mgcmn::apply_config_value(cfg, "model.recipe", a.recipe);
    if (a.runs) cfg.runs = *a.runs;
    if (a.seed) cfg.model.seed = *a.seed;
    if (a.threads) cfg.threads = *a.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : *a.threads;
    if (!a.out.empty()) cfg.out = a.out;
    cfg.validate();
    return cfg;
}

json config_json(const mgcmn::RunConfig& cfg) {
    json j = json::object();
    std::istringstream in(cfg.to_text());
    for (std::string line; std::getline(in, line);) {
        const auto eq = line.find(" = ");
        if (eq != std::string::npos) j[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return j;
}

json dataset_json(const mgcmn::Dataset& ds) {
    const auto& g = ds.graph;
    return json{{"name", ds.name},
                {"nodes", g.n_nodes()},
                {"edges", g.n_edges()},
                {"raw_edge_records", ds.raw_edge_records},
                {"features", g.feature_dim()},
                {"classes", g.n_classes()},
                {"self_loops_dropped", g.cleanup().self_loops_dropped},
                {"duplicates_dropped", g.cleanup().duplicates_dropped},
                {"warnings", ds.warnings}};
}

json splits_json(const mgcmn::Splits& s) {
    return json{{"train", s.train.size()}, {"validation", s.validation.size()}, {"test", s.test.size()}};
}

void emit(const json& report, const mgcmn::RunConfig* cfg) {
    const std::string text = report.dump(2) + "\n";
    std::cout << text;
    if (cfg && !cfg->out.empty()) {
        std::ofstream f(cfg->out, std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write report to " + cfg->out.string());
        f << text;
    }
}

int cmd_motif_stats(const CommonArgs& args) {
    const auto cfg = resolve_config(args);
    const auto data = mgcmn::load_dataset(cfg);
    const auto& g = data.dataset.graph;
    const auto adj = mgcmn::build_adjacency(g);
    const auto tri = mgcmn::triangle_motif_matrix(adj, cfg.threads);
    const auto wedge = mgcmn::wedge_motif_matrix(adj, cfg.model.semantics, cfg.threads);

    bool support_ok = true;
    for (std::size_t r = 0; r < tri.n() && support_ok; ++r)
        for (std::size_t c : tri.row_cols(r))
            if (c != r && adj.at(r, c) == 0.0) {
                support_ok = false;
                break;
            }
    const std::size_t d_max = mgcmn::max_degree(g);
    const std::size_t bound = 2 * g.n_edges() * d_max;

    json report{{"command", "motif-stats"}, {"dataset", dataset_json(data.dataset)}};
    report["triangles"] = mgcmn::count_triangles(g);
    report["wedges"] = mgcmn::count_wedges(g);
    try {
        report["clustering_coefficient"] = mgcmn::clustering_coefficient(g);
    } catch (const std::domain_error& e) {
        report["clustering_coefficient"] = nullptr;
        report["clustering_coefficient_note"] = e.what();
    }
    report["max_degree"] = d_max;
    report["nnz"] = {{"adjacency", adj.nnz()}, {"triangle", tri.nnz()}, {"wedge", wedge.nnz()}};
    report["triangle_support_within_adjacency"] = support_ok;
    report["bound_2ED"] = bound;
    report["wedge_nnz_bound"] = {{"bound", bound}, {"value", wedge.nnz()}, {"holds", wedge.nnz() <= bound}};
    report["semantics"] = std::string(mgcmn::to_string(cfg.model.semantics));
    emit(report, &cfg);
    return kExitOk;
}

int cmd_train(const CommonArgs& args, const std::string& model_path, bool timing) {
    const auto cfg = resolve_config(args);
    const auto data = mgcmn::load_dataset(cfg);
    const auto result = mgcmn::train(cfg.model, data.dataset.graph, data.splits);
    const auto& rep = result.report;

    json epochs = json::array();
    for (const auto& e : rep.epochs)
        epochs.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_loss", e.val_loss},
                          {"val_accuracy", e.val_accuracy}});
    json report{{"command", "train"},
                {"dataset", dataset_json(data.dataset)},
                {"splits", splits_json(data.splits)},
                {"config", config_json(cfg)},
                {"mix_weights", result.model.mix_weights},
                {"layer_dims", result.model.dims()},
                {"epochs_run", rep.epochs.size()},
                {"best_epoch", rep.best_epoch},
                {"best_val_loss", rep.best_val_loss},
                {"best_val_accuracy", rep.best_val_accuracy},
                {"test_accuracy", rep.test_accuracy},
                {"early_stopped", rep.early_stopped},
                {"warnings", rep.warnings},
                {"epochs", epochs}};
    if (!model_path.empty()) {
        mgcmn::save_model(model_path, result.model, cfg.to_text());
        report["model_file"] = model_path;
    }
    if (timing) report["seconds"] = rep.seconds;
    emit(report, &cfg);
    return kExitOk;
}

int cmd_protocol(const CommonArgs& args, bool timing) {
    const auto started = std::chrono::steady_clock::now();
    const auto cfg = resolve_config(args);
    const auto data = mgcmn::load_dataset(cfg);
    const auto res = mgcmn::run_protocol(cfg.model, data.dataset.graph, data.splits, cfg.runs, cfg.threads);
    json report{{"command", "protocol"},
                {"dataset", dataset_json(data.dataset)},
                {"splits", splits_json(data.splits)},
                {"config", config_json(cfg)},
                {"runs", cfg.runs},
                {"seeds", {{"first", cfg.model.seed}, {"last", cfg.model.seed + cfg.runs - 1}}},
                {"mean", res.mean},
                {"max", res.max},
                {"min", res.min},
                {"stddev", res.stddev},
                {"accuracies", res.accuracies},
                {"best_epochs", res.best_epochs},
                {"warnings", res.warnings}};
    if (timing)
        report["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    emit(report, &cfg);
    return kExitOk;
}

int cmd_gradcheck(const CommonArgs& args, bool inject_wrong, bool dropout) {
    mgcmn::RunConfig cfg;
    const bool custom = !args.config_path.empty() || !args.dataset.empty() || !args.overrides.empty();
    if (!custom) cfg.model.recipe = mgcmn::MixRecipe::parse("edge:8,triangle:1,wedge:3");
    {
        CommonArgs a = args;
        mgcmn::RunConfig resolved = resolve_config(a);
        if (custom) cfg = resolved;
        else {
            if (!args.recipe.empty()) cfg.model.recipe = resolved.model.recipe;
            if (args.seed) cfg.model.seed = *args.seed;
            cfg.out = resolved.out;
        }
    }
    const mgcmn::Dataset ds = custom ? mgcmn::load_dataset(cfg).dataset : mgcmn::gradcheck_fixture();
    mgcmn::GradcheckOptions opt;
    opt.inject_wrong_gradient = inject_wrong;
    opt.force_dropout = dropout;
    const auto suite = mgcmn::gradcheck_suite(ds, cfg.model, opt);

    json shapes = json::array();
    for (const auto& row : suite.rows)
        shapes.push_back({{"h1", row.shape.h1},
                          {"h2", row.shape.h2},
                          {"max_relative_error", row.result.max_relative_error},
                          {"parameters_checked", row.result.checked},
                          {"worst",
                           {{"layer", row.result.worst_layer},
                            {"row", row.result.worst_row},
                            {"col", row.result.worst_col},
                            {"analytic", row.result.worst_analytic},
                            {"numeric", row.result.worst_numeric}}},
                          {"passed", row.result.passed}});
    json report{{"command", "gradcheck"},
                {"dataset", ds.name},
                {"recipe", cfg.model.recipe.to_string()},
                {"step", opt.step},
                {"tolerance", opt.tolerance},
                {"magnitude_floor", opt.magnitude_floor},
                {"wrong_gradient_injected", inject_wrong},
                {"max_relative_error", suite.max_relative_error},
                {"seconds", suite.seconds},
                {"shapes", shapes},
                {"passed", suite.passed}};
    emit(report, &cfg);
    return suite.passed ? kExitOk : kExitFailure;
}

int cmd_oracle_check(const mgcmn::OracleCheckOptions& opt, const std::string& out) {
    const auto started = std::chrono::steady_clock::now();
    const auto rep = mgcmn::oracle_check(opt);
    json mismatches = json::array();
    for (const auto& m : rep.mismatches)
        mismatches.push_back({{"graph", m.graph}, {"nodes", m.nodes}, {"motif", m.motif}, {"row", m.row},
                              {"col", m.col}, {"kernel", m.kernel}, {"oracle", m.oracle}});
    json report{{"command", "oracle-check"},
                {"semantics", std::string(mgcmn::to_string(opt.semantics))},
                {"seed", opt.seed},
                {"graphs", rep.graphs_checked},
                {"node_range", {opt.k3_only ? 3 : opt.min_n, opt.k3_only ? 3 : opt.max_n}},
                {"entries_compared", rep.entries_compared},
                {"mismatch_count", rep.mismatch_count},
                {"mismatches", mismatches}};
    if (opt.semantics == mgcmn::MotifSemantics::kEdgeInInstance) {
        report["default_wedge_kernel"] = {
            {"intentionally_divergent", true},
            {"differing_entries", rep.intentional_wedge_divergence},
            {"explanation",
             "the default wedge matrix counts every pair of nodes that co-occur in a wedge, including the two "
             "endpoints; the literal edge-in-instance reading only counts pairs joined by a wedge edge, so the "
             "endpoint-pair entries differ by design. The kernels were compared in edge-in-instance mode."}};
    }
    report["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    report["passed"] = rep.passed;
    mgcmn::RunConfig cfg;
    cfg.out = out;
    emit(report, &cfg);
    return rep.passed ? kExitOk : kExitFailure;
}

std::vector<mgcmn::MixRecipe> read_grid_file(const std::string& path) {
    std::vector<mgcmn::MixRecipe> grid;
    std::ifstream in(path);
    if (!in) throw mgcmn::ConfigError("cannot open grid file " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = mgcmn::detail::trim(line);
        if (t.empty() || t.front() == '#') continue;
        try {
            grid.push_back(mgcmn::MixRecipe::parse(t));
        } catch (const std::invalid_argument& e) {
            throw mgcmn::ConfigError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return grid;
}

int cmd_grid_search(const CommonArgs& args, const std::string& grid_file, const std::string& grid_text) {
    auto cfg = resolve_config(args);
    if (!grid_text.empty()) mgcmn::apply_config_value(cfg, "grid.recipes", grid_text);
    if (!grid_file.empty()) cfg.grid = read_grid_file(grid_file);
    if (cfg.grid.empty()) throw mgcmn::ConfigError("grid search needs recipes (--grid-file, --grid or grid.recipes)");
    const auto data = mgcmn::load_dataset(cfg);
    const auto res = mgcmn::grid_search(cfg.model, data.dataset.graph, data.splits, cfg.grid, cfg.grid_seeds, cfg.threads);
    json rows = json::array();
    for (const auto& r : res.rows)
        rows.push_back({{"recipe", r.recipe.to_string()},
                        {"effective_weights", r.weights},
                        {"val_accuracies", r.val_accuracies},
                        {"mean_val_accuracy", r.mean_val_accuracy},
                        {"warnings", r.warnings}});
    json report{{"command", "grid-search"},
                {"dataset", dataset_json(data.dataset)},
                {"splits", splits_json(data.splits)},
                {"config", config_json(cfg)},
                {"seeds", cfg.grid_seeds},
                {"objective", "mean best-epoch validation accuracy"},
                {"best_index", res.best_index},
                {"best_recipe", res.best.to_string()},
                {"rows", rows}};
    emit(report, &cfg);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mgcmn: motif-weighted graph convolution for node classification"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every command");

    CommonArgs common;

    auto* stats = app.add_subcommand("motif-stats", "Triangle/wedge counts, clustering coefficient, sparsity bounds");
    add_common(stats, common);

    std::string model_path = "mgcmn_model.bin";
    bool timing = false;
    auto* train = app.add_subcommand("train", "Train one model and report per-epoch metrics");
    add_common(train, common);
    train->add_option("--model", model_path, "Write the trained model container here (empty string disables)")->capture_default_str();
    train->add_flag("--timing", timing, "Include wall-clock seconds (makes output run-dependent)");

    auto* protocol = app.add_subcommand("protocol", "Train --runs models with consecutive seeds; report mean/max");
    add_common(protocol, common);
    protocol->add_flag("--timing", timing, "Include wall-clock seconds");

    bool inject_wrong = false, force_dropout = false;
    auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of analytic gradients");
    add_common(gradcheck, common);
    gradcheck->add_flag("--inject-wrong-gradient", inject_wrong, "Test hook: corrupt the analytic gradient");
    gradcheck->add_flag("--dropout", force_dropout, "Request dropout during the check (refused)");

    mgcmn::OracleCheckOptions oracle_opt;
    std::string oracle_semantics = "co_occurrence", oracle_out;
    auto* oracle = app.add_subcommand("oracle-check", "Compare motif kernels with brute-force enumeration");
    oracle->add_option("--graphs", oracle_opt.n_graphs, "Number of random graphs")->capture_default_str();
    oracle->add_option("--min-n", oracle_opt.min_n, "Smallest graph size")->capture_default_str();
    oracle->add_option("--max-n", oracle_opt.max_n, "Largest graph size (at most 30)")->capture_default_str();
    oracle->add_option("--seed", oracle_opt.seed, "Generator seed")->capture_default_str();
    oracle->add_option("--semantics", oracle_semantics, "co_occurrence or edge_in_instance")->capture_default_str();
    oracle->add_flag("--k3", oracle_opt.k3_only, "Check only the triangle graph K3");
    oracle->add_option("--out", oracle_out, "Also write the JSON report to this file");

    std::string grid_file, grid_text;
    auto* grid = app.add_subcommand("grid-search", "Pick a mix recipe by validation accuracy");
    add_common(grid, common);
    grid->add_option("--grid-file", grid_file, "File with one recipe per line");
    grid->add_option("--grid", grid_text, "Recipes separated by ';'");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*stats) return cmd_motif_stats(common);
        if (*train) return cmd_train(common, model_path, timing);
        if (*protocol) return cmd_protocol(common, timing);
        if (*gradcheck) return cmd_gradcheck(common, inject_wrong, force_dropout);
        if (*oracle) {
            oracle_opt.semantics = mgcmn::parse_semantics(oracle_semantics);
            return cmd_oracle_check(oracle_opt, oracle_out);
        }
        if (*grid) return cmd_grid_search(common, grid_file, grid_text);
    } catch (const mgcmn::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const mgcmn::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}

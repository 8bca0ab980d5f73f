// cgselect: generate synthetic sensor-selection tasks, train constrained and
// unconstrained Gumbel-Softmax selectors, and compare them against greedy and
// oracle baselines.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cgs/arch_calc.hpp"
#include "cgs/baselines.hpp"
#include "cgs/dataset.hpp"
#include "cgs/errors.hpp"
#include "cgs/evaluate.hpp"
#include "cgs/rng.hpp"
#include "cgs/selection.hpp"
#include "cgs/sweep.hpp"
#include "cgs/train.hpp"

namespace {

using nlohmann::ordered_json;

// Exit codes: 0 ok, 1 runtime failure, 2 usage or configuration error.
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<double> parse_double_list(const std::string& s, const char* what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError(std::string(what) + ": bad number '" + item + "'");
        }
    }
    if (out.empty()) throw UsageError(std::string(what) + ": empty list");
    return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoull(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("--seeds: bad seed '" + item + "'");
        }
    }
    if (out.empty()) throw UsageError("--seeds: empty list");
    return out;
}

std::vector<std::string> parse_string_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw cgs::IngestError("cannot open " + path.string() + " for writing");
    out << content;
}

// Applies a JSON config file underneath explicitly passed flags: every key
// must name a known option, and a flag given on the command line wins over
// the config value.
class ConfigMerger {
public:
    void bind(CLI::Option* opt, const std::string& key,
              std::function<void(const nlohmann::json&)> apply) {
        entries_[key] = {opt, std::move(apply)};
    }

    void merge(const std::string& path) const {
        std::ifstream in(path);
        if (!in) throw UsageError("config: cannot open " + path);
        nlohmann::json cfg;
        try {
            cfg = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw UsageError("config: " + std::string(e.what()));
        }
        if (!cfg.is_object()) throw UsageError("config: top level must be an object");
        for (const auto& [key, value] : cfg.items()) {
            const auto it = entries_.find(key);
            if (it == entries_.end()) {
                throw UsageError("config: unknown key '" + key + "'");
            }
            if (it->second.opt != nullptr && it->second.opt->count() > 0) {
                continue;  // explicit flag wins
            }
            try {
                it->second.apply(value);
            } catch (const nlohmann::json::exception& e) {
                throw UsageError("config: bad value for '" + key + "': " + e.what());
            }
        }
    }

private:
    struct Entry {
        CLI::Option* opt;
        std::function<void(const nlohmann::json&)> apply;
    };
    std::map<std::string, Entry> entries_;
};

struct TrainFlags {
    cgs::train::TrainConfig cfg;
    bool per_step = false;
};

// Registers the shared training hyperparameter flags on a subcommand and
// wires them into the config merger.
void add_train_options(CLI::App* app, TrainFlags& tf, ConfigMerger& merger) {
    auto& c = tf.cfg;
    auto bind = [&merger](CLI::Option* opt, const std::string& key, auto* target) {
        merger.bind(opt, key, [target](const nlohmann::json& v) {
            *target = v.get<std::remove_pointer_t<decltype(target)>>();
        });
    };
    bind(app->add_option("--epochs", c.epochs, "training epochs"), "epochs", &c.epochs);
    bind(app->add_option("--batch-size", c.batch_size, "minibatch size"), "batch_size",
         &c.batch_size);
    bind(app->add_option("--hidden", c.hidden, "classifier hidden width"), "hidden",
         &c.hidden);
    bind(app->add_option("--lr-classifier", c.lr_classifier, "classifier learning rate"),
         "lr_classifier", &c.lr_classifier);
    bind(app->add_option("--lr-selection", c.lr_selection, "selection-logit learning rate"),
         "lr_selection", &c.lr_selection);
    bind(app->add_option("--tau-start", c.tau_start, "initial temperature"), "tau_start",
         &c.tau_start);
    bind(app->add_option("--tau-end", c.tau_end, "final temperature"), "tau_end",
         &c.tau_end);
    bind(app->add_option("--anneal-horizon", c.anneal_horizon,
                         "epochs (or steps) to reach tau-end; 0 = whole run"),
         "anneal_horizon", &c.anneal_horizon);
    bind(app->add_flag("--per-step", tf.per_step, "anneal per optimizer step"),
         "anneal_per_step", &tf.per_step);
    bind(app->add_option("--rounds", c.rounds, "concrete samples averaged per forward"),
         "rounds", &c.rounds);
    bind(app->add_option("--patience", c.patience, "early-stopping patience in epochs"),
         "patience", &c.patience);
    bind(app->add_option("--seed", c.seed, "training seed"), "seed", &c.seed);
}

cgs::topo::CommGraph make_comm(const std::string& comm, std::size_t slots) {
    if (comm == "line") return cgs::topo::CommGraph::line(slots);
    if (comm == "star") return cgs::topo::CommGraph::star(slots);
    throw UsageError("--comm must be 'line' or 'star', got '" + comm + "'");
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
    std::string preset;
    cgs::data::TaskSpec spec;
    std::string out;
    // track which fields were passed explicitly so presets do not clobber them
    CLI::Option *o_layout, *o_rows, *o_cols, *o_channels, *o_placement, *o_snr,
        *o_samples, *o_seed;
};

void apply_preset(GenerateArgs& a) {
    if (a.preset.empty()) return;
    cgs::data::TaskSpec p;
    if (a.preset == "split-grid-8") {
        p.layout = "grid"; p.rows = 1; p.cols = 8; p.placement = "split";
    } else if (a.preset == "split-grid-8x8") {
        p.layout = "grid"; p.rows = 8; p.cols = 8; p.placement = "split";
        p.samples = 600;
    } else if (a.preset == "near-grid-2x4") {
        p.layout = "grid"; p.rows = 2; p.cols = 4; p.placement = "near";
    } else if (a.preset == "far-grid-2x4") {
        p.layout = "grid"; p.rows = 2; p.cols = 4; p.placement = "far";
    } else if (a.preset == "far-ring-8") {
        p.layout = "ring"; p.rows = 1; p.cols = 8; p.placement = "far";
    } else {
        throw UsageError("unknown preset '" + a.preset +
                         "' (expected split-grid-8, split-grid-8x8, near-grid-2x4, "
                         "far-grid-2x4 or far-ring-8)");
    }
    if (a.o_layout->count() == 0) a.spec.layout = p.layout;
    if (a.o_rows->count() == 0) a.spec.rows = p.rows;
    if (a.o_cols->count() == 0) a.spec.cols = p.cols;
    if (a.o_placement->count() == 0) a.spec.placement = p.placement;
    if (a.o_samples->count() == 0) a.spec.samples = p.samples;
}

int run_generate(GenerateArgs& a) {
    apply_preset(a);
    const cgs::data::GeneratedTask task = cgs::data::make_planted_task(a.spec);
    cgs::data::save_task(task, a.out);
    ordered_json summary;
    summary["out"] = a.out;
    summary["nodes"] = task.data.n_nodes;
    summary["channels"] = task.data.n_channels;
    summary["classes"] = task.data.n_classes;
    summary["samples"] = task.data.size();
    summary["probe_selfcheck"] = task.meta.at("probe_selfcheck");
    std::cout << summary.dump() << "\n";
    return 0;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
    std::string data;
    std::string method = "conditional";
    std::string comm = "line";
    std::size_t slots = 3;
    double threshold = 0.75;
    TrainFlags tf;
    std::string out;
};

int run_train(TrainArgs& a) {
    const auto task = cgs::data::load_task(a.data);
    const auto splits = cgs::train::task_splits(task);
    a.tf.cfg.anneal_per_step = a.tf.per_step;

    cgs::train::TrainResult result;
    if (a.method == "conditional") {
        const auto dist = cgs::topo::DistanceMatrix::from_layout(task.layout);
        const cgs::topo::BayesNet bn(make_comm(a.comm, a.slots));
        const auto mask = cgs::topo::build_masks(bn, dist, a.threshold);
        result = cgs::train::train_conditional(task.data, splits, bn, mask, a.tf.cfg);
    } else if (a.method == "vanilla") {
        result = cgs::train::train_vanilla(task.data, splits, a.slots, a.tf.cfg);
    } else {
        throw UsageError("--method must be 'conditional' or 'vanilla', got '" +
                         a.method + "'");
    }

    ordered_json summary;
    summary["method"] = a.method;
    summary["threshold"] = a.threshold;
    summary["selection"] = result.selection;
    summary["probe_acc"] = result.probe_acc;
    summary["mlp_test_acc"] = result.mlp_test_acc;
    summary["best_epoch"] = result.best_epoch;
    summary["epochs_run"] = result.epochs_run;
    summary["early_stopped"] = result.early_stopped;
    summary["hard_check_violations"] = result.hard_check_violations;

    if (!a.out.empty()) {
        const std::filesystem::path base(a.out);
        write_file(base / "model.json", result.model.dump(2) + "\n");
        ordered_json full = summary;
        full["curves"] = {{"train_loss", result.train_loss},
                          {"val_loss", result.val_loss},
                          {"entropy", result.entropy},
                          {"tau", result.tau}};
        write_file(base / "train.json", full.dump(2) + "\n");
    }
    std::cout << summary.dump() << "\n";
    return 0;
}

// ------------------------------------------------------------------- sweep

struct SweepArgs {
    std::string data;
    std::string thresholds = "0.3,0.5,0.75,1.0";
    std::string methods = "conditional,vanilla,greedy-mi,oracle";
    std::string seeds;
    std::size_t n_seeds = 0;
    std::string comm = "line";
    std::size_t slots = 3;
    std::size_t jobs = 1;
    TrainFlags tf;
    std::string out;
    CLI::Option* o_seeds = nullptr;
    CLI::Option* o_n_seeds = nullptr;
};

int run_sweep_cmd(SweepArgs& a) {
    const auto task = cgs::data::load_task(a.data);
    cgs::sweep::SweepConfig cfg;
    cfg.thresholds = parse_double_list(a.thresholds, "--thresholds");
    cfg.methods = parse_string_list(a.methods);
    if (a.o_seeds->count() > 0 && a.o_n_seeds->count() > 0) {
        throw UsageError("give either --seeds or --n-seeds, not both");
    }
    if (!a.seeds.empty()) {
        cfg.seeds = parse_seed_list(a.seeds);
    } else {
        const std::size_t n = a.n_seeds ? a.n_seeds : 1;
        for (std::size_t i = 1; i <= n; ++i) cfg.seeds.push_back(i);
    }
    cfg.comm = a.comm;
    cfg.slots = a.slots;
    cfg.jobs = a.jobs;
    a.tf.cfg.anneal_per_step = a.tf.per_step;
    cfg.train = a.tf.cfg;

    const auto t0 = std::chrono::steady_clock::now();
    const cgs::sweep::SweepResult result = cgs::sweep::run_sweep(task, cfg);
    const auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0);
    // Wall time goes to stderr so the machine-readable output stays identical
    // across reruns.
    std::cerr << "sweep finished in " << dt.count() << " s\n";

    ordered_json j;
    j["comm"] = cfg.comm;
    j["slots"] = cfg.slots;
    j["thresholds"] = cfg.thresholds;
    j["methods"] = cfg.methods;
    j["seeds"] = cfg.seeds;
    j["cells"] = result.to_json().at("cells");
    if (!a.out.empty()) {
        write_file(std::filesystem::path(a.out) / "sweep.json", j.dump(2) + "\n");
    }
    std::cout << j.dump() << "\n";
    return 0;
}

// ------------------------------------------------------------------ select

struct SelectArgs {
    std::string model;
    bool no_distinct = false;
    bool sample = false;
    std::uint64_t seed = 1;
};

int run_select(SelectArgs& a) {
    std::ifstream in(a.model);
    if (!in) throw cgs::IngestError("cannot open " + a.model);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw cgs::IngestError("model file: " + std::string(e.what()));
    }
    const std::string type = j.value("type", "");
    std::vector<std::size_t> selection;
    if (type == "independent") {
        auto layer = cgs::sel::IndependentSelection::from_json(j);
        if (a.sample) {
            cgs::Rng rng(a.seed);
            selection = layer.hard_sample(rng);
        } else {
            selection = layer.infer(!a.no_distinct);
        }
    } else if (type == "conditional") {
        auto layer = cgs::sel::ConditionalSelection::from_json(j);
        if (a.sample) {
            cgs::Rng rng(a.seed);
            selection = layer.hard_sample(rng);
        } else {
            selection = layer.infer(!a.no_distinct);
        }
    } else {
        throw cgs::IngestError("model file: unknown selection type '" + type + "'");
    }
    ordered_json out;
    out["type"] = type;
    out["selection"] = selection;
    std::cout << out.dump() << "\n";
    return 0;
}

// ------------------------------------------------------- oracle / baseline

struct OracleArgs {
    std::string data;
    std::string comm = "line";
    std::size_t slots = 3;
    double threshold = 0.75;
};

int run_oracle(OracleArgs& a) {
    const auto task = cgs::data::load_task(a.data);
    const auto dist = cgs::topo::DistanceMatrix::from_layout(task.layout);
    const cgs::topo::BayesNet bn(make_comm(a.comm, a.slots));
    const auto splits = cgs::train::task_splits(task);
    auto probe = [&](const std::vector<std::size_t>& sel) {
        return cgs::eval::probe_accuracy(task.data, sel, splits);
    };
    const auto best = cgs::baseline::oracle_search(probe, bn, dist, a.threshold);
    ordered_json out;
    out["threshold"] = a.threshold;
    out["assignment"] = best.assignment;
    out["probe_acc"] = best.score;
    std::cout << out.dump() << "\n";
    return 0;
}

int run_baseline(OracleArgs& a) {
    const auto task = cgs::data::load_task(a.data);
    const auto dist = cgs::topo::DistanceMatrix::from_layout(task.layout);
    const cgs::topo::BayesNet bn(make_comm(a.comm, a.slots));
    const auto splits = cgs::train::task_splits(task);
    const auto mi = cgs::baseline::mi_ranking(task.data);
    const auto pick = cgs::baseline::greedy_constrained_select(mi.ranking, bn, dist,
                                                               a.threshold);
    ordered_json out;
    out["threshold"] = a.threshold;
    out["mi"] = mi.mi;
    out["ranking"] = mi.ranking;
    if (pick) {
        out["feasible"] = true;
        out["assignment"] = *pick;
        out["probe_acc"] = cgs::eval::probe_accuracy(task.data, *pick, splits);
    } else {
        out["feasible"] = false;
    }
    std::cout << out.dump() << "\n";
    return 0;
}

// --------------------------------------------------------------- arch-calc

struct ArchArgs {
    cgs::arch::ArchInputs in;
    bool as_json = false;
};

int run_arch(ArchArgs& a) {
    const auto table = cgs::arch::msfbcnn_table(a.in);
    if (a.as_json) {
        std::cout << table.to_json().dump(2) << "\n";
    } else {
        std::cout << table.to_text();
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constrained feature-subset selection via conditional Gumbel-Softmax"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* cmd_gen = app.add_subcommand("generate", "generate a synthetic task");
    cmd_gen->add_option("--preset", gen.preset,
                        "task preset (split-grid-8, split-grid-8x8, near-grid-2x4, "
                        "far-grid-2x4, far-ring-8)");
    gen.o_layout = cmd_gen->add_option("--layout", gen.spec.layout, "grid | ring");
    gen.o_rows = cmd_gen->add_option("--rows", gen.spec.rows, "grid rows");
    gen.o_cols = cmd_gen->add_option("--cols", gen.spec.cols, "grid cols / ring size");
    gen.o_channels = cmd_gen->add_option("--channels", gen.spec.channels,
                                         "channels per node");
    gen.o_placement = cmd_gen->add_option("--placement", gen.spec.placement,
                                          "near | far | split");
    gen.o_snr = cmd_gen->add_option("--snr", gen.spec.snr, "base noise scale");
    gen.o_samples = cmd_gen->add_option("--samples", gen.spec.samples, "sample count");
    gen.o_seed = cmd_gen->add_option("--seed", gen.spec.seed, "generation seed");
    cmd_gen->add_option("--out", gen.out, "output directory")->required();

    TrainArgs tr;
    ConfigMerger tr_merger;
    std::string tr_config;
    auto* cmd_tr = app.add_subcommand("train", "train a selector on a task");
    cmd_tr->add_option("--data", tr.data, "task directory")->required();
    tr_merger.bind(cmd_tr->add_option("--method", tr.method, "conditional | vanilla"),
                   "method", [&tr](const nlohmann::json& v) { tr.method = v.get<std::string>(); });
    tr_merger.bind(cmd_tr->add_option("--comm", tr.comm, "line | star"), "comm",
                   [&tr](const nlohmann::json& v) { tr.comm = v.get<std::string>(); });
    tr_merger.bind(cmd_tr->add_option("--slots", tr.slots, "selected nodes M"), "slots",
                   [&tr](const nlohmann::json& v) { tr.slots = v.get<std::size_t>(); });
    tr_merger.bind(cmd_tr->add_option("--threshold", tr.threshold,
                                      "normalized distance threshold"),
                   "threshold", [&tr](const nlohmann::json& v) { tr.threshold = v.get<double>(); });
    add_train_options(cmd_tr, tr.tf, tr_merger);
    cmd_tr->add_option("--out", tr.out, "output directory for model.json/train.json");
    cmd_tr->add_option("--config", tr_config, "JSON config file (flags win)");

    SweepArgs sw;
    ConfigMerger sw_merger;
    std::string sw_config;
    auto* cmd_sw = app.add_subcommand("sweep", "threshold x method x seed comparison");
    cmd_sw->add_option("--data", sw.data, "task directory")->required();
    sw_merger.bind(cmd_sw->add_option("--thresholds", sw.thresholds, "comma list"),
                   "thresholds", [&sw](const nlohmann::json& v) {
                       std::string s;
                       for (const auto& x : v) s += (s.empty() ? "" : ",") + nlohmann::json(x).dump();
                       sw.thresholds = s;
                   });
    sw_merger.bind(cmd_sw->add_option("--methods", sw.methods, "comma list"), "methods",
                   [&sw](const nlohmann::json& v) {
                       std::string s;
                       for (const auto& x : v) s += (s.empty() ? "" : ",") + x.get<std::string>();
                       sw.methods = s;
                   });
    sw.o_seeds = cmd_sw->add_option("--seeds", sw.seeds, "comma list of training seeds");
    sw.o_n_seeds = cmd_sw->add_option("--n-seeds", sw.n_seeds, "use seeds 1..N");
    sw_merger.bind(sw.o_seeds, "seeds", [&sw](const nlohmann::json& v) {
        std::string s;
        for (const auto& x : v) s += (s.empty() ? "" : ",") + std::to_string(x.get<std::uint64_t>());
        sw.seeds = s;
    });
    sw_merger.bind(cmd_sw->add_option("--comm", sw.comm, "line | star"), "comm",
                   [&sw](const nlohmann::json& v) { sw.comm = v.get<std::string>(); });
    sw_merger.bind(cmd_sw->add_option("--slots", sw.slots, "selected nodes M"), "slots",
                   [&sw](const nlohmann::json& v) { sw.slots = v.get<std::size_t>(); });
    sw_merger.bind(cmd_sw->add_option("--jobs", sw.jobs, "worker threads"), "jobs",
                   [&sw](const nlohmann::json& v) { sw.jobs = v.get<std::size_t>(); });
    add_train_options(cmd_sw, sw.tf, sw_merger);
    cmd_sw->add_option("--out", sw.out, "output directory for sweep.json");
    cmd_sw->add_option("--config", sw_config, "JSON config file (flags win)");

    SelectArgs se;
    auto* cmd_se = app.add_subcommand("select", "read a selection out of a model file");
    cmd_se->add_option("--model", se.model, "model.json path")->required();
    cmd_se->add_flag("--no-distinct", se.no_distinct,
                     "allow repeated nodes in the argmax readout");
    cmd_se->add_flag("--sample", se.sample, "draw one hard sample instead of argmax");
    cmd_se->add_option("--seed", se.seed, "seed for --sample");

    OracleArgs orc;
    auto* cmd_or = app.add_subcommand("oracle", "exhaustive best selection");
    cmd_or->add_option("--data", orc.data, "task directory")->required();
    cmd_or->add_option("--comm", orc.comm, "line | star");
    cmd_or->add_option("--slots", orc.slots, "selected nodes M");
    cmd_or->add_option("--threshold", orc.threshold, "normalized distance threshold");

    OracleArgs bas;
    auto* cmd_ba = app.add_subcommand("baseline", "MI ranking plus constrained greedy");
    cmd_ba->add_option("--data", bas.data, "task directory")->required();
    cmd_ba->add_option("--comm", bas.comm, "line | star");
    cmd_ba->add_option("--slots", bas.slots, "selected nodes M");
    cmd_ba->add_option("--threshold", bas.threshold, "normalized distance threshold");

    ArchArgs ar;
    auto* cmd_ar = app.add_subcommand("arch-calc", "MSFBCNN parameter table");
    cmd_ar->add_option("--channels", ar.in.channels, "EEG channels C");
    cmd_ar->add_option("--time", ar.in.time, "window length T in samples");
    cmd_ar->add_option("--ft", ar.in.f_t, "temporal filters F_T");
    cmd_ar->add_option("--fs", ar.in.f_s, "spatial filters F_S");
    cmd_ar->add_option("--classes", ar.in.classes, "output classes N_C");
    cmd_ar->add_flag("--json", ar.as_json, "emit JSON instead of text");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (!tr_config.empty()) tr_merger.merge(tr_config);
        if (!sw_config.empty()) sw_merger.merge(sw_config);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (cmd_gen->parsed()) return run_generate(gen);
        if (cmd_tr->parsed()) return run_train(tr);
        if (cmd_sw->parsed()) return run_sweep_cmd(sw);
        if (cmd_se->parsed()) return run_select(se);
        if (cmd_or->parsed()) return run_oracle(orc);
        if (cmd_ba->parsed()) return run_baseline(bas);
        if (cmd_ar->parsed()) return run_arch(ar);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}

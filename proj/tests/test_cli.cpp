#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CmdResult {
    int exit_code = -1;
    std::string out;
};

// Runs the cgselect binary with the given arguments and captures stdout.
CmdResult run_cli(const std::string& args) {
    const std::string cmd = std::string(CGSELECT_BIN) + " " + args + " 2>/dev/null";
    CmdResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return res;
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) res.out.append(buf, got);
    const int status = pclose(pipe);
    if (WIFEXITED(status)) res.exit_code = WEXITSTATUS(status);
    return res;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path work_root() {
    static const fs::path root = [] {
        fs::path p = fs::temp_directory_path() / "cgs_cli_tests";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return root;
}

// Shared small task; generated once through the CLI itself.
fs::path task_dir() {
    const fs::path dir = work_root() / "task";
    if (!fs::exists(dir / "meta.json")) {
        run_cli("generate --preset near-grid-2x4 --samples 200 --seed 3 --out " +
                dir.string());
    }
    return dir;
}

const std::string kQuickTrain =
    " --epochs 12 --hidden 16 --rounds 2 --patience 12 --seed 1";

}  // namespace

TEST_CASE("cli: generate writes a deterministic task") {
    const fs::path a = work_root() / "gen_a";
    const fs::path b = work_root() / "gen_b";
    CmdResult ra =
        run_cli("generate --preset near-grid-2x4 --samples 200 --seed 3 --out " + a.string());
    CmdResult rb =
        run_cli("generate --preset near-grid-2x4 --samples 200 --seed 3 --out " + b.string());
    REQUIRE(ra.exit_code == 0);
    REQUIRE(rb.exit_code == 0);
    json sa = json::parse(ra.out);
    json sb = json::parse(rb.out);
    sa.erase("out");  // the echoed directory is the only legitimate difference
    sb.erase("out");
    CHECK(sa == sb);
    CHECK(slurp(a / "data.csv") == slurp(b / "data.csv"));
    CHECK(slurp(a / "meta.json") == slurp(b / "meta.json"));

    const json summary = json::parse(ra.out);
    CHECK(summary.at("nodes") == 8);
    CHECK(summary.at("channels") == 4);
    CHECK(summary.at("samples") == 200);
    CHECK(summary.at("probe_selfcheck").get<double>() >= 0.95);
}

TEST_CASE("cli: explicit flags beat the preset") {
    const fs::path dir = work_root() / "gen_c";
    CmdResult r = run_cli(
        "generate --preset near-grid-2x4 --cols 5 --samples 200 --seed 3 --out " +
        dir.string());
    REQUIRE(r.exit_code == 0);
    CHECK(json::parse(r.out).at("nodes") == 10);  // 2 x 5 once cols is overridden
}

TEST_CASE("cli: train produces model and curves") {
    const fs::path out = work_root() / "train_v";
    const std::string cmd = "train --data " + task_dir().string() +
                            " --method vanilla --slots 2" + kQuickTrain + " --out " +
                            out.string();
    CmdResult r1 = run_cli(cmd);
    REQUIRE(r1.exit_code == 0);
    const json summary = json::parse(r1.out);
    CHECK(summary.at("method") == "vanilla");
    CHECK(summary.at("selection").size() == 2);
    CHECK(summary.at("hard_check_violations") == 0);

    REQUIRE(fs::exists(out / "model.json"));
    REQUIRE(fs::exists(out / "train.json"));
    const json model = json::parse(slurp(out / "model.json"));
    CHECK(model.at("type") == "independent");
    const json full = json::parse(slurp(out / "train.json"));
    const std::size_t epochs_run = full.at("epochs_run").get<std::size_t>();
    CHECK(full.at("curves").at("train_loss").size() == epochs_run);
    CHECK(full.at("curves").at("tau").size() == epochs_run);

    // Byte-identical rerun.
    CmdResult r2 = run_cli(cmd);
    REQUIRE(r2.exit_code == 0);
    CHECK(r2.out == r1.out);
    CHECK(slurp(out / "model.json") ==
          nlohmann::ordered_json::parse(slurp(out / "model.json")).dump(2) + "\n");
}

TEST_CASE("cli: conditional train respects the threshold") {
    const fs::path out = work_root() / "train_c";
    CmdResult r = run_cli("train --data " + task_dir().string() +
                          " --method conditional --comm line --slots 2 --threshold 0.5" +
                          kQuickTrain + " --out " + out.string());
    REQUIRE(r.exit_code == 0);
    const json summary = json::parse(r.out);
    CHECK(summary.at("method") == "conditional");
    CHECK(summary.at("hard_check_violations") == 0);
    CHECK(json::parse(slurp(out / "model.json")).at("type") == "conditional");
}

TEST_CASE("cli: select reads selections back out of models") {
    const fs::path model = work_root() / "train_v" / "model.json";
    REQUIRE(fs::exists(model));

    CmdResult argmax = run_cli("select --model " + model.string());
    REQUIRE(argmax.exit_code == 0);
    const json j = json::parse(argmax.out);
    CHECK(j.at("type") == "independent");
    CHECK(j.at("selection").size() == 2);

    CmdResult s1 = run_cli("select --model " + model.string() + " --sample --seed 7");
    CmdResult s2 = run_cli("select --model " + model.string() + " --sample --seed 7");
    REQUIRE(s1.exit_code == 0);
    CHECK(s1.out == s2.out);
}

TEST_CASE("cli: oracle and baseline agree the task is solvable at full reach") {
    CmdResult orc = run_cli("oracle --data " + task_dir().string() +
                            " --comm line --slots 2 --threshold 1.0");
    REQUIRE(orc.exit_code == 0);
    const json jo = json::parse(orc.out);
    CHECK(jo.at("probe_acc").get<double>() >= 0.95);
    CHECK(jo.at("assignment").size() == 2);

    CmdResult bas = run_cli("baseline --data " + task_dir().string() +
                            " --comm line --slots 2 --threshold 1.0");
    REQUIRE(bas.exit_code == 0);
    const json jb = json::parse(bas.out);
    CHECK(jb.at("feasible") == true);
    CHECK(jb.at("ranking").size() == 8);
    CHECK(jb.at("probe_acc").get<double>() >= 0.9);
}

TEST_CASE("cli: sweep on untrained methods is fast and reproducible") {
    const fs::path out = work_root() / "sweep";
    const std::string cmd = "sweep --data " + task_dir().string() +
                            " --thresholds 0.05,1.0 --methods greedy-mi,oracle" +
                            " --slots 2 --out " + out.string();
    CmdResult r1 = run_cli(cmd);
    REQUIRE(r1.exit_code == 0);
    CmdResult r2 = run_cli(cmd);
    CHECK(r1.out == r2.out);

    const json j = json::parse(slurp(out / "sweep.json"));
    REQUIRE(j.at("cells").size() == 4);
    CHECK(j.at("cells")[0].at("feasible") == false);  // greedy-mi at 0.05
    CHECK(j.at("cells")[3].at("feasible") == true);   // oracle at 1.0
}

TEST_CASE("cli: config file fills gaps, flags win") {
    const fs::path cfg = work_root() / "train.cfg.json";
    {
        std::ofstream out(cfg);
        out << R"({"epochs": 9, "hidden": 16, "rounds": 2, "method": "vanilla", "slots": 2})";
    }
    CmdResult from_cfg = run_cli("train --data " + task_dir().string() + " --config " +
                                 cfg.string());
    REQUIRE(from_cfg.exit_code == 0);
    CHECK(json::parse(from_cfg.out).at("epochs_run") == 9);
    CHECK(json::parse(from_cfg.out).at("method") == "vanilla");

    CmdResult flag_wins = run_cli("train --data " + task_dir().string() + " --config " +
                                  cfg.string() + " --epochs 5");
    REQUIRE(flag_wins.exit_code == 0);
    CHECK(json::parse(flag_wins.out).at("epochs_run") == 5);
}

TEST_CASE("cli: usage errors exit with 2, runtime failures with 1") {
    CHECK(run_cli("").exit_code == 2);               // a subcommand is required
    CHECK(run_cli("explode").exit_code == 2);        // unknown subcommand
    CHECK(run_cli("generate").exit_code == 2);       // missing --out
    CHECK(run_cli("arch-calc --bogus").exit_code == 2);
    CHECK(run_cli("train --data " + task_dir().string() + " --method magic" +
                  kQuickTrain)
              .exit_code == 2);
    CHECK(run_cli("generate --preset nope --out " + (work_root() / "x").string())
              .exit_code == 2);

    const fs::path cfg = work_root() / "bad.cfg.json";
    {
        std::ofstream out(cfg);
        out << R"({"epoch_count": 9})";  // unknown key
    }
    CHECK(run_cli("train --data " + task_dir().string() + " --config " + cfg.string())
              .exit_code == 2);
    {
        std::ofstream out(cfg);
        out << R"({"epochs": "soon"})";  // wrong type
    }
    CHECK(run_cli("train --data " + task_dir().string() + " --config " + cfg.string())
              .exit_code == 2);

    CHECK(run_cli("sweep --data " + task_dir().string() +
                  " --methods oracle --seeds 1 --n-seeds 3")
              .exit_code == 2);

    // Runtime failures: missing files and infeasible constraints.
    CHECK(run_cli("train --data /nonexistent --method vanilla").exit_code == 1);
    CHECK(run_cli("select --model /nonexistent.json").exit_code == 1);
    CHECK(run_cli("oracle --data " + task_dir().string() +
                  " --slots 2 --threshold 0.01")
              .exit_code == 1);

    // Help is not an error.
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("train --help").exit_code == 0);
}

TEST_CASE("cli: arch-calc emits the table") {
    CmdResult text = run_cli("arch-calc");
    REQUIRE(text.exit_code == 0);
    CHECK(text.out.find("Total params: 22100") != std::string::npos);
    CHECK(text.out.find("Spatialconv") != std::string::npos);

    CmdResult as_json = run_cli("arch-calc --json");
    REQUIRE(as_json.exit_code == 0);
    const json j = json::parse(as_json.out);
    CHECK(j.at("total_params") == 22100);

    CmdResult custom = run_cli("arch-calc --channels 20 --time 300 --ft 5 --fs 3 "
                               "--classes 2 --json");
    REQUIRE(custom.exit_code == 0);
    CHECK(json::parse(custom.out).at("total_params") == 2066);
}

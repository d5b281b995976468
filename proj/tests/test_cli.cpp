#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "nrlb/network.hpp"

namespace fs = std::filesystem;
using namespace nrlb;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output;
};

/// Runs the experiment binary with the given arguments, capturing all output.
CliResult run_cli(const std::string& args) {
    const fs::path log = fs::temp_directory_path() / "nrlb_cli_test.log";
    const std::string command =
        std::string(NRLB_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int raw = std::system(command.c_str());
    CliResult r;
    r.exit_code = WEXITSTATUS(raw);
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    r.output = ss.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& sub) const { return (path / sub).string(); }
};

const std::string kBlobsA = "'blobs:80,0.05,0.2:0.3;0.8:0.7'";
const std::string kBlobsATest = "'blobs:50,0.05,0.2:0.3;0.8:0.7'";
const std::string kBlobsB = "'blobs:80,0.05,0.35:0.4;0.65:0.6'";
const std::string kBlobsBTest = "'blobs:50,0.05,0.35:0.4;0.65:0.6'";

/// Trains the 4-way shared-head solver on task A once per binary run.
std::string task_a_checkpoint() {
    static TempDir dir("nrlb_cli_ckpt");
    static bool done = false;
    const std::string out = dir / "train_a";
    if (!done) {
        auto r = run_cli("train -o " + out + " -s data.train=" + kBlobsA +
                         " -s model.head_classes=4 -s model.hidden=16 -s train.epochs=60"
                         " -s train.lr=0.01 -s run.seed=2");
        REQUIRE(r.exit_code == 0);
        done = true;
    }
    return out + "/artifacts/solver.ckpt";
}

}  // namespace

TEST_CASE("train: writes metrics, checkpoint, and manifest") {
    TempDir dir("nrlb_cli_train");
    const std::string out = dir / "run";
    auto r = run_cli("train -o " + out + " -s data.train=" + kBlobsA +
                     " -s data.test=" + kBlobsATest +
                     " -s train.epochs=20 -s train.lr=0.01 -s run.seed=1");
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(out + "/manifest.json"));
    const std::string csv = slurp(out + "/metrics/train.csv");
    CHECK(csv.rfind("epoch,loss,train_accuracy,test_accuracy\n", 0) == 0);
    SolverNetwork net = load_checkpoint(out + "/artifacts/solver.ckpt");
    CHECK(net.input_dim == 2);
    CHECK(net.num_classes == 2);
    const std::string manifest = slurp(out + "/manifest.json");
    CHECK(manifest.find("artifact_hashes") != std::string::npos);
    CHECK(manifest.find("run.seed") != std::string::npos);
}

TEST_CASE("unknown config key is rejected by name") {
    TempDir dir("nrlb_cli_badkey");
    auto r = run_cli("train -o " + dir / "run" + " -s data.train=" + kBlobsA +
                     " -s typo.key=1");
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("typo.key") != std::string::npos);
}

TEST_CASE("config file parses; flags override file values") {
    TempDir dir("nrlb_cli_cfgfile");
    const std::string cfg_path = dir / "run.ini";
    {
        std::ofstream cfg(cfg_path);
        cfg << "# task A training\n"
            << "[data]\n"
            << "train = blobs:80,0.05,0.2:0.3;0.8:0.7\n"
            << "[train]\n"
            << "epochs = 5\n"
            << "lr = 0.01  ; inline comment\n"
            << "[run]\n"
            << "seed = 9\n";
    }
    const std::string out = dir / "run";
    auto r = run_cli("train -o " + out + " -c " + cfg_path + " -s train.epochs=3");
    CHECK(r.exit_code == 0);
    std::ifstream csv(out + "/metrics/train.csv");
    std::string line;
    std::size_t lines = 0;
    while (std::getline(csv, line)) ++lines;
    CHECK(lines == 4);  // header + 3 epochs: the flag beat the file's 5
}

TEST_CASE("config file with an unknown key names it") {
    TempDir dir("nrlb_cli_cfgbad");
    const std::string cfg_path = dir / "bad.ini";
    {
        std::ofstream cfg(cfg_path);
        cfg << "[train]\nepohcs = 5\n";
    }
    auto r = run_cli("train -o " + dir / "run" + " -c " + cfg_path +
                     " -s data.train=" + kBlobsA);
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("train.epohcs") != std::string::npos);
}

TEST_CASE("rehearse: invalid scheme error lists the valid schemes") {
    TempDir dir("nrlb_cli_scheme");
    auto r = run_cli("rehearse -o " + dir / "run" + " -s input.checkpoint=" +
                     task_a_checkpoint() + " -s rehearse.scheme=bogus");
    CHECK(r.exit_code == 1);
    for (const char* s : {"interleaved", "serial", "sweep", "random", "none"})
        CHECK(r.output.find(s) != std::string::npos);
}

TEST_CASE("rehearse: scheme none reproduces the control collapse") {
    TempDir dir("nrlb_cli_none");
    const std::string out = dir / "run";
    auto r = run_cli("rehearse -o " + out + " -s input.checkpoint=" + task_a_checkpoint() +
                     " -s data.old_test=" + kBlobsATest + " -s data.new_train=" + kBlobsB +
                     " -s data.new_test=" + kBlobsBTest +
                     " -s rehearse.scheme=none -s rehearse.class_offset=2"
                     " -s rehearse.epochs=15 -s rehearse.lr=0.01 -s run.seed=5");
    CHECK(r.exit_code == 0);
    // last record: epoch,scheme,old_acc,new_acc
    std::ifstream csv(out + "/metrics/retention.csv");
    std::string line, last;
    while (std::getline(csv, line))
        if (!line.empty()) last = line;
    std::stringstream ss(last);
    std::string field;
    std::getline(ss, field, ',');  // epoch
    std::getline(ss, field, ',');
    CHECK(field == "none");
    std::getline(ss, field, ',');
    CHECK(std::stod(field) < 50.0);  // old task forgotten without rehearsal
}

TEST_CASE("rehearse: interleaved real-data rehearsal retains the old task") {
    TempDir dir("nrlb_cli_inter");
    const std::string out = dir / "run";
    auto r = run_cli("rehearse -o " + out + " -s input.checkpoint=" + task_a_checkpoint() +
                     " -s data.old_synth=" + kBlobsA + " -s data.old_test=" + kBlobsATest +
                     " -s data.new_train=" + kBlobsB + " -s data.new_test=" + kBlobsBTest +
                     " -s rehearse.scheme=interleaved -s rehearse.class_offset=2"
                     " -s rehearse.epochs=15 -s rehearse.lr=0.01 -s run.seed=5");
    CHECK(r.exit_code == 0);
    std::ifstream csv(out + "/metrics/retention.csv");
    std::string line, last;
    while (std::getline(csv, line))
        if (!line.empty()) last = line;
    std::stringstream ss(last);
    std::string field;
    std::getline(ss, field, ',');
    std::getline(ss, field, ',');
    std::getline(ss, field, ',');
    CHECK(std::stod(field) > 90.0);
}

TEST_CASE("generate + determinism: same config and seed give byte-identical outputs") {
    TempDir dir("nrlb_cli_det");
    const std::string base = "generate -s input.checkpoint=" + task_a_checkpoint() +
                             " -s ga.tau=0.9 -s ga.max_generations=200"
                             " -s enrich.step1_per_class=200 -s enrich.step2_global=400"
                             " -s run.seed=11 -o ";
    auto r1 = run_cli(base + dir / "run1");
    auto r2 = run_cli(base + dir / "run2");
    CHECK(r1.exit_code == 0);
    CHECK(r2.exit_code == 0);
    CHECK(slurp(dir / "run1/metrics/diversity.csv") == slurp(dir / "run2/metrics/diversity.csv"));
    CHECK(slurp(dir / "run1/artifacts/synthetic.dset") ==
          slurp(dir / "run2/artifacts/synthetic.dset"));
    CHECK(!slurp(dir / "run1/metrics/diversity.csv").empty());
}

TEST_CASE("missing dataset file names the offending key") {
    TempDir dir("nrlb_cli_missing");
    auto r = run_cli("train -o " + dir / "run" + " -s data.train=/no/such/file.dset");
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("data.train") != std::string::npos);
}

// Command-line experiment runner. Every subcommand reads an optional INI-style
// config file, applies --set overrides (flags > file > defaults), and writes a
// self-contained run directory: manifest.json, metrics/*.csv, artifacts/*.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nrlb/enrichment.hpp"
#include "nrlb/metrics.hpp"
#include "nrlb/rehearsal.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nrlb;

namespace {

// --- config -----------------------------------------------------------------

/// Flat "section.key" -> value store with a fixed schema (the defaults).
/// Unknown keys in the file or on the command line are rejected by name.
class Config {
public:
    void set_default(const std::string& key, const std::string& value) { values_[key] = value; }

    void load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config file: " + path);
        std::string line, section;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find_first_of("#;");
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[' && line.back() == ']') {
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": expected key = value");
            const std::string key =
                (section.empty() ? "" : section + ".") + trim(line.substr(0, eq));
            assign(key, trim(line.substr(eq + 1)));
        }
    }

    /// Applies one "section.key=value" override.
    void apply_override(const std::string& spec) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("override must look like section.key=value: " + spec);
        assign(trim(spec.substr(0, eq)), trim(spec.substr(eq + 1)));
    }

    const std::string& str(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw std::runtime_error("unknown config key: " + key);
        return it->second;
    }

    double num(const std::string& key) const {
        try {
            std::size_t used = 0;
            const double v = std::stod(str(key), &used);
            if (used != str(key).size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw std::runtime_error("config key " + key + " is not a number: '" + str(key) + "'");
        }
    }

    std::uint64_t u64(const std::string& key) const {
        try {
            std::size_t used = 0;
            const std::uint64_t v = std::stoull(str(key), &used);
            if (used != str(key).size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw std::runtime_error("config key " + key + " is not a non-negative integer: '" +
                                     str(key) + "'");
        }
    }

    std::size_t count(const std::string& key) const { return std::size_t(u64(key)); }

    const std::map<std::string, std::string>& resolved() const { return values_; }

private:
    static std::string trim(const std::string& s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return "";
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    }

    void assign(const std::string& key, const std::string& value) {
        if (!values_.count(key)) throw std::runtime_error("unknown config key: " + key);
        values_[key] = value;
    }

    std::map<std::string, std::string> values_;
};

// --- dataset references ------------------------------------------------------

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, sep)) out.push_back(part);
    return out;
}

double parse_num(const std::string& s, const std::string& key) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("config key " + key + ": '" + s + "' is not a number");
    }
}

/// Resolves a dataset reference. Grammar:
///   <path>.dset                         binary dataset file
///   idx:<images>,<labels>               IDX image/label file pair
///   blobs:<n_per_class>,<std>,<x:y;x:y;...>   Gaussian clusters
///   moons:<n>,<noise>                   two interleaved arcs
///   random:<dim>,<n_per_class>,<classes>      uniform random vectors
/// Generator draws come from the master seed and the config key's name, so the
/// same reference in the same run position always produces the same data.
Dataset resolve_dataset(const std::string& ref, std::uint64_t master_seed,
                        const std::string& key) {
    auto fail = [&](const std::string& why) -> Dataset {
        throw std::runtime_error("config key " + key + ": " + why + " (got '" + ref + "')");
    };
    if (ref.rfind("idx:", 0) == 0) {
        auto parts = split(ref.substr(4), ',');
        if (parts.size() != 2) return fail("idx reference needs <images>,<labels>");
        return load_idx_dataset(parts[0], parts[1]);
    }
    Rng rng(derive_seed(master_seed, "data." + key));
    if (ref.rfind("blobs:", 0) == 0) {
        auto parts = split(ref.substr(6), ',');
        if (parts.size() != 3) return fail("blobs reference needs <n_per_class>,<std>,<centers>");
        std::vector<std::vector<double>> centers;
        for (const auto& c : split(parts[2], ';')) {
            auto coords = split(c, ':');
            if (coords.empty()) return fail("empty blob center");
            std::vector<double> center;
            for (const auto& v : coords) center.push_back(parse_num(v, key));
            centers.push_back(std::move(center));
        }
        return make_blobs(std::size_t(parse_num(parts[0], key)), centers,
                          parse_num(parts[1], key), rng);
    }
    if (ref.rfind("moons:", 0) == 0) {
        auto parts = split(ref.substr(6), ',');
        if (parts.size() != 2) return fail("moons reference needs <n>,<noise>");
        return make_moons(std::size_t(parse_num(parts[0], key)), parse_num(parts[1], key), rng);
    }
    if (ref.rfind("random:", 0) == 0) {
        auto parts = split(ref.substr(7), ',');
        if (parts.size() != 3) return fail("random reference needs <dim>,<n_per_class>,<classes>");
        return random_vector_dataset(std::size_t(parse_num(parts[0], key)),
                                     std::size_t(parse_num(parts[1], key)),
                                     int(parse_num(parts[2], key)), rng);
    }
    if (!fs::exists(ref)) return fail("dataset file does not exist");
    return load_dataset(ref);
}

// --- run directory, manifest --------------------------------------------------

struct RunDir {
    fs::path root;

    explicit RunDir(const std::string& out) : root(out) {
        fs::create_directories(root / "metrics");
        fs::create_directories(root / "artifacts");
    }

    std::string metrics(const std::string& name) const { return (root / "metrics" / name).string(); }
    std::string artifacts(const std::string& name) const {
        return (root / "artifacts" / name).string();
    }
};

std::string file_hash(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    std::ostringstream hex;
    hex << "fnv1a64:" << std::hex << h;
    return hex.str();
}

/// manifest.json: full resolved config + subcommand + hashes of every output
/// file, enough to rerun the experiment and check the outputs byte for byte.
void write_manifest(const RunDir& run, const std::string& command, const Config& cfg,
                    json extra = json::object()) {
    json manifest;
    manifest["command"] = command;
    manifest["config"] = cfg.resolved();
    json hashes = json::object();
    for (const char* sub : {"metrics", "artifacts"}) {
        if (!fs::exists(run.root / sub)) continue;
        for (const auto& entry : fs::directory_iterator(run.root / sub))
            hashes[sub + std::string("/") + entry.path().filename().string()] =
                file_hash(entry.path());
    }
    manifest["artifact_hashes"] = hashes;
    if (!extra.empty()) manifest["result"] = extra;
    std::ofstream out(run.root / "manifest.json");
    out << manifest.dump(2) << "\n";
}

// --- shared option parsing -----------------------------------------------------

LossKind parse_loss(const std::string& v, const std::string& key) {
    if (v == "ce") return LossKind::CategoricalCrossEntropy;
    if (v == "bce") return LossKind::PerClassBinaryCrossEntropy;
    throw std::runtime_error("config key " + key + ": invalid loss '" + v +
                             "'; valid losses: ce, bce");
}

GaConfig parse_ga(const Config& cfg, std::uint64_t master_seed) {
    GaConfig ga;
    ga.population_size = cfg.count("ga.population");
    ga.fitness_threshold = cfg.num("ga.tau");
    const std::string sel = cfg.str("ga.selection");
    if (sel == "linear")
        ga.selection = Selection::Linear;
    else if (sel == "roulette")
        ga.selection = Selection::Roulette;
    else if (sel == "tournament")
        ga.selection = Selection::Tournament;
    else
        throw std::runtime_error("config key ga.selection: invalid value '" + sel +
                                 "'; valid selections: linear, roulette, tournament");
    ga.tournament_extinction = cfg.num("ga.extinction");
    const std::string xo = cfg.str("ga.crossover");
    if (xo == "uniform")
        ga.crossover = CrossoverKind::UniformMask;
    else if (xo == "single-point")
        ga.crossover = CrossoverKind::SinglePoint;
    else
        throw std::runtime_error("config key ga.crossover: invalid value '" + xo +
                                 "'; valid crossovers: uniform, single-point");
    ga.mutation_rate = cfg.num("ga.mutation_rate");
    ga.mutation_magnitude = cfg.num("ga.mutation_magnitude");
    ga.max_generations = cfg.count("ga.max_generations");
    ga.culture_count = cfg.count("ga.cultures");
    ga.seed = master_seed;
    ga.validate();
    return ga;
}

EnrichConfig parse_enrich(const Config& cfg) {
    EnrichConfig ec;
    ec.step1_per_class = cfg.count("enrich.step1_per_class");
    ec.step2_global = cfg.count("enrich.step2_global");
    ec.min_confidence = cfg.num("enrich.min_confidence");
    if (ec.min_confidence < 0.0 || ec.min_confidence > 1.0)
        throw std::runtime_error("config key enrich.min_confidence must be in [0,1]");
    return ec;
}

void add_ga_defaults(Config& cfg) {
    cfg.set_default("ga.population", "40");
    cfg.set_default("ga.tau", "0.99");
    cfg.set_default("ga.selection", "linear");
    cfg.set_default("ga.extinction", "0.5");
    cfg.set_default("ga.crossover", "uniform");
    cfg.set_default("ga.mutation_rate", "0.05");
    cfg.set_default("ga.mutation_magnitude", "0.2");
    cfg.set_default("ga.max_generations", "500");
    cfg.set_default("ga.cultures", "1");
    cfg.set_default("enrich.step1_per_class", "1000");
    cfg.set_default("enrich.step2_global", "2000");
    cfg.set_default("enrich.min_confidence", "0.5");
}

void add_train_defaults(Config& cfg) {
    cfg.set_default("model.hidden", "32");
    cfg.set_default("model.loss", "ce");
    cfg.set_default("train.epochs", "30");
    cfg.set_default("train.batch", "32");
    cfg.set_default("train.lr", "0.001");
}

void add_run_defaults(Config& cfg) {
    cfg.set_default("run.seed", "0");
    cfg.set_default("run.threads", "0");  // 0 = machine parallelism
}

TrainConfig parse_train(const Config& cfg, std::uint64_t seed) {
    TrainConfig tc;
    tc.epochs = cfg.count("train.epochs");
    tc.batch_size = cfg.count("train.batch");
    tc.learning_rate = cfg.num("train.lr");
    tc.loss = parse_loss(cfg.str("model.loss"), "model.loss");
    tc.seed = seed;
    if (tc.epochs == 0) throw std::runtime_error("config key train.epochs must be >= 1");
    if (tc.batch_size == 0) throw std::runtime_error("config key train.batch must be >= 1");
    if (!(tc.learning_rate > 0.0)) throw std::runtime_error("config key train.lr must be > 0");
    return tc;
}

void apply_threads(const Config& cfg) {
    std::size_t threads = cfg.count("run.threads");
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
#ifdef _OPENMP
    omp_set_num_threads(int(threads));
#endif
}

double accuracy_pct(const SolverNetwork& net, const Dataset& ds) {
    return accuracy(predict(net, ds.features), ds.labels);
}

StatsSink diversity_sink(CsvTable& table) {
    return [&table](const GenerationStats& s) {
        table.add_row({std::to_string(s.generation), std::to_string(s.target_class),
                       std::to_string(s.culture), csv_number(s.min_fitness),
                       csv_number(s.mean_fitness), csv_number(s.max_fitness),
                       std::to_string(s.duplicates), csv_number(s.mean_distance)});
    };
}

CsvTable diversity_table() {
    CsvTable t;
    t.columns = {"generation", "target_class", "culture",   "min_fitness",
                 "mean_fitness", "max_fitness",  "duplicates", "mean_distance"};
    return t;
}

// --- subcommands ----------------------------------------------------------------

int cmd_train(const Config& cfg, const std::string& out) {
    apply_threads(cfg);
    const std::uint64_t seed = cfg.u64("run.seed");
    Dataset train_ds = resolve_dataset(cfg.str("data.train"), seed, "data.train");
    const bool has_test = !cfg.str("data.test").empty();
    Dataset test_ds;
    if (has_test) test_ds = resolve_dataset(cfg.str("data.test"), seed, "data.test");

    // The head may be wider than the dataset's classes so a later task can
    // share it; extra outputs simply stay untrained for now.
    int head = int(cfg.u64("model.head_classes"));
    if (head == 0) head = train_ds.num_classes;
    if (head < train_ds.num_classes)
        throw std::runtime_error("config key model.head_classes is smaller than the dataset's " +
                                 std::to_string(train_ds.num_classes) + " classes");
    train_ds.num_classes = head;
    SolverNetwork net = make_solver(train_ds.dim(), cfg.count("model.hidden"), head,
                                    derive_seed(seed, "solver"));
    TrainConfig tc = parse_train(cfg, derive_seed(seed, "train"));

    CsvTable table;
    table.columns = {"epoch", "loss", "train_accuracy"};
    if (has_test) table.columns.push_back("test_accuracy");
    train(net, train_ds, tc, [&](const EpochRecord& r) {
        std::vector<std::string> row{std::to_string(r.epoch), csv_number(r.loss),
                                     csv_number(r.train_accuracy)};
        if (has_test) row.push_back(csv_number(accuracy_pct(net, test_ds)));
        table.add_row(std::move(row));
    });

    RunDir run(out);
    write_metrics_csv(table, run.metrics("train.csv"));
    save_checkpoint(net, run.artifacts("solver.ckpt"));
    json extra;
    extra["final_train_accuracy"] = std::stod(table.rows.back()[2]);
    if (has_test) extra["final_test_accuracy"] = std::stod(table.rows.back()[3]);
    write_manifest(run, "train", cfg, extra);
    return 0;
}

int cmd_generate(const Config& cfg, const std::string& out) {
    apply_threads(cfg);
    const std::uint64_t seed = cfg.u64("run.seed");
    SolverNetwork net = load_checkpoint(cfg.str("input.checkpoint"));
    GaConfig ga = parse_ga(cfg, 0);  // seed is re-derived inside build_synthetic
    EnrichConfig ec = parse_enrich(cfg);

    CsvTable diversity = diversity_table();
    SyntheticResult result =
        build_synthetic(net, net.num_classes, ga, ec, seed, diversity_sink(diversity));

    RunDir run(out);
    write_metrics_csv(diversity, run.metrics("diversity.csv"));
    save_dataset(result.dataset, run.artifacts("synthetic.dset"));
    json extra;
    extra["raw_count"] = result.raw_count;
    extra["step1_count"] = result.step1_count;
    extra["step2_drawn"] = result.step2_drawn;
    extra["step2_kept"] = result.step2_kept;
    extra["ga_converged"] = result.ga_converged;
    extra["unconverged_classes"] = result.unconverged_classes;
    write_manifest(run, "generate", cfg, extra);
    return 0;
}

int cmd_rehearse(const Config& cfg, const std::string& out) {
    apply_threads(cfg);
    const std::uint64_t seed = cfg.u64("run.seed");
    const std::string scheme = cfg.str("rehearse.scheme");
    const bool valid = scheme == "interleaved" || scheme == "serial" || scheme == "sweep" ||
                       scheme == "random" || scheme == "none";
    if (!valid)
        throw std::runtime_error("config key rehearse.scheme: invalid scheme '" + scheme +
                                 "'; valid schemes: interleaved, serial, sweep, random, none");

    SolverNetwork net = load_checkpoint(cfg.str("input.checkpoint"));

    TaskSpec new_task;
    new_task.id = "new-task";
    new_task.train = resolve_dataset(cfg.str("data.new_train"), seed, "data.new_train");
    new_task.test = resolve_dataset(cfg.str("data.new_test"), seed, "data.new_test");
    new_task.class_offset = int(cfg.u64("rehearse.class_offset"));
    Dataset old_test = resolve_dataset(cfg.str("data.old_test"), seed, "data.old_test");

    RehearsalConfig rc;
    rc.epochs = cfg.count("rehearse.epochs");
    rc.batch_size = cfg.count("rehearse.batch");
    rc.learning_rate = cfg.num("rehearse.lr");
    rc.loss = parse_loss(cfg.str("model.loss"), "model.loss");
    rc.sweep_fraction = cfg.num("rehearse.sweep_fraction");
    rc.seed = derive_seed(seed, "rehearse-cfg");

    Dataset old_data;
    if (scheme == "random") {
        Rng rng(derive_seed(seed, "random-old"));
        old_data = random_vector_dataset(net.input_dim, cfg.count("rehearse.random_per_class"),
                                         new_task.class_offset, rng);
    } else if (scheme != "none") {
        old_data = resolve_dataset(cfg.str("data.old_synth"), seed, "data.old_synth");
    }

    std::vector<RetentionRecord> records;
    if (scheme == "interleaved" || scheme == "random")
        records = run_interleaved(net, old_data, new_task, old_test, rc);
    else if (scheme == "serial")
        records = run_serial(net, old_data, new_task, old_test, rc);
    else if (scheme == "sweep")
        records = run_sweep(net, old_data, new_task, old_test, rc);
    else
        records = run_none(net, new_task, old_test, rc);

    RunDir run(out);
    CsvTable table;
    table.columns = {"epoch", "scheme", "old_task_accuracy", "new_task_accuracy"};
    for (const auto& r : records)
        table.add_row({std::to_string(r.epoch), scheme, csv_number(r.old_task_accuracy),
                       csv_number(r.new_task_accuracy)});
    write_metrics_csv(table, run.metrics("retention.csv"));
    save_checkpoint(net, run.artifacts("solver.ckpt"));
    json extra;
    if (!records.empty()) {
        extra["final_old_task_accuracy"] = records.back().old_task_accuracy;
        extra["final_new_task_accuracy"] = records.back().new_task_accuracy;
    }
    write_manifest(run, "rehearse", cfg, extra);
    return 0;
}

int cmd_train_on_synth(const Config& cfg, const std::string& out) {
    apply_threads(cfg);
    const std::uint64_t seed = cfg.u64("run.seed");
    Dataset synth = resolve_dataset(cfg.str("data.synth"), seed, "data.synth");
    Dataset real_test = resolve_dataset(cfg.str("data.real_test"), seed, "data.real_test");
    synth.num_classes = std::max(synth.num_classes, real_test.num_classes);

    SolverNetwork net = make_solver(synth.dim(), cfg.count("model.hidden"), synth.num_classes,
                                    derive_seed(seed, "solver"));
    TrainConfig tc = parse_train(cfg, derive_seed(seed, "train"));

    CsvTable table;
    table.columns = {"epoch", "loss", "train_accuracy", "real_test_accuracy"};
    train(net, synth, tc, [&](const EpochRecord& r) {
        table.add_row({std::to_string(r.epoch), csv_number(r.loss), csv_number(r.train_accuracy),
                       csv_number(accuracy_pct(net, real_test))});
    });

    RunDir run(out);
    write_metrics_csv(table, run.metrics("synth_train.csv"));
    save_checkpoint(net, run.artifacts("solver.ckpt"));
    json extra;
    extra["final_real_test_accuracy"] = std::stod(table.rows.back()[3]);
    write_manifest(run, "train-on-synth", cfg, extra);
    return 0;
}

int cmd_agreement(const Config& cfg, const std::string& out) {
    apply_threads(cfg);
    const std::uint64_t seed = cfg.u64("run.seed");
    Dataset original = resolve_dataset(cfg.str("data.original"), seed, "data.original");
    Dataset synth_a = resolve_dataset(cfg.str("data.synth_a"), seed, "data.synth_a");
    Dataset synth_b = resolve_dataset(cfg.str("data.synth_b"), seed, "data.synth_b");
    Dataset test = resolve_dataset(cfg.str("data.test"), seed, "data.test");

    TrainConfig tc = parse_train(cfg, derive_seed(seed, "agreement"));
    AgreementExperimentResult r =
        agreement_experiment(original, synth_a, synth_b, test, cfg.count("model.hidden"), tc);

    RunDir run(out);
    CsvTable table;
    table.columns = {"alpha_a", "alpha_b", "original_test_accuracy", "a_test_accuracy",
                     "b_test_accuracy"};
    table.add_row({csv_number(r.alpha_a), csv_number(r.alpha_b),
                   csv_number(r.original_test_accuracy), csv_number(r.a_test_accuracy),
                   csv_number(r.b_test_accuracy)});
    write_metrics_csv(table, run.metrics("agreement.csv"));
    json extra;
    extra["alpha_a"] = r.alpha_a;
    extra["alpha_b"] = r.alpha_b;
    write_manifest(run, "agreement", cfg, extra);
    return 0;
}

int cmd_boundary(const Config& cfg, const std::string& out) {
    apply_threads(cfg);
    const std::uint64_t seed = cfg.u64("run.seed");
    SolverNetwork teacher = load_checkpoint(cfg.str("input.checkpoint"));
    Dataset real_test = resolve_dataset(cfg.str("data.real_test"), seed, "data.real_test");

    const std::size_t cloud_size = cfg.count("boundary.cloud_size");
    const double keep_fraction = cfg.num("boundary.keep_fraction");
    if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
        throw std::runtime_error("config key boundary.keep_fraction must be in (0,1]");

    Rng rng(derive_seed(seed, "cloud"));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix cloud(cloud_size, teacher.input_dim);
    for (double& v : cloud.data) v = unit(rng);

    BoundaryFilterResult filtered = boundary_filter(teacher, cloud, keep_fraction);
    Dataset boundary_ds{std::move(filtered.features), std::move(filtered.labels),
                        teacher.num_classes};

    SolverNetwork net =
        make_solver(boundary_ds.dim(), cfg.count("model.hidden"), boundary_ds.num_classes,
                    derive_seed(seed, "solver"));
    TrainConfig tc = parse_train(cfg, derive_seed(seed, "train"));

    CsvTable table;
    table.columns = {"epoch", "loss", "train_accuracy", "real_test_accuracy"};
    train(net, boundary_ds, tc, [&](const EpochRecord& r) {
        table.add_row({std::to_string(r.epoch), csv_number(r.loss), csv_number(r.train_accuracy),
                       csv_number(accuracy_pct(net, real_test))});
    });

    RunDir run(out);
    write_metrics_csv(table, run.metrics("boundary.csv"));
    save_dataset(boundary_ds, run.artifacts("boundary.dset"));
    save_checkpoint(net, run.artifacts("solver.ckpt"));
    json extra;
    extra["boundary_points"] = boundary_ds.size();
    extra["final_real_test_accuracy"] = std::stod(table.rows.back()[3]);
    write_manifest(run, "boundary", cfg, extra);
    return 0;
}

int cmd_bench(const Config& cfg, const std::string& out) {
    apply_threads(cfg);
    const std::uint64_t seed = cfg.u64("run.seed");
    SolverNetwork net = load_checkpoint(cfg.str("input.checkpoint"));
    GaConfig ga = parse_ga(cfg, derive_seed(seed, "ga"));
    EnrichConfig ec = parse_enrich(cfg);

    using clock = std::chrono::steady_clock;
    auto seconds = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double>(b - a).count();
    };

    // Stage seeds mirror the one-shot pipeline, so the benchmark measures
    // exactly the work a `generate` run with the same config would do.
    const auto t0 = clock::now();
    GenerateResult raw = generate_raw(net, net.num_classes, ga);
    const auto t1 = clock::now();
    Rng rng1(derive_seed(seed, "enrich1"));
    Dataset step1 = enrich_step1(raw.dataset, ec.step1_per_class, rng1);
    const auto t2 = clock::now();
    Rng rng2(derive_seed(seed, "enrich2"));
    Step2Result step2 = enrich_step2(step1, ec.step2_global, net, ec.min_confidence, rng2);
    const auto t3 = clock::now();

    RunDir run(out);
    json timing;
    timing["ga_seconds"] = seconds(t0, t1);
    timing["enrich_step1_seconds"] = seconds(t1, t2);
    timing["enrich_step2_seconds"] = seconds(t2, t3);
    timing["total_seconds"] = seconds(t0, t3);
    timing["raw_count"] = raw.dataset.size();
    timing["step1_count"] = step1.size();
    timing["step2_kept"] = step2.kept;
    std::ofstream tf(run.root / "timing.json");
    tf << timing.dump(2) << "\n";
    write_manifest(run, "bench", cfg);
    return 0;
}

// --- wiring ---------------------------------------------------------------------

struct SubcommandSpec {
    std::string name;
    std::string description;
    void (*defaults)(Config&);
    int (*runner)(const Config&, const std::string&);
};

void train_defaults(Config& c) {
    add_run_defaults(c);
    add_train_defaults(c);
    c.set_default("model.head_classes", "0");  // 0 = the dataset's class count
    c.set_default("data.train", "");
    c.set_default("data.test", "");
}

void generate_defaults(Config& c) {
    add_run_defaults(c);
    add_ga_defaults(c);
    c.set_default("input.checkpoint", "");
}

void rehearse_defaults(Config& c) {
    add_run_defaults(c);
    c.set_default("input.checkpoint", "");
    c.set_default("data.old_synth", "");
    c.set_default("data.old_test", "");
    c.set_default("data.new_train", "");
    c.set_default("data.new_test", "");
    c.set_default("model.loss", "ce");
    c.set_default("rehearse.scheme", "interleaved");
    c.set_default("rehearse.epochs", "30");
    c.set_default("rehearse.batch", "32");
    c.set_default("rehearse.lr", "0.001");
    c.set_default("rehearse.sweep_fraction", "0.5");
    c.set_default("rehearse.class_offset", "0");
    c.set_default("rehearse.random_per_class", "100");
}

void train_on_synth_defaults(Config& c) {
    add_run_defaults(c);
    add_train_defaults(c);
    c.set_default("data.synth", "");
    c.set_default("data.real_test", "");
}

void agreement_defaults(Config& c) {
    add_run_defaults(c);
    add_train_defaults(c);
    c.set_default("data.original", "");
    c.set_default("data.synth_a", "");
    c.set_default("data.synth_b", "");
    c.set_default("data.test", "");
}

void boundary_defaults(Config& c) {
    add_run_defaults(c);
    add_train_defaults(c);
    c.set_default("input.checkpoint", "");
    c.set_default("data.real_test", "");
    c.set_default("boundary.cloud_size", "100000");
    c.set_default("boundary.keep_fraction", "0.05");
}

void bench_defaults(Config& c) {
    add_run_defaults(c);
    add_ga_defaults(c);
    c.set_default("input.checkpoint", "");
}

const SubcommandSpec kSubcommands[] = {
    {"train", "train a solver network, write checkpoint and epoch metrics", train_defaults,
     cmd_train},
    {"generate", "evolve and enrich a synthetic dataset from a checkpoint", generate_defaults,
     cmd_generate},
    {"rehearse", "sequential two-task learning under one rehearsal scheme", rehearse_defaults,
     cmd_rehearse},
    {"train-on-synth", "train a fresh net on synthetic data, score on real data",
     train_on_synth_defaults, cmd_train_on_synth},
    {"agreement", "agreement scores of synthetic-trained nets vs a real-trained net",
     agreement_defaults, cmd_agreement},
    {"boundary", "train a fresh net on decision-boundary points only", boundary_defaults,
     cmd_boundary},
    {"bench", "time the generation pipeline stage by stage", bench_defaults, cmd_bench},
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pseudo-rehearsal experiment runner"};
    app.require_subcommand(1);

    struct PerSub {
        std::string config_path;
        std::vector<std::string> overrides;
        std::string out;
        const SubcommandSpec* spec = nullptr;
    };
    std::vector<PerSub> subs(std::size(kSubcommands));

    for (std::size_t i = 0; i < std::size(kSubcommands); ++i) {
        auto* sc = app.add_subcommand(kSubcommands[i].name, kSubcommands[i].description);
        subs[i].spec = &kSubcommands[i];
        sc->add_option("-c,--config", subs[i].config_path, "INI-style config file");
        sc->add_option("-s,--set", subs[i].overrides,
                       "override one config value, section.key=value (repeatable)");
        sc->add_option("-o,--out", subs[i].out, "run output directory")->required();
    }

    CLI11_PARSE(app, argc, argv);

    try {
        for (const auto& sub : subs) {
            if (!app.got_subcommand(sub.spec->name)) continue;
            Config cfg;
            sub.spec->defaults(cfg);
            if (!sub.config_path.empty()) cfg.load_file(sub.config_path);
            for (const auto& o : sub.overrides) cfg.apply_override(o);
            return sub.spec->runner(cfg, sub.out);
        }
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

// Command-line front end: graph generation, block-matrix estimation, the
// structure-shift metric, weight tables, training runs, the statistical
// verification suite, and the benchmark sweep.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "strurw/experiment.hpp"
#include "strurw/rng.hpp"
#include "strurw/theory.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace strurw;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        seeds.push_back(std::stoull(item));
    }
    if (seeds.empty()) throw ValidationError("--seeds: empty seed list");
    return seeds;
}

int thread_budget(int requested) {
    int cap = static_cast<int>(std::thread::hardware_concurrency());
    if (cap < 1) cap = 1;
    if (const char* env = std::getenv("STRURW_THREADS")) {
        const int env_cap = std::atoi(env);
        if (env_cap >= 1) cap = std::min(cap, env_cap);
    }
    return requested >= 1 ? std::min(requested, cap) : cap;
}

int cmd_generate(const std::string& config_path, std::uint64_t seed, const std::string& out_dir) {
    const ExperimentConfig config = load_experiment_config(config_path);
    const DomainPair pair = realize_domain_pair(config, seed);
    fs::create_directories(out_dir);
    spit(out_dir + "/source.json", pair.source.serialize());
    spit(out_dir + "/target.json", pair.target.serialize());
    json masks = {{"target_val_mask", pair.target_val_mask}, {"target_test_mask", pair.target_test_mask},
                  {"seed", seed}};
    spit(out_dir + "/masks.json", masks.dump(2));
    std::cout << "wrote source.json, target.json, masks.json to " << out_dir << "\n";
    return 0;
}

int cmd_estimate_b(const std::string& graph_path, const std::string& out_path) {
    const LabeledGraph g = LabeledGraph::deserialize(slurp(graph_path));
    for (int y : g.labels())
        if (y == kUnknownLabel) throw ValidationError("estimate-b: graph must be fully labeled");
    const BlockEstimate est = estimate_block_matrix(g, g.labels());
    if (est.any_degenerate) std::cerr << "warning: some class has no nodes; its row/column is 0\n";
    const std::string text = est.B.to_json();
    if (!out_path.empty()) spit(out_path, text);
    std::cout << text << "\n";
    return 0;
}

int cmd_css(const std::string& a_path, const std::string& b_path) {
    const BlockMatrix a = BlockMatrix::from_json(slurp(a_path));
    const BlockMatrix b = BlockMatrix::from_json(slurp(b_path));
    const CssResult css = css_metric(a, b);
    std::cout << css.value << "\n";
    if (css.unbounded) std::cerr << "warning: some entry pair has exactly one zero probability\n";
    return 0;
}

int cmd_weights(const std::string& bs_path, const std::string& bt_path, double lambda,
                const std::string& out_path) {
    const BlockMatrix bs = BlockMatrix::from_json(slurp(bs_path));
    const BlockMatrix bt = BlockMatrix::from_json(slurp(bt_path));
    const WeightTable table = compute_weight_table(bs, bt, lambda);
    const std::string text = table.to_json();
    if (!out_path.empty()) spit(out_path, text);
    std::cout << text << "\n";
    return 0;
}

struct RunOutput {
    std::string run_id;
    std::uint64_t seed = 0;
    RunMetrics metrics;
};

RunOutput run_one(const ExperimentConfig& config, const std::string& config_text, std::uint64_t seed) {
    RunOutput out;
    out.run_id = make_run_id(config_text, seed);
    out.seed = seed;
    TrainConfig train = config.train;
    train.seed = seed;
    const DomainPair pair = realize_domain_pair(config, seed);
    out.metrics = run_algorithm1(pair, train);
    return out;
}

json summary_cell(const std::vector<double>& values) {
    const SummaryStat s = summarize(values);
    return {{"mean", s.mean}, {"std", s.std_dev}, {"n", s.n}};
}

int cmd_train(const std::string& config_path, const std::string& seed_csv, const std::string& out_dir) {
    const std::string config_text = slurp(config_path);
    ExperimentConfig config = parse_experiment_config(config_text);
    if (!seed_csv.empty()) config.seeds = parse_seed_list(seed_csv);
    const std::string dir = out_dir.empty() ? config.out_dir : out_dir;
    fs::create_directories(dir);

    std::ofstream csv(dir + "/metrics.csv");
    if (!csv) throw std::runtime_error("cannot write " + dir + "/metrics.csv");
    csv << kMetricsCsvHeader << "\n";
    std::vector<double> best_tests;
    json runs = json::array();
    for (std::uint64_t seed : config.seeds) {
        TrainConfig train = config.train;
        train.seed = seed;
        const RunOutput out = run_one(config, config_text, seed);
        write_metrics_csv(csv, out.run_id, train, out.metrics, /*with_header=*/false);
        best_tests.push_back(out.metrics.best_test_acc);
        runs.push_back({{"run_id", out.run_id},
                        {"seed", seed},
                        {"best_epoch", out.metrics.best_epoch},
                        {"best_val_acc", out.metrics.best_val_acc},
                        {"best_test_acc", out.metrics.best_test_acc}});
    }
    json summary = {{"pipeline", pipeline_name(config.train.pipeline)},
                    {"strurw", config.train.strurw.has_value()},
                    {"seeds", config.seeds},
                    {"best_test_acc", summary_cell(best_tests)},
                    {"runs", runs}};
    spit(dir + "/summary.json", summary.dump(2));
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_verify_theory(std::uint64_t seed, std::size_t tv_samples, int hoeffding_graphs) {
    json report;

    const TvReport matched =
        distribution_identity_check(1000, 0.2, 0.1, 0.5, tv_samples, IdentityMode::matched, seed);
    const TvReport contrast =
        distribution_identity_check(1000, 0.2, 0.1, 0.5, tv_samples, IdentityMode::contrast, seed);
    report["identity"] = {{"matched_tv", matched.tv},
                          {"contrast_tv", contrast.tv},
                          {"samples_per_side", matched.samples_per_side},
                          {"bins", matched.bins}};

    std::vector<double> errors;
    for (int g = 0; g < hoeffding_graphs; ++g)
        errors.push_back(hoeffding_target_error(2000, 0.2, 0.2, 0.5, substream_seed(seed, 50, g)).error);
    const double bound = 2.0 * std::exp(-2000.0 * 0.2 * 0.2 * 0.5 * 0.5 / 32.0);
    report["hoeffding"] = {{"n", 2000},
                          {"errors", errors},
                          {"mean_error", summarize(errors).mean},
                          {"bound", bound}};

    const AlignmentReport aligned = conditional_alignment_check(true, seed);
    const AlignmentReport unaligned = conditional_alignment_check(false, seed);
    report["alignment"] = {{"aligned_p", aligned.p_value}, {"unaligned_p", unaligned.p_value}};

    std::cout << report.dump(2) << "\n";
    return 0;
}

int cmd_sweep(const std::string& out_dir, const std::string& seed_csv, int threads, int epochs) {
    const std::vector<double> grid_q = {0.001, 0.006, 0.010, 0.012, 0.014, 0.016};
    struct Method {
        const char* name;
        Pipeline pipeline;
        bool strurw;
    };
    const std::vector<Method> methods = {{"erm", Pipeline::erm, false},
                                         {"strurw-erm", Pipeline::erm, true},
                                         {"adv", Pipeline::adv, false},
                                         {"strurw-adv", Pipeline::adv, true},
                                         {"mixup", Pipeline::mixup, false},
                                         {"strurw-mix", Pipeline::mixup, true}};
    const std::vector<std::uint64_t> seeds = parse_seed_list(seed_csv);

    struct Cell {
        double q;
        Method method;
        std::uint64_t seed;
        ExperimentConfig config;
        std::string config_text;
    };
    std::vector<Cell> cells;
    for (double q : grid_q)
        for (const Method& method : methods) {
            ExperimentConfig config;
            SyntheticShift shift;
            shift.target_inter = q;
            config.synthetic = shift;
            config.train.pipeline = method.pipeline;
            config.train.epochs = method.pipeline == Pipeline::adv ? epochs * 3 / 2 : epochs;
            config.train.hidden_dims = {40, 40, 40};
            config.train.eval_every = 5;
            if (method.strurw) {
                StruRwSchedule sched;
                sched.start_epoch = std::min(50, config.train.epochs - 1);
                config.train.strurw = sched;
            }
            json desc = {{"q", q}, {"method", method.name}, {"epochs", config.train.epochs}};
            for (std::uint64_t seed : seeds)
                cells.push_back({q, method, seed, config, desc.dump()});
        }

    std::vector<RunOutput> results(cells.size());
    std::atomic<std::size_t> next{0};
    std::mutex io;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            results[i] = run_one(cells[i].config, cells[i].config_text, cells[i].seed);
            std::lock_guard<std::mutex> lock(io);
            std::cerr << "done " << cells[i].method.name << " q=" << cells[i].q << " seed="
                      << cells[i].seed << " best_test=" << results[i].metrics.best_test_acc << "\n";
        }
    };
    const int n_threads = std::min<int>(thread_budget(threads), static_cast<int>(cells.size()));
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    fs::create_directories(out_dir);
    std::ofstream csv(out_dir + "/sweep.csv");
    if (!csv) throw std::runtime_error("cannot write " + out_dir + "/sweep.csv");
    csv << "run_id,q,method,seed,best_epoch,best_val_acc,best_test_acc\n";
    csv << std::setprecision(17);
    for (std::size_t i = 0; i < cells.size(); ++i)
        csv << results[i].run_id << ',' << cells[i].q << ',' << cells[i].method.name << ','
            << cells[i].seed << ',' << results[i].metrics.best_epoch << ','
            << results[i].metrics.best_val_acc << ',' << results[i].metrics.best_test_acc << "\n";

    json summary = json::object();
    for (double q : grid_q) {
        json row = json::object();
        for (const Method& method : methods) {
            std::vector<double> values;
            for (std::size_t i = 0; i < cells.size(); ++i)
                if (cells[i].q == q && std::string(cells[i].method.name) == method.name)
                    values.push_back(results[i].metrics.best_test_acc);
            row[method.name] = summary_cell(values);
        }
        std::ostringstream key;
        key << "q=" << q;
        summary[key.str()] = row;
    }
    spit(out_dir + "/summary.json", summary.dump(2));
    std::cout << summary.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structural re-weighting for graph domain adaptation"};
    app.require_subcommand(1);

    std::string config_path, out_path, graph_path, a_path, b_path;
    std::string seed_csv;
    std::uint64_t seed = 0;
    double lambda = 0.8;
    int threads = 0;
    int epochs = 200;
    std::size_t tv_samples = 2000;
    int hoeffding_graphs = 5;

    auto* generate = app.add_subcommand("generate", "Sample a source/target domain pair to JSON files");
    generate->add_option("--config", config_path, "experiment config JSON")->required();
    generate->add_option("--seed", seed, "replicate seed");
    generate->add_option("--out", out_path, "output directory")->required();

    auto* estimate = app.add_subcommand("estimate-b", "Estimate the class-pair edge-probability matrix");
    estimate->add_option("graph", graph_path, "graph JSON file")->required();
    estimate->add_option("--out", out_path, "write the matrix JSON here as well");

    auto* css = app.add_subcommand("css", "Structure-shift metric between two block matrices");
    css->add_option("a", a_path, "block matrix JSON")->required();
    css->add_option("b", b_path, "block matrix JSON")->required();

    auto* weights = app.add_subcommand("weights", "Lambda-mixed class-pair edge weight table");
    weights->add_option("--bs", a_path, "source block matrix JSON")->required();
    weights->add_option("--bt", b_path, "target block matrix JSON")->required();
    weights->add_option("--lambda", lambda, "mixing coefficient in [0, 1]");
    weights->add_option("--out", out_path, "write the table JSON here as well");

    auto* train = app.add_subcommand("train", "Run the training pipeline over replicate seeds");
    train->add_option("--config", config_path, "experiment config JSON")->required();
    train->add_option("--seeds", seed_csv, "comma-separated seed list (overrides config)");
    train->add_option("--out", out_path, "output directory (overrides config)");

    auto* verify = app.add_subcommand("verify-theory", "Statistical checks of the binary construction");
    verify->add_option("--seed", seed, "base seed");
    verify->add_option("--samples", tv_samples, "samples per side for the identity check");
    verify->add_option("--graphs", hoeffding_graphs, "graphs for the classifier error estimate");

    auto* sweep = app.add_subcommand("sweep", "Benchmark grid: source inter-class q x methods x seeds");
    sweep->add_option("--out", out_path, "output directory")->required();
    sweep->add_option("--seeds", seed_csv, "comma-separated seed list")->required();
    sweep->add_option("--threads", threads, "parallel runs (capped by STRURW_THREADS and cores)");
    sweep->add_option("--epochs", epochs, "epochs per non-adversarial run");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (generate->parsed()) return cmd_generate(config_path, seed, out_path);
        if (estimate->parsed()) return cmd_estimate_b(graph_path, out_path);
        if (css->parsed()) return cmd_css(a_path, b_path);
        if (weights->parsed()) return cmd_weights(a_path, b_path, lambda, out_path);
        if (train->parsed()) return cmd_train(config_path, seed_csv, out_path);
        if (verify->parsed()) return cmd_verify_theory(seed, tv_samples, hoeffding_graphs);
        if (sweep->parsed()) return cmd_sweep(out_path, seed_csv, threads, epochs);
    } catch (const ValidationError& e) {
        std::cerr << "error: validation: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: runtime: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

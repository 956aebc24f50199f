// Command-line front end: train, sweep, analyze, generate, splits.
// Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "hoggcn/analysis.hpp"
#include "hoggcn/gradcheck.hpp"
#include "hoggcn/trainer.hpp"

namespace fs = std::filesystem;
using namespace hoggcn;

namespace {

struct CommonOpts {
    std::string data_dir;
    std::string out_dir;
    ModelConfig model;
    TrainSettings train;
    int splits_count = 10;
    bool regenerate_splits = false;
};

void add_model_options(CLI::App* cmd, ModelConfig& m) {
    cmd->add_option("--k", m.k, "Propagation order k");
    cmd->add_option("--alpha", m.alpha, "Weight of the attribute-space homophily estimate");
    cmd->add_option("--beta", m.beta, "Weight of the topology-space homophily estimate");
    cmd->add_option("--lambda", m.lambda, "MLP loss weight");
    cmd->add_option("--gamma", m.gamma, "Label propagation loss weight");
    cmd->add_option("--mu", m.mu, "Ego term weight");
    cmd->add_option("--xi", m.xi, "Neighborhood term weight");
    cmd->add_option("--mlp-hidden", m.mlp_hidden, "MLP hidden width");
    cmd->add_option("--gcn-hidden", m.gcn_hidden, "Convolution hidden width");
    cmd->add_option("--mlp-layers", m.mlp_layers, "MLP layer count");
    cmd->add_option("--gcn-layers", m.gcn_layers, "Convolution layer count");
    cmd->add_option("--lp-iterations", m.lp_iterations, "Label propagation iterations");
    cmd->add_flag("--uniform-h", m.uniform_h, "Ablation: fix H to 1 on the support");
    cmd->add_option("--seed", m.seed, "Master seed");
}

void add_train_options(CLI::App* cmd, TrainSettings& t) {
    cmd->add_option("--max-epochs", t.max_epochs, "Epoch cap per split");
    cmd->add_option("--patience", t.patience, "Early stopping patience (validation accuracy)");
    cmd->add_option("--eval-every", t.eval_every, "Validation evaluation period");
    cmd->add_option("--lr", t.optimizer.lr, "Adam learning rate");
    cmd->add_option("--beta1", t.optimizer.beta1, "Adam beta1");
    cmd->add_option("--beta2", t.optimizer.beta2, "Adam beta2");
    cmd->add_option("--eps", t.optimizer.eps, "Adam epsilon");
    cmd->add_option("--weight-decay", t.optimizer.weight_decay,
                    "L2 weight decay on weight matrices");
    cmd->add_option("--parallelism", t.parallelism, "Worker threads across splits");
}

int env_parallelism(int fallback) {
    if (const char* env = std::getenv("HOGGCN_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    return fallback;
}

std::vector<Split> obtain_splits(Graph& graph, const CommonOpts& opt) {
    if (!graph.splits.empty() && !opt.regenerate_splits) return graph.splits;
    // min_class_size 1: benchmark graphs may carry singleton classes
    return generate_splits(graph, opt.splits_count, opt.train.seed, /*min_class_size=*/1);
}

void echo_config(const CLI::App* cmd, const fs::path& out_dir) {
    std::ofstream out(out_dir / "config_used.cfg");
    if (!out) throw Error("cannot write " + (out_dir / "config_used.cfg").string());
    out << cmd->config_to_str(true, false);
}

void write_checkpoints(const std::vector<HogModel>& models, const fs::path& out_dir) {
    for (std::size_t i = 0; i < models.size(); ++i)
        models[i].save_checkpoint(out_dir / ("checkpoint_split" + std::to_string(i) + ".bin"));
}

int cmd_train(const CLI::App* cmd, CommonOpts& opt) {
    opt.model.seed = opt.train.seed;  // one master seed drives the run
    Graph graph = load_dataset(opt.data_dir);
    const std::vector<Split> splits = obtain_splits(graph, opt);

    fs::create_directories(opt.out_dir);
    echo_config(cmd, opt.out_dir);

    std::vector<HogModel> models;
    TrainReport report = run_protocol(graph, opt.model, opt.train, splits, &models);

    write_report_json(report, fs::path(opt.out_dir) / "report.json");
    write_curves_tsv(report, fs::path(opt.out_dir) / "curves.tsv");
    write_checkpoints(models, opt.out_dir);

    std::cout << "test accuracy: " << fmt9(report.mean_acc) << " +/- " << fmt9(report.std_acc)
              << " over " << report.splits.size() << " splits\n";
    return 0;
}

std::vector<double> parse_grid(const std::string& spec) {
    // lo:hi:step, inclusive endpoints
    double lo, hi, step;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0 || hi < lo)
        throw CLI::ValidationError("--grid", "expected lo:hi:step with step > 0");
    std::vector<double> vals;
    for (double v = lo; v <= hi + 1e-9; v += step) vals.push_back(round9(v));
    return vals;
}

int cmd_sweep(const CLI::App* cmd, CommonOpts& opt, const std::string& axis, int k_from,
              int k_to, const std::string& grid) {
    opt.model.seed = opt.train.seed;
    Graph graph = load_dataset(opt.data_dir);
    const std::vector<Split> splits = obtain_splits(graph, opt);

    fs::create_directories(opt.out_dir);
    echo_config(cmd, opt.out_dir);

    std::vector<SweepPoint> points;
    if (axis == "k") {
        points = sweep_k(graph, opt.model, opt.train, splits, k_from, k_to);
    } else if (axis == "alphabeta") {
        points = sweep_alpha_beta(graph, opt.model, opt.train, splits, parse_grid(grid));
    } else {
        throw CLI::ValidationError("--axis", "must be 'k' or 'alphabeta'");
    }
    write_sweep_tsv(points, fs::path(opt.out_dir) / "sweep.tsv");

    for (const auto& p : points)
        std::cout << "k=" << p.k << " alpha=" << fmt9(p.alpha) << " beta=" << fmt9(p.beta)
                  << " acc=" << fmt9(p.report.mean_acc) << " +/- " << fmt9(p.report.std_acc) << "\n";
    return 0;
}

int cmd_analyze(const std::string& data_dir, const std::string& checkpoint,
                const std::string& out_dir, int fp_max_iter, double fp_tol,
                std::uint64_t fp_seed) {
    Graph graph = load_dataset(data_dir);
    HogModel model = HogModel::load_checkpoint(checkpoint, graph);
    fs::create_directories(out_dir);

    Tape tape;
    ForwardValues fv = model.forward(tape, Split{});  // no split-dependent outputs used

    const Matrix& h_mat = tape.value(fv.h_edges);
    std::vector<double> h_entries(h_mat.data());

    const auto rep = degree_distribution(h_entries, *model.support(), graph.labels);
    write_degree_distribution_json(rep, fs::path(out_dir) / "degree_dist.json");

    export_embeddings(tape.value(fv.z_final), graph.labels, fs::path(out_dir) / "embeddings.tsv");

    // fixed-point analysis runs on the largest non-bipartite component
    int comp_count = 0;
    const std::vector<int> comp = connected_components(*model.support(), &comp_count);
    std::vector<std::int64_t> size(comp_count, 0);
    for (int c : comp) ++size[c];
    int chosen = -1;
    std::int64_t chosen_size = 0;
    for (int c = 0; c < comp_count; ++c) {
        if (size[c] < 2 || size[c] <= chosen_size) continue;
        if (component_is_bipartite(*model.support(), comp, c)) continue;
        chosen = c;
        chosen_size = size[c];
    }
    if (chosen < 0) {
        std::cerr << "analyze: no non-bipartite component of size >= 2; skipping theorem1.json\n";
        return 0;
    }
    std::vector<int> keep;
    for (int i = 0; i < static_cast<int>(comp.size()); ++i)
        if (comp[i] == chosen) keep.push_back(i);

    SupportRestriction sub = restrict_support(*model.support(), h_entries, keep);
    Matrix z0(sub.support.nodes(), graph.num_classes);
    Rng rng(seed_mix(fp_seed, 0x7e0));
    for (double& v : z0.data()) v = rng.next_normal();

    FixedPointResult fp = fixed_point_iterate(z0, sub.h_entries, sub.support, fp_max_iter, fp_tol);
    TheoremReport trep;
    trep.residual = fp.residual;
    trep.iterations = fp.iterations;
    trep.objective_initial = smoothness_pairwise(z0, sub.h_entries, sub.support);
    trep.objective_limit = smoothness_pairwise(fp.z, sub.h_entries, sub.support);
    trep.nodes_used = sub.support.nodes();
    write_theorem_json(trep, fs::path(out_dir) / "theorem1.json");

    std::cout << "degree distribution: intra-mean " << fmt9(rep.intra_mean) << ", inter-mean "
              << fmt9(rep.inter_mean) << "\n"
              << "fixed point: residual " << fmt9(trep.residual) << " after " << trep.iterations
              << " iterations on " << trep.nodes_used << " nodes\n";
    return 0;
}

int cmd_generate(const SyntheticConfig& cfg, const std::string& out_dir, int splits_count) {
    Graph g = generate_synthetic(cfg);
    if (splits_count > 0) g.splits = generate_splits(g, splits_count, cfg.seed);
    save_dataset(g, out_dir);
    std::cout << "generated " << g.name << ": n=" << g.n << " f=" << g.f
              << " C=" << g.num_classes << " edges=" << g.edge_count()
              << " homophily=" << fmt9(homophily_ratio(g)) << "\n";
    return 0;
}

int cmd_splits(const std::string& data_dir, int count, std::uint64_t seed,
               const std::string& out_path) {
    Graph graph = load_dataset(data_dir);
    graph.splits.clear();
    const auto splits = generate_splits(graph, count, seed, /*min_class_size=*/1);
    const fs::path path = out_path.empty() ? fs::path(data_dir) / "splits.json" : fs::path(out_path);
    save_splits_json(splits, path);
    std::cout << "wrote " << splits.size() << " splits to " << path.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Homophily-guided graph convolution: training, sweeps and analysis"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "Print help");  // keeps --h free for `generate`

    CommonOpts opt;
    opt.train.parallelism = env_parallelism(1);

    // --- train ---
    auto* train = app.add_subcommand("train", "Train over all splits and report accuracy");
    train->set_config("--config", "", "Flat key=value config file; command line wins");
    train->add_option("--data", opt.data_dir, "Dataset directory")->required();
    train->add_option("--out", opt.out_dir, "Run output directory")->required();
    train->add_option("--splits-count", opt.splits_count, "Splits to generate when absent");
    train->add_flag("--regenerate-splits", opt.regenerate_splits,
                    "Ignore splits.json and regenerate");
    add_model_options(train, opt.model);
    add_train_options(train, opt.train);

    // --- sweep ---
    std::string axis = "k", grid = "0:1:0.2";
    int k_from = 1, k_to = 6;
    auto* sweep = app.add_subcommand("sweep", "Grid sweep over k or (alpha, beta)");
    sweep->set_config("--config", "", "Flat key=value config file; command line wins");
    sweep->add_option("--data", opt.data_dir, "Dataset directory")->required();
    sweep->add_option("--out", opt.out_dir, "Run output directory")->required();
    sweep->add_option("--axis", axis, "Sweep axis: k | alphabeta");
    sweep->add_option("--from", k_from, "First k");
    sweep->add_option("--to", k_to, "Last k");
    sweep->add_option("--grid", grid, "alphabeta grid as lo:hi:step");
    sweep->add_option("--splits-count", opt.splits_count, "Splits to generate when absent");
    sweep->add_flag("--regenerate-splits", opt.regenerate_splits,
                    "Ignore splits.json and regenerate");
    add_model_options(sweep, opt.model);
    add_train_options(sweep, opt.train);

    // --- analyze ---
    std::string checkpoint, a_data, a_out;
    int fp_max_iter = 50000;
    double fp_tol = 1e-9;
    std::uint64_t fp_seed = 0;
    auto* analyze = app.add_subcommand("analyze", "Post-hoc diagnostics of a trained checkpoint");
    analyze->add_option("--data", a_data, "Dataset directory")->required();
    analyze->add_option("--checkpoint", checkpoint, "Model checkpoint file")->required();
    analyze->add_option("--out", a_out, "Output directory")->required();
    analyze->add_option("--fp-max-iter", fp_max_iter, "Fixed point iteration cap");
    analyze->add_option("--fp-tol", fp_tol, "Fixed point step tolerance");
    analyze->add_option("--fp-seed", fp_seed, "Seed of the random initial state");

    // --- generate ---
    SyntheticConfig syn;
    std::string g_out;
    int g_splits = 0;
    auto* generate = app.add_subcommand("generate", "Write a synthetic dataset directory");
    generate->set_help_flag("--help", "Print help");
    generate->add_option("--out", g_out, "Output dataset directory")->required();
    generate->add_option("--n", syn.n, "Node count");
    generate->add_option("--classes", syn.num_classes, "Class count");
    generate->add_option("--h", syn.h_target, "Target homophily ratio");
    generate->add_option("--mean-degree", syn.mean_degree, "Expected mean degree");
    generate->add_option("--feature-dim", syn.feature_dim, "Feature dimension");
    generate->add_option("--feature-signal", syn.feature_signal, "Class mean separation scale");
    generate->add_option("--seed", syn.seed, "Generator seed");
    generate->add_option("--splits-count", g_splits, "Also write this many splits");

    // --- splits ---
    std::string s_data, s_out;
    int s_count = 10;
    std::uint64_t s_seed = 0;
    auto* splits_cmd = app.add_subcommand("splits", "Regenerate split files for a dataset");
    splits_cmd->add_option("--data", s_data, "Dataset directory")->required();
    splits_cmd->add_option("--count", s_count, "Number of splits");
    splits_cmd->add_option("--seed", s_seed, "Seed");
    splits_cmd->add_option("--out", s_out, "Output file (default: <data>/splits.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (train->parsed()) return cmd_train(train, opt);
        if (sweep->parsed()) return cmd_sweep(sweep, opt, axis, k_from, k_to, grid);
        if (analyze->parsed())
            return cmd_analyze(a_data, checkpoint, a_out, fp_max_iter, fp_tol, fp_seed);
        if (generate->parsed()) return cmd_generate(syn, g_out, g_splits);
        if (splits_cmd->parsed()) return cmd_splits(s_data, s_count, s_seed, s_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

#include "hoggcn/trainer.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <optional>
#include <thread>

#include <json.hpp>

namespace hoggcn {

namespace {

using nlohmann::json;

json config_to_json(const ModelConfig& c) {
    return {{"k", c.k},           {"alpha", c.alpha},
            {"beta", c.beta},     {"lambda", c.lambda},
            {"gamma", c.gamma},   {"mu", c.mu},
            {"xi", c.xi},         {"mlp_hidden", c.mlp_hidden},
            {"gcn_hidden", c.gcn_hidden}, {"mlp_layers", c.mlp_layers},
            {"gcn_layers", c.gcn_layers}, {"lp_iterations", c.lp_iterations},
            {"uniform_h", c.uniform_h},   {"seed", c.seed}};
}

json settings_to_json(const TrainSettings& s) {
    return {{"max_epochs", s.max_epochs},
            {"patience", s.patience},
            {"eval_every", s.eval_every},
            {"lr", round9(s.optimizer.lr)},
            {"beta1", round9(s.optimizer.beta1)},
            {"beta2", round9(s.optimizer.beta2)},
            {"eps", s.optimizer.eps},
            {"weight_decay", round9(s.optimizer.weight_decay)},
            {"seed", s.seed},
            {"parallelism", s.parallelism}};
}

}  // namespace

void TrainSettings::validate() const {
    if (max_epochs < 1) throw Error("TrainSettings: max_epochs must be >= 1");
    if (patience < 1) throw Error("TrainSettings: patience must be >= 1");
    if (eval_every < 1) throw Error("TrainSettings: eval_every must be >= 1");
    if (parallelism < 1) throw Error("TrainSettings: parallelism must be >= 1");
}

std::pair<double, double> aggregate_accuracy(const std::vector<SplitRecord>& records) {
    if (records.empty()) throw Error("aggregate_accuracy: no records");
    double mean = 0;
    for (const auto& r : records) mean += r.test_acc;
    mean /= static_cast<double>(records.size());
    double std_acc = 0;
    if (records.size() > 1) {
        double ss = 0;
        for (const auto& r : records) {
            const double d = r.test_acc - mean;
            ss += d * d;
        }
        std_acc = std::sqrt(ss / static_cast<double>(records.size() - 1));
    }
    return {mean, std_acc};
}

std::pair<HogModel, SplitRecord> train_one_split(const Graph& graph, const Split& split,
                                                 const ModelConfig& config,
                                                 const TrainSettings& settings,
                                                 int split_index) {
    settings.validate();
    if (split.train.empty()) throw Error("train_one_split: split has no training nodes");

    SplitRecord rec;
    rec.split_index = split_index;
    rec.run_seed = seed_mix(settings.seed, split.seed);

    ModelConfig cfg = config;
    cfg.seed = rec.run_seed;
    HogModel model(graph, cfg);

    auto params = model.parameters();
    AdamState adam(settings.optimizer, params);

    const bool have_validation = !split.validation.empty();
    std::vector<Matrix> best_snapshot = model.snapshot();
    rec.best_val_acc = -1.0;
    int since_best = 0;

    for (int epoch = 1; epoch <= settings.max_epochs; ++epoch) {
        Tape tape;
        ForwardValues fv = model.forward(tape, split);
        LossValues lv = model.joint_loss(tape, fv, split);

        const double l_gcn = tape.value(lv.gcn)(0, 0);
        const double l_mlp = tape.value(lv.mlp)(0, 0);
        const double l_lp = tape.value(lv.lp)(0, 0);
        const double total = tape.value(lv.total)(0, 0);
        if (!std::isfinite(total))
            throw Error("train_one_split: non-finite loss at epoch " + std::to_string(epoch) +
                        " (gcn=" + fmt9(l_gcn) + ", mlp=" + fmt9(l_mlp) + ", lp=" + fmt9(l_lp) + ")");

        // validation accuracy of the parameters entering this epoch;
        // the snapshot below reproduces exactly these predictions
        double val_acc = rec.curve.empty() ? 0.0 : rec.curve.back().val_acc;
        if (have_validation && (epoch - 1) % settings.eval_every == 0) {
            val_acc = accuracy(tape.value(fv.r), graph.labels, split.validation);
            if (val_acc > rec.best_val_acc) {
                rec.best_val_acc = val_acc;
                rec.best_epoch = epoch;
                best_snapshot = model.snapshot();
                since_best = 0;
            } else {
                ++since_best;
            }
        }
        rec.curve.push_back({epoch, l_gcn, l_mlp, l_lp, val_acc});
        rec.epochs_run = epoch;

        if (have_validation && since_best >= settings.patience) break;

        tape.backward(lv.total);
        adam.step(params);
    }

    if (have_validation) {
        model.restore(best_snapshot);
    } else {
        rec.best_epoch = rec.epochs_run;  // no stopping signal: keep final parameters
        rec.best_val_acc = 0;
    }

    Tape tape;
    ForwardValues fv = model.forward(tape, split);
    if (!split.test.empty())
        rec.test_acc = accuracy(tape.value(fv.r), graph.labels, split.test);
    return {std::move(model), std::move(rec)};
}

TrainReport run_protocol(const Graph& graph, const ModelConfig& config,
                         const TrainSettings& settings, const std::vector<Split>& splits,
                         std::vector<HogModel>* models) {
    settings.validate();
    config.validate();
    if (splits.empty()) throw Error("run_protocol: need at least one split");

    TrainReport report;
    report.model = config;
    report.settings = settings;
    report.splits.resize(splits.size());

    std::vector<std::optional<HogModel>> trained(splits.size());
    const int workers = std::min<int>(settings.parallelism, static_cast<int>(splits.size()));

    if (workers <= 1) {
        for (std::size_t i = 0; i < splits.size(); ++i) {
            auto [model, rec] = train_one_split(graph, splits[i], config, settings,
                                                static_cast<int>(i));
            report.splits[i] = std::move(rec);
            if (models) trained[i].emplace(std::move(model));
        }
    } else {
        // splits are independent runs; any schedule yields identical output
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(splits.size());
        auto work = [&]() {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= splits.size()) return;
                try {
                    auto [model, rec] = train_one_split(graph, splits[i], config, settings,
                                                        static_cast<int>(i));
                    report.splits[i] = std::move(rec);
                    if (models) trained[i].emplace(std::move(model));
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    std::tie(report.mean_acc, report.std_acc) = aggregate_accuracy(report.splits);
    if (models) {
        models->clear();
        models->reserve(splits.size());
        for (auto& m : trained) models->push_back(std::move(*m));
    }
    return report;
}

std::vector<SweepPoint> sweep_k(const Graph& graph, ModelConfig config,
                                const TrainSettings& settings, const std::vector<Split>& splits,
                                int k_from, int k_to) {
    if (k_from < 1 || k_to < k_from) throw Error("sweep_k: invalid k range");
    std::vector<SweepPoint> out;
    for (int k = k_from; k <= k_to; ++k) {
        config.k = k;
        SweepPoint p;
        p.k = k;
        p.alpha = config.alpha;
        p.beta = config.beta;
        p.report = run_protocol(graph, config, settings, splits);
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<SweepPoint> sweep_alpha_beta(const Graph& graph, ModelConfig config,
                                         const TrainSettings& settings,
                                         const std::vector<Split>& splits,
                                         const std::vector<double>& grid_values) {
    if (grid_values.empty()) throw Error("sweep_alpha_beta: empty grid");
    std::vector<SweepPoint> out;
    for (double a : grid_values) {
        for (double b : grid_values) {
            config.alpha = a;
            config.beta = b;
            SweepPoint p;
            p.k = config.k;
            p.alpha = a;
            p.beta = b;
            p.report = run_protocol(graph, config, settings, splits);
            out.push_back(std::move(p));
        }
    }
    return out;
}

void write_report_json(const TrainReport& report, const std::filesystem::path& path) {
    json j;
    j["config"] = config_to_json(report.model);
    j["settings"] = settings_to_json(report.settings);
    j["splits"] = json::array();
    for (const auto& r : report.splits) {
        j["splits"].push_back({{"split_index", r.split_index},
                               {"run_seed", r.run_seed},
                               {"best_epoch", r.best_epoch},
                               {"epochs_run", r.epochs_run},
                               {"best_val_acc", round9(r.best_val_acc)},
                               {"test_acc", round9(r.test_acc)}});
    }
    j["aggregate"] = {{"num_splits", report.splits.size()},
                      {"mean_acc", round9(report.mean_acc)},
                      {"std_acc", round9(report.std_acc)}};
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

void write_curves_tsv(const TrainReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "split\tepoch\tl_gcn\tl_mlp\tl_lp\tval_acc\n";
    for (const auto& r : report.splits)
        for (const auto& p : r.curve)
            out << r.split_index << '\t' << p.epoch << '\t' << fmt9(p.l_gcn) << '\t'
                << fmt9(p.l_mlp) << '\t' << fmt9(p.l_lp) << '\t' << fmt9(p.val_acc) << '\n';
}

void write_sweep_tsv(const std::vector<SweepPoint>& points, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "k\talpha\tbeta\tmean_acc\tstd_acc\n";
    for (const auto& p : points)
        out << p.k << '\t' << fmt9(p.alpha) << '\t' << fmt9(p.beta) << '\t'
            << fmt9(p.report.mean_acc) << '\t' << fmt9(p.report.std_acc) << '\n';
}

}  // namespace hoggcn

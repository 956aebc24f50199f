#include "hoggcn/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cinttypes>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace hoggcn {

namespace {

using nlohmann::json;

[[noreturn]] void fail_at(const std::filesystem::path& file, std::size_t line, const std::string& msg) {
    throw Error(file.string() + ":" + std::to_string(line) + ": " + msg);
}

std::ifstream open_or_fail(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw Error("missing or unreadable file: " + p.string());
    return in;
}

double parse_double(const std::string& tok, const std::filesystem::path& file, std::size_t line) {
    double v;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        fail_at(file, line, "not a number: '" + tok + "'");
    return v;
}

long parse_int(const std::string& tok, const std::filesystem::path& file, std::size_t line) {
    long v;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        fail_at(file, line, "not an integer: '" + tok + "'");
    return v;
}

std::vector<std::string> split_tabs(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t tab = s.find('\t', start);
        if (tab == std::string::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, tab - start));
        start = tab + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
    return out;
}

SparseMatrix adjacency_from_pairs(int n, const std::set<std::pair<int, int>>& undirected) {
    std::vector<std::int64_t> ri;
    std::vector<int> ci;
    for (auto [u, v] : undirected) {
        ri.push_back(u);
        ci.push_back(v);
        ri.push_back(v);
        ci.push_back(u);
    }
    std::vector<double> vals(ri.size(), 1.0);
    return SparseMatrix::from_triplets(n, n, std::move(ri), std::move(ci), std::move(vals));
}

}  // namespace

void Graph::validate() const {
    if (n <= 0) throw Error("Graph: node count must be positive");
    if (num_classes <= 0) throw Error("Graph: class count must be positive");
    adjacency.validate();
    if (adjacency.rows != n || adjacency.cols != n) throw Error("Graph: adjacency shape mismatch");
    if (!adjacency.has_zero_diagonal()) throw Error("Graph: adjacency has self-loops");
    if (!adjacency.is_symmetric()) throw Error("Graph: adjacency is not symmetric");
    for (double v : adjacency.values)
        if (v != 1.0) throw Error("Graph: adjacency must be binary");
    if (features.rows() != n) throw Error("Graph: feature row count != n");
    if (f < 1 || features.cols() != f) throw Error("Graph: feature dimension invalid");
    if (!features.all_finite()) throw Error("Graph: non-finite feature value");
    if (static_cast<int>(labels.size()) != n) throw Error("Graph: label count != n");
    std::vector<bool> seen(num_classes, false);
    for (int y : labels) {
        if (y < 0 || y >= num_classes) throw Error("Graph: label out of range");
        seen[y] = true;
    }
    for (int c = 0; c < num_classes; ++c)
        if (!seen[c]) throw Error("Graph: class " + std::to_string(c) + " has no nodes");
    for (const Split& s : splits) {
        std::vector<int> mark(n, 0);
        auto take = [&](const std::vector<int>& ids) {
            for (int id : ids) {
                if (id < 0 || id >= n) throw Error("Graph: split node id out of range");
                if (mark[id]++) throw Error("Graph: split sets overlap");
            }
        };
        take(s.train);
        take(s.validation);
        take(s.test);
        for (int i = 0; i < n; ++i)
            if (!mark[i]) throw Error("Graph: split does not cover node " + std::to_string(i));
        std::vector<bool> in_train(num_classes, false);
        for (int id : s.train) in_train[labels[id]] = true;
        for (int c = 0; c < num_classes; ++c)
            if (!in_train[c]) throw Error("Graph: class " + std::to_string(c) + " missing from train set");
    }
}

Graph load_dataset(const std::filesystem::path& dir) {
    Graph g;

    const auto meta_path = dir / "meta.json";
    {
        std::ifstream in = open_or_fail(meta_path);
        json meta;
        try {
            in >> meta;
        } catch (const json::exception& e) {
            throw Error(meta_path.string() + ": invalid JSON: " + e.what());
        }
        try {
            g.n = meta.at("n").get<int>();
            g.f = meta.at("f").get<int>();
            g.num_classes = meta.at("C").get<int>();
            g.name = meta.value("name", dir.filename().string());
        } catch (const json::exception& e) {
            throw Error(meta_path.string() + ": bad meta fields: " + e.what());
        }
        if (g.n <= 0 || g.f <= 0 || g.num_classes <= 0)
            throw Error(meta_path.string() + ": n, f, C must be positive");
    }

    // edges: symmetrize, deduplicate, drop self-loops
    const auto edges_path = dir / "edges.tsv";
    {
        std::ifstream in = open_or_fail(edges_path);
        std::set<std::pair<int, int>> pairs;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            auto toks = split_tabs(line);
            if (toks.size() != 2) fail_at(edges_path, lineno, "expected 'u<TAB>v'");
            long u = parse_int(toks[0], edges_path, lineno);
            long v = parse_int(toks[1], edges_path, lineno);
            if (u < 0 || u >= g.n || v < 0 || v >= g.n)
                fail_at(edges_path, lineno, "node id out of range [0," + std::to_string(g.n) + ")");
            if (u == v) continue;
            pairs.emplace(std::min<long>(u, v), std::max<long>(u, v));
        }
        g.adjacency = adjacency_from_pairs(g.n, pairs);
    }

    const auto feat_path = dir / "features.tsv";
    {
        std::ifstream in = open_or_fail(feat_path);
        g.features = Matrix(g.n, g.f);
        std::string line;
        std::size_t lineno = 0;
        int r = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() && r == g.n) continue;
            if (r >= g.n) fail_at(feat_path, lineno, "more feature rows than n");
            auto toks = split_tabs(line);
            if (static_cast<int>(toks.size()) != g.f)
                fail_at(feat_path, lineno,
                        "expected " + std::to_string(g.f) + " values, got " + std::to_string(toks.size()));
            for (int c = 0; c < g.f; ++c) {
                double v = parse_double(toks[c], feat_path, lineno);
                if (!std::isfinite(v)) fail_at(feat_path, lineno, "non-finite feature value");
                g.features(r, c) = v;
            }
            ++r;
        }
        if (r != g.n) throw Error(feat_path.string() + ": expected " + std::to_string(g.n) + " rows, got " + std::to_string(r));
    }

    const auto labels_path = dir / "labels.tsv";
    {
        std::ifstream in = open_or_fail(labels_path);
        g.labels.reserve(g.n);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() && static_cast<int>(g.labels.size()) == g.n) continue;
            if (static_cast<int>(g.labels.size()) >= g.n) fail_at(labels_path, lineno, "more labels than n");
            long y = parse_int(line, labels_path, lineno);
            if (y < 0 || y >= g.num_classes)
                fail_at(labels_path, lineno,
                        "label " + std::to_string(y) + " out of range [0," + std::to_string(g.num_classes) + ")");
            g.labels.push_back(static_cast<int>(y));
        }
        if (static_cast<int>(g.labels.size()) != g.n)
            throw Error(labels_path.string() + ": expected " + std::to_string(g.n) + " labels");
    }

    const auto splits_path = dir / "splits.json";
    if (std::filesystem::exists(splits_path)) {
        std::ifstream in = open_or_fail(splits_path);
        json arr;
        try {
            in >> arr;
        } catch (const json::exception& e) {
            throw Error(splits_path.string() + ": invalid JSON: " + e.what());
        }
        if (!arr.is_array()) throw Error(splits_path.string() + ": expected a JSON array");
        for (const auto& item : arr) {
            Split s;
            try {
                s.seed = item.at("seed").get<std::uint64_t>();
                s.train = item.at("train").get<std::vector<int>>();
                s.validation = item.at("val").get<std::vector<int>>();
                s.test = item.at("test").get<std::vector<int>>();
            } catch (const json::exception& e) {
                throw Error(splits_path.string() + ": bad split entry: " + e.what());
            }
            g.splits.push_back(std::move(s));
        }
    }

    g.validate();
    return g;
}

void save_dataset(const Graph& g, const std::filesystem::path& dir) {
    g.validate();
    std::filesystem::create_directories(dir);

    {
        json meta = {{"n", g.n}, {"f", g.f}, {"C", g.num_classes}, {"name", g.name}};
        std::ofstream out(dir / "meta.json");
        if (!out) throw Error("cannot write " + (dir / "meta.json").string());
        out << meta.dump(2) << "\n";
    }
    {
        std::ofstream out(dir / "edges.tsv");
        if (!out) throw Error("cannot write " + (dir / "edges.tsv").string());
        for (int r = 0; r < g.adjacency.rows; ++r)
            for (std::int64_t e = g.adjacency.row_ptr[r]; e < g.adjacency.row_ptr[r + 1]; ++e)
                if (g.adjacency.col_idx[e] > r)
                    out << r << '\t' << g.adjacency.col_idx[e] << '\n';
    }
    {
        // %.17g keeps the on-disk form a faithful double round-trip
        std::ofstream out(dir / "features.tsv");
        if (!out) throw Error("cannot write " + (dir / "features.tsv").string());
        char buf[64];
        for (int r = 0; r < g.n; ++r) {
            const double* row = g.features.row(r);
            for (int c = 0; c < g.f; ++c) {
                std::snprintf(buf, sizeof(buf), "%.17g", row[c]);
                if (c) out << '\t';
                out << buf;
            }
            out << '\n';
        }
    }
    {
        std::ofstream out(dir / "labels.tsv");
        if (!out) throw Error("cannot write " + (dir / "labels.tsv").string());
        for (int y : g.labels) out << y << '\n';
    }
    if (!g.splits.empty()) save_splits_json(g.splits, dir / "splits.json");
}

void save_splits_json(const std::vector<Split>& splits, const std::filesystem::path& path) {
    json arr = json::array();
    for (const Split& s : splits) {
        arr.push_back({{"seed", s.seed},
                       {"train", s.train},
                       {"val", s.validation},
                       {"test", s.test}});
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << arr.dump() << "\n";
}

double homophily_ratio(const Graph& g) {
    std::int64_t edges = 0, intra = 0;
    for (int r = 0; r < g.adjacency.rows; ++r) {
        for (std::int64_t e = g.adjacency.row_ptr[r]; e < g.adjacency.row_ptr[r + 1]; ++e) {
            const int c = g.adjacency.col_idx[e];
            if (c <= r) continue;  // count each undirected edge once
            ++edges;
            if (g.labels[r] == g.labels[c]) ++intra;
        }
    }
    if (edges == 0) throw Error("homophily_ratio: graph has no edges");
    return static_cast<double>(intra) / static_cast<double>(edges);
}

SparseMatrix k_order_structure(const SparseMatrix& adjacency, int k) {
    if (k < 1) throw Error("k_order_structure: k must be >= 1");
    adjacency.validate();
    SparseMatrix acc = adjacency;
    SparseMatrix walk = adjacency;
    for (int step = 2; step <= k; ++step) {
        walk = binary_spgemm(walk, adjacency);
        acc = binary_union(acc, walk);
    }
    return drop_diagonal(acc);
}

std::vector<Split> generate_splits(const Graph& g, int count, std::uint64_t seed,
                                   int min_class_size) {
    if (count < 1) throw Error("generate_splits: count must be >= 1");
    if (min_class_size < 1) throw Error("generate_splits: min_class_size must be >= 1");
    std::vector<std::vector<int>> by_class(g.num_classes);
    for (int i = 0; i < g.n; ++i) by_class[g.labels[i]].push_back(i);
    for (int c = 0; c < g.num_classes; ++c)
        if (static_cast<int>(by_class[c].size()) < min_class_size)
            throw Error("generate_splits: class " + std::to_string(c) + " has fewer than " +
                        std::to_string(min_class_size) + " nodes");

    std::vector<Split> splits;
    splits.reserve(count);
    for (int s = 0; s < count; ++s) {
        Split sp;
        sp.seed = seed_mix(seed, static_cast<std::uint64_t>(s));
        Rng rng(sp.seed);
        for (int c = 0; c < g.num_classes; ++c) {
            std::vector<int> ids = by_class[c];
            shuffle(ids, rng);
            const auto nc = static_cast<std::int64_t>(ids.size());
            std::int64_t n_train = std::max<std::int64_t>(1, static_cast<std::int64_t>(0.48 * nc));
            std::int64_t n_val = static_cast<std::int64_t>(0.32 * nc);
            if (n_train + n_val > nc) n_val = nc - n_train;
            for (std::int64_t i = 0; i < nc; ++i) {
                if (i < n_train) sp.train.push_back(ids[i]);
                else if (i < n_train + n_val) sp.validation.push_back(ids[i]);
                else sp.test.push_back(ids[i]);
            }
        }
        std::sort(sp.train.begin(), sp.train.end());
        std::sort(sp.validation.begin(), sp.validation.end());
        std::sort(sp.test.begin(), sp.test.end());
        splits.push_back(std::move(sp));
    }
    return splits;
}

Graph generate_synthetic(const SyntheticConfig& cfg) {
    if (cfg.num_classes < 1) throw Error("generate_synthetic: need at least one class");
    if (cfg.n < cfg.num_classes * 3) throw Error("generate_synthetic: need n >= 3 per class");
    if (cfg.h_target < 0.0 || cfg.h_target > 1.0) throw Error("generate_synthetic: h_target outside [0,1]");
    if (cfg.feature_dim < 1) throw Error("generate_synthetic: feature_dim must be >= 1");
    if (cfg.mean_degree <= 0.0 || cfg.mean_degree >= cfg.n)
        throw Error("generate_synthetic: mean_degree must lie in (0, n)");

    const int n = cfg.n, C = cfg.num_classes;
    Graph g;
    g.name = "synthetic";
    g.n = n;
    g.f = cfg.feature_dim;
    g.num_classes = C;

    // balanced contiguous class blocks
    g.labels.resize(n);
    for (int i = 0; i < n; ++i)
        g.labels[i] = static_cast<int>((static_cast<std::int64_t>(i) * C) / n);

    std::vector<std::int64_t> class_size(C, 0);
    for (int y : g.labels) ++class_size[y];

    // expected edge budget M = n * mean_degree / 2 divided between the two
    // rates so that E[intra] / E[total] = h_target
    double pairs_intra = 0.0;
    for (int c = 0; c < C; ++c)
        pairs_intra += 0.5 * static_cast<double>(class_size[c]) * (class_size[c] - 1);
    const double pairs_total = 0.5 * static_cast<double>(n) * (n - 1);
    const double pairs_inter = pairs_total - pairs_intra;
    const double budget = 0.5 * n * cfg.mean_degree;
    const double p_in = pairs_intra > 0.0 ? cfg.h_target * budget / pairs_intra : 0.0;
    const double p_out = pairs_inter > 0.0 ? (1.0 - cfg.h_target) * budget / pairs_inter : 0.0;
    if (p_in > 1.0 || p_out > 1.0)
        throw Error("generate_synthetic: infeasible mean_degree for the requested homophily");

    Rng rng(seed_mix(cfg.seed, 0xedce5));
    std::set<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double p = (g.labels[i] == g.labels[j]) ? p_in : p_out;
            if (p > 0.0 && rng.next_double() < p) pairs.emplace(i, j);
        }
    }
    g.adjacency = adjacency_from_pairs(n, pairs);

    // class means: feature_signal-scaled random unit directions
    Rng frng(seed_mix(cfg.seed, 0xfea7));
    Matrix means(C, cfg.feature_dim);
    for (int c = 0; c < C; ++c) {
        double norm2 = 0.0;
        for (int d = 0; d < cfg.feature_dim; ++d) {
            means(c, d) = frng.next_normal();
            norm2 += means(c, d) * means(c, d);
        }
        const double scale = norm2 > 0.0 ? cfg.feature_signal / std::sqrt(norm2) : 0.0;
        for (int d = 0; d < cfg.feature_dim; ++d) means(c, d) *= scale;
    }
    g.features = Matrix(n, cfg.feature_dim);
    for (int i = 0; i < n; ++i)
        for (int d = 0; d < cfg.feature_dim; ++d)
            g.features(i, d) = means(g.labels[i], d) + frng.next_normal();

    g.validate();
    return g;
}

}  // namespace hoggcn

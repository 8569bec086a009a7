// Gradient-boosted decision trees with a multiclass softmax objective,
// plus greedy selective axis integration.
//
// Per round and class, a regression tree is fit to the first and second
// order gradients of the log-loss with exact greedy splits over presorted
// feature columns. Splits require both children to reach the minimum
// hessian weight and a positive gain after the gamma penalty; leaf weights
// are -G/(H+lambda), shrunk by the learning rate. Each tree sees a seeded
// random feature subsample.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "toneleak/features.hpp"
#include "toneleak/rng.hpp"

namespace toneleak::classifier {

struct GbtHyperparams {
    double learning_rate = 0.20;
    int max_depth = 5;
    double min_child_weight = 3.0;
    double gamma = 0.1;
    double colsample_bytree = 0.5;
    int n_rounds = 50;
    std::uint64_t seed = 0;
    double lambda_l2 = 1.0;

    void validate() const {
        if (!(learning_rate > 0.0 && learning_rate <= 1.0))
            throw std::invalid_argument("GbtHyperparams: learning_rate must be in (0,1]");
        if (max_depth < 1) throw std::invalid_argument("GbtHyperparams: max_depth must be >= 1");
        if (!(colsample_bytree > 0.0 && colsample_bytree <= 1.0))
            throw std::invalid_argument("GbtHyperparams: colsample_bytree must be in (0,1]");
        if (n_rounds < 0) throw std::invalid_argument("GbtHyperparams: n_rounds must be >= 0");
    }
};

struct FeatureMatrix {
    std::size_t n = 0, d = 0;
    std::vector<double> x;  // row-major, n*d
    std::vector<int> y;     // class labels, size n (may be empty for predict-only data)

    const double* row(std::size_t i) const { return x.data() + i * d; }

    static FeatureMatrix from_vectors(const std::vector<features::FeatureVector>& fvs) {
        FeatureMatrix m;
        if (fvs.empty()) return m;
        m.n = fvs.size();
        m.d = fvs.front().values.size();
        m.x.reserve(m.n * m.d);
        for (const auto& fv : fvs) {
            if (fv.values.size() != m.d)
                throw std::invalid_argument("FeatureMatrix: inconsistent vector lengths");
            m.x.insert(m.x.end(), fv.values.begin(), fv.values.end());
            m.y.push_back(fv.label);
        }
        return m;
    }

    FeatureMatrix select_rows(const std::vector<std::size_t>& rows) const {
        FeatureMatrix m;
        m.n = rows.size();
        m.d = d;
        m.x.reserve(m.n * d);
        for (std::size_t r : rows) {
            m.x.insert(m.x.end(), x.begin() + static_cast<std::ptrdiff_t>(r * d),
                       x.begin() + static_cast<std::ptrdiff_t>((r + 1) * d));
            if (!y.empty()) m.y.push_back(y[r]);
        }
        return m;
    }

    // Column-concatenate matrices with identical rows/labels.
    static FeatureMatrix hconcat(const std::vector<const FeatureMatrix*>& parts) {
        FeatureMatrix m;
        if (parts.empty()) return m;
        m.n = parts.front()->n;
        m.y = parts.front()->y;
        for (const auto* p : parts) {
            if (p->n != m.n) throw std::invalid_argument("hconcat: row count mismatch");
            m.d += p->d;
        }
        m.x.resize(m.n * m.d);
        std::size_t col0 = 0;
        for (const auto* p : parts) {
            for (std::size_t i = 0; i < m.n; ++i)
                std::copy(p->row(i), p->row(i) + p->d, m.x.begin() + static_cast<std::ptrdiff_t>(i * m.d + col0));
            col0 += p->d;
        }
        return m;
    }
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    double value = 0.0;  // leaf weight, already learning-rate scaled
};

struct Tree {
    std::vector<TreeNode> nodes;

    double predict(const double* x) const {
        int i = 0;
        while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
            const auto& nd = nodes[static_cast<std::size_t>(i)];
            i = x[nd.feature] < nd.threshold ? nd.left : nd.right;
        }
        return nodes[static_cast<std::size_t>(i)].value;
    }
};

struct TreeEnsembleModel {
    int n_classes = 16;
    std::size_t feature_count = 0;
    GbtHyperparams hp;
    std::vector<std::vector<Tree>> rounds;  // rounds[r][class]
    std::vector<double> train_logloss;      // per round, evaluated before the round
    std::vector<int> axes_used;             // metadata, empty when not axis-specific

    std::vector<double> scores(const double* x) const {
        std::vector<double> s(static_cast<std::size_t>(n_classes), 0.0);
        for (const auto& round : rounds)
            for (int c = 0; c < n_classes; ++c) s[static_cast<std::size_t>(c)] += round[static_cast<std::size_t>(c)].predict(x);
        return s;
    }

    std::vector<double> predict_proba(const double* x) const {
        auto s = scores(x);
        const double mx = *std::max_element(s.begin(), s.end());
        double z = 0.0;
        for (auto& v : s) {
            v = std::exp(v - mx);
            z += v;
        }
        for (auto& v : s) v /= z;
        return s;
    }

    int predict(const double* x) const {
        const auto s = scores(x);
        int best = 0;
        for (int c = 1; c < n_classes; ++c)
            if (s[static_cast<std::size_t>(c)] > s[static_cast<std::size_t>(best)]) best = c;
        return best;
    }

    int predict_vec(const std::vector<double>& x) const {
        if (x.size() != feature_count)
            throw std::invalid_argument("predict: feature length mismatch");
        return predict(x.data());
    }
};

namespace detail {

// One boosted regression tree on (g, h), exact greedy splits.
inline Tree build_tree(const FeatureMatrix& X, const std::vector<std::vector<std::uint32_t>>& sorted_cols,
                       const std::vector<double>& g, const std::vector<double>& h,
                       const std::vector<int>& feats, const GbtHyperparams& hp,
                       std::vector<int>& node_of /* scratch, size n */) {
    const std::size_t n = X.n;
    Tree tree;
    tree.nodes.push_back({});
    std::fill(node_of.begin(), node_of.end(), 0);
    std::vector<int> active = {0};

    struct ScanState {
        double gl = 0.0, hl = 0.0, last = 0.0;
        std::size_t count = 0;
    };
    struct BestSplit {
        double gain = 0.0, threshold = 0.0;
        int feature = -1;
    };

    for (int depth = 0; depth < hp.max_depth && !active.empty(); ++depth) {
        const std::size_t n_nodes = tree.nodes.size();
        std::vector<double> gt(n_nodes, 0.0), ht(n_nodes, 0.0);
        std::vector<char> is_active(n_nodes, 0);
        for (int a : active) is_active[static_cast<std::size_t>(a)] = 1;
        for (std::size_t i = 0; i < n; ++i) {
            const auto nd = static_cast<std::size_t>(node_of[i]);
            gt[nd] += g[i];
            ht[nd] += h[i];
        }

        std::vector<BestSplit> best(n_nodes);
        std::vector<ScanState> st(n_nodes);
        for (int f : feats) {
            for (auto& s : st) s = ScanState{};
            for (std::uint32_t idx : sorted_cols[static_cast<std::size_t>(f)]) {
                const auto nd = static_cast<std::size_t>(node_of[idx]);
                if (!is_active[nd]) continue;
                auto& s = st[nd];
                const double v = X.x[idx * X.d + static_cast<std::size_t>(f)];
                if (s.count > 0 && v > s.last) {
                    const double hl = s.hl, hr = ht[nd] - s.hl;
                    if (hl >= hp.min_child_weight && hr >= hp.min_child_weight) {
                        const double gl = s.gl, gr = gt[nd] - s.gl;
                        const double gain = 0.5 * (gl * gl / (hl + hp.lambda_l2) +
                                                   gr * gr / (hr + hp.lambda_l2) -
                                                   gt[nd] * gt[nd] / (ht[nd] + hp.lambda_l2)) -
                                            hp.gamma;
                        if (gain > best[nd].gain) best[nd] = {gain, (s.last + v) / 2.0, f};
                    }
                }
                s.gl += g[idx];
                s.hl += h[idx];
                s.last = v;
                ++s.count;
            }
        }

        std::vector<int> next_active;
        for (int a : active) {
            const auto& b = best[static_cast<std::size_t>(a)];
            if (b.feature < 0 || b.gain <= 0.0) continue;
            auto& nd = tree.nodes[static_cast<std::size_t>(a)];
            nd.feature = b.feature;
            nd.threshold = b.threshold;
            nd.left = static_cast<int>(tree.nodes.size());
            nd.right = nd.left + 1;
            tree.nodes.push_back({});
            tree.nodes.push_back({});
            next_active.push_back(nd.left);
            next_active.push_back(nd.right);
        }
        if (next_active.empty()) break;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& nd = tree.nodes[static_cast<std::size_t>(node_of[i])];
            if (nd.feature >= 0)
                node_of[i] = X.x[i * X.d + static_cast<std::size_t>(nd.feature)] < nd.threshold ? nd.left : nd.right;
        }
        active = std::move(next_active);
    }

    // Leaf weights from the final partition.
    const std::size_t n_nodes = tree.nodes.size();
    std::vector<double> gt(n_nodes, 0.0), ht(n_nodes, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto nd = static_cast<std::size_t>(node_of[i]);
        gt[nd] += g[i];
        ht[nd] += h[i];
    }
    for (std::size_t i = 0; i < n_nodes; ++i)
        if (tree.nodes[i].feature < 0)
            tree.nodes[i].value = -hp.learning_rate * gt[i] / (ht[i] + hp.lambda_l2);
    return tree;
}

}  // namespace detail

inline TreeEnsembleModel train(const FeatureMatrix& X, const GbtHyperparams& hp, int n_classes = 16) {
    hp.validate();
    if (X.n == 0 || X.y.empty()) throw std::invalid_argument("train: empty training set");
    {
        std::vector<char> present(static_cast<std::size_t>(n_classes), 0);
        for (int label : X.y) {
            if (label < 0 || label >= n_classes) throw std::invalid_argument("train: label out of range");
            present[static_cast<std::size_t>(label)] = 1;
        }
        if (std::count(present.begin(), present.end(), 1) < 2)
            throw std::invalid_argument("train: need at least 2 classes present");
    }

    TreeEnsembleModel model;
    model.n_classes = n_classes;
    model.feature_count = X.d;
    model.hp = hp;

    // Presort every column once; ties broken by sample index for determinism.
    std::vector<std::vector<std::uint32_t>> sorted_cols(X.d);
    for (std::size_t f = 0; f < X.d; ++f) {
        auto& col = sorted_cols[f];
        col.resize(X.n);
        std::iota(col.begin(), col.end(), 0u);
        std::sort(col.begin(), col.end(), [&](std::uint32_t a, std::uint32_t b) {
            const double va = X.x[a * X.d + f], vb = X.x[b * X.d + f];
            return va < vb || (va == vb && a < b);
        });
    }

    const std::size_t K = static_cast<std::size_t>(n_classes);
    std::vector<double> scores(X.n * K, 0.0);
    std::vector<double> probs(X.n * K, 0.0);
    std::vector<double> g(X.n), h(X.n);
    std::vector<int> node_of(X.n);
    const auto n_sampled = static_cast<std::size_t>(
        std::ceil(hp.colsample_bytree * static_cast<double>(X.d)));

    for (int round = 0; round < hp.n_rounds; ++round) {
        double logloss = 0.0;
        for (std::size_t i = 0; i < X.n; ++i) {
            const double* s = scores.data() + i * K;
            const double mx = *std::max_element(s, s + K);
            double z = 0.0;
            for (std::size_t c = 0; c < K; ++c) {
                probs[i * K + c] = std::exp(s[c] - mx);
                z += probs[i * K + c];
            }
            for (std::size_t c = 0; c < K; ++c) probs[i * K + c] /= z;
            logloss -= std::log(std::max(probs[i * K + static_cast<std::size_t>(X.y[i])], 1e-300));
        }
        logloss /= static_cast<double>(X.n);
        if (!model.train_logloss.empty() && logloss > model.train_logloss.back() + 1e-12)
            throw std::logic_error("train: log-loss increased between boosting rounds");
        model.train_logloss.push_back(logloss);

        model.rounds.emplace_back();
        for (int c = 0; c < n_classes; ++c) {
            for (std::size_t i = 0; i < X.n; ++i) {
                const double p = probs[i * K + static_cast<std::size_t>(c)];
                g[i] = p - (X.y[i] == c ? 1.0 : 0.0);
                h[i] = std::max(p * (1.0 - p), 1e-16);
            }
            // Seeded per-tree feature subsample.
            Rng rng(derive_seed(hp.seed, static_cast<std::uint64_t>(round) * K + static_cast<std::uint64_t>(c)));
            std::vector<int> feats(X.d);
            std::iota(feats.begin(), feats.end(), 0);
            rng.shuffle(feats);
            feats.resize(n_sampled);

            auto tree = detail::build_tree(X, sorted_cols, g, h, feats, hp, node_of);
            // node_of now holds each sample's leaf; update scores directly.
            for (std::size_t i = 0; i < X.n; ++i)
                scores[i * K + static_cast<std::size_t>(c)] +=
                    tree.nodes[static_cast<std::size_t>(node_of[i])].value;
            model.rounds.back().push_back(std::move(tree));
        }
    }
    return model;
}

struct EvalReport {
    double accuracy = 0.0;
    std::vector<std::vector<int>> confusion;  // [true][predicted]
    std::vector<double> per_class_accuracy;
};

inline EvalReport evaluate(const TreeEnsembleModel& model, const FeatureMatrix& test) {
    if (test.n == 0) throw std::invalid_argument("evaluate: empty test set");
    EvalReport rep;
    const auto K = static_cast<std::size_t>(model.n_classes);
    rep.confusion.assign(K, std::vector<int>(K, 0));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.n; ++i) {
        const int pred = model.predict(test.row(i));
        const int truth = test.y[i];
        rep.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)]++;
        if (pred == truth) ++correct;
    }
    rep.accuracy = static_cast<double>(correct) / static_cast<double>(test.n);
    rep.per_class_accuracy.resize(K, 0.0);
    for (std::size_t c = 0; c < K; ++c) {
        const int total = std::accumulate(rep.confusion[c].begin(), rep.confusion[c].end(), 0);
        if (total > 0) rep.per_class_accuracy[c] = static_cast<double>(rep.confusion[c][c]) / total;
    }
    return rep;
}

struct AxisSelection {
    std::vector<int> ranked_axes;     // all 6 axes, best single-axis first
    std::vector<int> selected_axes;   // the winning combination, in rank order
    std::vector<std::pair<std::vector<int>, double>> candidates;  // combo -> validation accuracy
    double best_val_accuracy = 0.0;
};

// Stratified row split, val_fraction of each class to validation.
inline void stratified_split(const std::vector<int>& y, double val_fraction, std::uint64_t seed,
                             std::vector<std::size_t>& train_rows, std::vector<std::size_t>& val_rows) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
    Rng rng(derive_seed(seed, 0x59117ULL));
    for (auto& [cls, rows] : by_class) {
        rng.shuffle(rows);
        auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(rows.size())));
        n_val = std::max<std::size_t>(1, std::min(n_val, rows.size() - 1));
        for (std::size_t i = 0; i < rows.size(); ++i)
            (i < n_val ? val_rows : train_rows).push_back(rows[i]);
    }
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(val_rows.begin(), val_rows.end());
}

// Greedy selective axis integration: rank axes by single-axis validation
// accuracy, then grow cumulative top-k models; return the best of the 11
// candidates.
inline AxisSelection select_axes(const std::array<FeatureMatrix, 6>& per_axis, const GbtHyperparams& hp,
                                 std::uint64_t seed, int n_classes = 16) {
    const auto& y = per_axis[0].y;
    if (y.empty()) throw std::invalid_argument("select_axes: empty training data");
    std::vector<std::size_t> train_rows, val_rows;
    stratified_split(y, 0.25, seed, train_rows, val_rows);
    if (val_rows.empty()) throw std::invalid_argument("select_axes: empty validation split");

    auto val_accuracy = [&](const std::vector<int>& axes) {
        std::vector<const FeatureMatrix*> parts;
        for (int a : axes) parts.push_back(&per_axis[static_cast<std::size_t>(a)]);
        const auto full = FeatureMatrix::hconcat(parts);
        const auto model = train(full.select_rows(train_rows), hp, n_classes);
        return evaluate(model, full.select_rows(val_rows)).accuracy;
    };

    AxisSelection sel;
    std::array<double, 6> single_acc{};
    for (int a = 0; a < 6; ++a) {
        single_acc[static_cast<std::size_t>(a)] = val_accuracy({a});
        sel.candidates.push_back({{a}, single_acc[static_cast<std::size_t>(a)]});
    }
    sel.ranked_axes = {0, 1, 2, 3, 4, 5};
    std::stable_sort(sel.ranked_axes.begin(), sel.ranked_axes.end(), [&](int a, int b) {
        return single_acc[static_cast<std::size_t>(a)] > single_acc[static_cast<std::size_t>(b)];
    });

    for (std::size_t k = 2; k <= 6; ++k) {
        std::vector<int> combo(sel.ranked_axes.begin(), sel.ranked_axes.begin() + static_cast<std::ptrdiff_t>(k));
        sel.candidates.push_back({combo, val_accuracy(combo)});
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < sel.candidates.size(); ++i)
        if (sel.candidates[i].second > sel.candidates[best].second) best = i;
    sel.selected_axes = sel.candidates[best].first;
    sel.best_val_accuracy = sel.candidates[best].second;
    return sel;
}

// --- serialization ---

inline nlohmann::json model_to_json(const TreeEnsembleModel& model) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& round : model.rounds) {
        nlohmann::json jr = nlohmann::json::array();
        for (const auto& tree : round) {
            nlohmann::json jt = nlohmann::json::array();
            for (const auto& nd : tree.nodes)
                jt.push_back({{"f", nd.feature}, {"t", nd.threshold}, {"l", nd.left},
                              {"r", nd.right}, {"v", nd.value}});
            jr.push_back(jt);
        }
        trees.push_back(jr);
    }
    return {{"format_version", 1},
            {"n_classes", model.n_classes},
            {"feature_count", model.feature_count},
            {"axes_used", model.axes_used},
            {"hyperparams",
             {{"learning_rate", model.hp.learning_rate},
              {"max_depth", model.hp.max_depth},
              {"min_child_weight", model.hp.min_child_weight},
              {"gamma", model.hp.gamma},
              {"colsample_bytree", model.hp.colsample_bytree},
              {"n_rounds", model.hp.n_rounds},
              {"seed", model.hp.seed},
              {"lambda_l2", model.hp.lambda_l2}}},
            {"rounds", trees}};
}

inline TreeEnsembleModel model_from_json(const nlohmann::json& j) {
    if (j.at("format_version").get<int>() != 1)
        throw std::runtime_error("model_from_json: unsupported format version");
    TreeEnsembleModel m;
    m.n_classes = j.at("n_classes").get<int>();
    m.feature_count = j.at("feature_count").get<std::size_t>();
    m.axes_used = j.value("axes_used", std::vector<int>{});
    const auto& hp = j.at("hyperparams");
    m.hp.learning_rate = hp.at("learning_rate").get<double>();
    m.hp.max_depth = hp.at("max_depth").get<int>();
    m.hp.min_child_weight = hp.at("min_child_weight").get<double>();
    m.hp.gamma = hp.at("gamma").get<double>();
    m.hp.colsample_bytree = hp.at("colsample_bytree").get<double>();
    m.hp.n_rounds = hp.at("n_rounds").get<int>();
    m.hp.seed = hp.at("seed").get<std::uint64_t>();
    m.hp.lambda_l2 = hp.at("lambda_l2").get<double>();
    for (const auto& jr : j.at("rounds")) {
        std::vector<Tree> round;
        for (const auto& jt : jr) {
            Tree t;
            for (const auto& jn : jt)
                t.nodes.push_back({jn.at("f").get<int>(), jn.at("t").get<double>(),
                                   jn.at("l").get<int>(), jn.at("r").get<int>(),
                                   jn.at("v").get<double>()});
            round.push_back(std::move(t));
        }
        m.rounds.push_back(std::move(round));
    }
    return m;
}

}  // namespace toneleak::classifier

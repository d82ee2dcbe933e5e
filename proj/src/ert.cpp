#include "ctsev/classifiers.hpp"

#include <algorithm>
#include <array>

#include "ctsev/parallel.hpp"
#include "ctsev/rng.hpp"

namespace ctsev {

namespace {

std::array<int, 4> class_counts(const Dataset& data, const std::vector<int>& idx) {
    std::array<int, 4> c{};
    for (int i : idx) ++c[data.y[i] - 1];
    return c;
}

int majority_class(const std::array<int, 4>& counts) {
    int best = 0;
    for (int c = 1; c < 4; ++c)
        if (counts[c] > counts[best]) best = c;
    return best + 1;
}

double gini(const std::array<int, 4>& counts, int n) {
    if (n == 0) return 0.0;
    double g = 1.0;
    for (int c = 0; c < 4; ++c) {
        const double p = static_cast<double>(counts[c]) / n;
        g -= p * p;
    }
    return g;
}

struct TreeBuilder {
    const Dataset& data;
    const ErtParams& params;
    Rng rng;
    std::vector<TreeNode> nodes;

    int build(std::vector<int> idx) {
        const int n = static_cast<int>(idx.size());
        const auto counts = class_counts(data, idx);
        const bool pure = std::count(counts.begin(), counts.end(), 0) == 3;
        if (pure || n < params.min_samples_split) return make_leaf(counts);

        std::vector<int> usable;
        for (int f = 0; f < kFeatureDim; ++f) {
            double lo = data.X[idx[0]][f], hi = lo;
            for (int i : idx) {
                lo = std::min(lo, data.X[i][f]);
                hi = std::max(hi, data.X[i][f]);
            }
            if (hi > lo) usable.push_back(f);
        }
        if (usable.empty()) return make_leaf(counts);

        // Partial Fisher-Yates draw of k distinct candidate features.
        const int k = std::min(params.k_features, static_cast<int>(usable.size()));
        for (int i = 0; i < k; ++i) {
            const auto j = i + static_cast<int>(rng.below(usable.size() - i));
            std::swap(usable[i], usable[j]);
        }

        const double parent = gini(counts, n);
        int best_feature = -1;
        double best_threshold = 0.0, best_gain = 0.0;
        for (int i = 0; i < k; ++i) {
            const int f = usable[i];
            double lo = data.X[idx[0]][f], hi = lo;
            for (int s : idx) {
                lo = std::min(lo, data.X[s][f]);
                hi = std::max(hi, data.X[s][f]);
            }
            double cut = lo + rng.uniform() * (hi - lo);
            if (cut >= hi) cut = lo;
            std::array<int, 4> left_counts{};
            int n_left = 0;
            for (int s : idx)
                if (data.X[s][f] <= cut) {
                    ++left_counts[data.y[s] - 1];
                    ++n_left;
                }
            const int n_right = n - n_left;
            if (n_left == 0 || n_right == 0) continue;
            std::array<int, 4> right_counts{};
            for (int c = 0; c < 4; ++c) right_counts[c] = counts[c] - left_counts[c];
            const double gain = parent - (n_left * gini(left_counts, n_left) +
                                          n_right * gini(right_counts, n_right)) /
                                             n;
            if (best_feature < 0 || gain > best_gain) {
                best_feature = f;
                best_threshold = cut;
                best_gain = gain;
            }
        }
        if (best_feature < 0) return make_leaf(counts);

        std::vector<int> left_idx, right_idx;
        for (int s : idx)
            (data.X[s][best_feature] <= best_threshold ? left_idx : right_idx).push_back(s);
        idx.clear();
        idx.shrink_to_fit();

        const int node = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[node].feature = best_feature;
        nodes[node].threshold = best_threshold;
        const int left = build(std::move(left_idx));
        nodes[node].left = left;
        const int right = build(std::move(right_idx));
        nodes[node].right = right;
        return node;
    }

    int make_leaf(const std::array<int, 4>& counts) {
        const int node = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[node].leaf_class = majority_class(counts);
        return node;
    }
};

} // namespace

int ClassTree::predict(const FeatureVector& x) const {
    int node = 0;
    while (nodes[node].feature >= 0)
        node = x[nodes[node].feature] <= nodes[node].threshold ? nodes[node].left
                                                               : nodes[node].right;
    return nodes[node].leaf_class;
}

Prediction ErtModel::predict(const FeatureVector& x) const {
    std::array<int, 4> votes{};
    for (const auto& tree : trees) ++votes[tree.predict(x) - 1];
    Prediction p;
    int best = 0;
    for (int c = 1; c < 4; ++c)
        if (votes[c] > votes[best]) best = c;
    p.severity = best + 1;
    for (int c = 0; c < 4; ++c)
        p.scores[c] = static_cast<double>(votes[c]) / static_cast<double>(trees.size());
    return p;
}

std::unique_ptr<ErtModel> train_ert(const Dataset& data, const ErtParams& params, int threads) {
    data.validate();
    if (params.n_trees < 1) throw DataError("ErtParams: n_trees must be >= 1");
    if (params.k_features < 1 || params.k_features > kFeatureDim)
        throw DataError("ErtParams: k_features must be in 1..80");
    if (params.min_samples_split < 2)
        throw DataError("ErtParams: min_samples_split must be >= 2");

    auto model = std::make_unique<ErtModel>();
    model->trees.resize(static_cast<std::size_t>(params.n_trees));
    std::vector<int> all(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) all[i] = static_cast<int>(i);

    parallel_for(static_cast<std::size_t>(params.n_trees), threads, [&](std::size_t t) {
        TreeBuilder builder{data, params, Rng(params.seed, t), {}};
        builder.build(all);
        model->trees[t].nodes = std::move(builder.nodes);
    });
    return model;
}

void ErtModel::write_payload(BinaryWriter& out) const {
    out.u32(static_cast<std::uint32_t>(trees.size()));
    for (const auto& tree : trees) {
        out.u32(static_cast<std::uint32_t>(tree.nodes.size()));
        for (const auto& n : tree.nodes) {
            out.i32(n.feature);
            out.f64(n.threshold);
            out.i32(n.left);
            out.i32(n.right);
            out.i32(n.leaf_class);
        }
    }
}

std::unique_ptr<ErtModel> ErtModel::load_payload(BinaryReader& in) {
    auto model = std::make_unique<ErtModel>();
    model->trees.resize(in.u32());
    for (auto& tree : model->trees) {
        tree.nodes.resize(in.u32());
        for (auto& n : tree.nodes) {
            n.feature = in.i32();
            n.threshold = in.f64();
            n.left = in.i32();
            n.right = in.i32();
            n.leaf_class = in.i32();
            if (n.feature >= kFeatureDim || n.leaf_class < 1 || n.leaf_class > 4)
                throw DataError("corrupt model file: bad tree node");
        }
        if (tree.nodes.empty()) throw DataError("corrupt model file: empty tree");
    }
    return model;
}

} // namespace ctsev

#include "ctsev/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ctsev {

namespace {

struct RegTreeBuilder {
    const std::vector<FeatureVector>& X;
    const std::vector<double>& target;
    double scale; // learning rate baked into leaf values
    int max_depth;
    std::vector<RegNode> nodes;

    int build(std::vector<int> idx, int depth) {
        const int n = static_cast<int>(idx.size());
        double sum = 0.0;
        for (int i : idx) sum += target[i];

        if (depth >= max_depth || n < 2) return make_leaf(sum / n);

        int best_feature = -1;
        double best_threshold = 0.0, best_score = 0.0;
        std::vector<std::pair<double, int>> order(idx.size());
        for (int f = 0; f < kFeatureDim; ++f) {
            for (std::size_t i = 0; i < idx.size(); ++i)
                order[i] = {X[idx[i]][f], idx[i]};
            std::sort(order.begin(), order.end());
            double left_sum = 0.0;
            for (int i = 1; i < n; ++i) {
                left_sum += target[order[i - 1].second];
                if (order[i].first <= order[i - 1].first) continue;
                const double right_sum = sum - left_sum;
                const double score = left_sum * left_sum / i +
                                     right_sum * right_sum / (n - i);
                if (best_feature < 0 || score > best_score) {
                    double t = order[i - 1].first +
                               (order[i].first - order[i - 1].first) / 2.0;
                    if (t >= order[i].first) t = order[i - 1].first;
                    best_feature = f;
                    best_threshold = t;
                    best_score = score;
                }
            }
        }
        if (best_feature < 0) return make_leaf(sum / n);

        std::vector<int> left_idx, right_idx;
        for (int s : idx)
            (X[s][best_feature] <= best_threshold ? left_idx : right_idx).push_back(s);
        idx.clear();
        idx.shrink_to_fit();

        const int node = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[node].feature = best_feature;
        nodes[node].threshold = best_threshold;
        const int left = build(std::move(left_idx), depth + 1);
        nodes[node].left = left;
        const int right = build(std::move(right_idx), depth + 1);
        nodes[node].right = right;
        return node;
    }

    int make_leaf(double mean) {
        const int node = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[node].value = scale * mean;
        return node;
    }
};

void softmax_row(const std::array<double, 4>& f, std::array<double, 4>& p) {
    const double m = *std::max_element(f.begin(), f.end());
    double z = 0.0;
    for (int c = 0; c < 4; ++c) {
        p[c] = std::exp(f[c] - m);
        z += p[c];
    }
    for (int c = 0; c < 4; ++c) p[c] /= z;
}

} // namespace

double RegTree::predict(const FeatureVector& x) const {
    int node = 0;
    while (nodes[node].feature >= 0)
        node = x[nodes[node].feature] <= nodes[node].threshold ? nodes[node].left
                                                               : nodes[node].right;
    return nodes[node].value;
}

std::array<double, 4> GboostModel::raw_scores(const FeatureVector& x) const {
    std::array<double, 4> f{};
    for (const auto& round : rounds)
        for (int c = 0; c < 4; ++c) f[c] += round[c].predict(x);
    return f;
}

Prediction GboostModel::predict(const FeatureVector& x) const {
    Prediction p;
    p.probabilistic = true;
    softmax_row(raw_scores(x), p.scores);
    int best = 0;
    for (int c = 1; c < 4; ++c)
        if (p.scores[c] > p.scores[best]) best = c;
    p.severity = best + 1;
    return p;
}

std::unique_ptr<GboostModel> train_gboost(const Dataset& data, const GbParams& params) {
    data.validate();
    params.validate();

    const std::size_t n = data.size();
    auto model = std::make_unique<GboostModel>();
    std::vector<std::array<double, 4>> F(n, {0.0, 0.0, 0.0, 0.0});
    std::vector<std::array<double, 4>> P(n);
    std::vector<double> residual(n);
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);

    const auto mean_cross_entropy = [&] {
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            softmax_row(F[i], P[i]);
            loss -= std::log(std::max(P[i][data.y[i] - 1], 1e-300));
        }
        return loss / static_cast<double>(n);
    };

    model->loss_trace_.push_back(mean_cross_entropy());
    for (int round = 0; round < params.n_rounds; ++round) {
        model->rounds.emplace_back();
        auto& trees = model->rounds.back();
        for (int c = 0; c < 4; ++c) {
            for (std::size_t i = 0; i < n; ++i)
                residual[i] = (data.y[i] - 1 == c ? 1.0 : 0.0) - P[i][c];
            RegTreeBuilder builder{data.X, residual, params.learning_rate,
                                   params.max_depth, {}};
            builder.build(all, 0);
            trees[c].nodes = std::move(builder.nodes);
        }
        for (std::size_t i = 0; i < n; ++i)
            for (int c = 0; c < 4; ++c) F[i][c] += trees[c].predict(data.X[i]);
        model->loss_trace_.push_back(mean_cross_entropy());
    }
    return model;
}

void GboostModel::write_payload(BinaryWriter& out) const {
    out.u32(static_cast<std::uint32_t>(rounds.size()));
    for (const auto& round : rounds)
        for (const auto& tree : round) {
            out.u32(static_cast<std::uint32_t>(tree.nodes.size()));
            for (const auto& node : tree.nodes) {
                out.i32(node.feature);
                out.f64(node.threshold);
                out.i32(node.left);
                out.i32(node.right);
                out.f64(node.value);
            }
        }
}

std::unique_ptr<GboostModel> GboostModel::load_payload(BinaryReader& in) {
    auto model = std::make_unique<GboostModel>();
    model->rounds.resize(in.u32());
    for (auto& round : model->rounds)
        for (auto& tree : round) {
            tree.nodes.resize(in.u32());
            for (auto& node : tree.nodes) {
                node.feature = in.i32();
                node.threshold = in.f64();
                node.left = in.i32();
                node.right = in.i32();
                node.value = in.f64();
                if (node.feature >= kFeatureDim)
                    throw DataError("corrupt model file: bad tree node");
            }
            if (tree.nodes.empty()) throw DataError("corrupt model file: empty tree");
        }
    return model;
}

} // namespace ctsev

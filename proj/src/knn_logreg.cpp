#include "ctsev/classifiers.hpp"

#include <algorithm>
#include <cmath>

namespace ctsev {

namespace {

double squared_distance(const FeatureVector& a, const FeatureVector& b) {
    double d2 = 0.0;
    for (int i = 0; i < kFeatureDim; ++i) {
        const double d = a[i] - b[i];
        d2 += d * d;
    }
    return d2;
}

} // namespace

Prediction KnnModel::predict(const FeatureVector& x) const {
    std::vector<std::pair<double, int>> dist(X.size());
    for (std::size_t i = 0; i < X.size(); ++i)
        dist[i] = {squared_distance(X[i], x), static_cast<int>(i)};
    std::sort(dist.begin(), dist.end());

    std::array<int, 4> votes{};
    for (int i = 0; i < k; ++i) ++votes[y[dist[i].second] - 1];
    int best = 0;
    for (int c = 1; c < 4; ++c)
        if (votes[c] > votes[best]) best = c;

    Prediction p;
    p.severity = best + 1;
    for (int c = 0; c < 4; ++c)
        p.scores[c] = static_cast<double>(votes[c]) / static_cast<double>(k);
    return p;
}

std::unique_ptr<KnnModel> train_knn(const Dataset& data, const KnnParams& params) {
    data.validate();
    if (params.k < 1 || static_cast<std::size_t>(params.k) > data.size())
        throw DataError("KnnParams: k must be in 1..|X|");
    auto model = std::make_unique<KnnModel>();
    model->k = params.k;
    model->X = data.X;
    model->y = data.y;
    return model;
}

void KnnModel::write_payload(BinaryWriter& out) const {
    out.i32(k);
    out.u32(static_cast<std::uint32_t>(X.size()));
    for (std::size_t i = 0; i < X.size(); ++i) {
        for (double v : X[i]) out.f64(v);
        out.i32(y[i]);
    }
}

std::unique_ptr<KnnModel> KnnModel::load_payload(BinaryReader& in) {
    auto model = std::make_unique<KnnModel>();
    model->k = in.i32();
    const std::uint32_t n = in.u32();
    model->X.resize(n);
    model->y.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        for (double& v : model->X[i]) v = in.f64();
        model->y[i] = in.i32();
        if (model->y[i] < 1 || model->y[i] > 4)
            throw DataError("corrupt model file: bad label");
    }
    if (model->k < 1 || static_cast<std::uint32_t>(model->k) > n)
        throw DataError("corrupt model file: bad k");
    return model;
}

// ---------------------------------------------------------------------------

namespace {

std::array<double, 4> logreg_logits(const std::vector<double>& W, const FeatureVector& x) {
    std::array<double, 4> f{};
    for (int c = 0; c < 4; ++c) {
        const double* w = &W[static_cast<std::size_t>(c) * (kFeatureDim + 1)];
        double z = w[kFeatureDim];
        for (int j = 0; j < kFeatureDim; ++j) z += w[j] * x[j];
        f[c] = z;
    }
    return f;
}

std::array<double, 4> softmax4(std::array<double, 4> f) {
    const double m = *std::max_element(f.begin(), f.end());
    double z = 0.0;
    for (int c = 0; c < 4; ++c) {
        f[c] = std::exp(f[c] - m);
        z += f[c];
    }
    for (int c = 0; c < 4; ++c) f[c] /= z;
    return f;
}

} // namespace

double logreg_loss(const std::vector<double>& W, const Dataset& data) {
    double loss = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto p = softmax4(logreg_logits(W, data.X[i]));
        loss -= std::log(std::max(p[data.y[i] - 1], 1e-300));
    }
    return loss / static_cast<double>(data.size());
}

std::vector<double> logreg_gradient(const std::vector<double>& W, const Dataset& data) {
    std::vector<double> grad(W.size(), 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto p = softmax4(logreg_logits(W, data.X[i]));
        for (int c = 0; c < 4; ++c) {
            const double delta = p[c] - (data.y[i] - 1 == c ? 1.0 : 0.0);
            double* g = &grad[static_cast<std::size_t>(c) * (kFeatureDim + 1)];
            for (int j = 0; j < kFeatureDim; ++j) g[j] += delta * data.X[i][j];
            g[kFeatureDim] += delta;
        }
    }
    for (double& g : grad) g /= static_cast<double>(data.size());
    return grad;
}

Prediction LogregModel::predict(const FeatureVector& x) const {
    Prediction p;
    p.probabilistic = true;
    p.scores = softmax4(logreg_logits(W, x));
    int best = 0;
    for (int c = 1; c < 4; ++c)
        if (p.scores[c] > p.scores[best]) best = c;
    p.severity = best + 1;
    return p;
}

std::unique_ptr<LogregModel> train_logreg(const Dataset& data, const LogregParams& params) {
    data.validate();
    if (!(params.learning_rate > 0.0)) throw DataError("LogregParams: learning_rate must be > 0");
    if (params.epochs < 1) throw DataError("LogregParams: epochs must be >= 1");

    auto model = std::make_unique<LogregModel>();
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        const auto grad = logreg_gradient(model->W, data);
        for (std::size_t i = 0; i < model->W.size(); ++i)
            model->W[i] -= params.learning_rate * grad[i];
    }
    return model;
}

void LogregModel::write_payload(BinaryWriter& out) const {
    out.u32(static_cast<std::uint32_t>(W.size()));
    for (double w : W) out.f64(w);
}

std::unique_ptr<LogregModel> LogregModel::load_payload(BinaryReader& in) {
    auto model = std::make_unique<LogregModel>();
    const std::uint32_t n = in.u32();
    if (n != 4 * (kFeatureDim + 1)) throw DataError("corrupt model file: bad weight shape");
    model->W.resize(n);
    for (double& w : model->W) w = in.f64();
    return model;
}

} // namespace ctsev

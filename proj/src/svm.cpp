#include "ctsev/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ctsev/parallel.hpp"

namespace ctsev {

double kernel_value(SvmKernel kernel, double gamma, const FeatureVector& a,
                    const FeatureVector& b) {
    if (kernel == SvmKernel::linear) {
        double dot = 0.0;
        for (int i = 0; i < kFeatureDim; ++i) dot += a[i] * b[i];
        return dot;
    }
    double d2 = 0.0;
    for (int i = 0; i < kFeatureDim; ++i) {
        const double d = a[i] - b[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

namespace {

constexpr double kAlphaEps = 1e-8;

struct SmoSolver {
    const std::vector<FeatureVector>& X;
    const std::vector<int>& y;
    const SvmParams& params;
    int n;
    std::vector<double> K; // n x n kernel matrix
    std::vector<double> alpha;
    double b = 0.0;

    double decision(int i) const {
        double f = b;
        for (int j = 0; j < n; ++j)
            if (alpha[j] > 0.0) f += alpha[j] * y[j] * K[static_cast<std::size_t>(j) * n + i];
        return f;
    }

    double error(int i) const { return decision(i) - y[i]; }

    bool non_bound(int i) const {
        return alpha[i] > kAlphaEps && alpha[i] < params.C - kAlphaEps;
    }

    bool take_step(int i1, int i2, double e2) {
        if (i1 == i2) return false;
        const double a1 = alpha[i1], a2 = alpha[i2];
        const double y1 = y[i1], y2 = y[i2];
        const double e1 = error(i1);
        const double s = y1 * y2;

        double lo, hi;
        if (y1 != y2) {
            lo = std::max(0.0, a2 - a1);
            hi = std::min(params.C, params.C + a2 - a1);
        } else {
            lo = std::max(0.0, a1 + a2 - params.C);
            hi = std::min(params.C, a1 + a2);
        }
        if (lo >= hi) return false;

        const double k11 = K[static_cast<std::size_t>(i1) * n + i1];
        const double k12 = K[static_cast<std::size_t>(i1) * n + i2];
        const double k22 = K[static_cast<std::size_t>(i2) * n + i2];
        const double eta = k11 + k22 - 2.0 * k12;
        if (eta <= 0.0) return false;

        double a2_new = a2 + y2 * (e1 - e2) / eta;
        a2_new = std::clamp(a2_new, lo, hi);
        if (std::abs(a2_new - a2) < kAlphaEps * (a2_new + a2 + kAlphaEps)) return false;
        const double a1_new = a1 + s * (a2 - a2_new);

        const double b1 = b - e1 - y1 * (a1_new - a1) * k11 - y2 * (a2_new - a2) * k12;
        const double b2 = b - e2 - y1 * (a1_new - a1) * k12 - y2 * (a2_new - a2) * k22;
        if (a1_new > kAlphaEps && a1_new < params.C - kAlphaEps)
            b = b1;
        else if (a2_new > kAlphaEps && a2_new < params.C - kAlphaEps)
            b = b2;
        else
            b = (b1 + b2) / 2.0;

        alpha[i1] = a1_new;
        alpha[i2] = a2_new;
        return true;
    }

    bool examine(int i2) {
        const double e2 = error(i2);
        const double r2 = e2 * y[i2];
        const bool violates = (r2 < -params.tol && alpha[i2] < params.C - kAlphaEps) ||
                              (r2 > params.tol && alpha[i2] > kAlphaEps);
        if (!violates) return false;

        // Second-choice heuristic: largest |E1 - E2| over non-bound points.
        int best = -1;
        double best_gap = -1.0;
        for (int j = 0; j < n; ++j) {
            if (!non_bound(j)) continue;
            const double gap = std::abs(error(j) - e2);
            if (gap > best_gap) {
                best_gap = gap;
                best = j;
            }
        }
        if (best >= 0 && take_step(best, i2, e2)) return true;

        for (int off = 1; off <= n; ++off) {
            const int j = (i2 + off) % n;
            if (non_bound(j) && take_step(j, i2, e2)) return true;
        }
        for (int off = 1; off <= n; ++off) {
            const int j = (i2 + off) % n;
            if (!non_bound(j) && take_step(j, i2, e2)) return true;
        }
        return false;
    }
};

} // namespace

SmoResult smo_train(const std::vector<FeatureVector>& X, const std::vector<int>& y,
                    const SvmParams& params) {
    params.validate();
    const int n = static_cast<int>(X.size());
    if (n == 0 || X.size() != y.size()) throw DataError("smo_train: bad problem shape");
    for (int v : y)
        if (v != 1 && v != -1) throw DataError("smo_train: labels must be +-1");

    SmoSolver solver{X, y, params, n, {}, std::vector<double>(n, 0.0), 0.0};
    solver.K.resize(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double k = kernel_value(params.kernel, params.gamma, X[i], X[j]);
            solver.K[static_cast<std::size_t>(i) * n + j] = k;
            solver.K[static_cast<std::size_t>(j) * n + i] = k;
        }

    bool examine_all = true;
    int num_changed = 0;
    int passes = 0;
    bool converged = false;
    while (passes < params.max_passes) {
        num_changed = 0;
        for (int i = 0; i < n; ++i)
            if (examine_all || solver.non_bound(i)) num_changed += solver.examine(i) ? 1 : 0;
        ++passes;
        if (examine_all) {
            if (num_changed == 0) {
                converged = true;
                break;
            }
            examine_all = false;
        } else if (num_changed == 0) {
            examine_all = true;
        }
    }

    SmoResult res;
    res.alpha = std::move(solver.alpha);
    res.b = solver.b;
    res.converged = converged;
    for (int i = 0; i < n; ++i) {
        double f = res.b;
        for (int j = 0; j < n; ++j)
            if (res.alpha[j] > 0.0)
                f += res.alpha[j] * y[j] * solver.K[static_cast<std::size_t>(j) * n + i];
        const double margin = y[i] * f;
        double violation = 0.0;
        if (res.alpha[i] <= kAlphaEps)
            violation = std::max(0.0, 1.0 - margin);
        else if (res.alpha[i] >= params.C - kAlphaEps)
            violation = std::max(0.0, margin - 1.0);
        else
            violation = std::abs(margin - 1.0);
        res.max_kkt_violation = std::max(res.max_kkt_violation, violation);
    }
    return res;
}

double BinarySvm::decision(const FeatureVector& x, SvmKernel kernel, double gamma) const {
    double f = b;
    for (std::size_t i = 0; i < sv_x.size(); ++i)
        f += sv_coef[i] * kernel_value(kernel, gamma, sv_x[i], x);
    return f;
}

Prediction SvmModel::predict(const FeatureVector& x) const {
    Prediction p;
    if (pairs.empty()) {
        p.severity = constant_class;
        p.scores[constant_class - 1] = 1.0;
        return p;
    }
    std::array<double, 4> votes{};
    std::array<double, 4> margins{};
    for (const auto& pair : pairs) {
        const double f = pair.decision(x, kernel, gamma);
        votes[(f >= 0.0 ? pair.class_pos : pair.class_neg) - 1] += 1.0;
        margins[pair.class_pos - 1] += f;
        margins[pair.class_neg - 1] -= f;
    }
    int best = 0;
    for (int c = 1; c < 4; ++c) {
        if (votes[c] > votes[best] ||
            (votes[c] == votes[best] && margins[c] > margins[best]))
            best = c;
    }
    p.severity = best + 1;
    p.scores = votes;
    return p;
}

double SvmModel::max_kkt_violation() const {
    double v = 0.0;
    for (const auto& pair : pairs) v = std::max(v, pair.max_kkt_violation);
    return v;
}

std::unique_ptr<SvmModel> train_svm(const Dataset& data, const SvmParams& params, int threads) {
    data.validate();
    params.validate();

    auto model = std::make_unique<SvmModel>();
    model->kernel = params.kernel;
    model->gamma = params.gamma;

    std::set<int> present(data.y.begin(), data.y.end());
    const std::vector<int> classes(present.begin(), present.end());
    if (classes.size() < 2) {
        model->constant_class = classes.front();
        return model;
    }

    std::vector<std::pair<int, int>> class_pairs;
    for (std::size_t a = 0; a < classes.size(); ++a)
        for (std::size_t b = a + 1; b < classes.size(); ++b)
            class_pairs.emplace_back(classes[a], classes[b]);

    model->pairs.resize(class_pairs.size());
    parallel_for(class_pairs.size(), threads, [&](std::size_t pi) {
        const auto [pos, neg] = class_pairs[pi];
        std::vector<FeatureVector> X;
        std::vector<int> y;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (data.y[i] == pos) {
                X.push_back(data.X[i]);
                y.push_back(1);
            } else if (data.y[i] == neg) {
                X.push_back(data.X[i]);
                y.push_back(-1);
            }
        }
        const SmoResult res = smo_train(X, y, params);
        BinarySvm bin;
        bin.class_pos = pos;
        bin.class_neg = neg;
        bin.b = res.b;
        bin.max_kkt_violation = res.max_kkt_violation;
        for (std::size_t i = 0; i < X.size(); ++i)
            if (res.alpha[i] > 0.0) {
                bin.sv_x.push_back(X[i]);
                bin.sv_coef.push_back(res.alpha[i] * y[i]);
            }
        model->pairs[pi] = std::move(bin);
    });
    return model;
}

void SvmModel::write_payload(BinaryWriter& out) const {
    out.u8(kernel == SvmKernel::rbf ? 1 : 0);
    out.f64(gamma);
    out.i32(constant_class);
    out.u32(static_cast<std::uint32_t>(pairs.size()));
    for (const auto& pair : pairs) {
        out.i32(pair.class_pos);
        out.i32(pair.class_neg);
        out.f64(pair.b);
        out.f64(pair.max_kkt_violation);
        out.u32(static_cast<std::uint32_t>(pair.sv_x.size()));
        for (std::size_t i = 0; i < pair.sv_x.size(); ++i) {
            for (double v : pair.sv_x[i]) out.f64(v);
            out.f64(pair.sv_coef[i]);
        }
    }
}

std::unique_ptr<SvmModel> SvmModel::load_payload(BinaryReader& in) {
    auto model = std::make_unique<SvmModel>();
    model->kernel = in.u8() ? SvmKernel::rbf : SvmKernel::linear;
    model->gamma = in.f64();
    model->constant_class = in.i32();
    if (model->constant_class < 1 || model->constant_class > 4)
        throw DataError("corrupt model file: bad class");
    model->pairs.resize(in.u32());
    for (auto& pair : model->pairs) {
        pair.class_pos = in.i32();
        pair.class_neg = in.i32();
        if (pair.class_pos < 1 || pair.class_pos > 4 || pair.class_neg < 1 ||
            pair.class_neg > 4)
            throw DataError("corrupt model file: bad class pair");
        pair.b = in.f64();
        pair.max_kkt_violation = in.f64();
        const std::uint32_t n_sv = in.u32();
        pair.sv_x.resize(n_sv);
        pair.sv_coef.resize(n_sv);
        for (std::uint32_t i = 0; i < n_sv; ++i) {
            for (double& v : pair.sv_x[i]) v = in.f64();
            pair.sv_coef[i] = in.f64();
        }
    }
    return model;
}

} // namespace ctsev

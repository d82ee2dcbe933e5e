#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <utility>
#include <vector>

#include "ctsev/model.hpp"

namespace ctsev {

// ---------------------------------------------------------------------------
// Extremely randomized trees
// ---------------------------------------------------------------------------

struct ErtParams {
    int n_trees = 300;
    int k_features = 9; // ceil(sqrt(80))
    int min_samples_split = 2;
    std::uint64_t seed = 0;
};

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf_class = 1;
};

struct ClassTree {
    std::vector<TreeNode> nodes;
    int predict(const FeatureVector& x) const;
};

class ErtModel : public Model {
public:
    std::string kind() const override { return "ert"; }
    Prediction predict(const FeatureVector& x) const override;
    void write_payload(BinaryWriter& out) const override;
    static std::unique_ptr<ErtModel> load_payload(BinaryReader& in);

    std::vector<ClassTree> trees;
};

std::unique_ptr<ErtModel> train_ert(const Dataset& data, const ErtParams& params = {},
                                    int threads = 0);

// ---------------------------------------------------------------------------
// Gradient-boosted trees (first-order, multiclass softmax)
// ---------------------------------------------------------------------------

struct GbParams {
    int n_rounds = 200;
    double learning_rate = 0.1;
    int max_depth = 3;
    std::uint64_t seed = 0; // reserved; the exact greedy fit is deterministic

    void validate() const {
        if (n_rounds < 1) throw DataError("GbParams: n_rounds must be >= 1");
        if (!(learning_rate > 0.0 && learning_rate <= 1.0))
            throw DataError("GbParams: learning_rate must be in (0, 1]");
        if (max_depth < 1) throw DataError("GbParams: max_depth must be >= 1");
    }
};

struct RegNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0; // learning rate already applied
};

struct RegTree {
    std::vector<RegNode> nodes;
    double predict(const FeatureVector& x) const;
};

class GboostModel : public Model {
public:
    std::string kind() const override { return "gboost"; }
    Prediction predict(const FeatureVector& x) const override;
    void write_payload(BinaryWriter& out) const override;
    static std::unique_ptr<GboostModel> load_payload(BinaryReader& in);

    /// Class scores before softmax.
    std::array<double, 4> raw_scores(const FeatureVector& x) const;

    /// Training cross-entropy, entry 0 before any round, then one entry per
    /// round. Not serialized.
    const std::vector<double>& loss_trace() const { return loss_trace_; }

    std::vector<std::array<RegTree, 4>> rounds;
    std::vector<double> loss_trace_;
};

std::unique_ptr<GboostModel> train_gboost(const Dataset& data, const GbParams& params = {});

// ---------------------------------------------------------------------------
// Support vector machine (one-vs-one, SMO)
// ---------------------------------------------------------------------------

enum class SvmKernel { rbf, linear };

struct SvmParams {
    SvmKernel kernel = SvmKernel::rbf;
    double gamma = 0.5;
    double C = 1.0;
    double tol = 1e-3;
    int max_passes = 10000; // hard cap on outer SMO sweeps

    void validate() const {
        if (!(C > 0.0)) throw DataError("SvmParams: C must be > 0");
        if (!(gamma > 0.0)) throw DataError("SvmParams: gamma must be > 0");
        if (!(tol > 0.0)) throw DataError("SvmParams: tol must be > 0");
        if (max_passes < 1) throw DataError("SvmParams: max_passes must be >= 1");
    }
};

double kernel_value(SvmKernel kernel, double gamma, const FeatureVector& a,
                    const FeatureVector& b);

/// Dual solution of one binary problem; labels must be +-1.
struct SmoResult {
    std::vector<double> alpha;
    double b = 0.0;
    double max_kkt_violation = 0.0;
    bool converged = false;
};

SmoResult smo_train(const std::vector<FeatureVector>& X, const std::vector<int>& y,
                    const SvmParams& params);

struct BinarySvm {
    int class_pos = 0; // decision > 0 votes for this class
    int class_neg = 0;
    std::vector<FeatureVector> sv_x;
    std::vector<double> sv_coef; // alpha_i * y_i
    double b = 0.0;
    double max_kkt_violation = 0.0;

    double decision(const FeatureVector& x, SvmKernel kernel, double gamma) const;
};

class SvmModel : public Model {
public:
    std::string kind() const override { return "svm"; }
    Prediction predict(const FeatureVector& x) const override;
    void write_payload(BinaryWriter& out) const override;
    static std::unique_ptr<SvmModel> load_payload(BinaryReader& in);

    /// Worst KKT violation over all pairwise problems at training end.
    double max_kkt_violation() const;

    bool degenerate() const { return pairs.empty(); }

    SvmKernel kernel = SvmKernel::rbf;
    double gamma = 0.5;
    std::vector<BinarySvm> pairs;
    int constant_class = 1; // used when degenerate (single training class)
};

std::unique_ptr<SvmModel> train_svm(const Dataset& data, const SvmParams& params = {},
                                    int threads = 0);

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

struct KnnParams {
    int k = 5;
};

class KnnModel : public Model {
public:
    std::string kind() const override { return "knn"; }
    Prediction predict(const FeatureVector& x) const override;
    void write_payload(BinaryWriter& out) const override;
    static std::unique_ptr<KnnModel> load_payload(BinaryReader& in);

    int k = 5;
    std::vector<FeatureVector> X;
    std::vector<int> y;
};

std::unique_ptr<KnnModel> train_knn(const Dataset& data, const KnnParams& params = {});

struct LogregParams {
    double learning_rate = 0.5;
    int epochs = 500;
};

class LogregModel : public Model {
public:
    std::string kind() const override { return "logreg"; }
    Prediction predict(const FeatureVector& x) const override;
    void write_payload(BinaryWriter& out) const override;
    static std::unique_ptr<LogregModel> load_payload(BinaryReader& in);

    /// Row-major weights, 4 classes x (80 features + bias).
    std::vector<double> W = std::vector<double>(4 * 81, 0.0);
};

/// Mean softmax cross-entropy and its gradient for the 4 x 81 weight layout.
double logreg_loss(const std::vector<double>& W, const Dataset& data);
std::vector<double> logreg_gradient(const std::vector<double>& W, const Dataset& data);

std::unique_ptr<LogregModel> train_logreg(const Dataset& data, const LogregParams& params = {});

// ---------------------------------------------------------------------------
// Voting ensemble (gboost, ert, svm)
// ---------------------------------------------------------------------------

/// Majority class of the three member votes; when all disagree, the fixed
/// priority order (gboost, ert, svm) selects the gboost vote.
int ensemble_vote(int gboost_vote, int ert_vote, int svm_vote);

class EnsembleModel : public Model {
public:
    std::string kind() const override { return "ensemble"; }
    Prediction predict(const FeatureVector& x) const override;
    void write_payload(BinaryWriter& out) const override;
    static std::unique_ptr<EnsembleModel> load_payload(BinaryReader& in);

    std::unique_ptr<GboostModel> gboost;
    std::unique_ptr<ErtModel> ert;
    std::unique_ptr<SvmModel> svm;
};

std::unique_ptr<EnsembleModel> train_ensemble(const Dataset& data, const GbParams& gb,
                                              const ErtParams& ert, const SvmParams& svm,
                                              int threads = 0);

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

/// Self-describing file: magic "CTSEV01", kind, payload, CRC32 trailer.
void save_model(const Model& model, const std::filesystem::path& path);
std::unique_ptr<Model> load_model(const std::filesystem::path& path);

} // namespace ctsev

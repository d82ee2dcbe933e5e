// Acceptance gate for the CT severity pipeline. Each criterion prints
// exactly one "PASS criterion N" or "FAIL criterion N" line on stdout, in
// order; details go to stderr. Exit code 0 only if every criterion passes.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "ctsev/classifiers.hpp"
#include "ctsev/commands.hpp"
#include "ctsev/csv.hpp"
#include "ctsev/errors.hpp"
#include "ctsev/features.hpp"
#include "ctsev/imaging.hpp"
#include "ctsev/lung.hpp"
#include "ctsev/metrics.hpp"
#include "ctsev/phantom.hpp"
#include "ctsev/rng.hpp"
#include "ctsev/wam.hpp"

using namespace ctsev;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances and budgets.
constexpr double kEndpointTol = 1e-9;       // hyperbolization endpoints
constexpr double kLossSlack = 1e-9;         // gboost monotonicity slack
constexpr double kKktTol = 1e-3;            // SVM KKT violation bound
constexpr double kGradRelTol = 1e-5;        // logreg finite-difference bound
constexpr double kRateTol = 0.05;           // per-scan extraction error bound
constexpr double kRateCoverage = 0.90;      // fraction of scans within kRateTol
constexpr double kMacroF1Min = 0.90;        // ensemble hold-out macro F1
constexpr double kBudget1 = 5.0, kBudget2 = 2.0, kBudget3 = 5.0, kBudget7 = 60.0,
                 kBudget9 = 600.0;

constexpr std::uint64_t kCorpusSeed = 1;
constexpr std::uint64_t kSplitSeed = 7;
constexpr std::uint64_t kTrainSeed = 9;
constexpr int kPerClass = 50;

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("%s criterion %d\n", pass ? "PASS" : "FAIL", criterion);
    std::fflush(stdout);
    if (!detail.empty()) std::fprintf(stderr, "  criterion %d: %s\n", criterion, detail.c_str());
    if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<unsigned char> file_bytes(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw DataError("acceptance: cannot read " + p.string());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------------------
// Criterion 1: hyperbolization endpoints and monotonicity
// ---------------------------------------------------------------------------

bool criterion1(std::string& detail) {
    const auto start = Clock::now();
    for (double c : {0.1, 0.5, 1.0, 5.0}) {
        if (std::abs(hyperbolic_response(0.0, c)) > kEndpointTol ||
            std::abs(hyperbolic_response(1.0, c) - 1.0) > kEndpointTol) {
            detail = "response endpoints off for c=" + format_double(c);
            return false;
        }
        double prev = hyperbolic_response(0.0, c);
        for (int i = 1; i <= 1000; ++i) {
            const double v = hyperbolic_response(i / 1000.0, c);
            if (v < prev) {
                detail = "response not monotone at u=" + format_double(i / 1000.0);
                return false;
            }
            prev = v;
        }
    }

    Rng rng(1001);
    for (int round = 0; round < 1000; ++round) {
        GrayImage img(32, 32);
        for (std::size_t i = 0; i < img.size(); ++i) img[i] = rng.uniform();
        for (double c : {0.1, 0.5, 1.0, 5.0}) {
            const GrayImage out = hyperbolize(img, {c});
            // Per-bin extrema: outputs must be ordered with the input bins
            // and hit 1 at the top occupied bin.
            std::array<double, 256> lo, hi;
            std::array<bool, 256> occ{};
            lo.fill(2.0);
            hi.fill(-1.0);
            int top_bin = -1;
            for (std::size_t i = 0; i < img.size(); ++i) {
                const int b = intensity_bin(img[i]);
                occ[static_cast<std::size_t>(b)] = true;
                lo[static_cast<std::size_t>(b)] = std::min(lo[static_cast<std::size_t>(b)], out[i]);
                hi[static_cast<std::size_t>(b)] = std::max(hi[static_cast<std::size_t>(b)], out[i]);
                top_bin = std::max(top_bin, b);
                if (out[i] < 0.0 || out[i] > 1.0) {
                    detail = "output escapes [0, 1]";
                    return false;
                }
            }
            if (std::abs(hi[static_cast<std::size_t>(top_bin)] - 1.0) > kEndpointTol) {
                detail = "top occupied bin does not map to 1";
                return false;
            }
            double prev_hi = -1.0;
            for (int b = 0; b < 256; ++b) {
                if (!occ[static_cast<std::size_t>(b)]) continue;
                if (lo[static_cast<std::size_t>(b)] < prev_hi) {
                    detail = "image mapping not monotone at bin " + std::to_string(b);
                    return false;
                }
                prev_hi = hi[static_cast<std::size_t>(b)];
            }
        }
    }
    const double elapsed = seconds_since(start);
    detail = "elapsed " + format_double(elapsed) + "s";
    return elapsed < kBudget1;
}

// ---------------------------------------------------------------------------
// Criterion 2: Otsu equals the exhaustive smallest-tie argmax
// ---------------------------------------------------------------------------

int otsu_exhaustive(const Histogram& hist) {
    double total = 0.0;
    for (auto v : hist) total += static_cast<double>(v);
    int best_t = -1;
    double best_var = -1.0;
    for (int t = 0; t < 256; ++t) {
        double w0 = 0.0, s0 = 0.0, w1 = 0.0, s1 = 0.0;
        for (int b = 0; b < 256; ++b) {
            const double n = static_cast<double>(hist[static_cast<std::size_t>(b)]);
            const double value = static_cast<double>(b) / 255.0;
            if (b <= t) {
                w0 += n;
                s0 += n * value;
            } else {
                w1 += n;
                s1 += n * value;
            }
        }
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double d = s0 / w0 - s1 / w1;
        const double var = (w0 / total) * (w1 / total) * d * d;
        if (var > best_var) { // strict: ties keep the smallest threshold
            best_var = var;
            best_t = t;
        }
    }
    return best_t;
}

bool criterion2(std::string& detail) {
    const auto start = Clock::now();
    Rng rng(2002);
    for (int round = 0; round < 1000; ++round) {
        Histogram hist{};
        const int occupied = 2 + static_cast<int>(rng.below(40));
        for (int i = 0; i < occupied; ++i)
            hist[rng.below(256)] += 1 + rng.below(2000);
        const int oracle = otsu_exhaustive(hist);
        const auto res = otsu_analyze(hist);
        if (oracle < 0) {
            if (res.has_value()) {
                detail = "expected degenerate histogram at round " + std::to_string(round);
                return false;
            }
            continue;
        }
        if (!res.has_value() || res->threshold != oracle) {
            detail = "threshold mismatch at round " + std::to_string(round) + ": got " +
                     std::to_string(res ? res->threshold : -1) + ", oracle " +
                     std::to_string(oracle);
            return false;
        }
    }
    const double elapsed = seconds_since(start);
    detail = "elapsed " + format_double(elapsed) + "s";
    return elapsed < kBudget2;
}

// ---------------------------------------------------------------------------
// Criterion 3: morphology laws and naive oracles
// ---------------------------------------------------------------------------

BinaryMask naive_window(const BinaryMask& m, bool want_all) {
    BinaryMask out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
            bool all = true, any = false;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const bool v = m.get_or_false(x + dx, y + dy);
                    all = all && v;
                    any = any || v;
                }
            out.set(x, y, want_all ? all : any);
        }
    return out;
}

bool masks_equal(const BinaryMask& a, const BinaryMask& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.get(i) != b.get(i)) return false;
    return true;
}

bool criterion3(std::string& detail) {
    const auto start = Clock::now();
    Rng rng(3003);
    for (int round = 0; round < 200; ++round) {
        BinaryMask m(32, 32);
        const double density = 0.2 + 0.6 * rng.uniform();
        for (std::size_t i = 0; i < m.size(); ++i) m.set(i, rng.uniform() < density);

        const BinaryMask d = dilate(m), e = erode(m), o = open(m);
        if (!masks_equal(d, naive_window(m, false)) || !masks_equal(e, naive_window(m, true))) {
            detail = "naive window oracle mismatch at round " + std::to_string(round);
            return false;
        }
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m.get(i) && !d.get(i)) {
                detail = "dilation not extensive";
                return false;
            }
            if (o.get(i) && !m.get(i)) {
                detail = "opening not anti-extensive";
                return false;
            }
        }
        if (!masks_equal(open(o), o)) {
            detail = "opening not idempotent";
            return false;
        }

        // Erosion/dilation duality on a mask padded with a false ring, so
        // the out-of-bounds convention cannot interfere.
        BinaryMask padded(34, 34);
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 32; ++x) padded.set(x + 1, y + 1, m.get(x, y));
        if (!masks_equal(erode(padded), mask_complement(dilate(mask_complement(padded))))) {
            detail = "duality violated";
            return false;
        }
    }

    GrayImage flat(16, 16);
    for (std::size_t i = 0; i < flat.size(); ++i) flat[i] = 0.37;
    const GrayImage th = top_hat(flat);
    for (std::size_t i = 0; i < th.size(); ++i)
        if (th[i] != 0.0) {
            detail = "top-hat of a constant image is not zero";
            return false;
        }

    const double elapsed = seconds_since(start);
    detail = "elapsed " + format_double(elapsed) + "s";
    return elapsed < kBudget3;
}

// ---------------------------------------------------------------------------
// Criterion 4: slice gate against a direct re-implementation
// ---------------------------------------------------------------------------

bool gate_oracle_512(std::uint64_t area, int index, int n) {
    const bool area_ok = area >= 10000;                     // exact at 512x512
    const bool in_band = 3 * index >= n && 3 * index <= 2 * n;
    const bool large = 10 * area >= 1835008;                // 0.7 * 512 * 512 = 183500.8
    return (area_ok && in_band) || large;
}

bool criterion4(std::string& detail) {
    const std::uint64_t areas[] = {0, 9999, 10000, 183500, 183501};
    for (int n : {27, 100, 702}) {
        const int probes[] = {0, n / 3 - 1, n / 3, n / 2, 2 * n / 3, 2 * n / 3 + 1, n - 1};
        for (std::uint64_t area : areas)
            for (int index : probes) {
                const bool got = slice_gate_area(area, index, n, 512, 512, {});
                const bool want = gate_oracle_512(area, index, n);
                if (got != want) {
                    detail = "gate mismatch at area=" + std::to_string(area) +
                             " index=" + std::to_string(index) + " n=" + std::to_string(n);
                    return false;
                }
            }
    }
    detail.clear();
    return true;
}

// ---------------------------------------------------------------------------
// Criterion 5: feature vector layout
// ---------------------------------------------------------------------------

bool criterion5(std::string& detail) {
    Rng rng(5005);
    for (int m : {1, 5, 39, 40, 41, 80, 702}) {
        std::vector<SliceResult> results;
        std::vector<std::pair<double, double>> rates;
        for (int i = 0; i < m; ++i) {
            SliceResult r;
            r.index = i;
            r.retained = true;
            r.left_rate = rng.uniform();
            r.right_rate = rng.uniform();
            rates.emplace_back(r.left_rate, r.right_rate);
            results.push_back(r);
        }
        const FeatureVector v = build_feature_vector(results);
        for (double x : v)
            if (!(x >= 0.0 && x <= 1.0)) {
                detail = "entry escapes [0, 1] at m=" + std::to_string(m);
                return false;
            }

        if (m > 40) {
            // Independent partition enumeration: region r spans slice
            // indices [floor(r*m/40), floor((r+1)*m/40)); the regions must
            // tile [0, m) and each contributes its lower median.
            int expected_lo = 0;
            for (int r = 0; r < 40; ++r) {
                const int lo = static_cast<int>((static_cast<long long>(r) * m) / 40);
                const int hi = static_cast<int>((static_cast<long long>(r + 1) * m) / 40);
                if (lo != expected_lo || hi <= lo) {
                    detail = "regions do not tile [0, m) at m=" + std::to_string(m);
                    return false;
                }
                expected_lo = hi;
                const int pick = lo + (hi - 1 - lo) / 2;
                if (v[static_cast<std::size_t>(2 * r)] != rates[static_cast<std::size_t>(pick)].first ||
                    v[static_cast<std::size_t>(2 * r + 1)] != rates[static_cast<std::size_t>(pick)].second) {
                    detail = "sampled slice mismatch at m=" + std::to_string(m) +
                             " region=" + std::to_string(r);
                    return false;
                }
            }
            if (expected_lo != m) {
                detail = "regions do not cover m=" + std::to_string(m);
                return false;
            }
        } else {
            double suml = 0.0, sumr = 0.0;
            for (const auto& [l, r] : rates) {
                suml += l;
                sumr += r;
            }
            for (int p = 0; p < 40; ++p) {
                const double wantl = p < m ? rates[static_cast<std::size_t>(p)].first : suml / m;
                const double wantr = p < m ? rates[static_cast<std::size_t>(p)].second : sumr / m;
                if (std::abs(v[static_cast<std::size_t>(2 * p)] - wantl) > 1e-12 ||
                    std::abs(v[static_cast<std::size_t>(2 * p + 1)] - wantr) > 1e-12) {
                    detail = "pair mismatch at m=" + std::to_string(m) +
                             " pair=" + std::to_string(p);
                    return false;
                }
            }
        }
    }
    detail.clear();
    return true;
}

// ---------------------------------------------------------------------------
// Criterion 6: weighted average method pins
// ---------------------------------------------------------------------------

bool criterion6(std::string& detail) {
    const double rates[] = {0.0, 0.249, 0.25, 0.499, 0.5, 0.749, 0.75, 1.0};
    const int expected[] = {1, 1, 2, 2, 3, 3, 4, 4};
    for (int i = 0; i < 8; ++i)
        if (bin_score(rates[i]) != expected[i]) {
            detail = "bin mismatch at rate " + format_double(rates[i]);
            return false;
        }
    if (slice_wam(0.30, 0.60) != 2.6) {
        detail = "slice_wam(0.30, 0.60) != 2.6";
        return false;
    }
    detail.clear();
    return true;
}

// ---------------------------------------------------------------------------
// Shared phantom pipeline (feeds criteria 7, 9, 10)
// ---------------------------------------------------------------------------

struct PipelineArtifacts {
    fs::path features_csv;
    fs::path model_path;
    fs::path metrics_dir;
};

struct Prep {
    bool ok = false;
    std::string error;
    fs::path root;
    fs::path corpus;
    std::vector<CorpusEntry> entries;
    std::vector<FeatureRow> feature_rows; // 200 labeled rows
    std::vector<int> train_idx, test_idx;
    fs::path train_csv, test_csv;
    PipelineArtifacts primary;
    double prep_seconds = 0.0;
    double train_eval_seconds = 0.0;
};

std::vector<std::array<double, 3>> read_rates(const fs::path& csv) {
    const auto rows = read_csv(csv);
    std::vector<std::array<double, 3>> out;
    for (std::size_t i = 1; i < rows.size(); ++i)
        out.push_back({parse_double(rows[i][1], "retained"),
                       parse_double(rows[i][2], "left"), parse_double(rows[i][3], "right")});
    return out;
}

// Runs segment + featurize over the corpus with a fixed thread setting.
fs::path run_feature_extraction(const Prep& prep, const fs::path& out_root, int threads) {
    fs::create_directories(out_root / "rates");
    std::vector<fs::path> rate_csvs;
    for (const auto& e : prep.entries) {
        SegmentOptions seg;
        seg.scan_dir = prep.corpus / "scans" / e.id;
        seg.lung_mask_dir = prep.corpus / "lung_masks" / e.id;
        seg.out_rates = out_root / "rates" / (e.id + ".csv");
        seg.threads = threads;
        cmd_segment(seg);
        rate_csvs.push_back(seg.out_rates);
    }
    FeaturizeOptions feat;
    feat.rates_csvs = rate_csvs;
    feat.labels_csv = prep.corpus / "manifest.csv";
    feat.out_features = out_root / "features.csv";
    feat.threads = threads;
    cmd_featurize(feat);
    return feat.out_features;
}

PipelineArtifacts train_and_evaluate(const Prep& prep, const fs::path& features_csv,
                                     const fs::path& out_root, int threads) {
    // Split the feature rows by the fixed stratified fold.
    const auto rows = read_feature_csv(features_csv);
    std::vector<FeatureRow> train_rows, test_rows;
    for (int i : prep.train_idx) train_rows.push_back(rows[static_cast<std::size_t>(i)]);
    for (int i : prep.test_idx) test_rows.push_back(rows[static_cast<std::size_t>(i)]);
    const fs::path train_csv = out_root / "train.csv";
    const fs::path test_csv = out_root / "test.csv";
    write_feature_csv(train_csv, train_rows);
    write_feature_csv(test_csv, test_rows);

    TrainOptions train;
    train.features_csv = train_csv;
    train.out_model = out_root / "ensemble.model";
    train.model_kind = "ensemble";
    train.seed = kTrainSeed;
    train.threads = threads;
    cmd_train(train);

    EvaluateOptions eval;
    eval.features_csv = test_csv;
    eval.model_path = train.out_model;
    eval.out_dir = out_root / "metrics";
    cmd_evaluate(eval);

    PipelineArtifacts a;
    a.features_csv = features_csv;
    a.model_path = train.out_model;
    a.metrics_dir = eval.out_dir;
    return a;
}

Prep prepare_pipeline() {
    Prep prep;
    try {
        prep.root = fs::temp_directory_path() / "ctsev_acceptance";
        fs::remove_all(prep.root);
        fs::create_directories(prep.root);
        prep.corpus = prep.root / "corpus";

        const auto t0 = Clock::now();
        PhantomSpec base;
        prep.entries = generate_corpus(prep.corpus, kPerClass, kCorpusSeed, base);

        const fs::path primary_root = prep.root / "run_primary";
        fs::create_directories(primary_root);
        const fs::path features = run_feature_extraction(prep, primary_root, 0);
        prep.prep_seconds = seconds_since(t0);

        prep.feature_rows = read_feature_csv(features);
        if (prep.feature_rows.size() != prep.entries.size())
            throw DataError("acceptance: a scan was excluded from the feature CSV");

        std::vector<int> labels;
        for (const auto& row : prep.feature_rows) labels.push_back(*row.label);
        const auto folds = stratified_k_fold(labels, 4, kSplitSeed);
        prep.train_idx = folds[0].train;
        prep.test_idx = folds[0].test;

        const auto t1 = Clock::now();
        prep.primary = train_and_evaluate(prep, features, primary_root, 0);
        prep.train_eval_seconds = seconds_since(t1);
        prep.ok = true;
    } catch (const std::exception& e) {
        prep.error = e.what();
    }
    return prep;
}

// ---------------------------------------------------------------------------
// Criterion 7: classifier correctness
// ---------------------------------------------------------------------------

bool criterion7(const Prep& prep, std::string& detail) {
    const auto start = Clock::now();
    if (!prep.ok) {
        detail = "pipeline preparation failed: " + prep.error;
        return false;
    }

    // (a) ERT and 1-NN reach 100% training accuracy on the 200 phantom
    // feature vectors, which must be duplicate-free.
    Dataset data;
    for (const auto& row : prep.feature_rows) {
        data.X.push_back(row.values);
        data.y.push_back(*row.label);
    }
    std::set<FeatureVector> unique(data.X.begin(), data.X.end());
    if (unique.size() != data.size()) {
        detail = "phantom features contain duplicates";
        return false;
    }
    const auto ert = train_ert(data, {});
    KnnParams nn1;
    nn1.k = 1;
    const auto knn = train_knn(data, nn1);
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (ert->predict(data.X[i]).severity != data.y[i]) {
            detail = "ert training accuracy below 100%";
            return false;
        }
        if (knn->predict(data.X[i]).severity != data.y[i]) {
            detail = "1-nn training accuracy below 100%";
            return false;
        }
    }

    // (b) SVM: zero training errors and certified KKT conditions on
    // separable blobs.
    Rng rng(7007);
    Dataset blobs;
    for (int c = 1; c <= 4; ++c)
        for (int i = 0; i < 25; ++i) {
            FeatureVector x{};
            for (auto& v : x) v = 0.15 + 0.2 * (c - 1) + rng.uniform(-0.04, 0.04);
            blobs.X.push_back(x);
            blobs.y.push_back(c);
        }
    SvmParams svm_params;
    svm_params.tol = kKktTol;
    const auto svm = train_svm(blobs, svm_params);
    for (std::size_t i = 0; i < blobs.size(); ++i)
        if (svm->predict(blobs.X[i]).severity != blobs.y[i]) {
            detail = "svm training error on separable blobs";
            return false;
        }
    if (svm->max_kkt_violation() > kKktTol) {
        detail = "svm KKT violation " + format_double(svm->max_kkt_violation());
        return false;
    }

    // (c) Gradient boosting: training loss nonincreasing over 200 rounds.
    Dataset train_data;
    for (int i : prep.train_idx) {
        train_data.X.push_back(prep.feature_rows[static_cast<std::size_t>(i)].values);
        train_data.y.push_back(*prep.feature_rows[static_cast<std::size_t>(i)].label);
    }
    GbParams gb;
    gb.n_rounds = 200;
    const auto gboost = train_gboost(train_data, gb);
    const auto& trace = gboost->loss_trace();
    if (trace.size() != 201) {
        detail = "loss trace has " + std::to_string(trace.size()) + " entries";
        return false;
    }
    for (std::size_t i = 1; i < trace.size(); ++i)
        if (trace[i] > trace[i - 1] + kLossSlack) {
            detail = "loss increased at round " + std::to_string(i);
            return false;
        }

    // (d) Logistic regression gradient against finite differences.
    Dataset small;
    for (int i = 0; i < 16; ++i) {
        FeatureVector x{};
        for (auto& v : x) v = rng.uniform();
        small.X.push_back(x);
        small.y.push_back(1 + static_cast<int>(rng.below(4)));
    }
    std::vector<double> W(4 * 81);
    for (auto& w : W) w = rng.uniform(-0.5, 0.5);
    const auto grad = logreg_gradient(W, small);
    const double eps = 1e-6;
    for (std::size_t j = 0; j < W.size(); j += 13) {
        std::vector<double> up = W, down = W;
        up[j] += eps;
        down[j] -= eps;
        const double fd = (logreg_loss(up, small) - logreg_loss(down, small)) / (2 * eps);
        const double denom = std::max({std::abs(fd), std::abs(grad[j]), 1e-8});
        if (std::abs(fd - grad[j]) / denom > kGradRelTol) {
            detail = "gradient mismatch at coordinate " + std::to_string(j);
            return false;
        }
    }

    const double elapsed = seconds_since(start);
    detail = "elapsed " + format_double(elapsed) + "s";
    return elapsed < kBudget7;
}

// ---------------------------------------------------------------------------
// Criterion 8: ensemble vote table
// ---------------------------------------------------------------------------

bool criterion8(std::string& detail) {
    for (int g = 1; g <= 4; ++g)
        for (int e = 1; e <= 4; ++e)
            for (int s = 1; s <= 4; ++s) {
                // Independent majority-with-priority oracle.
                int counts[5] = {0, 0, 0, 0, 0};
                ++counts[g];
                ++counts[e];
                ++counts[s];
                int majority = 0;
                for (int c = 1; c <= 4; ++c)
                    if (counts[c] >= 2) majority = c;
                const int want = majority != 0 ? majority : g;
                if (ensemble_vote(g, e, s) != want) {
                    detail = "vote mismatch at (" + std::to_string(g) + "," + std::to_string(e) +
                             "," + std::to_string(s) + ")";
                    return false;
                }
            }
    detail.clear();
    return true;
}

// ---------------------------------------------------------------------------
// Criterion 9: end-to-end fidelity, accuracy, and the WAM comparison
// ---------------------------------------------------------------------------

double macro_f1_from_csv(const fs::path& metrics_csv) {
    for (const auto& row : read_csv(metrics_csv))
        if (row.size() == 4 && row[0] == "macro") return parse_double(row[3], "macro f1");
    throw DataError("acceptance: no macro row in " + metrics_csv.string());
}

bool criterion9(const Prep& prep, std::string& detail) {
    if (!prep.ok) {
        detail = "pipeline preparation failed: " + prep.error;
        return false;
    }

    // (a) Per-scan extraction fidelity from the rates CSVs.
    int within = 0;
    double worst = 0.0;
    for (const auto& e : prep.entries) {
        const auto rates = read_rates(prep.root / "run_primary" / "rates" / (e.id + ".csv"));
        double sum = 0.0;
        int retained = 0;
        for (const auto& r : rates)
            if (r[0] == 1.0) {
                sum += (r[1] + r[2]) / 2.0;
                ++retained;
            }
        if (retained == 0) {
            detail = "no retained slices for " + e.id;
            return false;
        }
        const double err = std::abs(sum / retained - e.involvement);
        worst = std::max(worst, err);
        if (err <= kRateTol) ++within;
    }
    const double coverage = static_cast<double>(within) / static_cast<double>(prep.entries.size());
    if (coverage < kRateCoverage) {
        detail = "extraction within tolerance for only " + format_double(100.0 * coverage) +
                 "% of scans (worst error " + format_double(worst) + ")";
        return false;
    }

    // (b) Hold-out macro F1 of the ensemble.
    const double ensemble_f1 = macro_f1_from_csv(prep.primary.metrics_dir / "metrics.csv");
    if (ensemble_f1 < kMacroF1Min) {
        detail = "ensemble macro F1 " + format_double(ensemble_f1);
        return false;
    }

    // (c) The trained ensemble strictly beats the weighted average method on
    // the same hold-out scans.
    WamOptions wam;
    wam.features_csv = prep.root / "run_primary" / "test.csv";
    wam.out_csv = prep.root / "run_primary" / "wam.csv";
    cmd_wam(wam);
    std::map<std::string, int> wam_class;
    const auto wam_rows = read_csv(wam.out_csv);
    for (std::size_t i = 1; i < wam_rows.size(); ++i)
        wam_class[wam_rows[i][0]] = parse_int(wam_rows[i][2], "wam class");
    std::vector<int> y_true, y_wam;
    for (int i : prep.test_idx) {
        const auto& row = prep.feature_rows[static_cast<std::size_t>(i)];
        y_true.push_back(*row.label);
        y_wam.push_back(wam_class.at(row.patient_id));
    }
    const double wam_f1 = macro_metrics(confusion_matrix(y_true, y_wam)).macro_f1;
    if (!(ensemble_f1 > wam_f1)) {
        detail = "ensemble macro F1 " + format_double(ensemble_f1) +
                 " does not beat WAM " + format_double(wam_f1);
        return false;
    }

    const double elapsed = prep.prep_seconds + prep.train_eval_seconds;
    detail = "fidelity " + format_double(100.0 * coverage) + "% (worst " + format_double(worst) +
             "), ensemble F1 " + format_double(ensemble_f1) + ", WAM F1 " +
             format_double(wam_f1) + ", elapsed " + format_double(elapsed) + "s";
    return elapsed < kBudget9;
}

// ---------------------------------------------------------------------------
// Criterion 10: byte-identical reruns at any thread setting
// ---------------------------------------------------------------------------

bool criterion10(const Prep& prep, std::string& detail) {
    if (!prep.ok) {
        detail = "pipeline preparation failed: " + prep.error;
        return false;
    }

    const auto primary_features = file_bytes(prep.primary.features_csv);
    const auto primary_model = file_bytes(prep.primary.model_path);

    for (int threads : {1, 4}) {
        const fs::path root = prep.root / ("run_t" + std::to_string(threads));
        fs::create_directories(root);

        // The corpus itself regenerates identically.
        const fs::path corpus2 = root / "corpus";
        PhantomSpec base;
        generate_corpus(corpus2, kPerClass, kCorpusSeed, base, threads);
        if (file_bytes(corpus2 / "manifest.csv") != file_bytes(prep.corpus / "manifest.csv")) {
            detail = "manifest differs at threads=" + std::to_string(threads);
            return false;
        }
        for (const auto& e : {prep.entries.front(), prep.entries.back()})
            for (const char* sub : {"scans", "lung_masks", "infection_masks"})
                for (int z = 0; z < 21; ++z) {
                    char name[16];
                    std::snprintf(name, sizeof(name), "%03d.png", z);
                    if (file_bytes(corpus2 / sub / e.id / name) !=
                        file_bytes(prep.corpus / sub / e.id / name)) {
                        detail = std::string("slice ") + sub + "/" + e.id + "/" + name +
                                 " differs at threads=" + std::to_string(threads);
                        return false;
                    }
                }

        const fs::path features = run_feature_extraction(prep, root, threads);
        if (file_bytes(features) != primary_features) {
            detail = "feature CSV differs at threads=" + std::to_string(threads);
            return false;
        }
        const PipelineArtifacts arts = train_and_evaluate(prep, features, root, threads);
        if (file_bytes(arts.model_path) != primary_model) {
            detail = "model file differs at threads=" + std::to_string(threads);
            return false;
        }
        for (const char* report : {"metrics.txt", "metrics.csv", "confusion.csv"})
            if (file_bytes(arts.metrics_dir / report) !=
                file_bytes(prep.primary.metrics_dir / report)) {
                detail = std::string(report) + " differs at threads=" + std::to_string(threads);
                return false;
            }
    }
    detail.clear();
    return true;
}

} // namespace

int main() {
    std::string detail;

    const Prep prep = prepare_pipeline();
    if (!prep.ok)
        std::fprintf(stderr, "pipeline preparation failed: %s\n", prep.error.c_str());

    bool pass = criterion1(detail);
    report(1, pass, detail);
    pass = criterion2(detail);
    report(2, pass, detail);
    pass = criterion3(detail);
    report(3, pass, detail);
    pass = criterion4(detail);
    report(4, pass, detail);
    pass = criterion5(detail);
    report(5, pass, detail);
    pass = criterion6(detail);
    report(6, pass, detail);
    pass = criterion7(prep, detail);
    report(7, pass, detail);
    pass = criterion8(detail);
    report(8, pass, detail);
    pass = criterion9(prep, detail);
    report(9, pass, detail);
    pass = criterion10(prep, detail);
    report(10, pass, detail);

    return g_failures == 0 ? 0 : 1;
}

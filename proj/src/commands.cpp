#include "ctsev/commands.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "ctsev/csv.hpp"
#include "ctsev/errors.hpp"
#include "ctsev/features.hpp"
#include "ctsev/image_io.hpp"
#include "ctsev/metrics.hpp"
#include "ctsev/wam.hpp"

namespace ctsev {

namespace {

namespace fs = std::filesystem;
using KeyValues = std::vector<std::pair<std::string, std::string>>;

void ensure_parent(const fs::path& file) {
    const fs::path parent = file.parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

fs::path echo_path(fs::path primary) {
    primary.replace_extension(".config");
    return primary;
}

void write_echo(const fs::path& primary, const std::string& command, const KeyValues& kv) {
    std::string text = "command=" + command + "\n";
    for (const auto& [key, value] : kv) text += key + "=" + value + "\n";
    ensure_parent(primary);
    write_text_file(echo_path(primary), text);
}

void append_gate(KeyValues& kv, const GateParams& gate) {
    kv.emplace_back("gate.min_mask_area", std::to_string(gate.min_mask_area));
    kv.emplace_back("gate.large_area_fraction", format_double(gate.large_area_fraction));
}

void append_infection(KeyValues& kv, const InfectionParams& p) {
    kv.emplace_back("infection.hyper_c", format_double(p.hyper_c));
    kv.emplace_back("infection.gaussian_sigma", format_double(p.gaussian_sigma));
    kv.emplace_back("infection.band_lo", format_double(p.band_lo));
    kv.emplace_back("infection.band_hi", format_double(p.band_hi));
    kv.emplace_back("infection.noise_min_area", std::to_string(p.noise_min_area));
    kv.emplace_back("infection.vessel_min_area", std::to_string(p.vessel_min_area));
    kv.emplace_back("infection.kernel_width", std::to_string(p.kernel.width));
    kv.emplace_back("infection.kernel_height", std::to_string(p.kernel.height));
    kv.emplace_back("infection.otsu_guard", format_double(p.otsu_guard));
}

void append_mask_source(KeyValues& kv, const fs::path& lung_mask_dir, double air_threshold) {
    if (lung_mask_dir.empty()) {
        kv.emplace_back("mask_source", "classical_fallback");
        kv.emplace_back("air_threshold", format_double(air_threshold));
    } else {
        kv.emplace_back("mask_source", "external_directory");
        kv.emplace_back("lung_mask_dir", lung_mask_dir.string());
    }
}

MaskSource make_mask_source(const fs::path& lung_mask_dir, double air_threshold) {
    MaskSource source;
    if (lung_mask_dir.empty()) {
        source.kind = MaskSource::Kind::classical_fallback;
        source.air_threshold = air_threshold;
    } else {
        source.kind = MaskSource::Kind::external_directory;
        source.directory = lung_mask_dir;
    }
    return source;
}

std::string rates_csv_text(const std::vector<SliceResult>& results) {
    std::string csv = "slice,retained,left_rate,right_rate\n";
    for (const auto& r : results) {
        csv += std::to_string(r.index);
        csv += r.retained ? ",1," : ",0,";
        csv += format_double(r.left_rate);
        csv += ',';
        csv += format_double(r.right_rate);
        csv += '\n';
    }
    return csv;
}

std::vector<SliceResult> read_rates_csv(const fs::path& path) {
    const auto rows = read_csv(path);
    const std::vector<std::string> header{"slice", "retained", "left_rate", "right_rate"};
    if (rows.empty() || rows.front() != header)
        throw DataError("bad rates CSV header in " + path.string());
    std::vector<SliceResult> results;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& cells = rows[i];
        if (cells.size() != 4) throw DataError("bad rates CSV row in " + path.string());
        SliceResult r;
        r.index = parse_int(cells[0], path.string());
        const int flag = parse_int(cells[1], path.string());
        if (flag != 0 && flag != 1)
            throw DataError("rates CSV retained flag must be 0 or 1 in " + path.string());
        r.retained = flag == 1;
        r.left_rate = parse_double(cells[2], path.string());
        r.right_rate = parse_double(cells[3], path.string());
        results.push_back(std::move(r));
    }
    return results;
}

/// Accepts any CSV with id and label columns (the phantom manifest included).
std::map<std::string, int> read_labels_csv(const fs::path& path) {
    const auto rows = read_csv(path);
    if (rows.empty()) throw DataError("empty labels file: " + path.string());
    const auto& header = rows.front();
    const auto id_it = std::find(header.begin(), header.end(), "id");
    const auto label_it = std::find(header.begin(), header.end(), "label");
    if (id_it == header.end() || label_it == header.end())
        throw DataError("labels file needs id and label columns: " + path.string());
    const std::size_t id_col = static_cast<std::size_t>(id_it - header.begin());
    const std::size_t label_col = static_cast<std::size_t>(label_it - header.begin());
    std::map<std::string, int> labels;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& cells = rows[i];
        if (cells.size() <= std::max(id_col, label_col))
            throw DataError("short row in labels file: " + path.string());
        labels[cells[id_col]] = parse_int(cells[label_col], path.string());
    }
    return labels;
}

std::vector<SliceResult> run_segmentation(const fs::path& scan_dir,
                                          const fs::path& lung_mask_dir, double air_threshold,
                                          const GateParams& gate, const InfectionParams& params,
                                          int threads, const DebugSink& debug, ScanVolume* out_scan) {
    ScanVolume scan = load_scan(scan_dir);
    const auto lungs = resolve_lung_masks(scan, make_mask_source(lung_mask_dir, air_threshold),
                                          threads);
    auto results = process_scan(scan, lungs, gate, params, threads, debug);
    if (out_scan) *out_scan = std::move(scan);
    return results;
}

Dataset dataset_from_rows(const std::vector<FeatureRow>& rows) {
    Dataset data;
    for (const auto& row : rows) {
        if (!row.label)
            throw DataError("feature row for " + row.patient_id + " carries no label");
        data.X.push_back(row.values);
        data.y.push_back(*row.label);
    }
    data.validate();
    return data;
}

std::map<std::string, int> read_predictions_csv(const fs::path& path) {
    const auto rows = read_csv(path);
    const std::vector<std::string> header{"patient_id", "predicted"};
    if (rows.empty() || rows.front() != header)
        throw DataError("bad predictions CSV header in " + path.string());
    std::map<std::string, int> pred;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& cells = rows[i];
        if (cells.size() != 2) throw DataError("bad predictions row in " + path.string());
        pred[cells[0]] = parse_int(cells[1], path.string());
    }
    return pred;
}

} // namespace

void cmd_segment(const SegmentOptions& opt) {
    opt.gate.validate();
    opt.infection.validate();
    if (opt.out_rates.empty()) throw DataError("segment: an output rates path is required");

    DebugSink debug;
    if (!opt.debug_dir.empty()) {
        debug.directory = opt.debug_dir;
        debug.enabled = true;
        fs::create_directories(debug.directory);
    }
    ScanVolume scan;
    const auto results = run_segmentation(opt.scan_dir, opt.lung_mask_dir, opt.air_threshold,
                                          opt.gate, opt.infection, opt.threads, debug, &scan);

    ensure_parent(opt.out_rates);
    write_text_file(opt.out_rates, rates_csv_text(results));

    if (!opt.out_mask_dir.empty()) {
        fs::create_directories(opt.out_mask_dir);
        for (std::size_t i = 0; i < results.size(); ++i) {
            fs::path name = scan.slice_names[i];
            name.replace_extension(".png");
            save_mask_png(results[i].infection, opt.out_mask_dir / name);
        }
    }

    KeyValues kv;
    kv.emplace_back("scan_dir", opt.scan_dir.string());
    kv.emplace_back("out_rates", opt.out_rates.string());
    if (!opt.out_mask_dir.empty()) kv.emplace_back("out_mask_dir", opt.out_mask_dir.string());
    if (!opt.debug_dir.empty()) kv.emplace_back("debug_dir", opt.debug_dir.string());
    append_mask_source(kv, opt.lung_mask_dir, opt.air_threshold);
    append_gate(kv, opt.gate);
    append_infection(kv, opt.infection);
    write_echo(opt.out_rates, "segment", kv);
}

void cmd_featurize(const FeaturizeOptions& opt) {
    opt.gate.validate();
    opt.infection.validate();
    if (opt.out_features.empty()) throw DataError("featurize: an output path is required");
    const bool from_rates = !opt.rates_csvs.empty();
    const bool from_scans = !opt.scan_dirs.empty();
    if (from_rates == from_scans)
        throw DataError("featurize: provide either rates CSVs or scan directories");

    std::map<std::string, int> labels;
    if (!opt.labels_csv.empty()) labels = read_labels_csv(opt.labels_csv);

    std::vector<FeatureRow> rows;
    std::vector<std::string> excluded;
    const auto consume = [&](const std::string& id, const std::vector<SliceResult>& results) {
        const bool any_retained = std::any_of(results.begin(), results.end(),
                                              [](const SliceResult& r) { return r.retained; });
        if (!any_retained) {
            excluded.push_back(id);
            return;
        }
        FeatureRow row;
        row.patient_id = id;
        row.values = build_feature_vector(results);
        if (!opt.labels_csv.empty()) {
            const auto it = labels.find(id);
            if (it == labels.end())
                throw DataError("no label for " + id + " in " + opt.labels_csv.string());
            row.label = it->second;
        }
        rows.push_back(std::move(row));
    };

    if (from_rates) {
        for (const auto& path : opt.rates_csvs)
            consume(path.stem().string(), read_rates_csv(path));
    } else {
        for (const auto& dir : opt.scan_dirs) {
            fs::path trimmed = dir;
            if (trimmed.filename().empty()) trimmed = trimmed.parent_path();
            const std::string id = trimmed.filename().string();
            const fs::path mask_dir =
                opt.lung_mask_root.empty() ? fs::path{} : opt.lung_mask_root / id;
            consume(id, run_segmentation(dir, mask_dir, opt.air_threshold, opt.gate,
                                         opt.infection, opt.threads, {}, nullptr));
        }
    }

    ensure_parent(opt.out_features);
    write_feature_csv(opt.out_features, rows);

    fs::path exclusions = opt.out_features;
    exclusions.replace_extension(".exclusions.csv");
    std::string report = "patient_id,reason\n";
    for (const auto& id : excluded) report += id + ",no_retained_slices\n";
    write_text_file(exclusions, report);

    KeyValues kv;
    kv.emplace_back("mode", from_rates ? "rates" : "scans");
    if (from_rates) {
        for (const auto& path : opt.rates_csvs) kv.emplace_back("rates_csv", path.string());
    } else {
        for (const auto& dir : opt.scan_dirs) kv.emplace_back("scan_dir", dir.string());
        append_mask_source(kv, opt.lung_mask_root, opt.air_threshold);
        append_gate(kv, opt.gate);
        append_infection(kv, opt.infection);
    }
    if (!opt.labels_csv.empty()) kv.emplace_back("labels_csv", opt.labels_csv.string());
    kv.emplace_back("out_features", opt.out_features.string());
    write_echo(opt.out_features, "featurize", kv);
}

void cmd_train(const TrainOptions& opt) {
    const Dataset data = dataset_from_rows(read_feature_csv(opt.features_csv));
    if (opt.out_model.empty()) throw DataError("train: an output model path is required");

    GbParams gb = opt.gboost;
    gb.seed = opt.seed;
    ErtParams ert = opt.ert;
    ert.seed = opt.seed;
    gb.validate();
    opt.svm.validate();

    std::unique_ptr<Model> model;
    KeyValues kv;
    kv.emplace_back("features_csv", opt.features_csv.string());
    kv.emplace_back("out_model", opt.out_model.string());
    kv.emplace_back("model_kind", opt.model_kind);
    kv.emplace_back("seed", std::to_string(opt.seed));
    const auto append_gb = [&] {
        kv.emplace_back("gboost.n_rounds", std::to_string(gb.n_rounds));
        kv.emplace_back("gboost.learning_rate", format_double(gb.learning_rate));
        kv.emplace_back("gboost.max_depth", std::to_string(gb.max_depth));
    };
    const auto append_ert = [&] {
        kv.emplace_back("ert.n_trees", std::to_string(ert.n_trees));
        kv.emplace_back("ert.k_features", std::to_string(ert.k_features));
        kv.emplace_back("ert.min_samples_split", std::to_string(ert.min_samples_split));
    };
    const auto append_svm = [&] {
        kv.emplace_back("svm.kernel", opt.svm.kernel == SvmKernel::rbf ? "rbf" : "linear");
        kv.emplace_back("svm.gamma", format_double(opt.svm.gamma));
        kv.emplace_back("svm.C", format_double(opt.svm.C));
        kv.emplace_back("svm.tol", format_double(opt.svm.tol));
        kv.emplace_back("svm.max_passes", std::to_string(opt.svm.max_passes));
    };

    if (opt.model_kind == "ensemble") {
        model = train_ensemble(data, gb, ert, opt.svm, opt.threads);
        append_gb();
        append_ert();
        append_svm();
    } else if (opt.model_kind == "gboost") {
        model = train_gboost(data, gb);
        append_gb();
    } else if (opt.model_kind == "ert") {
        model = train_ert(data, ert, opt.threads);
        append_ert();
    } else if (opt.model_kind == "svm") {
        model = train_svm(data, opt.svm, opt.threads);
        append_svm();
    } else if (opt.model_kind == "knn") {
        model = train_knn(data, opt.knn);
        kv.emplace_back("knn.k", std::to_string(opt.knn.k));
    } else if (opt.model_kind == "logreg") {
        model = train_logreg(data, opt.logreg);
        kv.emplace_back("logreg.learning_rate", format_double(opt.logreg.learning_rate));
        kv.emplace_back("logreg.epochs", std::to_string(opt.logreg.epochs));
    } else {
        throw DataError("unknown model kind: " + opt.model_kind);
    }

    ensure_parent(opt.out_model);
    save_model(*model, opt.out_model);
    write_echo(opt.out_model, "train", kv);
}

void cmd_predict(const PredictOptions& opt) {
    const auto rows = read_feature_csv(opt.features_csv);
    if (opt.out_predictions.empty()) throw DataError("predict: an output path is required");
    const auto model = load_model(opt.model_path);

    std::string csv = "patient_id,predicted\n";
    for (const auto& row : rows)
        csv += row.patient_id + "," + std::to_string(model->predict(row.values).severity) + "\n";
    ensure_parent(opt.out_predictions);
    write_text_file(opt.out_predictions, csv);

    KeyValues kv;
    kv.emplace_back("features_csv", opt.features_csv.string());
    kv.emplace_back("model", opt.model_path.string());
    kv.emplace_back("model_kind", model->kind());
    kv.emplace_back("out_predictions", opt.out_predictions.string());
    write_echo(opt.out_predictions, "predict", kv);
}

void cmd_evaluate(const EvaluateOptions& opt) {
    const auto rows = read_feature_csv(opt.features_csv);
    if (opt.out_dir.empty()) throw DataError("evaluate: an output directory is required");
    const bool from_model = !opt.model_path.empty();
    if (from_model == !opt.predictions_csv.empty())
        throw DataError("evaluate: provide either a model or a predictions CSV");

    std::vector<int> y_true, y_pred;
    std::string source_kind;
    if (from_model) {
        const auto model = load_model(opt.model_path);
        source_kind = model->kind();
        for (const auto& row : rows) {
            if (!row.label)
                throw DataError("feature row for " + row.patient_id + " carries no label");
            y_true.push_back(*row.label);
            y_pred.push_back(model->predict(row.values).severity);
        }
    } else {
        const auto pred = read_predictions_csv(opt.predictions_csv);
        for (const auto& row : rows) {
            if (!row.label)
                throw DataError("feature row for " + row.patient_id + " carries no label");
            const auto it = pred.find(row.patient_id);
            if (it == pred.end())
                throw DataError("no prediction for " + row.patient_id + " in " +
                                opt.predictions_csv.string());
            y_true.push_back(*row.label);
            y_pred.push_back(it->second);
        }
    }

    const ConfusionMatrix cm = confusion_matrix(y_true, y_pred);
    const MetricsReport report = macro_metrics(cm);
    fs::create_directories(opt.out_dir);
    write_text_file(opt.out_dir / "metrics.txt", format_metrics_table(report));
    write_text_file(opt.out_dir / "metrics.csv", format_metrics_csv(report));
    write_text_file(opt.out_dir / "confusion.csv", format_confusion_csv(cm));

    KeyValues kv;
    kv.emplace_back("features_csv", opt.features_csv.string());
    if (from_model) {
        kv.emplace_back("model", opt.model_path.string());
        kv.emplace_back("model_kind", source_kind);
    } else {
        kv.emplace_back("predictions_csv", opt.predictions_csv.string());
    }
    kv.emplace_back("out_dir", opt.out_dir.string());
    write_echo(opt.out_dir / "metrics.txt", "evaluate", kv);
}

void cmd_wam(const WamOptions& opt) {
    const auto rows = read_feature_csv(opt.features_csv);
    if (opt.out_csv.empty()) throw DataError("wam: an output path is required");

    std::string csv = "patient_id,mean_score,wam_class\n";
    for (const auto& row : rows) {
        std::vector<SliceResult> pseudo(kFeaturePairs);
        for (int p = 0; p < kFeaturePairs; ++p) {
            pseudo[p].retained = true;
            pseudo[p].left_rate = row.values[static_cast<std::size_t>(2 * p)];
            pseudo[p].right_rate = row.values[static_cast<std::size_t>(2 * p + 1)];
        }
        const WamResult result = scan_wam(pseudo);
        csv += row.patient_id + "," + format_double(result.mean_score) + "," +
               std::to_string(result.severity) + "\n";
    }
    ensure_parent(opt.out_csv);
    write_text_file(opt.out_csv, csv);

    KeyValues kv;
    kv.emplace_back("features_csv", opt.features_csv.string());
    kv.emplace_back("out_csv", opt.out_csv.string());
    write_echo(opt.out_csv, "wam", kv);
}

void cmd_phantom(const PhantomOptions& opt) {
    if (opt.out_dir.empty()) throw DataError("phantom: an output directory is required");
    if (opt.per_class < 1) throw DataError("phantom: per_class must be >= 1");
    generate_corpus(opt.out_dir, opt.per_class, opt.seed, opt.base, opt.threads);

    KeyValues kv;
    kv.emplace_back("out_dir", opt.out_dir.string());
    kv.emplace_back("per_class", std::to_string(opt.per_class));
    kv.emplace_back("seed", std::to_string(opt.seed));
    kv.emplace_back("n_slices", std::to_string(opt.base.n_slices));
    kv.emplace_back("width", std::to_string(opt.base.width));
    kv.emplace_back("height", std::to_string(opt.base.height));
    kv.emplace_back("vessel_density", format_double(opt.base.vessel_density));
    kv.emplace_back("noise_sigma", format_double(opt.base.noise_sigma));
    write_echo(opt.out_dir / "manifest.csv", "phantom", kv);
}

} // namespace ctsev

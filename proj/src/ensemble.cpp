#include "ctsev/classifiers.hpp"

#include <fstream>

#include <zlib.h>

namespace ctsev {

int ensemble_vote(int gboost_vote, int ert_vote, int svm_vote) {
    // With two members agreeing the agreed class wins; ert==svm is the only
    // majority that can exclude gboost, and gboost's vote is the priority
    // fallback when all three disagree.
    return ert_vote == svm_vote ? ert_vote : gboost_vote;
}

Prediction EnsembleModel::predict(const FeatureVector& x) const {
    if (!gboost || !ert || !svm) throw InternalError("EnsembleModel: missing member");
    const int vg = gboost->predict(x).severity;
    const int ve = ert->predict(x).severity;
    const int vs = svm->predict(x).severity;
    Prediction p;
    p.severity = ensemble_vote(vg, ve, vs);
    p.scores[vg - 1] += 1.0 / 3.0;
    p.scores[ve - 1] += 1.0 / 3.0;
    p.scores[vs - 1] += 1.0 / 3.0;
    return p;
}

std::unique_ptr<EnsembleModel> train_ensemble(const Dataset& data, const GbParams& gb,
                                              const ErtParams& ert, const SvmParams& svm,
                                              int threads) {
    auto model = std::make_unique<EnsembleModel>();
    model->gboost = train_gboost(data, gb);
    model->ert = train_ert(data, ert, threads);
    model->svm = train_svm(data, svm, threads);
    return model;
}

void EnsembleModel::write_payload(BinaryWriter& out) const {
    if (!gboost || !ert || !svm) throw InternalError("EnsembleModel: missing member");
    gboost->write_payload(out);
    ert->write_payload(out);
    svm->write_payload(out);
}

std::unique_ptr<EnsembleModel> EnsembleModel::load_payload(BinaryReader& in) {
    auto model = std::make_unique<EnsembleModel>();
    model->gboost = GboostModel::load_payload(in);
    model->ert = ErtModel::load_payload(in);
    model->svm = SvmModel::load_payload(in);
    return model;
}

// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[] = "CTSEV01";
constexpr std::size_t kMagicLen = 7;

std::uint32_t checksum(const unsigned char* data, std::size_t size) {
    return static_cast<std::uint32_t>(
        crc32(crc32(0L, Z_NULL, 0), data, static_cast<uInt>(size)));
}

} // namespace

void save_model(const Model& model, const std::filesystem::path& path) {
    BinaryWriter body;
    body.str(model.kind());
    model.write_payload(body);

    BinaryWriter file;
    for (std::size_t i = 0; i < kMagicLen; ++i) file.u8(static_cast<std::uint8_t>(kMagic[i]));
    file.u64(body.buffer().size());
    std::vector<unsigned char> bytes = file.buffer();
    bytes.insert(bytes.end(), body.buffer().begin(), body.buffer().end());
    const std::uint32_t crc = checksum(bytes.data(), bytes.size());
    bytes.push_back(static_cast<unsigned char>(crc));
    bytes.push_back(static_cast<unsigned char>(crc >> 8));
    bytes.push_back(static_cast<unsigned char>(crc >> 16));
    bytes.push_back(static_cast<unsigned char>(crc >> 24));

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot open model file for writing: " + path.string());
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw DataError("cannot write model file: " + path.string());
}

std::unique_ptr<Model> load_model(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open model file: " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                     std::istreambuf_iterator<char>());

    if (bytes.size() < kMagicLen + 8 + 4 ||
        !std::equal(kMagic, kMagic + kMagicLen, bytes.begin()))
        throw DataError("not a model file: " + path.string());

    const std::size_t body_end = bytes.size() - 4;
    const std::uint32_t stored = static_cast<std::uint32_t>(bytes[body_end]) |
                                 (static_cast<std::uint32_t>(bytes[body_end + 1]) << 8) |
                                 (static_cast<std::uint32_t>(bytes[body_end + 2]) << 16) |
                                 (static_cast<std::uint32_t>(bytes[body_end + 3]) << 24);
    if (checksum(bytes.data(), body_end) != stored)
        throw DataError("corrupt model file (checksum mismatch): " + path.string());

    BinaryReader header(bytes.data() + kMagicLen, body_end - kMagicLen);
    const std::uint64_t body_len = header.u64();
    if (body_len != body_end - kMagicLen - 8)
        throw DataError("corrupt model file (bad length): " + path.string());

    BinaryReader body(bytes.data() + kMagicLen + 8, body_len);
    const std::string kind = body.str();
    std::unique_ptr<Model> model;
    if (kind == "ert")
        model = ErtModel::load_payload(body);
    else if (kind == "gboost")
        model = GboostModel::load_payload(body);
    else if (kind == "svm")
        model = SvmModel::load_payload(body);
    else if (kind == "knn")
        model = KnnModel::load_payload(body);
    else if (kind == "logreg")
        model = LogregModel::load_payload(body);
    else if (kind == "ensemble")
        model = EnsembleModel::load_payload(body);
    else
        throw DataError("unsupported model kind '" + kind + "' in " + path.string());
    if (!body.at_end())
        throw DataError("corrupt model file (trailing bytes): " + path.string());
    return model;
}

} // namespace ctsev

#include "retina/commands.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>

namespace retina {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path + ": cannot open for writing");
    out << text;
}

std::string resolve(const std::string& base_file, const std::string& rel) {
    fs::path p(rel);
    if (p.is_absolute()) return rel;
    return (fs::path(base_file).parent_path() / p).string();
}

ClassLabel class_of_index(int i) { return label_from_code(i); }

}  // namespace

Manifest cmd_synth(const PipelineConfig& cfg, int count, std::uint32_t seed_base,
                   const std::string& out_dir) {
    if (count < 1) throw ConfigError("synth: count must be >= 1");
    fs::create_directories(out_dir);

    Manifest manifest;
    std::uint32_t seed = seed_base;
    for (int c = 0; c < kNumClasses; ++c) {
        for (int i = 0; i < count; ++i, ++seed) {
            SynthParams params = cfg.synth;
            params.label = class_of_index(c);
            params.seed = seed;
            SynthResult r = generate_fundus(params);

            char idx[16];
            std::snprintf(idx, sizeof(idx), "%03d", i);
            ManifestEntry e;
            e.id = std::string(to_string(params.label)) + "_" + idx;
            e.label = params.label;
            e.seed = seed;
            e.image = e.id + ".ppm";
            e.vessel_mask = e.id + "_vessels.pgm";
            e.lesion_mask = e.id + "_lesions.pgm";
            e.lesion_count = r.truth.lesion_count;

            save_ppm(r.image, (fs::path(out_dir) / e.image).string());
            save_mask(r.truth.vessel_mask, (fs::path(out_dir) / e.vessel_mask).string());
            save_mask(r.truth.lesion_mask, (fs::path(out_dir) / e.lesion_mask).string());

            json truth = {{"id", e.id},
                          {"class", to_string(e.label)},
                          {"seed", e.seed},
                          {"lesion_count", e.lesion_count}};
            write_text((fs::path(out_dir) / (e.id + ".json")).string(), truth.dump(2) + "\n");
            manifest.entries.push_back(std::move(e));
        }
    }
    save_manifest(manifest, (fs::path(out_dir) / "manifest.json").string());
    return manifest;
}

namespace {

json run_one(const PipelineConfig& cfg, const ColorImage& img, const std::string& image_path,
             const std::string& image_id, const RunOptions& opts, const ModelSet* models,
             ClassLabel* predicted_out) {
    ExtractionResult ex = extract_features(img, cfg);

    json report;
    report["schema_version"] = 1;
    report["schema_id"] = cfg.features.id();
    report["image_id"] = image_id;
    report["image"] = image_path;
    report["feature_vector"] = ex.features;
    report["vessel_pixels"] = ex.vessel_mask.count();

    BinaryMask lesions = lesion_candidates(ex.gray, ex.vessel_mask);
    ColorImage overlay = render_overlay(img, ex.vessel_mask, lesions);
    std::string overlay_path = (fs::path(opts.out_dir) / (image_id + "_overlay.ppm")).string();
    std::string mask_path = (fs::path(opts.out_dir) / (image_id + "_vessels.pgm")).string();
    save_ppm(overlay, overlay_path);
    save_mask(ex.vessel_mask, mask_path);
    report["outputs"] = {{"overlay", image_id + "_overlay.ppm"},
                         {"vessel_mask", image_id + "_vessels.pgm"}};

    if (models != nullptr) {
        if (models->schema_id != cfg.features.id())
            throw ConfigError("model schema '" + models->schema_id + "' does not match config '" +
                              cfg.features.id() + "'");
        Classification cls = classify(*models, ex.features);
        json errors;
        for (const auto& [label, err] : cls.errors) errors[to_string(label)] = err;
        report["classification"] = {
            {"predicted", to_string(cls.label)}, {"tie", cls.tie}, {"errors", errors}};
        if (predicted_out != nullptr) *predicted_out = cls.label;
    }
    if (opts.timings) {
        report["timings_ms"] = {{"preprocess", ex.ms_preprocess},
                                {"segment", ex.ms_segment},
                                {"features", ex.ms_features}};
    }
    return report;
}

}  // namespace

json cmd_run_image(const PipelineConfig& cfg, const std::string& image_path,
                   const std::string& image_id, const RunOptions& opts) {
    fs::create_directories(opts.out_dir);
    ModelSet models;
    bool have_models = !opts.model_path.empty();
    if (have_models) models = load_model_set(opts.model_path);

    ColorImage img = load_ppm(image_path);
    json report = run_one(cfg, img, image_path, image_id, opts, have_models ? &models : nullptr, nullptr);
    write_text((fs::path(opts.out_dir) / (image_id + "_report.json")).string(), report.dump(2) + "\n");
    return report;
}

void cmd_run_manifest(const PipelineConfig& cfg, const std::string& manifest_path,
                      const RunOptions& opts) {
    fs::create_directories(opts.out_dir);
    Manifest manifest = load_manifest(manifest_path);
    if (manifest.entries.empty()) throw DataError(manifest_path + ": manifest has no entries");

    ModelSet models;
    bool have_models = !opts.model_path.empty();
    if (have_models) models = load_model_set(opts.model_path);

    json predictions = json::array();
    for (const ManifestEntry& e : manifest.entries) {
        ColorImage img = load_ppm(resolve(manifest_path, e.image));
        ClassLabel predicted = ClassLabel::Normal;
        json report = run_one(cfg, img, e.image, e.id, opts, have_models ? &models : nullptr,
                              have_models ? &predicted : nullptr);
        write_text((fs::path(opts.out_dir) / (e.id + "_report.json")).string(), report.dump(2) + "\n");
        if (have_models)
            predictions.push_back({{"id", e.id}, {"predicted", to_string(predicted)}});
    }
    if (have_models) {
        json doc = {{"schema_version", 1}, {"predictions", predictions}};
        write_text((fs::path(opts.out_dir) / "predictions.json").string(), doc.dump(2) + "\n");
    }
}

ModelSet cmd_train(const PipelineConfig& cfg, const std::string& manifest_path,
                   const std::string& model_out_path) {
    Manifest manifest = load_manifest(manifest_path);
    if (manifest.entries.empty()) throw DataError(manifest_path + ": manifest has no entries");

    std::vector<LabeledSample> dataset;
    dataset.reserve(manifest.entries.size());
    for (const ManifestEntry& e : manifest.entries) {
        ColorImage img = load_ppm(resolve(manifest_path, e.image));
        ExtractionResult ex = extract_features(img, cfg);
        dataset.push_back({e.label, std::move(ex.features)});
    }

    PerClassTraining trained = train_per_class(dataset, cfg.train, cfg.hidden_dims, cfg.features.id());

    fs::path out(model_out_path);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    save_model_set(trained.set, model_out_path);

    for (const auto& [label, curve] : trained.curves) {
        std::string text;
        for (size_t epoch = 0; epoch < curve.size(); ++epoch)
            text += std::to_string(epoch) + "," + format_double(curve[epoch]) + "\n";
        fs::path curve_path = out.parent_path() / ("curve_" + std::string(to_string(label)) + ".txt");
        write_text(curve_path.string(), text);
    }
    return trained.set;
}

ConfusionCounts cmd_eval(const std::string& predictions_path, const std::string& truth_manifest_path,
                         const std::string& out_path) {
    Manifest truth = load_manifest(truth_manifest_path);

    std::ifstream in(predictions_path, std::ios::binary);
    if (!in) throw DataError(predictions_path + ": cannot open predictions");
    json pdoc;
    try {
        pdoc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError(predictions_path + std::string(": ") + e.what());
    }

    std::map<std::string, ClassLabel> predicted;
    try {
        for (const json& jp : pdoc.at("predictions"))
            predicted[jp.at("id").get<std::string>()] =
                label_from_string(jp.at("predicted").get<std::string>());
    } catch (const json::exception& e) {
        throw DataError(predictions_path + std::string(": ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(predictions_path + std::string(": ") + e.what());
    }

    if (predicted.size() != truth.entries.size())
        throw DataError("predictions and truth manifest differ in size (" +
                        std::to_string(predicted.size()) + " vs " +
                        std::to_string(truth.entries.size()) + ")");

    std::vector<std::pair<ClassLabel, ClassLabel>> pairs;
    for (const ManifestEntry& e : truth.entries) {
        auto it = predicted.find(e.id);
        if (it == predicted.end()) throw DataError("no prediction for id '" + e.id + "'");
        pairs.push_back({e.label, it->second});
    }

    ConfusionCounts counts = tally(pairs);
    fs::path out(out_path);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_text(out_path, confusion_to_json(counts).dump(2) + "\n");
    return counts;
}

}  // namespace retina

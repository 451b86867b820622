#include "retina/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

namespace retina {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& ctx, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(ctx + ": expected an object");
    for (const auto& [key, _] : j.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (key == a) {
                known = true;
                break;
            }
        if (!known) throw ConfigError(ctx + ": unknown key '" + key + "'");
    }
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void read_range(const json& j, const char* key, int& lo, int& hi, const std::string& ctx) {
    if (!j.contains(key)) return;
    const json& r = j.at(key);
    if (!r.is_array() || r.size() != 2) throw ConfigError(ctx + "." + key + ": expected [min, max]");
    lo = r[0].get<int>();
    hi = r[1].get<int>();
    if (lo > hi) throw ConfigError(ctx + "." + key + ": min exceeds max");
}

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

PipelineConfig config_from_json(const json& doc) {
    PipelineConfig cfg;
    check_keys(doc, "config",
               {"preprocess", "vesselness", "dbded", "segmentation", "features", "classifier", "synth"});

    if (doc.contains("preprocess")) {
        const json& j = doc.at("preprocess");
        check_keys(j, "preprocess", {"gray_mode", "equalize", "median_kernel"});
        if (j.contains("gray_mode")) {
            std::string mode = j.at("gray_mode").get<std::string>();
            if (mode == "green")
                cfg.preprocess.gray_mode = GrayMode::Green;
            else if (mode == "luminance")
                cfg.preprocess.gray_mode = GrayMode::Luminance;
            else
                throw ConfigError("preprocess.gray_mode: expected 'green' or 'luminance'");
        }
        read_field(j, "equalize", cfg.preprocess.equalize);
        read_field(j, "median_kernel", cfg.preprocess.median_kernel);
        if (cfg.preprocess.median_kernel < 1 || cfg.preprocess.median_kernel % 2 == 0)
            throw ConfigError("preprocess.median_kernel: must be odd and >= 1");
    }

    if (doc.contains("vesselness")) {
        const json& j = doc.at("vesselness");
        check_keys(j, "vesselness", {"num_orientations", "line_length", "smoothing_sigma", "dark_vessels"});
        VesselnessConfig& v = cfg.segmentation.vesselness;
        read_field(j, "num_orientations", v.num_orientations);
        read_field(j, "line_length", v.line_length);
        read_field(j, "smoothing_sigma", v.smoothing_sigma);
        read_field(j, "dark_vessels", v.dark_vessels);
        if (v.num_orientations < 4) throw ConfigError("vesselness.num_orientations: must be >= 4");
        if (v.line_length < 3 || v.line_length % 2 == 0)
            throw ConfigError("vesselness.line_length: must be odd and >= 3");
    }

    if (doc.contains("dbded")) {
        const json& j = doc.at("dbded");
        check_keys(j, "dbded", {"eta", "sample_offsets"});
        read_field(j, "eta", cfg.dbded.eta);
        read_field(j, "sample_offsets", cfg.dbded.sample_offsets);
        if (cfg.dbded.eta < 0) throw ConfigError("dbded.eta: must be >= 0");
    }

    if (doc.contains("segmentation")) {
        const json& j = doc.at("segmentation");
        check_keys(j, "segmentation",
                   {"marker_quantile", "mask_quantile", "min_component_px", "connectivity"});
        read_field(j, "marker_quantile", cfg.segmentation.marker_quantile);
        read_field(j, "mask_quantile", cfg.segmentation.mask_quantile);
        read_field(j, "min_component_px", cfg.segmentation.min_component_px);
        if (j.contains("connectivity")) {
            int c = j.at("connectivity").get<int>();
            if (c != 4 && c != 8) throw ConfigError("segmentation.connectivity: must be 4 or 8");
            cfg.segmentation.connectivity = c == 4 ? Connectivity::Four : Connectivity::Eight;
        }
        for (double q : {cfg.segmentation.marker_quantile, cfg.segmentation.mask_quantile})
            if (q <= 0.0 || q >= 1.0) throw ConfigError("segmentation quantiles must be in (0, 1)");
        if (cfg.segmentation.marker_quantile < cfg.segmentation.mask_quantile)
            throw ConfigError("segmentation.marker_quantile must be >= mask_quantile");
    }

    if (doc.contains("features")) {
        const json& j = doc.at("features");
        check_keys(j, "features",
                   {"window_rows", "window_cols", "block_grid", "zernike_n_max", "mask_statistics"});
        read_field(j, "window_rows", cfg.window.rows);
        read_field(j, "window_cols", cfg.window.cols);
        read_field(j, "block_grid", cfg.features.block_grid);
        read_field(j, "zernike_n_max", cfg.features.zernike_n_max);
        read_field(j, "mask_statistics", cfg.mask_statistics);
        if (cfg.window.rows < 1 || cfg.window.cols < 1 || cfg.window.rows % 2 == 0 ||
            cfg.window.cols % 2 == 0)
            throw ConfigError("features.window_*: must be odd and >= 1");
        if (cfg.features.block_grid < 1) throw ConfigError("features.block_grid: must be >= 1");
        if (cfg.features.zernike_n_max < 0) throw ConfigError("features.zernike_n_max: must be >= 0");
    }

    if (doc.contains("classifier")) {
        const json& j = doc.at("classifier");
        check_keys(j, "classifier", {"learning_rate", "epochs", "seed", "init_scale", "hidden_dims"});
        read_field(j, "learning_rate", cfg.train.learning_rate);
        read_field(j, "epochs", cfg.train.epochs);
        read_field(j, "seed", cfg.train.seed);
        read_field(j, "init_scale", cfg.train.init_scale);
        read_field(j, "hidden_dims", cfg.hidden_dims);
        if (cfg.train.learning_rate <= 0.0) throw ConfigError("classifier.learning_rate: must be > 0");
        if (cfg.train.epochs < 1) throw ConfigError("classifier.epochs: must be >= 1");
    }

    if (doc.contains("synth")) {
        const json& j = doc.at("synth");
        check_keys(j, "synth",
                   {"size", "noise_sigma", "lesion_contrast", "branch_depth", "drusen_count",
                    "dr_dot_count", "dr_patch_count", "gradient_strength"});
        read_field(j, "size", cfg.synth.size);
        read_field(j, "noise_sigma", cfg.synth.noise_sigma);
        read_field(j, "lesion_contrast", cfg.synth.lesion_contrast);
        read_field(j, "branch_depth", cfg.synth.branch_depth);
        read_field(j, "gradient_strength", cfg.synth.gradient_strength);
        read_range(j, "drusen_count", cfg.synth.drusen_count_min, cfg.synth.drusen_count_max, "synth");
        read_range(j, "dr_dot_count", cfg.synth.dr_dot_count_min, cfg.synth.dr_dot_count_max, "synth");
        read_range(j, "dr_patch_count", cfg.synth.dr_patch_count_min, cfg.synth.dr_patch_count_max,
                   "synth");
        if (cfg.synth.size < 64) throw ConfigError("synth.size: must be >= 64");
    }
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path + ": cannot open config");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    try {
        return config_from_json(doc);
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

json config_to_json(const PipelineConfig& cfg) {
    json doc;
    doc["preprocess"] = {
        {"gray_mode", cfg.preprocess.gray_mode == GrayMode::Green ? "green" : "luminance"},
        {"equalize", cfg.preprocess.equalize},
        {"median_kernel", cfg.preprocess.median_kernel}};
    doc["vesselness"] = {{"num_orientations", cfg.segmentation.vesselness.num_orientations},
                         {"line_length", cfg.segmentation.vesselness.line_length},
                         {"smoothing_sigma", cfg.segmentation.vesselness.smoothing_sigma},
                         {"dark_vessels", cfg.segmentation.vesselness.dark_vessels}};
    doc["dbded"] = {{"eta", cfg.dbded.eta}, {"sample_offsets", cfg.dbded.sample_offsets}};
    doc["segmentation"] = {{"marker_quantile", cfg.segmentation.marker_quantile},
                           {"mask_quantile", cfg.segmentation.mask_quantile},
                           {"min_component_px", cfg.segmentation.min_component_px},
                           {"connectivity", cfg.segmentation.connectivity == Connectivity::Four ? 4 : 8}};
    doc["features"] = {{"window_rows", cfg.window.rows},
                       {"window_cols", cfg.window.cols},
                       {"block_grid", cfg.features.block_grid},
                       {"zernike_n_max", cfg.features.zernike_n_max},
                       {"mask_statistics", cfg.mask_statistics}};
    doc["classifier"] = {{"learning_rate", cfg.train.learning_rate},
                         {"epochs", cfg.train.epochs},
                         {"seed", cfg.train.seed},
                         {"init_scale", cfg.train.init_scale},
                         {"hidden_dims", cfg.hidden_dims}};
    doc["synth"] = {{"size", cfg.synth.size},
                    {"noise_sigma", cfg.synth.noise_sigma},
                    {"lesion_contrast", cfg.synth.lesion_contrast},
                    {"branch_depth", cfg.synth.branch_depth},
                    {"gradient_strength", cfg.synth.gradient_strength},
                    {"drusen_count", {cfg.synth.drusen_count_min, cfg.synth.drusen_count_max}},
                    {"dr_dot_count", {cfg.synth.dr_dot_count_min, cfg.synth.dr_dot_count_max}},
                    {"dr_patch_count", {cfg.synth.dr_patch_count_min, cfg.synth.dr_patch_count_max}}};
    return doc;
}

ExtractionResult extract_features(const ColorImage& img, const PipelineConfig& cfg) {
    ExtractionResult out;
    auto t0 = std::chrono::steady_clock::now();
    out.gray = preprocess(img, cfg.preprocess);
    out.ms_preprocess = ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    out.vessel_mask = segment_vasculature(out.gray, cfg.segmentation);
    out.ms_segment = ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    FeatureMap lum = luminance_map(out.gray, cfg.window);
    FeatureMap density = vessel_density_map(out.vessel_mask, cfg.window);
    FeatureMap thickness = vessel_thickness_map(out.vessel_mask, cfg.window);
    FeatureMap orientation = vessel_orientation_map(out.vessel_mask, cfg.window);

    std::vector<std::uint8_t> stat_pixels;
    if (cfg.mask_statistics) {
        BinaryMask region = fundus_region_mask(out.gray);
        stat_pixels.reserve(region.count());
        for (size_t i = 0; i < region.bits.size(); ++i)
            if (region.bits[i]) stat_pixels.push_back(out.gray.pixels[i]);
    }
    if (stat_pixels.empty()) stat_pixels = out.gray.pixels;
    TextureStats stats = texture_stats(stat_pixels);

    // Zernike moments of the centered square crop
    const int side = std::min(out.gray.width, out.gray.height);
    GrayImage patch(side, side);
    const int ox = (out.gray.width - side) / 2, oy = (out.gray.height - side) / 2;
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) patch.at(x, y) = out.gray.at(x + ox, y + oy);
    ZernikeTable zernike = zernike_moments(patch, cfg.features.zernike_n_max);

    out.features =
        build_feature_vector(lum, density, thickness, orientation, stats, zernike, cfg.features);
    out.ms_features = ms_since(t0);
    return out;
}

BinaryMask lesion_candidates(const GrayImage& gray, const BinaryMask& vessel_mask) {
    GrayImage background = median_filter(gray, 21);
    BinaryMask fundus = fundus_region_mask(gray);
    BinaryMask cand(gray.width, gray.height);
    for (size_t i = 0; i < cand.bits.size(); ++i) {
        int diff = static_cast<int>(gray.pixels[i]) - static_cast<int>(background.pixels[i]);
        cand.bits[i] = std::abs(diff) >= 20 && !vessel_mask.bits[i] && fundus.bits[i];
    }
    return remove_small_components(cand, 10, Connectivity::Eight);
}

ColorImage render_overlay(const ColorImage& img, const BinaryMask& vessel_mask,
                          const BinaryMask& lesions) {
    ColorImage out = img;
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
            Rgb& p = out.at(x, y);
            if (vessel_mask.get(x, y))
                p.g = static_cast<std::uint8_t>((p.g + 255) / 2);
            if (lesions.get(x, y))
                p.r = static_cast<std::uint8_t>((p.r + 255) / 2);
        }
    return out;
}

void save_manifest(const Manifest& m, const std::string& path) {
    json doc;
    doc["schema_version"] = 1;
    json entries = json::array();
    for (const ManifestEntry& e : m.entries) {
        entries.push_back({{"id", e.id},
                           {"class", to_string(e.label)},
                           {"seed", e.seed},
                           {"image", e.image},
                           {"vessel_mask", e.vessel_mask},
                           {"lesion_mask", e.lesion_mask},
                           {"lesion_count", e.lesion_count}});
    }
    doc["entries"] = entries;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path + ": cannot open for writing");
    out << doc.dump(2) << "\n";
}

Manifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path + ": cannot open manifest");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError(path + ": " + e.what());
    }
    Manifest m;
    try {
        for (const json& je : doc.at("entries")) {
            ManifestEntry e;
            e.id = je.at("id").get<std::string>();
            e.label = label_from_string(je.at("class").get<std::string>());
            e.seed = je.at("seed").get<std::uint32_t>();
            e.image = je.at("image").get<std::string>();
            e.vessel_mask = je.value("vessel_mask", "");
            e.lesion_mask = je.value("lesion_mask", "");
            e.lesion_count = je.value("lesion_count", 0);
            m.entries.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw DataError(path + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(path + ": " + e.what());
    }
    return m;
}

OneVsRest ConfusionCounts::one_vs_rest(ClassLabel c) const {
    OneVsRest r;
    const int ci = static_cast<int>(c);
    for (int t = 0; t < kNumClasses; ++t)
        for (int p = 0; p < kNumClasses; ++p) {
            int n = counts[static_cast<size_t>(t)][static_cast<size_t>(p)];
            if (t == ci && p == ci)
                r.tp += n;
            else if (t == ci)
                r.fn += n;
            else if (p == ci)
                r.fp += n;
            else
                r.tn += n;
        }
    return r;
}

double ConfusionCounts::accuracy() const {
    if (total == 0) return 0.0;
    int correct = 0;
    for (int c = 0; c < kNumClasses; ++c) correct += counts[static_cast<size_t>(c)][static_cast<size_t>(c)];
    return static_cast<double>(correct) / total;
}

ConfusionCounts tally(const std::vector<std::pair<ClassLabel, ClassLabel>>& truth_predicted) {
    ConfusionCounts c;
    for (const auto& [truth, pred] : truth_predicted) {
        ++c.counts[static_cast<size_t>(truth)][static_cast<size_t>(pred)];
        ++c.total;
    }
    return c;
}

json confusion_to_json(const ConfusionCounts& c) {
    json doc;
    doc["schema_version"] = 1;
    doc["total"] = c.total;
    doc["accuracy"] = c.accuracy();
    json labels = json::array();
    for (int i = 0; i < kNumClasses; ++i) labels.push_back(to_string(label_from_code(i)));
    doc["labels"] = labels;
    json rows = json::array();
    for (int t = 0; t < kNumClasses; ++t) {
        json row = json::array();
        for (int p = 0; p < kNumClasses; ++p)
            row.push_back(c.counts[static_cast<size_t>(t)][static_cast<size_t>(p)]);
        rows.push_back(row);
    }
    doc["confusion"] = rows;
    json per_class;
    for (int i = 0; i < kNumClasses; ++i) {
        OneVsRest r = c.one_vs_rest(label_from_code(i));
        per_class[to_string(label_from_code(i))] = {
            {"tp", r.tp}, {"tn", r.tn}, {"fp", r.fp}, {"fn", r.fn}};
    }
    doc["per_class"] = per_class;
    return doc;
}

namespace {

void validate_node(const json& doc, const json& schema, const std::string& path,
                   std::vector<std::string>& errors) {
    if (schema.contains("enum")) {
        bool ok = false;
        for (const json& v : schema.at("enum"))
            if (v == doc) ok = true;
        if (!ok) errors.push_back(path + ": value not in enum");
        return;
    }
    if (!schema.contains("type")) return;
    const std::string type = schema.at("type").get<std::string>();
    if (type == "object") {
        if (!doc.is_object()) {
            errors.push_back(path + ": expected object");
            return;
        }
        if (schema.contains("required"))
            for (const json& r : schema.at("required"))
                if (!doc.contains(r.get<std::string>()))
                    errors.push_back(path + ": missing required key '" + r.get<std::string>() + "'");
        const json props = schema.value("properties", json::object());
        for (const auto& [key, sub] : props.items())
            if (doc.contains(key)) validate_node(doc.at(key), sub, path + "/" + key, errors);
        if (schema.value("additionalProperties", true) == false)
            for (const auto& [key, _] : doc.items())
                if (!props.contains(key)) errors.push_back(path + ": unexpected key '" + key + "'");
    } else if (type == "array") {
        if (!doc.is_array()) {
            errors.push_back(path + ": expected array");
            return;
        }
        if (schema.contains("items")) {
            size_t i = 0;
            for (const json& el : doc) validate_node(el, schema.at("items"), path + "/" + std::to_string(i++), errors);
        }
    } else if (type == "string") {
        if (!doc.is_string()) errors.push_back(path + ": expected string");
    } else if (type == "number") {
        if (!doc.is_number()) errors.push_back(path + ": expected number");
    } else if (type == "integer") {
        if (!doc.is_number_integer()) errors.push_back(path + ": expected integer");
    } else if (type == "boolean") {
        if (!doc.is_boolean()) errors.push_back(path + ": expected boolean");
    }
}

}  // namespace

std::vector<std::string> validate_against_schema(const json& doc, const json& schema) {
    std::vector<std::string> errors;
    validate_node(doc, schema, "", errors);
    return errors;
}

}  // namespace retina

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "retina/classifier.hpp"
#include "retina/features.hpp"
#include "retina/image.hpp"
#include "retina/preprocess.hpp"
#include "retina/synth.hpp"
#include "retina/vessel_seg.hpp"

// Pipeline composition and the file formats shared by the CLI subcommands:
// strict JSON config, dataset manifests, per-image reports, model files and
// evaluation summaries.

namespace retina {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PipelineConfig {
    PreprocessConfig preprocess;
    SegmentConfig segmentation;  // includes the vesselness settings
    DbdedConfig dbded;
    WindowSpec window;
    FeatureSchema features;
    bool mask_statistics = true;  // texture stats restricted to the fundus disk
    TrainConfig train;
    std::vector<int> hidden_dims;  // empty: single hidden layer of ceil(d/2)
    SynthParams synth;             // label/seed filled per generated image
};

// Strict parse: unknown keys are rejected, all keys optional with defaults.
PipelineConfig config_from_json(const nlohmann::json& doc);
PipelineConfig load_config(const std::string& path);
nlohmann::json config_to_json(const PipelineConfig& cfg);

struct ExtractionResult {
    GrayImage gray;
    BinaryMask vessel_mask;
    std::vector<double> features;
    double ms_preprocess = 0.0;
    double ms_segment = 0.0;
    double ms_features = 0.0;
};

ExtractionResult extract_features(const ColorImage& img, const PipelineConfig& cfg);

// Bright or dark blobs that stand out from the median-smoothed background,
// excluding vessels and the area outside the fundus disk.
BinaryMask lesion_candidates(const GrayImage& gray, const BinaryMask& vessel_mask);

// Input with the vessel mask blended into the green channel and lesion
// candidates into the red channel, both at alpha 0.5.
ColorImage render_overlay(const ColorImage& img, const BinaryMask& vessel_mask,
                          const BinaryMask& lesions);

struct ManifestEntry {
    std::string id;
    ClassLabel label = ClassLabel::Normal;
    std::uint32_t seed = 0;
    std::string image;  // paths relative to the manifest file
    std::string vessel_mask;
    std::string lesion_mask;
    int lesion_count = 0;
};

struct Manifest {
    std::vector<ManifestEntry> entries;
};

void save_manifest(const Manifest& m, const std::string& path);
Manifest load_manifest(const std::string& path);

struct OneVsRest {
    int tp = 0, tn = 0, fp = 0, fn = 0;
};

struct ConfusionCounts {
    std::array<std::array<int, kNumClasses>, kNumClasses> counts{};  // [truth][predicted]
    int total = 0;

    OneVsRest one_vs_rest(ClassLabel c) const;
    double accuracy() const;
};

ConfusionCounts tally(const std::vector<std::pair<ClassLabel, ClassLabel>>& truth_predicted);
nlohmann::json confusion_to_json(const ConfusionCounts& c);

// Minimal structural validator for the report schema shipped under docs/
// (supports type, properties, required, items, enum, additionalProperties).
std::vector<std::string> validate_against_schema(const nlohmann::json& doc,
                                                 const nlohmann::json& schema);

}  // namespace retina

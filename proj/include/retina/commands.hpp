#pragma once

#include <string>

#include "retina/pipeline.hpp"

// Subcommand implementations behind the CLI. All outputs are deterministic
// for a fixed (config, seed, inputs); reruns produce byte-identical files
// unless timings are requested.

namespace retina {

// `count` images per class with sequential seeds starting at seed_base;
// writes <out_dir>/<id>.ppm, <id>_vessels.pgm, <id>_lesions.pgm, <id>.json
// and a manifest.json listing everything.
Manifest cmd_synth(const PipelineConfig& cfg, int count, std::uint32_t seed_base,
                   const std::string& out_dir);

struct RunOptions {
    std::string model_path;  // empty: stage-only run, no classification block
    std::string out_dir;
    bool timings = false;
};

// Single image: writes <id>_report.json, <id>_overlay.ppm, <id>_vessels.pgm.
nlohmann::json cmd_run_image(const PipelineConfig& cfg, const std::string& image_path,
                             const std::string& image_id, const RunOptions& opts);

// Every manifest entry, plus predictions.json when a model is given.
void cmd_run_manifest(const PipelineConfig& cfg, const std::string& manifest_path,
                      const RunOptions& opts);

// Trains one network per class on the manifest images; writes the model JSON
// and per-class plain-text curves (epoch,error per line) next to it.
ModelSet cmd_train(const PipelineConfig& cfg, const std::string& manifest_path,
                   const std::string& model_out_path);

// Compares predictions.json against the truth manifest; writes the confusion
// report and returns it.
ConfusionCounts cmd_eval(const std::string& predictions_path, const std::string& truth_manifest_path,
                         const std::string& out_path);

}  // namespace retina

// Command line front end: synth | run | train | eval.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 internal
// numeric failure.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "retina/commands.hpp"

namespace {

retina::PipelineConfig load_or_default(const std::string& config_path) {
    if (config_path.empty()) return retina::PipelineConfig{};
    return retina::load_config(config_path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Retinal image analysis pipeline"};
    app.require_subcommand(1);

    std::string config_path, out_dir, out_path, manifest_path, model_path, image_path, predictions_path;
    int count = 1;
    std::uint32_t seed_base = 1;
    bool timings = false;

    CLI::App* synth = app.add_subcommand("synth", "Generate synthetic fundus images with ground truth");
    synth->add_option("--config", config_path, "Pipeline config JSON");
    synth->add_option("--out", out_dir, "Output directory")->required();
    synth->add_option("--count", count, "Images per class")->required();
    synth->add_option("--seed-base", seed_base, "First seed; images use sequential seeds");

    CLI::App* run = app.add_subcommand("run", "Run the pipeline on an image or a manifest");
    run->add_option("--config", config_path, "Pipeline config JSON");
    run->add_option("--image", image_path, "Input PPM image");
    run->add_option("--manifest", manifest_path, "Dataset manifest JSON");
    run->add_option("--model", model_path, "Trained model set (enables classification)");
    run->add_option("--out", out_dir, "Output directory")->required();
    run->add_flag("--timings", timings, "Include stage timings in reports (breaks byte determinism)");

    CLI::App* train = app.add_subcommand("train", "Train per-class networks from a manifest");
    train->add_option("--config", config_path, "Pipeline config JSON");
    train->add_option("--manifest", manifest_path, "Training manifest JSON")->required();
    train->add_option("--out", out_path, "Model output path")->required();

    CLI::App* eval = app.add_subcommand("eval", "Score predictions against a truth manifest");
    eval->add_option("--predictions", predictions_path, "predictions.json from `run`")->required();
    eval->add_option("--truth", manifest_path, "Truth manifest JSON")->required();
    eval->add_option("--out", out_path, "Evaluation report output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (synth->parsed()) {
            retina::PipelineConfig cfg = load_or_default(config_path);
            retina::cmd_synth(cfg, count, seed_base, out_dir);
            std::cout << "wrote " << out_dir << "/manifest.json\n";
        } else if (run->parsed()) {
            if (image_path.empty() == manifest_path.empty())
                throw retina::ConfigError("run: give exactly one of --image or --manifest");
            retina::PipelineConfig cfg = load_or_default(config_path);
            retina::RunOptions opts{model_path, out_dir, timings};
            if (!image_path.empty()) {
                std::string id = std::filesystem::path(image_path).stem().string();
                retina::cmd_run_image(cfg, image_path, id, opts);
            } else {
                retina::cmd_run_manifest(cfg, manifest_path, opts);
            }
        } else if (train->parsed()) {
            retina::PipelineConfig cfg = load_or_default(config_path);
            retina::cmd_train(cfg, manifest_path, out_path);
            std::cout << "wrote " << out_path << "\n";
        } else if (eval->parsed()) {
            retina::ConfusionCounts counts =
                retina::cmd_eval(predictions_path, manifest_path, out_path);
            std::cout << "accuracy " << counts.accuracy() << " over " << counts.total << " samples\n";
        }
    } catch (const retina::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const retina::ImageIoError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const retina::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const retina::TrainingDivergence& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

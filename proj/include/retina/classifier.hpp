#pragma once

#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Per-class auto-associative networks: equal input/output widths, narrower
// tanh hidden layers, identity output. An unknown vector is assigned to the
// class whose network reconstructs it with minimum squared error.

namespace retina {

enum class ClassLabel { Normal = 0, DiabeticRetinopathy = 1, Drusen = 2 };

constexpr int kNumClasses = 3;

const char* to_string(ClassLabel label);
ClassLabel label_from_string(const std::string& s);
ClassLabel label_from_code(int code);

struct TrainingDivergence : std::runtime_error {
    int epoch;
    explicit TrainingDivergence(int e)
        : std::runtime_error("training diverged (non-finite loss) at epoch " + std::to_string(e)),
          epoch(e) {}
};

struct Layer {
    int in = 0;
    int out = 0;
    std::vector<double> weights;  // out x in, row-major
    std::vector<double> bias;     // out
};

struct AannModel {
    int input_dim = 0;
    std::vector<Layer> layers;  // hidden layers (tanh) then the identity output layer
    ClassLabel class_label = ClassLabel::Normal;
};

struct TrainConfig {
    double learning_rate = 0.05;
    int epochs = 500;  // full-batch gradient descent
    std::uint32_t seed = 1;
    double init_scale = 0.2;
};

// Weights uniform in [-init_scale, init_scale], biases zero, deterministic
// for a given seed. Hidden widths must be strictly below the input width.
AannModel aann_init(int input_dim, const std::vector<int>& hidden_dims, std::uint32_t seed,
                    double init_scale);

std::vector<double> aann_forward(const AannModel& model, std::span<const double> x);

// sum_k (x_hat_k - x_k)^2
double reconstruction_error(const AannModel& model, std::span<const double> x);

// Mean over samples of the squared reconstruction error.
double mean_reconstruction_loss(const AannModel& model,
                                const std::vector<std::vector<double>>& samples);

// Analytic gradient of mean_reconstruction_loss, same shapes as the model.
std::vector<Layer> loss_gradient(const AannModel& model,
                                 const std::vector<std::vector<double>>& samples);

struct TrainResult {
    AannModel model;
    // curve[e] = loss entering epoch e; the final entry is the loss after the
    // last update (size epochs + 1)
    std::vector<double> curve;
};

TrainResult aann_train(const AannModel& model, const std::vector<std::vector<double>>& samples,
                       const TrainConfig& cfg);

struct LabeledSample {
    ClassLabel label;
    std::vector<double> features;
};

struct ModelSet {
    std::string schema_id;
    std::vector<double> standardize_mean;
    std::vector<double> standardize_std;
    std::vector<AannModel> models;  // ordered by class code
};

struct PerClassTraining {
    ModelSet set;
    std::map<ClassLabel, std::vector<double>> curves;
};

// One network per class, trained on that class's samples only. Inputs are
// standardized with mean/std computed over the full training set; those stats
// travel with the model set. Every class must be present.
PerClassTraining train_per_class(const std::vector<LabeledSample>& dataset, const TrainConfig& cfg,
                                 std::vector<int> hidden_dims, const std::string& schema_id);

struct Classification {
    ClassLabel label = ClassLabel::Normal;
    std::map<ClassLabel, double> errors;
    bool tie = false;  // minimum achieved by more than one class; lowest code wins
};

Classification classify(const ModelSet& set, std::span<const double> x);

// Single JSON document; round-trips byte-identically.
void save_model_set(const ModelSet& set, const std::string& path);
ModelSet load_model_set(const std::string& path);

}  // namespace retina

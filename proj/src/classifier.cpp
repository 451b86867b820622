#include "retina/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "retina/rng.hpp"

namespace retina {

const char* to_string(ClassLabel label) {
    switch (label) {
        case ClassLabel::Normal: return "normal";
        case ClassLabel::DiabeticRetinopathy: return "diabetic_retinopathy";
        case ClassLabel::Drusen: return "drusen";
    }
    return "normal";
}

ClassLabel label_from_string(const std::string& s) {
    if (s == "normal") return ClassLabel::Normal;
    if (s == "diabetic_retinopathy") return ClassLabel::DiabeticRetinopathy;
    if (s == "drusen") return ClassLabel::Drusen;
    throw std::invalid_argument("unknown class label '" + s + "'");
}

ClassLabel label_from_code(int code) {
    if (code < 0 || code >= kNumClasses) throw std::invalid_argument("unknown class code");
    return static_cast<ClassLabel>(code);
}

AannModel aann_init(int input_dim, const std::vector<int>& hidden_dims, std::uint32_t seed,
                    double init_scale) {
    if (input_dim < 2) throw std::invalid_argument("aann_init: input dimension must be >= 2");
    if (hidden_dims.empty()) throw std::invalid_argument("aann_init: need at least one hidden layer");
    for (int hd : hidden_dims)
        if (hd < 1 || hd >= input_dim)
            throw std::invalid_argument("aann_init: hidden widths must be in [1, input_dim)");

    AannModel model;
    model.input_dim = input_dim;
    Rng rng(seed);
    int prev = input_dim;
    std::vector<int> dims = hidden_dims;
    dims.push_back(input_dim);  // decoding layer restores the input width
    for (int dim : dims) {
        Layer layer;
        layer.in = prev;
        layer.out = dim;
        layer.weights.resize(static_cast<size_t>(dim) * prev);
        for (double& w : layer.weights) w = rng.uniform(-init_scale, init_scale);
        layer.bias.assign(static_cast<size_t>(dim), 0.0);
        model.layers.push_back(std::move(layer));
        prev = dim;
    }
    return model;
}

namespace {

// activations per layer; back() is the network output
std::vector<std::vector<double>> forward_trace(const AannModel& model, std::span<const double> x) {
    std::vector<std::vector<double>> acts;
    acts.reserve(model.layers.size() + 1);
    acts.emplace_back(x.begin(), x.end());
    for (size_t li = 0; li < model.layers.size(); ++li) {
        const Layer& layer = model.layers[li];
        const std::vector<double>& in = acts.back();
        std::vector<double> out(static_cast<size_t>(layer.out));
        for (int o = 0; o < layer.out; ++o) {
            double z = layer.bias[static_cast<size_t>(o)];
            const double* wrow = &layer.weights[static_cast<size_t>(o) * layer.in];
            for (int i = 0; i < layer.in; ++i) z += wrow[i] * in[static_cast<size_t>(i)];
            out[static_cast<size_t>(o)] = li + 1 < model.layers.size() ? std::tanh(z) : z;
        }
        acts.push_back(std::move(out));
    }
    return acts;
}

}  // namespace

std::vector<double> aann_forward(const AannModel& model, std::span<const double> x) {
    if (static_cast<int>(x.size()) != model.input_dim)
        throw std::invalid_argument("aann_forward: input length does not match model");
    return forward_trace(model, x).back();
}

double reconstruction_error(const AannModel& model, std::span<const double> x) {
    std::vector<double> xh = aann_forward(model, x);
    double e = 0.0;
    for (size_t i = 0; i < xh.size(); ++i) {
        double d = xh[i] - x[i];
        e += d * d;
    }
    return e;
}

double mean_reconstruction_loss(const AannModel& model,
                                const std::vector<std::vector<double>>& samples) {
    if (samples.empty()) throw std::invalid_argument("mean_reconstruction_loss: no samples");
    double acc = 0.0;
    for (const std::vector<double>& s : samples) acc += reconstruction_error(model, s);
    return acc / static_cast<double>(samples.size());
}

std::vector<Layer> loss_gradient(const AannModel& model,
                                 const std::vector<std::vector<double>>& samples) {
    if (samples.empty()) throw std::invalid_argument("loss_gradient: no samples");
    std::vector<Layer> grads;
    grads.reserve(model.layers.size());
    for (const Layer& l : model.layers) {
        Layer g;
        g.in = l.in;
        g.out = l.out;
        g.weights.assign(l.weights.size(), 0.0);
        g.bias.assign(l.bias.size(), 0.0);
        grads.push_back(std::move(g));
    }

    const double scale = 2.0 / static_cast<double>(samples.size());
    for (const std::vector<double>& x : samples) {
        if (static_cast<int>(x.size()) != model.input_dim)
            throw std::invalid_argument("loss_gradient: sample length mismatch");
        std::vector<std::vector<double>> acts = forward_trace(model, x);

        std::vector<double> delta(acts.back().size());
        for (size_t i = 0; i < delta.size(); ++i) delta[i] = scale * (acts.back()[i] - x[i]);

        for (size_t li = model.layers.size(); li-- > 0;) {
            const Layer& layer = model.layers[li];
            Layer& grad = grads[li];
            const std::vector<double>& in = acts[li];
            for (int o = 0; o < layer.out; ++o) {
                double d = delta[static_cast<size_t>(o)];
                grad.bias[static_cast<size_t>(o)] += d;
                double* grow = &grad.weights[static_cast<size_t>(o) * layer.in];
                for (int i = 0; i < layer.in; ++i) grow[i] += d * in[static_cast<size_t>(i)];
            }
            if (li == 0) break;
            std::vector<double> prev(static_cast<size_t>(layer.in), 0.0);
            for (int o = 0; o < layer.out; ++o) {
                double d = delta[static_cast<size_t>(o)];
                const double* wrow = &layer.weights[static_cast<size_t>(o) * layer.in];
                for (int i = 0; i < layer.in; ++i) prev[static_cast<size_t>(i)] += wrow[i] * d;
            }
            // chain through tanh of the producing layer
            for (int i = 0; i < layer.in; ++i) {
                double a = acts[li][static_cast<size_t>(i)];
                prev[static_cast<size_t>(i)] *= 1.0 - a * a;
            }
            delta = std::move(prev);
        }
    }
    return grads;
}

TrainResult aann_train(const AannModel& model, const std::vector<std::vector<double>>& samples,
                       const TrainConfig& cfg) {
    if (samples.empty()) throw std::invalid_argument("aann_train: empty sample set");
    if (cfg.learning_rate < 0.0) throw std::invalid_argument("aann_train: negative learning rate");
    if (cfg.epochs < 1) throw std::invalid_argument("aann_train: epochs must be >= 1");
    for (const std::vector<double>& s : samples)
        if (static_cast<int>(s.size()) != model.input_dim)
            throw std::invalid_argument("aann_train: sample length does not match model");

    TrainResult result;
    result.model = model;
    result.curve.reserve(static_cast<size_t>(cfg.epochs) + 1);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double loss = mean_reconstruction_loss(result.model, samples);
        if (!std::isfinite(loss)) throw TrainingDivergence(epoch);
        result.curve.push_back(loss);
        std::vector<Layer> grads = loss_gradient(result.model, samples);
        for (size_t li = 0; li < grads.size(); ++li) {
            Layer& layer = result.model.layers[li];
            for (size_t k = 0; k < layer.weights.size(); ++k)
                layer.weights[k] -= cfg.learning_rate * grads[li].weights[k];
            for (size_t k = 0; k < layer.bias.size(); ++k)
                layer.bias[k] -= cfg.learning_rate * grads[li].bias[k];
        }
    }
    double final_loss = mean_reconstruction_loss(result.model, samples);
    if (!std::isfinite(final_loss)) throw TrainingDivergence(cfg.epochs);
    result.curve.push_back(final_loss);
    return result;
}

PerClassTraining train_per_class(const std::vector<LabeledSample>& dataset, const TrainConfig& cfg,
                                 std::vector<int> hidden_dims, const std::string& schema_id) {
    if (dataset.empty()) throw std::invalid_argument("train_per_class: empty dataset");
    const int d = static_cast<int>(dataset.front().features.size());
    for (const LabeledSample& s : dataset)
        if (static_cast<int>(s.features.size()) != d)
            throw std::invalid_argument("train_per_class: inconsistent feature lengths");

    std::array<std::vector<std::vector<double>>, kNumClasses> by_class;
    for (const LabeledSample& s : dataset)
        by_class[static_cast<size_t>(s.label)].push_back(s.features);
    for (int c = 0; c < kNumClasses; ++c)
        if (by_class[static_cast<size_t>(c)].empty())
            throw std::invalid_argument(std::string("train_per_class: no samples for class ") +
                                        to_string(label_from_code(c)));

    PerClassTraining out;
    out.set.schema_id = schema_id;
    out.set.standardize_mean.assign(static_cast<size_t>(d), 0.0);
    out.set.standardize_std.assign(static_cast<size_t>(d), 0.0);
    const double n = static_cast<double>(dataset.size());
    for (const LabeledSample& s : dataset)
        for (int k = 0; k < d; ++k) out.set.standardize_mean[static_cast<size_t>(k)] += s.features[static_cast<size_t>(k)];
    for (double& m : out.set.standardize_mean) m /= n;
    for (const LabeledSample& s : dataset)
        for (int k = 0; k < d; ++k) {
            double dv = s.features[static_cast<size_t>(k)] - out.set.standardize_mean[static_cast<size_t>(k)];
            out.set.standardize_std[static_cast<size_t>(k)] += dv * dv;
        }
    for (double& sd : out.set.standardize_std) {
        sd = std::sqrt(sd / n);
        if (sd == 0.0) sd = 1.0;  // constant component, leave it centered only
    }

    if (hidden_dims.empty()) hidden_dims = {(d + 1) / 2};

    for (int c = 0; c < kNumClasses; ++c) {
        std::vector<std::vector<double>> samples = by_class[static_cast<size_t>(c)];
        for (std::vector<double>& s : samples)
            for (int k = 0; k < d; ++k)
                s[static_cast<size_t>(k)] = (s[static_cast<size_t>(k)] - out.set.standardize_mean[static_cast<size_t>(k)]) /
                                            out.set.standardize_std[static_cast<size_t>(k)];
        AannModel init = aann_init(d, hidden_dims, cfg.seed + static_cast<std::uint32_t>(c), cfg.init_scale);
        init.class_label = label_from_code(c);
        TrainResult trained = aann_train(init, samples, cfg);
        out.set.models.push_back(std::move(trained.model));
        out.curves[label_from_code(c)] = std::move(trained.curve);
    }
    return out;
}

Classification classify(const ModelSet& set, std::span<const double> x) {
    if (set.models.empty()) throw std::invalid_argument("classify: empty model set");
    if (x.size() != set.standardize_mean.size())
        throw std::invalid_argument("classify: feature length does not match model set");

    std::vector<double> z(x.size());
    for (size_t i = 0; i < z.size(); ++i)
        z[i] = (x[i] - set.standardize_mean[i]) / set.standardize_std[i];

    Classification result;
    double best = std::numeric_limits<double>::infinity();
    for (const AannModel& model : set.models) {
        double err = reconstruction_error(model, z);
        result.errors[model.class_label] = err;
        if (err < best) {
            best = err;
            result.label = model.class_label;
            result.tie = false;
        } else if (err == best) {
            result.tie = true;  // earlier (lower-code) class keeps the win
        }
    }
    return result;
}

namespace {

using nlohmann::json;

json layer_to_json(const Layer& l) {
    return json{{"in", l.in}, {"out", l.out}, {"weights", l.weights}, {"bias", l.bias}};
}

Layer layer_from_json(const json& j) {
    Layer l;
    l.in = j.at("in").get<int>();
    l.out = j.at("out").get<int>();
    l.weights = j.at("weights").get<std::vector<double>>();
    l.bias = j.at("bias").get<std::vector<double>>();
    if (l.in < 1 || l.out < 1 || l.weights.size() != static_cast<size_t>(l.in) * l.out ||
        l.bias.size() != static_cast<size_t>(l.out))
        throw std::invalid_argument("model file: inconsistent layer shapes");
    return l;
}

}  // namespace

void save_model_set(const ModelSet& set, const std::string& path) {
    json doc;
    doc["schema_version"] = 1;
    doc["schema_id"] = set.schema_id;
    doc["standardize_mean"] = set.standardize_mean;
    doc["standardize_std"] = set.standardize_std;
    json models = json::array();
    for (const AannModel& m : set.models) {
        json jm;
        jm["class"] = to_string(m.class_label);
        jm["code"] = static_cast<int>(m.class_label);
        jm["input_dim"] = m.input_dim;
        json layers = json::array();
        for (const Layer& l : m.layers) layers.push_back(layer_to_json(l));
        jm["layers"] = layers;
        models.push_back(jm);
    }
    doc["models"] = models;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << doc.dump(2) << "\n";
}

ModelSet load_model_set(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open for reading");
    json doc = json::parse(in);
    ModelSet set;
    set.schema_id = doc.at("schema_id").get<std::string>();
    set.standardize_mean = doc.at("standardize_mean").get<std::vector<double>>();
    set.standardize_std = doc.at("standardize_std").get<std::vector<double>>();
    for (const json& jm : doc.at("models")) {
        AannModel m;
        m.class_label = label_from_string(jm.at("class").get<std::string>());
        m.input_dim = jm.at("input_dim").get<int>();
        for (const json& jl : jm.at("layers")) m.layers.push_back(layer_from_json(jl));
        if (m.layers.empty() || m.layers.back().out != m.input_dim)
            throw std::invalid_argument("model file: output width must equal input width");
        set.models.push_back(std::move(m));
    }
    return set;
}

}  // namespace retina

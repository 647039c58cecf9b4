#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace scatnet {

// Mini-batch SGD settings. batch_size 0 selects the size-dependent default
// via default_batch_size().
struct ProbeHyperparams {
    double learning_rate = 0.001;
    double momentum = 0.9;
    double weight_decay = 0.0005;
    int epochs = 300;
    int batch_size = 0;
    std::uint64_t seed = 0;

    void validate(int train_size) const;  // ParameterError on violation
};

// Default mini-batch size by training-set size: 5 up to 999 samples, then
// 10 (1000+), 20 (2000+), 50 (5000+), 100 (10000+).
int default_batch_size(int train_size);

// Row-major sample matrix with integer labels.
struct DataMatrix {
    int n = 0;
    int dim = 0;
    std::vector<double> x;  // n * dim
    std::vector<int> y;     // n

    const double* sample(int i) const { return x.data() + static_cast<std::size_t>(i) * dim; }
};

// Multinomial logistic regression with frozen per-feature standardization
// stats (zero-variance features pass through unscaled).
struct ProbeModel {
    int classes = 0;
    int dim = 0;
    std::vector<double> weights;   // classes * dim, class-major
    std::vector<double> bias;      // classes
    std::vector<double> feat_mean; // dim
    std::vector<double> feat_std;  // dim

    // Argmax class score; ties resolve to the lowest class index.
    int predict(const double* sample) const;
};

struct TrainResult {
    ProbeModel model;
    std::vector<double> epoch_loss;  // mean per-sample loss per epoch
};

// Softmax cross-entropy + (wd/2)*|W|^2, SGD with classical momentum.
// Deterministic for a fixed seed. Throws DataError on non-finite features,
// DivergenceError when loss exceeds 10x the first epoch's loss for 5
// consecutive epochs.
TrainResult train_probe(const DataMatrix& train, const ProbeHyperparams& hp);

struct EvalResult {
    double error_rate = 0.0;
    int classes = 0;
    std::vector<int> confusion;  // classes x classes, row = true label

    int at(int truth, int pred) const { return confusion[static_cast<std::size_t>(truth) * classes + pred]; }
};

EvalResult evaluate_probe(const ProbeModel& model, const DataMatrix& data);

// Mean loss and gradient of the regularized objective at (weights, bias) on
// raw (already standardized) samples; exposed for finite-difference checks.
double probe_loss_gradient(const std::vector<double>& weights, const std::vector<double>& bias,
                           int classes, int dim, const DataMatrix& batch, double weight_decay,
                           std::vector<double>& grad_w, std::vector<double>& grad_b);

// Model container: magic "SCATLP01", u32 version/classes/dim, u8 scalar
// width (8), f64 payload [mean|std|weights|bias], trailing text block with
// the training hyperparameters. Round-trips bit-exactly.
void save_probe_model(const ProbeModel& model, const ProbeHyperparams& hp,
                      const std::string& path);
struct LoadedModel {
    ProbeModel model;
    ProbeHyperparams hp;
};
LoadedModel load_probe_model(const std::string& path);

} // namespace scatnet

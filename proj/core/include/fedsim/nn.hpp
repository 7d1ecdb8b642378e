#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fedsim/rng.hpp"

namespace fedsim {

struct MlpConfig {
    // input width, hidden widths, output width
    std::vector<int> layer_sizes{7, 16, 16, 5};

    int input_width() const { return layer_sizes.front(); }
    int output_width() const { return layer_sizes.back(); }
};

// Flattened model weights: per layer, a row-major (out x in) weight matrix
// followed by an out-sized bias vector. The unit exchanged between server
// and clients.
struct ParamVector {
    std::vector<int> layer_sizes;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    bool shape_equals(const ParamVector& other) const {
        return layer_sizes == other.layer_sizes && values.size() == other.values.size();
    }
};

std::size_t param_count(const std::vector<int>& layer_sizes);
ParamVector zeros_like(const ParamVector& p);

// Glorot-uniform weights (s = sqrt(6/(fan_in+fan_out)) per layer), zero biases.
ParamVector init_model(Rng& rng, const MlpConfig& config);

// A minibatch in flattened row-major form.
struct Batch {
    int width = 0;
    int rows = 0;
    std::vector<double> x;   // rows * width
    std::vector<int> y;      // rows
};

// Class probabilities, rows * output_width, softmax-normalized per row.
std::vector<double> forward(const ParamVector& params, const Batch& batch);

// Mean over the batch of -log(probability of the true class); probabilities
// clamped at 1e-12 before the log.
double cross_entropy_loss(const std::vector<double>& probs, const std::vector<int>& labels,
                          int num_classes);

// Gradient of the mean cross entropy; when proximal_mu > 0 adds
// mu * (params - global_ref) per coordinate.
ParamVector backward(const ParamVector& params, const Batch& batch, double proximal_mu = 0.0,
                     const ParamVector* global_ref = nullptr);

struct SgdHyper {
    double lr = 0.0008;
    double momentum = 0.87;
    int batch_size = 32;
};

struct SgdState {
    std::vector<double> momentum_buffer;
};

// buffer <- momentum * buffer + grads; params <- params - lr * buffer
void sgd_momentum_step(ParamVector& params, const ParamVector& grads, SgdState& state,
                       const SgdHyper& hyper);

struct LocalTrainSpec {
    int epochs = 3;
    double proximal_mu = 0.0;  // 0 disables the proximal term
};

struct LocalTrainResult {
    ParamVector weights;
    int steps = 0;
};

// K epochs of minibatch SGD with momentum from the broadcast weights.
// Fresh zero momentum buffer; per-epoch reshuffle; final partial batch
// included; the broadcast weights serve as the fixed proximal reference.
LocalTrainResult local_train(const ParamVector& broadcast, const Batch& train,
                             const LocalTrainSpec& spec, const SgdHyper& hyper, Rng& rng);

struct EvalResult {
    double accuracy = 0.0;
    double loss = 0.0;
};

// Accuracy by argmax (ties to the lowest class index) plus mean loss.
EvalResult evaluate(const ParamVector& params, const Batch& split);

}  // namespace fedsim

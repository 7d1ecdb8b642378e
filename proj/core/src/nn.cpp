#include "fedsim/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fedsim {

namespace {

constexpr double kLogFloor = 1e-12;

void check_layer_sizes(const std::vector<int>& sizes) {
    if (sizes.size() < 2) throw std::invalid_argument("model needs at least two layers");
    for (int s : sizes)
        if (s < 1) throw std::invalid_argument("layer width must be >= 1");
}

// Activations of every layer for a batch, pre-softmax logits included.
struct ForwardPass {
    // acts[l] holds rows * layer_sizes[l] values; acts[0] is the input,
    // acts.back() the logits of the output layer.
    std::vector<std::vector<double>> acts;
};

ForwardPass run_forward(const ParamVector& params, const Batch& batch) {
    const auto& sizes = params.layer_sizes;
    check_layer_sizes(sizes);
    if (batch.width != sizes.front())
        throw std::invalid_argument("feature width does not match model input width");
    if (batch.x.size() != static_cast<std::size_t>(batch.rows) * batch.width)
        throw std::invalid_argument("batch buffer size mismatch");
    if (params.values.size() != param_count(sizes))
        throw std::invalid_argument("parameter count does not match layer shapes");

    ForwardPass fp;
    fp.acts.resize(sizes.size());
    fp.acts[0] = batch.x;

    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int in = sizes[l];
        const int out = sizes[l + 1];
        const double* W = params.values.data() + offset;
        const double* b = W + static_cast<std::size_t>(out) * in;
        offset += static_cast<std::size_t>(out) * in + out;

        const std::vector<double>& src = fp.acts[l];
        std::vector<double>& dst = fp.acts[l + 1];
        dst.assign(static_cast<std::size_t>(batch.rows) * out, 0.0);
        const bool relu = l + 2 < sizes.size();
        for (int r = 0; r < batch.rows; ++r) {
            const double* xin = src.data() + static_cast<std::size_t>(r) * in;
            double* xout = dst.data() + static_cast<std::size_t>(r) * out;
            for (int o = 0; o < out; ++o) {
                const double* wrow = W + static_cast<std::size_t>(o) * in;
                double acc = b[o];
                for (int i = 0; i < in; ++i) acc += wrow[i] * xin[i];
                xout[o] = relu ? std::max(acc, 0.0) : acc;
            }
        }
    }
    return fp;
}

// Softmax with max-subtraction; writes rows * ncls probabilities.
std::vector<double> softmax_rows(const std::vector<double>& logits, int rows, int ncls) {
    std::vector<double> probs(logits.size());
    for (int r = 0; r < rows; ++r) {
        const double* z = logits.data() + static_cast<std::size_t>(r) * ncls;
        double* p = probs.data() + static_cast<std::size_t>(r) * ncls;
        double zmax = z[0];
        for (int c = 1; c < ncls; ++c) zmax = std::max(zmax, z[c]);
        double sum = 0.0;
        for (int c = 0; c < ncls; ++c) {
            p[c] = std::exp(z[c] - zmax);
            sum += p[c];
        }
        for (int c = 0; c < ncls; ++c) p[c] /= sum;
    }
    return probs;
}

}  // namespace

std::size_t param_count(const std::vector<int>& layer_sizes) {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
        n += static_cast<std::size_t>(layer_sizes[l + 1]) * layer_sizes[l] + layer_sizes[l + 1];
    return n;
}

ParamVector zeros_like(const ParamVector& p) {
    ParamVector z;
    z.layer_sizes = p.layer_sizes;
    z.values.assign(p.values.size(), 0.0);
    return z;
}

ParamVector init_model(Rng& rng, const MlpConfig& config) {
    check_layer_sizes(config.layer_sizes);
    ParamVector p;
    p.layer_sizes = config.layer_sizes;
    p.values.reserve(param_count(config.layer_sizes));
    for (std::size_t l = 0; l + 1 < config.layer_sizes.size(); ++l) {
        const int in = config.layer_sizes[l];
        const int out = config.layer_sizes[l + 1];
        const double s = std::sqrt(6.0 / (in + out));
        for (int i = 0; i < out * in; ++i) p.values.push_back(rng.uniform(-s, s));
        for (int i = 0; i < out; ++i) p.values.push_back(0.0);
    }
    return p;
}

std::vector<double> forward(const ParamVector& params, const Batch& batch) {
    ForwardPass fp = run_forward(params, batch);
    return softmax_rows(fp.acts.back(), batch.rows, params.layer_sizes.back());
}

double cross_entropy_loss(const std::vector<double>& probs, const std::vector<int>& labels,
                          int num_classes) {
    if (labels.empty()) throw std::invalid_argument("cross_entropy_loss: empty batch");
    if (probs.size() != labels.size() * static_cast<std::size_t>(num_classes))
        throw std::invalid_argument("cross_entropy_loss: size mismatch");
    double total = 0.0;
    for (std::size_t r = 0; r < labels.size(); ++r) {
        const int y = labels[r];
        if (y < 0 || y >= num_classes) throw std::invalid_argument("label out of range");
        const double p = std::max(probs[r * num_classes + y], kLogFloor);
        total -= std::log(p);
    }
    return total / static_cast<double>(labels.size());
}

ParamVector backward(const ParamVector& params, const Batch& batch, double proximal_mu,
                     const ParamVector* global_ref) {
    if (proximal_mu < 0.0) throw std::invalid_argument("proximal_mu must be >= 0");
    if (proximal_mu > 0.0 && (global_ref == nullptr || !global_ref->shape_equals(params)))
        throw std::invalid_argument("proximal term needs a shape-matching global reference");
    if (batch.rows < 1) throw std::invalid_argument("backward: empty batch");

    ForwardPass fp = run_forward(params, batch);
    const auto& sizes = params.layer_sizes;
    const int ncls = sizes.back();
    std::vector<double> probs = softmax_rows(fp.acts.back(), batch.rows, ncls);

    ParamVector grad = zeros_like(params);

    // d(mean CE)/d(logits) = (p - onehot) / rows
    std::vector<double> delta = std::move(probs);
    const double inv_rows = 1.0 / batch.rows;
    for (int r = 0; r < batch.rows; ++r) {
        double* d = delta.data() + static_cast<std::size_t>(r) * ncls;
        d[batch.y[static_cast<std::size_t>(r)]] -= 1.0;
        for (int c = 0; c < ncls; ++c) d[c] *= inv_rows;
    }

    // Layer offsets into the flat parameter vector.
    std::vector<std::size_t> offsets(sizes.size() - 1);
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        offsets[l] = off;
        off += static_cast<std::size_t>(sizes[l + 1]) * sizes[l] + sizes[l + 1];
    }

    for (std::size_t l = sizes.size() - 1; l-- > 0;) {
        const int in = sizes[l];
        const int out = sizes[l + 1];
        const double* W = params.values.data() + offsets[l];
        double* gW = grad.values.data() + offsets[l];
        double* gb = gW + static_cast<std::size_t>(out) * in;
        const std::vector<double>& input = fp.acts[l];

        for (int r = 0; r < batch.rows; ++r) {
            const double* d = delta.data() + static_cast<std::size_t>(r) * out;
            const double* xin = input.data() + static_cast<std::size_t>(r) * in;
            for (int o = 0; o < out; ++o) {
                double* gw_row = gW + static_cast<std::size_t>(o) * in;
                const double dv = d[o];
                for (int i = 0; i < in; ++i) gw_row[i] += dv * xin[i];
                gb[o] += dv;
            }
        }

        if (l > 0) {
            // Propagate through the ReLU of the previous activation.
            std::vector<double> prev(static_cast<std::size_t>(batch.rows) * in, 0.0);
            for (int r = 0; r < batch.rows; ++r) {
                const double* d = delta.data() + static_cast<std::size_t>(r) * out;
                const double* act = input.data() + static_cast<std::size_t>(r) * in;
                double* pd = prev.data() + static_cast<std::size_t>(r) * in;
                for (int o = 0; o < out; ++o) {
                    const double* wrow = W + static_cast<std::size_t>(o) * in;
                    const double dv = d[o];
                    for (int i = 0; i < in; ++i) pd[i] += dv * wrow[i];
                }
                for (int i = 0; i < in; ++i)
                    if (act[i] <= 0.0) pd[i] = 0.0;
            }
            delta = std::move(prev);
        }
    }

    if (proximal_mu > 0.0) {
        for (std::size_t j = 0; j < grad.values.size(); ++j)
            grad.values[j] += proximal_mu * (params.values[j] - global_ref->values[j]);
    }
    return grad;
}

void sgd_momentum_step(ParamVector& params, const ParamVector& grads, SgdState& state,
                       const SgdHyper& hyper) {
    if (!params.shape_equals(grads)) throw std::invalid_argument("sgd step: shape mismatch");
    if (state.momentum_buffer.empty())
        state.momentum_buffer.assign(params.values.size(), 0.0);
    if (state.momentum_buffer.size() != params.values.size())
        throw std::invalid_argument("sgd step: momentum buffer shape mismatch");
    for (std::size_t j = 0; j < params.values.size(); ++j) {
        state.momentum_buffer[j] = hyper.momentum * state.momentum_buffer[j] + grads.values[j];
        params.values[j] -= hyper.lr * state.momentum_buffer[j];
    }
}

LocalTrainResult local_train(const ParamVector& broadcast, const Batch& train,
                             const LocalTrainSpec& spec, const SgdHyper& hyper, Rng& rng) {
    if (train.rows < 1) throw std::invalid_argument("local_train: empty dataset");
    if (spec.epochs < 1) throw std::invalid_argument("local_train: epochs must be >= 1");
    if (hyper.batch_size < 1) throw std::invalid_argument("local_train: batch_size must be >= 1");

    LocalTrainResult result;
    result.weights = broadcast;
    SgdState state;

    std::vector<int> order(static_cast<std::size_t>(train.rows));
    std::iota(order.begin(), order.end(), 0);

    Batch mini;
    mini.width = train.width;
    for (int epoch = 0; epoch < spec.epochs; ++epoch) {
        rng.shuffle(order);
        for (int start = 0; start < train.rows; start += hyper.batch_size) {
            const int rows = std::min(hyper.batch_size, train.rows - start);
            mini.rows = rows;
            mini.x.assign(static_cast<std::size_t>(rows) * train.width, 0.0);
            mini.y.resize(static_cast<std::size_t>(rows));
            for (int r = 0; r < rows; ++r) {
                const int src = order[static_cast<std::size_t>(start + r)];
                std::copy_n(train.x.data() + static_cast<std::size_t>(src) * train.width,
                            train.width, mini.x.data() + static_cast<std::size_t>(r) * train.width);
                mini.y[static_cast<std::size_t>(r)] = train.y[static_cast<std::size_t>(src)];
            }
            const ParamVector grad =
                backward(result.weights, mini, spec.proximal_mu,
                         spec.proximal_mu > 0.0 ? &broadcast : nullptr);
            sgd_momentum_step(result.weights, grad, state, hyper);
            ++result.steps;
        }
    }
    return result;
}

EvalResult evaluate(const ParamVector& params, const Batch& split) {
    if (split.rows < 1) throw std::invalid_argument("evaluate: empty split");
    const std::vector<double> probs = forward(params, split);
    const int ncls = params.layer_sizes.back();
    int correct = 0;
    for (int r = 0; r < split.rows; ++r) {
        const double* p = probs.data() + static_cast<std::size_t>(r) * ncls;
        int arg = 0;
        for (int c = 1; c < ncls; ++c)
            if (p[c] > p[arg]) arg = c;  // strict: ties keep the lowest index
        if (arg == split.y[static_cast<std::size_t>(r)]) ++correct;
    }
    EvalResult res;
    res.accuracy = static_cast<double>(correct) / split.rows;
    res.loss = cross_entropy_loss(probs, split.y, ncls);
    return res;
}

}  // namespace fedsim

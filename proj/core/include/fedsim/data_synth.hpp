#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fedsim/hormone_table.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

struct PatientProfile {
    std::array<double, kNumMetrics> hormones{};  // raw units
    Ocp label = Ocp::Apri;            // possibly noise-flipped; what the model sees
    Ocp generator_label = Ocp::Apri;  // pre-noise truth, diagnostics only
};

enum class DistMode { IID, NonIID };

struct DataGenConfig {
    DistMode mode = DistMode::IID;
    int num_clients = 12;
    bool variable_size = false;
    int fixed_train_size = 12500;
    int variable_lo = 200;
    int variable_hi = 20000;
    double noise_prob = 0.1;
    double dirichlet_alpha = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

// One labeled example in model space: normalized features, class index.
struct Example {
    std::array<double, kNumMetrics> x{};
    int y = 0;
};

struct ClientDataset {
    int client_id = 0;
    std::vector<PatientProfile> raw_train, raw_val, raw_test;
    std::vector<Example> train, val, test;  // parallel to the raw lists
};

// Symmetric Dirichlet(alpha) draw over the 5 OCPs.
std::vector<double> sample_client_prior(Rng& rng, double alpha);

// All 7 hormones uniform on the OCP's correlated subrange (full diagnosis
// range where no correlation exists); label == generator_label == ocp.
PatientProfile sample_patient(Rng& rng, Ocp ocp, const HormoneSpecTable& table);

// With probability p, replaces the label by a uniform draw over all 5 OCPs
// (possibly the same one). Hormones and generator_label are untouched.
PatientProfile apply_label_noise(Rng& rng, const PatientProfile& patient, double p);

// Per-metric affine map of the diagnosis range onto [-0.5, 0.5].
// Throws std::out_of_range if a hormone falls outside its diagnosis range.
std::array<double, kNumMetrics> normalize(const std::array<double, kNumMetrics>& hormones,
                                          const HormoneSpecTable& table);

// Rule-based verification classifier: picks the OCP whose total-testosterone
// subrange contains the value. Values falling in a print gap between
// subranges resolve to the nearest subrange (lower bound wins ties).
Ocp oracle_classify(const PatientProfile& profile, const HormoneSpecTable& table);

// Generates one client's train/val/test splits. |val| = |test| =
// ceil(0.25 * |train|), sampled fresh by the same process as train.
ClientDataset generate_client_dataset(Rng& rng, const DataGenConfig& config, int client_id,
                                      const std::vector<double>& prior,
                                      const HormoneSpecTable& table);

// Generates every client with an independent derived RNG stream
// (child seed = mix_seed(config.seed, client_id)).
std::vector<ClientDataset> generate_all_clients(const DataGenConfig& config,
                                                const HormoneSpecTable& table);

}  // namespace fedsim

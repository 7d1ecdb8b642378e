#include "fedsim/data_synth.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fedsim {

void DataGenConfig::validate() const {
    if (num_clients < 1) throw std::invalid_argument("num_clients must be >= 1");
    if (noise_prob < 0.0 || noise_prob > 1.0)
        throw std::invalid_argument("noise_prob must be in [0, 1]");
    if (dirichlet_alpha <= 0.0)
        throw std::invalid_argument("dirichlet_alpha must be > 0");
    if (variable_lo > variable_hi)
        throw std::invalid_argument("variable size bounds: lo > hi");
    if (fixed_train_size < 1)
        throw std::invalid_argument("fixed_train_size must be >= 1");
}

std::vector<double> sample_client_prior(Rng& rng, double alpha) {
    return rng.dirichlet(alpha, kNumOcps);
}

PatientProfile sample_patient(Rng& rng, Ocp ocp, const HormoneSpecTable& table) {
    PatientProfile p;
    for (int m = 0; m < kNumMetrics; ++m) {
        const Range& r = table.sampling_range(static_cast<Metric>(m), ocp);
        p.hormones[static_cast<std::size_t>(m)] = rng.uniform(r.lo, r.hi);
    }
    p.label = ocp;
    p.generator_label = ocp;
    return p;
}

PatientProfile apply_label_noise(Rng& rng, const PatientProfile& patient, double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("noise probability must be in [0, 1]");
    PatientProfile out = patient;
    if (p > 0.0 && rng.uniform() < p) {
        out.label = static_cast<Ocp>(rng.uniform_int(0, kNumOcps - 1));
    }
    return out;
}

std::array<double, kNumMetrics> normalize(const std::array<double, kNumMetrics>& hormones,
                                          const HormoneSpecTable& table) {
    std::array<double, kNumMetrics> out{};
    for (int m = 0; m < kNumMetrics; ++m) {
        const Range& r = table.diagnosis_range(static_cast<Metric>(m));
        const double x = hormones[static_cast<std::size_t>(m)];
        if (!r.contains(x))
            throw std::out_of_range("hormone value outside diagnosis range");
        out[static_cast<std::size_t>(m)] = (x - r.lo) / r.width() - 0.5;
    }
    return out;
}

Ocp oracle_classify(const PatientProfile& profile, const HormoneSpecTable& table) {
    const double t = profile.hormones[static_cast<std::size_t>(Metric::Testosterone)];
    const MetricSpec& spec = table.metric(Metric::Testosterone);
    if (!spec.diagnosis.contains(t))
        throw std::out_of_range("testosterone outside diagnosis range");

    // All five OCPs carry a testosterone subrange; containment is decisive.
    for (int o = 0; o < kNumOcps; ++o) {
        if (spec.per_ocp[static_cast<std::size_t>(o)]->contains(t))
            return static_cast<Ocp>(o);
    }
    // Print-gap value: nearest subrange, lower bound winning ties.
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    double best_lo = std::numeric_limits<double>::infinity();
    for (int o = 0; o < kNumOcps; ++o) {
        const Range& r = *spec.per_ocp[static_cast<std::size_t>(o)];
        const double dist = t < r.lo ? r.lo - t : t - r.hi;
        if (dist < best_dist || (dist == best_dist && r.lo < best_lo)) {
            best = o;
            best_dist = dist;
            best_lo = r.lo;
        }
    }
    return static_cast<Ocp>(best);
}

namespace {

Ocp draw_from_prior(Rng& rng, const std::vector<double>& prior) {
    const double u = rng.uniform();
    double cum = 0.0;
    for (int o = 0; o < kNumOcps; ++o) {
        cum += prior[static_cast<std::size_t>(o)];
        if (u < cum) return static_cast<Ocp>(o);
    }
    return static_cast<Ocp>(kNumOcps - 1);  // guard against rounding in the cumsum
}

void fill_split(Rng& rng, const DataGenConfig& config, const std::vector<double>& prior,
                const HormoneSpecTable& table, int n, std::vector<PatientProfile>& raw,
                std::vector<Example>& examples) {
    raw.reserve(static_cast<std::size_t>(n));
    examples.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const Ocp ocp = draw_from_prior(rng, prior);
        PatientProfile p = sample_patient(rng, ocp, table);
        p = apply_label_noise(rng, p, config.noise_prob);
        Example ex;
        ex.x = normalize(p.hormones, table);
        ex.y = static_cast<int>(p.label);
        raw.push_back(p);
        examples.push_back(ex);
    }
}

}  // namespace

ClientDataset generate_client_dataset(Rng& rng, const DataGenConfig& config, int client_id,
                                      const std::vector<double>& prior,
                                      const HormoneSpecTable& table) {
    config.validate();
    if (prior.size() != static_cast<std::size_t>(kNumOcps))
        throw std::invalid_argument("prior must have one entry per OCP");
    double sum = 0.0;
    for (double p : prior) sum += p;
    if (std::abs(sum - 1.0) > 1e-6)
        throw std::invalid_argument("prior must sum to 1");

    ClientDataset ds;
    ds.client_id = client_id;

    const int n_train =
        config.variable_size
            ? static_cast<int>(rng.uniform_int(config.variable_lo, config.variable_hi))
            : config.fixed_train_size;
    const int n_eval = static_cast<int>(std::ceil(0.25 * n_train));

    fill_split(rng, config, prior, table, n_train, ds.raw_train, ds.train);
    fill_split(rng, config, prior, table, n_eval, ds.raw_val, ds.val);
    fill_split(rng, config, prior, table, n_eval, ds.raw_test, ds.test);
    return ds;
}

std::vector<ClientDataset> generate_all_clients(const DataGenConfig& config,
                                                const HormoneSpecTable& table) {
    config.validate();
    const std::vector<double> uniform_prior(kNumOcps, 1.0 / kNumOcps);
    std::vector<ClientDataset> clients;
    clients.reserve(static_cast<std::size_t>(config.num_clients));
    for (int c = 0; c < config.num_clients; ++c) {
        Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(c)));
        const std::vector<double> prior = config.mode == DistMode::NonIID
                                              ? sample_client_prior(rng, config.dirichlet_alpha)
                                              : uniform_prior;
        clients.push_back(generate_client_dataset(rng, config, c, prior, table));
    }
    return clients;
}

}  // namespace fedsim

// fedsim: synthetic federated drug-recommendation experiments.
//
// Subcommands:
//   gen-data        generate a synthetic patient dataset CSV
//   train           run a federated experiment in-process
//   serve           run the server side of a multi-process experiment
//   client          run one client process against a server
//   eval            evaluate a checkpoint on a dataset
//   export-metrics  merge per-run metrics CSVs into one file

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "fedsim/csv_io.hpp"
#include "fedsim/data_synth.hpp"
#include "fedsim/orchestrator.hpp"
#include "fedsim/transport.hpp"

namespace fs = std::filesystem;
using namespace fedsim;

namespace {

struct ExperimentFlags {
    std::uint64_t seed = 0;
    int rounds = 8;
    int clients = 12;
    std::string mode = "iid";           // iid | noniid
    std::string size = "fixed:12500";   // fixed:N | variable
    double noise = 0.1;
    double alpha = 1.0;
    int epochs = 3;
    double lr = 0.0008;
    double momentum = 0.87;
    int batch = 32;
    int first_participants = 2;
    int later_participants = 6;
    // strategy hyperparameters (A.3 defaults)
    double beta = 0.8;
    double mu = 0.3;
    double beta1 = 0.9;
    double beta2 = 0.99;
    double eta = 0.1;
    double tau = 1e-9;
};

void add_data_flags(CLI::App* cmd, ExperimentFlags& f) {
    cmd->add_option("--mode", f.mode, "Label distribution across clients")
        ->check(CLI::IsMember({"iid", "noniid"}));
    cmd->add_option("--size", f.size, "Per-client train size: fixed:N or variable");
    cmd->add_option("--clients", f.clients, "Number of simulated clinics");
    cmd->add_option("--noise", f.noise, "Label noise probability");
    cmd->add_option("--alpha", f.alpha, "Dirichlet concentration for non-IID priors");
    cmd->add_option("--seed", f.seed, "Master seed")->envname("FEDSIM_SEED");
}

void add_train_flags(CLI::App* cmd, ExperimentFlags& f) {
    cmd->add_option("--rounds", f.rounds, "Communication rounds");
    cmd->add_option("--epochs", f.epochs, "Local SGD epochs per round");
    cmd->add_option("--lr", f.lr, "Client learning rate");
    cmd->add_option("--momentum", f.momentum, "Client SGD momentum");
    cmd->add_option("--batch", f.batch, "Client minibatch size");
    cmd->add_option("--first-participants", f.first_participants,
                    "Participants in the first round");
    cmd->add_option("--later-participants", f.later_participants,
                    "Participants in later rounds");
    cmd->add_option("--beta", f.beta, "FedAvgM server momentum");
    cmd->add_option("--mu", f.mu, "FedProx proximal coefficient");
    cmd->add_option("--beta1", f.beta1, "FedAdam first-moment decay");
    cmd->add_option("--beta2", f.beta2, "FedAdam second-moment decay");
    cmd->add_option("--eta", f.eta, "FedAdam server step size");
    cmd->add_option("--tau", f.tau, "FedAdam denominator offset");
}

DataGenConfig to_data_config(const ExperimentFlags& f) {
    DataGenConfig cfg;
    cfg.mode = f.mode == "noniid" ? DistMode::NonIID : DistMode::IID;
    cfg.num_clients = f.clients;
    cfg.noise_prob = f.noise;
    cfg.dirichlet_alpha = f.alpha;
    cfg.seed = f.seed;
    if (f.size == "variable") {
        cfg.variable_size = true;
    } else if (f.size.rfind("fixed:", 0) == 0) {
        cfg.variable_size = false;
        cfg.fixed_train_size = std::stoi(f.size.substr(6));
    } else {
        throw CLI::ValidationError("--size", "expected fixed:N or variable");
    }
    return cfg;
}

ExperimentConfig to_experiment_config(const ExperimentFlags& f, StrategyKind kind) {
    ExperimentConfig cfg;
    cfg.rounds = f.rounds;
    cfg.num_clients = f.clients;
    cfg.first_round_participants = f.first_participants;
    cfg.later_round_participants = f.later_participants;
    cfg.local.epochs = f.epochs;
    cfg.sgd = SgdHyper{f.lr, f.momentum, f.batch};
    cfg.strategy = StrategyConfig{kind, f.beta, f.mu, f.beta1, f.beta2, f.eta, f.tau};
    cfg.data = to_data_config(f);
    cfg.seed = f.seed;
    return cfg;
}

std::string dataset_mode_name(const ExperimentFlags& f, const std::string& data_path) {
    if (!data_path.empty()) return "file";
    return f.mode + (f.size == "variable" ? "_variable" : "_fixed");
}

std::string make_run_id(std::uint64_t seed) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y%m%dT%H%M%S", std::gmtime(&t));
    return std::string("run-") + stamp + "-seed" + std::to_string(seed);
}

void write_manifest(const fs::path& out_dir, const std::string& run_id,
                    const ExperimentFlags& f, const std::string& strategy,
                    const std::string& data_path) {
    std::ofstream out(out_dir / "manifest.txt");
    out << "run_id = " << run_id << "\n"
        << "strategy = " << strategy << "\n"
        << "data = " << (data_path.empty() ? "<generated>" : data_path) << "\n"
        << "mode = " << f.mode << "\nsize = " << f.size << "\nclients = " << f.clients << "\n"
        << "rounds = " << f.rounds << "\nepochs = " << f.epochs << "\nseed = " << f.seed << "\n"
        << "lr = " << f.lr << "\nmomentum = " << f.momentum << "\nbatch = " << f.batch << "\n"
        << "noise = " << f.noise << "\nalpha = " << f.alpha << "\n"
        << "beta = " << f.beta << "\nmu = " << f.mu << "\nbeta1 = " << f.beta1
        << "\nbeta2 = " << f.beta2 << "\neta = " << f.eta << "\ntau = " << f.tau << "\n"
        << "random_baseline = " << kRandomBaselineAccuracy << "\n";
}

std::vector<PreparedClient> load_or_generate(const std::string& data_path,
                                             const ExperimentFlags& f) {
    const auto& table = builtin_hormone_table();
    if (!data_path.empty()) return prepare_clients(load_dataset_csv(data_path, table));
    return prepare_clients(generate_all_clients(to_data_config(f), table));
}

int cmd_gen_data(const ExperimentFlags& f, const std::string& out_path) {
    const auto clients = generate_all_clients(to_data_config(f), builtin_hormone_table());
    write_dataset_csv(out_path, clients);
    std::printf("wrote %s\n", out_path.c_str());
    for (const auto& c : clients)
        std::printf("client %2d: train=%zu val=%zu test=%zu\n", c.client_id, c.train.size(),
                    c.val.size(), c.test.size());
    return 0;
}

int cmd_train(const ExperimentFlags& f, const std::string& strategy_flag,
              const std::string& data_path, std::string out_dir) {
    const std::string run_id = make_run_id(f.seed);
    if (out_dir.empty()) out_dir = (fs::path("runs") / run_id).string();
    fs::create_directories(out_dir);

    std::vector<StrategyKind> kinds;
    if (strategy_flag == "all") {
        kinds = {StrategyKind::FedAvg, StrategyKind::FedAvgM, StrategyKind::FedProx,
                 StrategyKind::FedAdam};
    } else {
        kinds = {parse_strategy(strategy_flag)};
    }
    write_manifest(out_dir, run_id, f, strategy_flag, data_path);

    const auto clients = load_or_generate(data_path, f);
    const std::string mode_name = dataset_mode_name(f, data_path);

    for (StrategyKind kind : kinds) {
        const std::string name = strategy_name(kind);
        ExperimentConfig cfg = to_experiment_config(f, kind);
        cfg.num_clients = static_cast<int>(clients.size());
        ParamVector final_weights;
        const auto metrics = run_experiment(cfg, clients, &final_weights);
        const fs::path base(out_dir);
        write_metrics_csv((base / ("metrics_" + name + ".csv")).string(), metrics, name,
                          mode_name);
        write_per_client_csv((base / ("per_client_" + name + ".csv")).string(), metrics);
        write_checkpoint((base / ("checkpoint_" + name + ".txt")).string(), final_weights);
        std::printf("%s final weighted accuracy: %.4f (random baseline %.1f)\n", name.c_str(),
                    metrics.back().weighted_accuracy, kRandomBaselineAccuracy);
    }
    std::printf("outputs in %s\n", out_dir.c_str());
    return 0;
}

std::uint16_t resolve_port(std::uint16_t flag_port) {
    if (flag_port != 0) return flag_port;
    if (const char* env = std::getenv("FEDSIM_PORT")) return static_cast<std::uint16_t>(std::stoi(env));
    return 7717;
}

int cmd_serve(const ExperimentFlags& f, const std::string& strategy_flag,
              const std::string& data_path, std::string out_dir, std::uint16_t port) {
    const std::string run_id = make_run_id(f.seed);
    if (out_dir.empty()) out_dir = (fs::path("runs") / run_id).string();
    fs::create_directories(out_dir);
    write_manifest(out_dir, run_id, f, strategy_flag, data_path);

    ServeConfig cfg;
    cfg.port = resolve_port(port);
    cfg.experiment = to_experiment_config(f, parse_strategy(strategy_flag));

    const auto clients = load_or_generate(data_path, f);
    cfg.experiment.num_clients = static_cast<int>(clients.size());

    ParamVector final_weights;
    std::uint16_t bound = 0;
    const auto metrics = serve_experiment(cfg, clients, &final_weights, &bound);

    const std::string name = strategy_name(cfg.experiment.strategy.kind);
    const fs::path base(out_dir);
    write_metrics_csv((base / ("metrics_" + name + ".csv")).string(), metrics, name,
                      dataset_mode_name(f, data_path));
    write_per_client_csv((base / ("per_client_" + name + ".csv")).string(), metrics);
    write_checkpoint((base / ("checkpoint_" + name + ".txt")).string(), final_weights);
    std::printf("%s final weighted accuracy: %.4f\n", name.c_str(),
                metrics.back().weighted_accuracy);
    return 0;
}

int cmd_client(const ExperimentFlags& f, const std::string& strategy_flag,
               const std::string& connect, int client_id, const std::string& data_path) {
    const auto colon = connect.rfind(':');
    if (colon == std::string::npos)
        throw CLI::ValidationError("--connect", "expected host:port");

    const auto datasets = load_dataset_csv(data_path, builtin_hormone_table());
    const ClientDataset* mine = nullptr;
    for (const auto& d : datasets)
        if (d.client_id == client_id) mine = &d;
    if (mine == nullptr)
        throw std::runtime_error("client id " + std::to_string(client_id) + " not in dataset");

    ClientSessionConfig cfg;
    cfg.host = connect.substr(0, colon);
    cfg.port = static_cast<std::uint16_t>(std::stoi(connect.substr(colon + 1)));
    if (cfg.port == 0) cfg.port = resolve_port(0);
    cfg.client_id = client_id;
    cfg.seed = f.seed;
    cfg.local.epochs = f.epochs;
    const StrategyConfig strat{parse_strategy(strategy_flag), f.beta, f.mu,
                               f.beta1, f.beta2, f.eta, f.tau};
    cfg.local.proximal_mu = strat.client_proximal_mu();
    cfg.sgd = SgdHyper{f.lr, f.momentum, f.batch};
    cfg.train = to_batch(mine->train);
    run_client_session(cfg);
    std::printf("client %d done\n", client_id);
    return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& data_path) {
    const ParamVector params = load_checkpoint(checkpoint_path);
    const auto clients = prepare_clients(load_dataset_csv(data_path, builtin_hormone_table()));
    std::vector<ClientEval> evals;
    for (const auto& c : clients) {
        const EvalResult r = evaluate(params, c.test);
        evals.push_back(ClientEval{c.client_id, r.accuracy, r.loss,
                                   static_cast<std::size_t>(c.test.rows)});
        std::printf("client %2d: accuracy=%.4f loss=%.4f n=%d\n", c.client_id, r.accuracy,
                    r.loss, c.test.rows);
    }
    std::printf("weighted accuracy: %.4f  weighted loss: %.4f\n", weighted_accuracy(evals),
                weighted_loss(evals));
    return 0;
}

int cmd_export_metrics(const std::vector<std::string>& inputs, const std::string& out_path) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
    bool wrote_header = false;
    for (const auto& in_path : inputs) {
        std::ifstream in(in_path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open for reading: " + in_path);
        std::string line;
        bool first = true;
        while (std::getline(in, line)) {
            if (first) {
                first = false;
                if (wrote_header) continue;
                wrote_header = true;
            }
            out << line << '\n';
        }
    }
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Federated drug-recommendation experiments on synthetic hormone profiles"};
    app.require_subcommand(1);

    ExperimentFlags flags;
    std::string out_path = "dataset.csv";
    std::string out_dir;
    std::string data_path;
    std::string strategy = "fedavg";
    std::string connect = "127.0.0.1:0";
    int client_id = 0;
    std::uint16_t port = 0;
    std::string checkpoint_path;
    std::vector<std::string> export_inputs;
    std::string export_out = "combined_metrics.csv";

    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset CSV");
    add_data_flags(gen, flags);
    gen->add_option("--out", out_path, "Output CSV path");
    gen->set_config("--config");

    auto* train = app.add_subcommand("train", "Run a federated experiment in-process");
    add_data_flags(train, flags);
    add_train_flags(train, flags);
    train->add_option("--strategy", strategy, "fedavg|fedavgm|fedprox|fedadam|all")
        ->check(CLI::IsMember({"fedavg", "fedavgm", "fedprox", "fedadam", "all"}));
    train->add_option("--data", data_path, "Dataset CSV (generated inline when omitted)");
    train->add_option("--out-dir", out_dir, "Output directory (default runs/<run-id>)");
    train->set_config("--config");

    auto* serve = app.add_subcommand("serve", "Run the multi-process server");
    add_data_flags(serve, flags);
    add_train_flags(serve, flags);
    serve->add_option("--strategy", strategy, "fedavg|fedavgm|fedprox|fedadam")
        ->check(CLI::IsMember({"fedavg", "fedavgm", "fedprox", "fedadam"}));
    serve->add_option("--data", data_path, "Dataset CSV for evaluation (generated when omitted)");
    serve->add_option("--port", port, "Listen port (env FEDSIM_PORT, default 7717)");
    serve->add_option("--out-dir", out_dir, "Output directory (default runs/<run-id>)");
    serve->set_config("--config");

    auto* client = app.add_subcommand("client", "Run one client process");
    add_data_flags(client, flags);
    add_train_flags(client, flags);
    client->add_option("--strategy", strategy, "Must match the server's strategy")
        ->check(CLI::IsMember({"fedavg", "fedavgm", "fedprox", "fedadam"}));
    client->add_option("--connect", connect, "Server host:port");
    client->add_option("--client-id", client_id, "This client's id")->required();
    client->add_option("--data", data_path, "Dataset CSV holding this client's rows")->required();
    client->set_config("--config");

    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
    eval->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
    eval->add_option("--data", data_path, "Dataset CSV")->required();

    auto* exp = app.add_subcommand("export-metrics", "Merge metrics CSVs");
    exp->add_option("--out", export_out, "Merged output path");
    exp->add_option("inputs", export_inputs, "Metrics CSV files")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_data(flags, out_path);
        if (train->parsed()) return cmd_train(flags, strategy, data_path, out_dir);
        if (serve->parsed()) return cmd_serve(flags, strategy, data_path, out_dir, port);
        if (client->parsed()) return cmd_client(flags, strategy, connect, client_id, data_path);
        if (eval->parsed()) return cmd_eval(checkpoint_path, data_path);
        if (exp->parsed()) return cmd_export_metrics(export_inputs, export_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

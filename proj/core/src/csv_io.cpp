#include "fedsim/csv_io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace fedsim {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary: byte-identical across runs
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return in;
}

void write_split_rows(std::ofstream& out, int client_id, const char* split,
                      const std::vector<PatientProfile>& rows) {
    for (const auto& p : rows) {
        out << client_id << ',' << split;
        for (double h : p.hormones) out << ',' << fmt_double(h);
        out << ',' << static_cast<int>(p.label) << ',' << static_cast<int>(p.generator_label)
            << '\n';
    }
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

constexpr const char* kDatasetHeader =
    "client_id,split,lh_fsh,testosterone,dheas,prolactin,androstenedione,estradiol,amh,"
    "label,generator_label";

}  // namespace

void write_dataset_csv(const std::string& path, const std::vector<ClientDataset>& clients) {
    auto out = open_out(path);
    out << kDatasetHeader << '\n';
    for (const auto& c : clients) {
        write_split_rows(out, c.client_id, "train", c.raw_train);
        write_split_rows(out, c.client_id, "val", c.raw_val);
        write_split_rows(out, c.client_id, "test", c.raw_test);
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<ClientDataset> load_dataset_csv(const std::string& path,
                                            const HormoneSpecTable& table) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty dataset file: " + path);
    if (line != kDatasetHeader) throw std::runtime_error("unexpected dataset header: " + path);

    std::map<int, ClientDataset> by_client;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_fields(line, ',');
        if (f.size() != 11)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad field count");
        const int cid = std::stoi(f[0]);
        PatientProfile p;
        for (int m = 0; m < kNumMetrics; ++m)
            p.hormones[static_cast<std::size_t>(m)] = std::stod(f[static_cast<std::size_t>(2 + m)]);
        p.label = static_cast<Ocp>(std::stoi(f[9]));
        p.generator_label = static_cast<Ocp>(std::stoi(f[10]));

        Example ex;
        ex.x = normalize(p.hormones, table);
        ex.y = static_cast<int>(p.label);

        ClientDataset& ds = by_client[cid];
        ds.client_id = cid;
        if (f[1] == "train") {
            ds.raw_train.push_back(p);
            ds.train.push_back(ex);
        } else if (f[1] == "val") {
            ds.raw_val.push_back(p);
            ds.val.push_back(ex);
        } else if (f[1] == "test") {
            ds.raw_test.push_back(p);
            ds.test.push_back(ex);
        } else {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad split name");
        }
    }

    std::vector<ClientDataset> clients;
    clients.reserve(by_client.size());
    for (auto& [cid, ds] : by_client) clients.push_back(std::move(ds));
    return clients;
}

void write_metrics_csv(const std::string& path, const std::vector<RoundMetrics>& metrics,
                       const std::string& strategy, const std::string& dataset_mode) {
    auto out = open_out(path);
    out << "round,strategy,dataset_mode,weighted_accuracy,weighted_loss,participants\n";
    for (const auto& m : metrics) {
        out << m.round << ',' << strategy << ',' << dataset_mode << ','
            << fmt_double(m.weighted_accuracy) << ',' << fmt_double(m.weighted_loss) << ',';
        for (std::size_t i = 0; i < m.participants.size(); ++i) {
            if (i > 0) out << ';';
            out << m.participants[i];
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_per_client_csv(const std::string& path, const std::vector<RoundMetrics>& metrics) {
    auto out = open_out(path);
    out << "round,client_id,test_accuracy,test_loss,test_size\n";
    for (const auto& m : metrics) {
        for (const auto& c : m.per_client) {
            out << m.round << ',' << c.client_id << ',' << fmt_double(c.test_accuracy) << ','
                << fmt_double(c.test_loss) << ',' << c.test_size << '\n';
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_checkpoint(const std::string& path, const ParamVector& params) {
    auto out = open_out(path);
    out << "layers";
    for (int s : params.layer_sizes) out << ' ' << s;
    out << '\n';
    for (double v : params.values) out << fmt_double(v) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

ParamVector load_checkpoint(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty checkpoint: " + path);
    std::istringstream header(line);
    std::string tag;
    header >> tag;
    if (tag != "layers") throw std::runtime_error("bad checkpoint header: " + path);
    ParamVector p;
    int s;
    while (header >> s) p.layer_sizes.push_back(s);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        p.values.push_back(std::stod(line));
    }
    if (p.values.size() != param_count(p.layer_sizes))
        throw std::runtime_error("checkpoint value count does not match shapes: " + path);
    return p;
}

}  // namespace fedsim

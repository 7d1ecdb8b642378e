#pragma once

#include <string>
#include <vector>

#include "fedsim/data_synth.hpp"
#include "fedsim/nn.hpp"
#include "fedsim/orchestrator.hpp"

namespace fedsim {

// Dataset CSV: header row, then one row per patient with raw hormone values.
// Columns: client_id,split,lh_fsh,testosterone,dheas,prolactin,
//          androstenedione,estradiol,amh,label,generator_label
// Doubles are printed with 17 significant digits so a load reproduces the
// generated values bit-for-bit; normalization is applied at load time.
void write_dataset_csv(const std::string& path, const std::vector<ClientDataset>& clients);
std::vector<ClientDataset> load_dataset_csv(const std::string& path,
                                            const HormoneSpecTable& table);

// Metrics CSV: round,strategy,dataset_mode,weighted_accuracy,weighted_loss,
// participants (participants ';'-joined inside the field).
void write_metrics_csv(const std::string& path, const std::vector<RoundMetrics>& metrics,
                       const std::string& strategy, const std::string& dataset_mode);

// Long-format per-client metrics: round,client_id,test_accuracy,test_loss,test_size.
void write_per_client_csv(const std::string& path, const std::vector<RoundMetrics>& metrics);

// Checkpoint text dump: a shape header line, then one value per line.
void write_checkpoint(const std::string& path, const ParamVector& params);
ParamVector load_checkpoint(const std::string& path);

}  // namespace fedsim

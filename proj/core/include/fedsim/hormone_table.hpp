#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace fedsim {

// The five OCP classes. The index mapping is fixed and used everywhere a
// label is written to disk or the wire.
enum class Ocp : int { Apri = 0, Cyclen = 1, TriCyclen = 2, Yaz = 3, Diane35 = 4 };

inline constexpr int kNumOcps = 5;
inline constexpr int kNumMetrics = 7;

enum class Metric : int {
    LhFshRatio = 0,
    Testosterone = 1,
    Dheas = 2,
    Prolactin = 3,
    Androstenedione = 4,
    Estradiol = 5,
    Amh = 6,
};

std::string_view ocp_name(Ocp ocp);
std::string_view metric_name(Metric m);

struct Range {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double x) const { return x >= lo && x <= hi; }
    double width() const { return hi - lo; }
};

// One blood-panel metric: the full PCOS diagnosis range plus, per OCP,
// either a correlated subrange or nothing (no correlation).
struct MetricSpec {
    Range diagnosis;
    std::array<std::optional<Range>, kNumOcps> per_ocp;
};

class HormoneSpecTable {
  public:
    explicit HormoneSpecTable(std::array<MetricSpec, kNumMetrics> metrics)
        : metrics_(metrics) {}

    const MetricSpec& metric(Metric m) const {
        return metrics_[static_cast<std::size_t>(m)];
    }

    const Range& diagnosis_range(Metric m) const { return metric(m).diagnosis; }

    bool is_correlated(Metric m, Ocp ocp) const {
        return metric(m).per_ocp[static_cast<std::size_t>(ocp)].has_value();
    }

    // Range to sample from for a given (metric, OCP): the correlated
    // subrange, or the full diagnosis range when no correlation exists.
    const Range& sampling_range(Metric m, Ocp ocp) const {
        const auto& sub = metric(m).per_ocp[static_cast<std::size_t>(ocp)];
        return sub ? *sub : metric(m).diagnosis;
    }

  private:
    std::array<MetricSpec, kNumMetrics> metrics_;
};

// The built-in knowledge base of per-OCP hormone correlation ranges.
const HormoneSpecTable& builtin_hormone_table();

}  // namespace fedsim

#include "fedsim/hormone_table.hpp"

namespace fedsim {

std::string_view ocp_name(Ocp ocp) {
    switch (ocp) {
        case Ocp::Apri: return "Apri";
        case Ocp::Cyclen: return "Cyclen";
        case Ocp::TriCyclen: return "Tri-cyclen";
        case Ocp::Yaz: return "Yaz";
        case Ocp::Diane35: return "Diane-35";
    }
    return "?";
}

std::string_view metric_name(Metric m) {
    switch (m) {
        case Metric::LhFshRatio: return "lh_fsh";
        case Metric::Testosterone: return "testosterone";
        case Metric::Dheas: return "dheas";
        case Metric::Prolactin: return "prolactin";
        case Metric::Androstenedione: return "androstenedione";
        case Metric::Estradiol: return "estradiol";
        case Metric::Amh: return "amh";
    }
    return "?";
}

namespace {

constexpr std::optional<Range> NC = std::nullopt;

// Subrange order per metric follows the OCP index: Apri, Cyclen, Tri-cyclen,
// Yaz, Diane-35.
HormoneSpecTable make_table() {
    std::array<MetricSpec, kNumMetrics> m{};

    // LH-FSH ratio (dimensionless)
    m[0] = MetricSpec{
        {2.0, 3.5},
        {Range{2.0, 2.5}, Range{3.1, 3.5}, NC, Range{2.6, 3.0}, NC},
    };
    // Total testosterone (ng/dl); correlated for all five OCPs
    m[1] = MetricSpec{
        {86.0, 150.0},
        {Range{121.0, 130.9}, Range{86.0, 100.9}, Range{101.0, 110.9},
         Range{131.0, 150.0}, Range{111.0, 120.9}},
    };
    // DHEA-S (ug/dl)
    m[2] = MetricSpec{
        {200.0, 430.0},
        {Range{200.0, 300.9}, Range{301.0, 350.9}, Range{351.0, 400.9}, NC,
         Range{401.0, 430.0}},
    };
    // Prolactin (ng/ml)
    m[3] = MetricSpec{
        {25.0, 40.0},
        {NC, Range{31.0, 35.9}, NC, Range{36.0, 40.0}, Range{25.0, 30.9}},
    };
    // Androstenedione (ng/ml)
    m[4] = MetricSpec{
        {0.4, 2.7},
        {Range{1.1, 1.5}, Range{1.6, 2.0}, Range{0.4, 0.7}, Range{0.8, 1.0},
         Range{2.1, 2.7}},
    };
    // Estradiol (pg/ml)
    m[5] = MetricSpec{
        {60.0, 120.0},
        {NC, Range{81.0, 100.9}, Range{101.0, 120.0}, Range{60.0, 80.9}, NC},
    };
    // AMH (mcg/L)
    m[6] = MetricSpec{
        {5.0, 10.0},
        {Range{8.1, 10.0}, NC, NC, Range{5.0, 6.5}, Range{6.6, 8.0}},
    };

    return HormoneSpecTable(m);
}

}  // namespace

const HormoneSpecTable& builtin_hormone_table() {
    static const HormoneSpecTable table = make_table();
    return table;
}

}  // namespace fedsim

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pimbs/arm_model.hpp"
#include "pimbs/rng.hpp"

namespace pimbs {

enum class MapKind { AL, ATL };

const char* map_kind_name(MapKind k);                 // "al" / "atl"
MapKind map_kind_from_name(const std::string& name);  // throws std::invalid_argument

/// One static data point (theta, f, l, tau). Lengths are relative to the
/// unloaded zero pose.
struct Sample {
    Vec theta;  // rad
    Vec f;      // N
    Vec l;      // m
    Vec tau;    // N*m
};

struct Dataset {
    int n_joints = 0;
    int n_muscles = 0;
    MapKind kind = MapKind::AL;
    uint64_t seed = 0;
    std::string provenance = "simulator";  // "simulator" or "external"
    uint64_t resamples = 0;                // infeasible QP draws discarded
    std::string model_id;                  // model hash for simulator data
    std::vector<Sample> samples;

    int size() const { return static_cast<int>(samples.size()); }
};

class CsvError : public std::runtime_error {
  public:
    CsvError(int line, const std::string& msg)
        : std::runtime_error("csv line " + std::to_string(line) + ": " + msg), line(line) {}
    int line;
};

/// Per-joint i.i.d. uniform draw on [-0.5, 0.5] rad.
JointState sample_theta(Rng& rng);

/// Full generation pipeline at one configuration: tau from statics, f from
/// the tension QP at the given bound, l from geometry plus elastic stretch.
/// Throws QpInfeasible when the torque cannot be realized.
Sample simulate_sample(const ArmModel& model, const JointState& q, double f_min);

/// AL-Map data: f_min fixed at 0, so (f, l) are functions of theta alone.
Dataset generate_al(const ArmModel& model, int n, uint64_t seed);

/// ATL-Map data: f_min ~ Uniform[10, 300] N per sample (co-contraction).
Dataset generate_atl(const ArmModel& model, int n, uint64_t seed);

/// Seed-deterministic shuffle-then-split into (train, eval).
/// Throws std::invalid_argument unless 1 <= n_train < size.
std::pair<Dataset, Dataset> split(const Dataset& data, int n_train, uint64_t seed);

/// CSV with header theta_0..,f_0..,l_0..,tau_0.. and one sample per row,
/// 17 significant digits. '#' lines carry provenance.
void save_csv(const Dataset& data, const std::string& path);

/// Parses the schema above; dimensions come from the header. Throws
/// CsvError with a 1-based line number on malformed input.
Dataset load_csv(const std::string& path);

}  // namespace pimbs

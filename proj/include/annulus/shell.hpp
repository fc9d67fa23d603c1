#pragma once

#include "annulus/io.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace annulus {

enum class ScanTask { cones, normals, strips, tangency, portrait };

const char* to_string(ScanTask t) noexcept;
ScanTask parse_scan_task(const std::string& s);

struct ScanConfig {
    std::vector<double> delta_grid;
    std::vector<double> r_grid;
    std::vector<ScanTask> tasks;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::filesystem::path output_dir = "scan";
    std::size_t cone_samples = 2000;
    int m_max = 12;
    int portrait_orbits = 4;
    int portrait_iters = 100;
};

// Missing fields keep their defaults; unknown tasks throw PreconditionError.
ScanConfig scan_config_from_json(const json& j);
void to_json(json& j, const ScanConfig& c);

struct PortraitResult {
    Params params;
    std::vector<TaggedPoint> points;  // tag "o<k>" for the k-th seed
    std::size_t skipped = 0;          // seeds that stopped returning
    double max_beta_drift = 0;        // max |beta_n - beta_0| over all orbits
};

// Seeds drawn uniformly from the cylinder with |beta| < 1.4.
PortraitResult cmd_portrait(const Params& p, int n_orbits, int n_iters, std::uint64_t seed);
PortraitResult cmd_portrait(const Params& p, const std::vector<InnerState>& seeds, int n_iters);
json portrait_summary(const PortraitResult& r);

json cmd_orbit(const Params& p, const InnerState& x0, int returns);
json cmd_return_map(const Params& p, const InnerState& x);

// Arrivals with cos(beta1) below this are excluded from the finite-difference comparison.
inline constexpr double kJacobianGrazingCut = 0.2;

struct JacobianCheck {
    Params params;
    std::size_t samples = 0;
    std::size_t compared = 0;
    std::size_t excluded_grazing = 0;
    std::size_t skipped = 0;          // non-returning or degenerate draws
    double max_relative_error = 0;    // |analytic - numeric|_max / |analytic|_max
    double max_det_error = 0;         // |det - cos b0 / cos b1|, scaled by max(1, |cos b0 / cos b1|)
    double max_measure_defect = 0;    // |det cos b1 / cos b0 - 1|
};

JacobianCheck jacobian_check(const Params& p, std::size_t samples, std::uint64_t seed);
void to_json(json& j, const JacobianCheck& c);

json cmd_cones(const Params& p, const SamplingOptions& opt, Gate gate);
json cmd_normals(double delta, int m_max);

struct StripsResult {
    json report;
    std::vector<TaggedPoint> nodes;  // lattice nodes tagged "node"
};

StripsResult cmd_strips(const Params& p, int m_max, Gate gate, unsigned workers);
json cmd_tangency(const TangencyRequest& req);
json cmd_gamma(Rational pq, int m, double anchor_omega, const std::vector<double>& t_grid);

struct ScanSummary {
    std::filesystem::path index;
    std::size_t cells = 0;
    std::size_t failed = 0;   // cells with at least one failed task
    std::size_t skipped = 0;  // cells outside Omega
    std::string digest;       // FNV-1a over all written files, in cell order
};

// One JSON per cell (cell_<index>.json) plus index.json; per-cell failures are recorded, never thrown.
ScanSummary cmd_scan(const ScanConfig& config);

} // namespace annulus

#include "annulus/shell.hpp"

#include "annulus/errors.hpp"
#include "annulus/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace annulus {

namespace {

// Outer-step budget per return in portraits and orbits.
constexpr std::int64_t kShellStepBudget = 100'000;
// Portrait seeds are drawn with |beta| below this.
constexpr double kPortraitBeta = 1.4;

constexpr ScanTask kAllTasks[] = {ScanTask::cones, ScanTask::normals, ScanTask::strips, ScanTask::tangency,
                                  ScanTask::portrait};

std::uint64_t fnv1a(std::uint64_t h, const std::string& bytes) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

json status_ok(json result) {
    return json{{"status", "ok"}, {"result", std::move(result)}};
}

json status_skipped(const std::string& reason) {
    return json{{"status", "skipped"}, {"reason", reason}};
}

json status_failed(const std::string& error) {
    return json{{"status", "failed"}, {"error", error}};
}

} // namespace

const char* to_string(ScanTask t) noexcept {
    switch (t) {
    case ScanTask::cones: return "cones";
    case ScanTask::normals: return "normals";
    case ScanTask::strips: return "strips";
    case ScanTask::tangency: return "tangency";
    case ScanTask::portrait: return "portrait";
    }
    return "unknown";
}

ScanTask parse_scan_task(const std::string& s) {
    for (ScanTask t : kAllTasks)
        if (s == to_string(t)) return t;
    throw PreconditionError(fmt::format("unknown scan task '{}'", s));
}

ScanConfig scan_config_from_json(const json& j) {
    ScanConfig c;
    try {
        if (j.contains("delta_grid")) c.delta_grid = j["delta_grid"].get<std::vector<double>>();
        if (j.contains("r_grid")) c.r_grid = j["r_grid"].get<std::vector<double>>();
        if (j.contains("tasks"))
            for (const auto& t : j["tasks"]) c.tasks.push_back(parse_scan_task(t.get<std::string>()));
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("workers")) c.workers = j["workers"].get<unsigned>();
        if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
        if (j.contains("cone_samples")) c.cone_samples = j["cone_samples"].get<std::size_t>();
        if (j.contains("m_max")) c.m_max = j["m_max"].get<int>();
        if (j.contains("portrait_orbits")) c.portrait_orbits = j["portrait_orbits"].get<int>();
        if (j.contains("portrait_iters")) c.portrait_iters = j["portrait_iters"].get<int>();
    } catch (const json::exception& e) {
        throw PreconditionError(fmt::format("invalid scan config: {}", e.what()));
    }
    return c;
}

void to_json(json& j, const ScanConfig& c) {
    json tasks = json::array();
    for (ScanTask t : c.tasks) tasks.push_back(to_string(t));
    j = json{{"delta_grid", c.delta_grid},       {"r_grid", c.r_grid},
             {"tasks", tasks},                   {"seed", c.seed},
             {"workers", c.workers},             {"output_dir", c.output_dir.generic_string()},
             {"cone_samples", c.cone_samples},   {"m_max", c.m_max},
             {"portrait_orbits", c.portrait_orbits}, {"portrait_iters", c.portrait_iters}};
}

PortraitResult cmd_portrait(const Params& p, const std::vector<InnerState>& seeds, int n_iters) {
    require_omega(p);
    if (n_iters < 0) throw PreconditionError("n_iters must be non-negative");
    PortraitResult out;
    out.params = p;
    for (std::size_t k = 0; k < seeds.size(); ++k) {
        const std::string tag = fmt::format("o{}", k);
        InnerState x = seeds[k];
        out.points.push_back({x.omega, x.beta, tag});
        for (int n = 0; n < n_iters; ++n) {
            const OrbitClass c = first_return(x, p, kShellStepBudget);
            if (c.tag != OrbitTag::returns) {
                ++out.skipped;
                break;
            }
            x = c.record->end;
            out.points.push_back({x.omega, x.beta, tag});
            out.max_beta_drift = std::max(out.max_beta_drift, std::abs(x.beta - seeds[k].beta));
        }
    }
    return out;
}

PortraitResult cmd_portrait(const Params& p, int n_orbits, int n_iters, std::uint64_t seed) {
    if (n_orbits < 0) throw PreconditionError("n_orbits must be non-negative");
    std::vector<InnerState> seeds;
    for (int k = 0; k < n_orbits; ++k) {
        auto rng = item_engine(seed, static_cast<std::uint64_t>(k));
        std::uniform_real_distribution<double> w(-pi, pi), b(-kPortraitBeta, kPortraitBeta);
        const double omega = w(rng);
        seeds.push_back({omega, b(rng)});
    }
    return cmd_portrait(p, seeds, n_iters);
}

json portrait_summary(const PortraitResult& r) {
    return json{{"params", r.params}, {"points", r.points.size()}, {"skipped", r.skipped},
                {"max_beta_drift", r.max_beta_drift}};
}

json cmd_orbit(const Params& p, const InnerState& x0, int returns) {
    require_omega(p);
    json steps = json::array();
    InnerState x = x0;
    std::string stop = "completed";
    for (int n = 0; n < returns; ++n) {
        const OrbitClass c = first_return(x, p, kShellStepBudget);
        if (c.tag != OrbitTag::returns) {
            stop = to_string(c.tag);
            break;
        }
        steps.push_back({{"state", c.record->end}, {"m", c.record->m},
                         {"residual", return_residuals(*c.record, p).max_abs()}});
        x = c.record->end;
    }
    return json{{"params", p}, {"start", x0}, {"returns", steps}, {"stop", stop}};
}

json cmd_return_map(const Params& p, const InnerState& x) {
    require_omega(p);
    const OrbitClass c = first_return(x, p, kShellStepBudget);
    json out{{"params", p}, {"start", x}, {"tag", to_string(c.tag)}, {"outer_steps", c.outer_steps}};
    if (c.tag != OrbitTag::returns) return out;
    out["record"] = *c.record;
    out["residuals"] = return_residuals(*c.record, p);
    try {
        const JacobianTerms t = dg_analytic(*c.record, p);
        const Eigen::Matrix2d m = t.matrix();
        out["jacobian"] = {{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}};
        out["det"] = t.det();
    } catch (const DegenerateError& e) {
        out["jacobian_error"] = e.what();
    }
    return out;
}

JacobianCheck jacobian_check(const Params& p, std::size_t samples, std::uint64_t seed) {
    require_omega(p);
    JacobianCheck out;
    out.params = p;
    out.samples = samples;
    for (std::size_t i = 0; i < samples; ++i) {
        auto rng = item_engine(seed, i);
        std::uniform_real_distribution<double> w(-pi, pi), b(-1.2, 1.2);
        const double omega = w(rng);
        const InnerState x{omega, b(rng)};
        const OrbitClass c = first_return(x, p, kShellStepBudget);
        if (c.tag != OrbitTag::returns) {
            ++out.skipped;
            continue;
        }
        JacobianTerms t;
        Eigen::Matrix2d numeric;
        try {
            t = dg_analytic(*c.record, p);
            numeric = dg_numeric(x, p);
        } catch (const DegenerateError&) {
            ++out.skipped;
            continue;
        }
        const double ratio = std::cos(t.beta0) / std::cos(t.beta1);
        const double det = t.det();
        out.max_det_error = std::max(out.max_det_error, std::abs(det - ratio) / std::max(1.0, std::abs(ratio)));
        out.max_measure_defect = std::max(out.max_measure_defect, std::abs(det / ratio - 1));
        if (std::cos(c.record->end.beta) < kJacobianGrazingCut) {
            ++out.excluded_grazing;
            continue;
        }
        const Eigen::Matrix2d analytic = t.matrix();
        const double err = (analytic - numeric).cwiseAbs().maxCoeff() / analytic.cwiseAbs().maxCoeff();
        out.max_relative_error = std::max(out.max_relative_error, err);
        ++out.compared;
    }
    return out;
}

void to_json(json& j, const JacobianCheck& c) {
    j = json{{"params", c.params},
             {"samples", c.samples},
             {"compared", c.compared},
             {"excluded_grazing", c.excluded_grazing},
             {"skipped", c.skipped},
             {"max_relative_error", c.max_relative_error},
             {"max_det_error", c.max_det_error},
             {"max_measure_defect", c.max_measure_defect}};
}

json cmd_cones(const Params& p, const SamplingOptions& opt, Gate gate) {
    json out = cone_preservation_check(p, opt, gate);
    return out;
}

json cmd_normals(double delta, int m_max) {
    return build_X(delta, m_max);
}

StripsResult cmd_strips(const Params& p, int m_max, Gate gate, unsigned workers) {
    const NormalFamily family = build_X(p.delta, m_max);
    const StripSet strips = build_strips(family, p, gate, workers);
    const CrossingMatrix cross = crossing_matrix(strips, workers);
    const auto nodes = lattice_nodes(cross);
    int crossing = 0, ambiguous = 0;
    for (int i = 0; i < cross.n; ++i)
        for (int k = 0; k < cross.n; ++k) {
            crossing += cross.cross[i][k];
            ambiguous += cross.state[i][k] == CrossState::ambiguous;
        }
    StripsResult out;
    out.report = json{{"family", family},
                      {"strips", strips},
                      {"crossing", cross},
                      {"crossings", crossing},
                      {"ambiguous", ambiguous},
                      {"strongly_connected", strongly_connected(cross)},
                      {"density", density_estimate(nodes, workers)}};
    for (const InnerState& x : nodes) out.nodes.push_back({x.omega, x.beta, "node"});
    return out;
}

json cmd_tangency(const TangencyRequest& req) {
    return json{{"delta", req.delta},       {"pq", req.pq},
                {"anchor", req.anchor},     {"tangent", req.tangent},
                {"bracket", {req.r_lo, req.r_hi}}, {"report", find_tangency_r(req)}};
}

json cmd_gamma(Rational pq, int m, double anchor_omega, const std::vector<double>& t_grid) {
    return gamma_curve(pq, m, anchor_omega, t_grid);
}

namespace {

struct CellOutput {
    json index_entry;
    std::vector<std::pair<std::string, std::string>> files;  // name, content
};

json run_task(ScanTask task, const Params& p, const ScanConfig& cfg, std::size_t cell,
              std::vector<std::pair<std::string, std::string>>& files) {
    const std::uint64_t seed = item_engine(cfg.seed, cell)();
    switch (task) {
    case ScanTask::cones: {
        if (!in_omega_star(p)) return status_skipped("outside Omega*");
        return status_ok(cmd_cones(p, SamplingOptions{cfg.cone_samples, seed, 1}, Gate::enforce));
    }
    case ScanTask::normals: return status_ok(cmd_normals(p.delta, cfg.m_max));
    case ScanTask::strips: {
        if (!in_omega_star(p)) return status_skipped("outside Omega*");
        StripsResult s = cmd_strips(p, cfg.m_max, Gate::enforce, 1);
        json summary = s.report;
        summary.erase("crossing");
        summary.erase("strips");
        summary["n"] = s.report["crossing"]["n"];
        files.emplace_back(fmt::format("cell_{:04d}_nodes.csv", cell), points_csv(s.nodes));
        return status_ok(summary);
    }
    case ScanTask::tangency: {
        const Rational pq{1, 3};
        const auto tangent = normal_from_rational(pq, 5, std::sin(pi / 3));
        if (!tangent) return status_failed("tangent normal of the hexagon family not found");
        const TangencyBranch b = tangency_branch(classify_normal(0.0, 0.0, 0, p.delta), *tangent, p);
        return status_ok(json{{"g", b.min_beta}, {"point", b.min_point}, {"l0_crossings", b.l0_crossings},
                              {"gate_ok", b.gate_ok}, {"window", b.tilde.window}});
    }
    case ScanTask::portrait: {
        const PortraitResult r = cmd_portrait(p, cfg.portrait_orbits, cfg.portrait_iters, seed);
        files.emplace_back(fmt::format("cell_{:04d}_portrait.csv", cell), points_csv(r.points));
        return status_ok(portrait_summary(r));
    }
    }
    return status_failed("unknown task");
}

CellOutput run_cell(const ScanConfig& cfg, std::size_t cell, const Params& p) {
    CellOutput out;
    const std::string name = fmt::format("cell_{:04d}.json", cell);
    json doc{{"index", cell}, {"params", p}, {"in_omega", in_omega(p)}, {"in_omega_star", in_omega_star(p)}};
    json entry{{"index", cell}, {"params", p}, {"file", name}};
    if (!in_omega(p)) {
        doc["status"] = "skipped";
        doc["reason"] = "outside Omega";
        entry["status"] = "skipped";
        entry["reason"] = "outside Omega";
        out.files.emplace_back(name, dump_json(doc));
        out.index_entry = entry;
        return out;
    }
    json tasks = json::object();
    json task_status = json::object();
    bool failed = false;
    std::vector<std::pair<std::string, std::string>> extra;
    for (ScanTask t : cfg.tasks) {
        json r;
        try {
            r = run_task(t, p, cfg, cell, extra);
        } catch (const PreconditionError& e) {
            r = status_skipped(e.what());
        } catch (const std::exception& e) {
            r = status_failed(e.what());
        }
        failed = failed || r["status"] == "failed";
        task_status[to_string(t)] = r["status"];
        tasks[to_string(t)] = std::move(r);
    }
    doc["tasks"] = tasks;
    doc["status"] = failed ? "failed" : "ok";
    entry["status"] = doc["status"];
    entry["tasks"] = task_status;
    out.files.emplace_back(name, dump_json(doc));
    for (auto& f : extra) out.files.push_back(std::move(f));
    out.index_entry = entry;
    return out;
}

} // namespace

ScanSummary cmd_scan(const ScanConfig& cfg) {
    if (cfg.delta_grid.empty() || cfg.r_grid.empty()) throw PreconditionError("scan grid is empty");
    if (cfg.tasks.empty()) throw PreconditionError("scan has no tasks");
    if (cfg.workers == 0) throw PreconditionError("workers must be positive");
    std::vector<Params> cells;
    for (double d : cfg.delta_grid)
        for (double r : cfg.r_grid) cells.push_back({d, r});

    std::vector<CellOutput> outputs(cells.size());
    parallel_for(cells.size(), cfg.workers, [&](std::size_t i) { outputs[i] = run_cell(cfg, i, cells[i]); });

    ScanSummary s;
    s.cells = cells.size();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    json entries = json::array();
    for (const CellOutput& c : outputs) {
        for (const auto& [name, content] : c.files) {
            write_text_file(cfg.output_dir / name, content);
            h = fnv1a(fnv1a(h, name), content);
        }
        s.failed += c.index_entry["status"] == "failed";
        s.skipped += c.index_entry["status"] == "skipped";
        entries.push_back(c.index_entry);
    }
    s.digest = fmt::format("{:016x}", h);
    json echo = cfg;
    echo.erase("output_dir");
    const json index{{"config", echo}, {"cells", entries}, {"failed", s.failed}, {"skipped", s.skipped},
                     {"digest", s.digest}};
    s.index = cfg.output_dir / "index.json";
    write_text_file(s.index, dump_json(index));
    return s;
}

} // namespace annulus

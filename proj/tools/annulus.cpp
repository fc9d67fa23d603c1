#include "annulus/errors.hpp"
#include "annulus/parallel.hpp"
#include "annulus/shell.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <type_traits>

using namespace annulus;

namespace {

// Options not given on the command line are filled from the config document: first from the section named after
// the subcommand, then from the top level.
class Binder {
public:
    explicit Binder(CLI::App* app) : app_(app) {}

    template <class T>
    CLI::Option* bind(const std::string& flag, T& value, const std::string& help) {
        CLI::Option* opt = nullptr;
        if constexpr (std::is_same_v<T, bool>)
            opt = app_->add_flag(flag, value, help);
        else
            opt = app_->add_option(flag, value, help)->capture_default_str();
        std::string key = flag.substr(flag.find_first_not_of('-'));
        for (char& c : key)
            if (c == '-') c = '_';
        fills_.push_back([opt, key, &value](const json& cfg) {
            if (opt->count() == 0 && cfg.contains(key)) value = cfg.at(key).get<T>();
        });
        return opt;
    }

    void fill(const json& config) const {
        const std::string name = app_->get_name();
        json merged = config.is_object() ? config : json::object();
        if (merged.contains(name) && merged[name].is_object()) merged.update(merged[name]);
        for (const auto& f : fills_) f(merged);
    }

private:
    CLI::App* app_;
    std::vector<std::function<void(const json&)>> fills_;
};

void emit(const json& j, const std::string& out) {
    if (out.empty() || out == "-")
        std::cout << dump_json(j);
    else
        write_text_file(out, dump_json(j));
}

Gate gate_of(bool relaxed) {
    return relaxed ? Gate::relaxed : Gate::enforce;
}

std::vector<double> linspace(double a, double b, int n) {
    if (n < 1) throw PreconditionError("grid needs at least one point");
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
    return v;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Annular billiard engine: return maps, cone certificates, normal orbits, horseshoes, tangencies"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out;
    app.add_option("--config", config_path, "JSON configuration document");
    app.add_option("-o,--out", out, "output file for the JSON report (default stdout)");

    double delta = 0.8, r = 1e-3, omega = 0.0, beta = 0.0;
    std::uint64_t seed = 1;
    int orbits = 16, iters = 500, returns = 10, m_max = 12, p = 1, q = 3, m = 5, t_count = 41;
    std::size_t samples = 10000;
    unsigned workers = default_workers();
    bool relaxed = false;
    std::string csv, svg;
    double r_lo = 0.02, r_hi = 0.03, anchor_omega = 0.0, t_min = -0.1, t_max = 0.1, d_delta = 0.01;
    std::vector<std::string> tasks;
    std::vector<double> delta_grid, r_grid;
    std::string output_dir;

    std::vector<std::pair<CLI::App*, Binder>> subs;
    auto add = [&](const char* name, const char* help) -> Binder& {
        CLI::App* sub = app.add_subcommand(name, help);
        subs.emplace_back(sub, Binder(sub));
        return subs.back().second;
    };
    auto params_opts = [&](Binder& b) {
        b.bind("--delta", delta, "obstacle eccentricity");
        b.bind("--r", r, "obstacle radius");
    };

    {
        Binder& b = add("portrait", "phase portrait of G as CSV and SVG");
        params_opts(b);
        b.bind("--orbits", orbits, "number of random seeds");
        b.bind("--iters", iters, "returns per seed");
        b.bind("--seed", seed, "random seed");
        b.bind("--csv", csv, "CSV output path")->default_str("portrait.csv");
        b.bind("--svg", svg, "SVG output path")->default_str("portrait.svg");
    }
    {
        Binder& b = add("orbit", "successive returns from one inner state");
        params_opts(b);
        b.bind("--omega", omega, "start omega");
        b.bind("--beta", beta, "start beta");
        b.bind("--returns", returns, "number of returns");
    }
    {
        Binder& b = add("return-map", "one application of G with residuals and Jacobian");
        params_opts(b);
        b.bind("--omega", omega, "omega");
        b.bind("--beta", beta, "beta");
    }
    {
        Binder& b = add("jacobian-check", "analytic DG against central differences");
        params_opts(b);
        b.bind("--samples", samples, "number of draws");
        b.bind("--seed", seed, "random seed");
    }
    {
        Binder& b = add("cones", "cone preservation certificate");
        params_opts(b);
        b.bind("--samples", samples, "number of draws");
        b.bind("--seed", seed, "random seed");
        b.bind("--workers", workers, "worker threads");
        b.bind("--relaxed", relaxed, "run outside Omega* without the gate");
    }
    {
        Binder& b = add("normals", "normal-orbit family X_delta");
        b.bind("--delta", delta, "obstacle eccentricity");
        b.bind("--m-max", m_max, "largest return time");
    }
    {
        Binder& b = add("strips", "horseshoe strips, crossing matrix and lattice density");
        params_opts(b);
        b.bind("--m-max", m_max, "largest return time");
        b.bind("--workers", workers, "worker threads");
        b.bind("--relaxed", relaxed, "run outside Omega* without the gate");
        b.bind("--csv", csv, "CSV output path for the lattice nodes");
    }
    {
        Binder& b = add("tangency", "r of the quadratic homoclinic tangency near a tangent normal");
        b.bind("--d-delta", d_delta, "delta - sin(p pi / q)");
        b.bind("--p", p, "rotation numerator");
        b.bind("--q", q, "rotation denominator");
        b.bind("--m", m, "return time of the tangent normal");
        b.bind("--anchor-omega", anchor_omega, "omega of the transverse normal carrying W^s");
        b.bind("--r-lo", r_lo, "bracket lower end");
        b.bind("--r-hi", r_hi, "bracket upper end");
    }
    {
        Binder& b = add("gamma", "leading-order tangency curve");
        b.bind("--p", p, "rotation numerator");
        b.bind("--q", q, "rotation denominator");
        b.bind("--m", m, "return time of the tangent normal");
        b.bind("--anchor-omega", anchor_omega, "omega of the transverse normal");
        b.bind("--t-min", t_min, "curve parameter start");
        b.bind("--t-max", t_max, "curve parameter end");
        b.bind("--t-count", t_count, "curve samples");
    }
    {
        Binder& b = add("scan", "parameter scan over a (delta, r) grid");
        b.bind("--delta-grid", delta_grid, "delta values");
        b.bind("--r-grid", r_grid, "r values");
        b.bind("--tasks", tasks, "cones, normals, strips, tangency, portrait");
        b.bind("--seed", seed, "random seed");
        b.bind("--workers", workers, "worker threads");
        b.bind("--output-dir", output_dir, "report directory");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const json config = config_path.empty() ? json::object() : read_json_file(config_path);
        CLI::App* chosen = app.get_subcommands().front();
        for (const auto& [sub, binder] : subs)
            if (sub == chosen) binder.fill(config);
        const std::string name = chosen->get_name();
        const Params params{delta, r};

        if (name == "portrait") {
            const PortraitResult res = cmd_portrait(params, orbits, iters, seed);
            write_text_file(csv.empty() ? "portrait.csv" : csv, points_csv(res.points));
            write_text_file(svg.empty() ? "portrait.svg" : svg,
                            scatter_svg(res.points, fmt::format("delta = {}, r = {}", delta, r)));
            emit(portrait_summary(res), out);
        } else if (name == "orbit") {
            emit(cmd_orbit(params, {omega, beta}, returns), out);
        } else if (name == "return-map") {
            emit(cmd_return_map(params, {omega, beta}), out);
        } else if (name == "jacobian-check") {
            emit(jacobian_check(params, samples, seed), out);
        } else if (name == "cones") {
            emit(cmd_cones(params, SamplingOptions{samples, seed, workers}, gate_of(relaxed)), out);
        } else if (name == "normals") {
            emit(cmd_normals(delta, m_max), out);
        } else if (name == "strips") {
            const StripsResult res = cmd_strips(params, m_max, gate_of(relaxed), workers);
            if (!csv.empty()) write_text_file(csv, points_csv(res.nodes));
            emit(res.report, out);
        } else if (name == "tangency") {
            const Rational pq{p, q};
            const double delta0 = std::sin(pq.value() * pi);
            const auto tangent = normal_from_rational(pq, m, delta0);
            if (!tangent) throw PreconditionError(fmt::format("no normal of rotation {}/{} with m = {}", p, q, m));
            const double d = delta0 + d_delta;
            emit(cmd_tangency({d, classify_normal(anchor_omega, 0.0, 0, d), *tangent, pq, r_lo, r_hi}), out);
        } else if (name == "gamma") {
            emit(cmd_gamma({p, q}, m, anchor_omega, linspace(t_min, t_max, t_count)), out);
        } else if (name == "scan") {
            json doc = config.contains("scan") ? config["scan"] : config;
            ScanConfig sc = scan_config_from_json(doc);
            sc.delta_grid = delta_grid.empty() ? sc.delta_grid : delta_grid;
            sc.r_grid = r_grid.empty() ? sc.r_grid : r_grid;
            if (!tasks.empty()) {
                sc.tasks.clear();
                for (const auto& t : tasks) sc.tasks.push_back(parse_scan_task(t));
            }
            sc.seed = seed;
            sc.workers = workers;
            if (!output_dir.empty()) sc.output_dir = output_dir;
            const ScanSummary s = cmd_scan(sc);
            emit(json{{"index", s.index.generic_string()}, {"cells", s.cells}, {"failed", s.failed},
                      {"skipped", s.skipped}, {"digest", s.digest}},
                 out);
        }
    } catch (const PreconditionError& e) {
        fmt::print(stderr, "precondition violated: {}\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return 0;
}

#include "annulus/io.hpp"

#include "annulus/errors.hpp"

#include <fmt/format.h>

#include <fstream>
#include <map>
#include <sstream>

namespace annulus {

void to_json(json& j, const Params& p) {
    j = json{{"delta", p.delta}, {"r", p.r}};
}

void from_json(const json& j, Params& p) {
    p.delta = j.at("delta").get<double>();
    p.r = j.at("r").get<double>();
}

void to_json(json& j, const InnerState& x) {
    j = json{{"omega", x.omega}, {"beta", x.beta}};
}

void to_json(json& j, const OuterState& x) {
    j = json{{"s", x.s}, {"theta", x.theta}};
}

void to_json(json& j, const Rational& q) {
    j = json{{"p", q.p}, {"q", q.q}};
}

void to_json(json& j, const ReturnRecord& rec) {
    j = json{{"start", rec.start}, {"end", rec.end}, {"m", rec.m}, {"nu", rec.nu}, {"winding", rec.winding},
             {"outer_hits", rec.outer_hits}};
}

void to_json(json& j, const ReturnResiduals& res) {
    j = json{{"launch_equation", res.launch_equation},
             {"launch_angle", res.launch_angle},
             {"arrival_equation", res.arrival_equation},
             {"arrival_angle", res.arrival_angle}};
}

void to_json(json& j, const StabilityReport& s) {
    j = json{{"kind", to_string(s.kind)}, {"trace", s.trace}};
}

void to_json(json& j, const ZetaReport& r) {
    j = json{{"params", r.params},          {"samples", r.samples},           {"seed", r.seed},
             {"bound_min", r.bound_min},    {"bound_max", r.bound_max},       {"observed_min", r.observed_min},
             {"observed_max", r.observed_max}, {"pass", r.pass}};
}

void to_json(json& j, const A21Report& r) {
    j = json{{"params", r.params},   {"samples", r.samples},         {"skipped", r.skipped},
             {"seed", r.seed},       {"bound", r.bound},             {"min_abs_a21", r.min_abs_a21},
             {"worst_margin", r.worst_margin}, {"pass", r.pass}};
}

void to_json(json& j, const ConeReport& r) {
    j = json{{"params", r.params},
             {"in_omega_star", r.in_omega_star},
             {"samples", r.samples},
             {"skipped", r.skipped},
             {"seed", r.seed},
             {"violations", r.violations},
             {"pass", r.pass},
             {"margins",
              {{"forward", r.forward_margin}, {"backward", r.backward_margin}, {"expansion", r.expansion_margin}}},
             {"rho_observed", r.rho_observed},
             {"rho_bound", r.rho_bound},
             {"measured_k", r.measured_k},
             {"c1", r.c1},
             {"c2", r.c2},
             {"slope_min", r.slope_min},
             {"slope_max", r.slope_max}};
}

void to_json(json& j, const NormalPoint& x) {
    j = json{{"omega", x.omega},         {"theta", x.theta},
             {"m", x.m},                 {"kind", to_string(x.kind)},
             {"delta", x.delta},         {"omega_hat", x.omega_hat},
             {"tangency_margin", x.tangency_margin}, {"borderline", x.borderline},
             {"clearance", x.clearance}};
}

void to_json(json& j, const NormalFamily& f) {
    j = json{{"delta", f.delta}, {"n", f.n}, {"d", f.d}, {"gap_bound", f.gap_bound}, {"m_used", f.m_used},
             {"points", f.points}};
}

void to_json(json& j, const Strip& s) {
    j = json{{"kind", to_string(s.kind)},
             {"anchor_index", s.anchor_index},
             {"anchor", s.anchor},
             {"limit", s.limit},
             {"max_width", s.max_width},
             {"limit_distance", s.limit_distance},
             {"window", s.window},
             {"m", s.boundary_a.m},
             {"vertices", s.boundary_a.polyline.size() + s.boundary_b.polyline.size()}};
}

void to_json(json& j, const StripSet& s) {
    j = json{{"params", s.params}, {"anchors", s.anchors}, {"stable", s.stable}, {"unstable", s.unstable},
             {"image", s.image}};
}

void to_json(json& j, const CrossingMatrix& c) {
    json state = json::array();
    json angle = json::array();
    json centre = json::array();
    for (int i = 0; i < c.n; ++i) {
        json srow = json::array(), arow = json::array(), crow = json::array();
        for (int k = 0; k < c.n; ++k) {
            srow.push_back(to_string(c.state[i][k]));
            arow.push_back(c.min_angle[i][k]);
            crow.push_back(c.centre[i][k]);
        }
        state.push_back(srow);
        angle.push_back(arow);
        centre.push_back(crow);
    }
    j = json{{"n", c.n}, {"cross", c.cross}, {"state", state}, {"min_angle", angle}, {"centre", centre}, {"hits", c.hits}};
}

void to_json(json& j, const SymmetricPeriodicPoint& z) {
    j = json{{"word", z.word},         {"state", z.state},       {"period", z.period},
             {"params", z.params},     {"closure", z.closure},   {"trace", z.trace},
             {"orbit", z.orbit},       {"itinerary_ok", z.itinerary_ok}, {"in_h_minus", z.in_h_minus}};
}

void to_json(json& j, const ManifoldCurve& c) {
    j = json{{"side", to_string(c.side)},
             {"base", c.base},
             {"params", c.params},
             {"eigenvalue", c.eigenvalue},
             {"eigenvector", {c.eigenvector[0], c.eigenvector[1]}},
             {"epsilon", c.epsilon},
             {"steps", c.steps},
             {"reaches_boundary", c.reaches_boundary},
             {"truncated", c.truncated},
             {"slope_min", c.slope_min},
             {"slope_max", c.slope_max},
             {"vertices", c.polyline.size()},
             {"length", c.polyline.length()}};
}

void to_json(json& j, const TangencyCurve& c) {
    json samples = json::array();
    for (const GammaSample& s : c.samples) samples.push_back({{"t", s.t}, {"delta", s.delta}, {"r", s.r}});
    j = json{{"pq", c.pq},         {"m", c.m},   {"anchor_omega", c.anchor_omega},
             {"delta0", c.delta0}, {"d0", c.d0}, {"samples", samples}};
}

void to_json(json& j, const ContactCertificate& c) {
    j = json{{"second_derivative", c.second_derivative}, {"scale", c.scale}, {"quadratic", c.quadratic}};
}

void to_json(json& j, const TangencyReport& r) {
    j = json{{"r_star", r.r_star},
             {"g_lo", r.g_lo},
             {"g_hi", r.g_hi},
             {"iterations", r.iterations},
             {"point", r.point},
             {"in_tilde", r.in_tilde},
             {"gate_ok", r.gate_ok},
             {"contact", r.contact},
             {"crossings_below", r.crossings_below},
             {"crossings_above", r.crossings_above},
             {"ws_rws_distance", r.ws_rws_distance},
             {"gamma_r", r.gamma_r},
             {"relative_error", r.relative_error}};
}

std::string dump_json(const json& j) {
    return j.dump(2) + "\n";
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw PreconditionError(fmt::format("cannot open {}", path.string()));
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw PreconditionError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    out << text;
}

std::string points_csv(const std::vector<TaggedPoint>& pts) {
    std::string out = "omega,beta,tag\n";
    for (const TaggedPoint& x : pts) out += fmt::format("{:.17g},{:.17g},{}\n", x.omega, x.beta, x.tag);
    return out;
}

std::vector<TaggedPoint> tag_polyline(const Polyline& c, const std::string& tag) {
    std::vector<TaggedPoint> out;
    out.reserve(c.size());
    for (const InnerState& x : c.points) out.push_back({wrap_angle(x.omega), x.beta, tag});
    return out;
}

std::string scatter_svg(const std::vector<TaggedPoint>& pts, const std::string& title) {
    constexpr int width = 800, height = 440, margin = 20;
    constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                       "#17becf", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"};
    std::map<std::string, int> colour;
    for (const TaggedPoint& x : pts) colour.emplace(x.tag, 0);
    int k = 0;
    for (auto& [tag, c] : colour) c = k++ % 10;

    const double sx = (width - 2 * margin) / (2 * pi);
    const double sy = (height - 2 * margin - 20) / pi;
    std::ostringstream svg;
    svg << fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\">\n", width, height);
    svg << fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"white\" stroke=\"black\"/>\n", margin,
                       margin + 20, width - 2 * margin, height - 2 * margin - 20);
    svg << fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n", margin,
                       margin + 12, title);
    for (const TaggedPoint& x : pts) {
        if (!std::isfinite(x.omega) || !std::isfinite(x.beta)) continue;
        const double px = margin + (wrap_angle(x.omega) + pi) * sx;
        const double py = margin + 20 + (pi / 2 - x.beta) * sy;
        svg << fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"0.8\" fill=\"{}\"/>\n", px, py, palette[colour[x.tag]]);
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace annulus

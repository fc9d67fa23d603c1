#pragma once

#include "annulus/cones.hpp"
#include "annulus/core.hpp"
#include "annulus/flight.hpp"
#include "annulus/linearize.hpp"
#include "annulus/normal.hpp"
#include "annulus/polyline.hpp"
#include "annulus/strata.hpp"
#include "annulus/tangency.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace annulus {

using json = nlohmann::json;

void to_json(json& j, const Params& p);
void from_json(const json& j, Params& p);
void to_json(json& j, const InnerState& x);
void to_json(json& j, const OuterState& x);
void to_json(json& j, const Rational& q);
void to_json(json& j, const ReturnRecord& rec);
void to_json(json& j, const ReturnResiduals& res);
void to_json(json& j, const StabilityReport& s);
void to_json(json& j, const ZetaReport& r);
void to_json(json& j, const A21Report& r);
void to_json(json& j, const ConeReport& r);
void to_json(json& j, const NormalPoint& x);
void to_json(json& j, const NormalFamily& f);
void to_json(json& j, const Strip& s);
void to_json(json& j, const StripSet& s);
void to_json(json& j, const CrossingMatrix& c);
void to_json(json& j, const SymmetricPeriodicPoint& z);
void to_json(json& j, const ManifoldCurve& c);
void to_json(json& j, const TangencyCurve& c);
void to_json(json& j, const ContactCertificate& c);
void to_json(json& j, const TangencyReport& r);

// Two-space indentation, trailing newline; doubles in shortest round-trip form, non-finite values as null.
std::string dump_json(const json& j);

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

struct TaggedPoint {
    double omega = 0;
    double beta = 0;
    std::string tag;
};

// Header row "omega,beta,tag"; reals with 17 significant digits.
std::string points_csv(const std::vector<TaggedPoint>& pts);

// Each polyline vertex tagged with the polyline's label.
std::vector<TaggedPoint> tag_polyline(const Polyline& c, const std::string& tag);

// Scatter plot of the cylinder (-pi, pi] x [-pi/2, pi/2], one colour per tag.
std::string scatter_svg(const std::vector<TaggedPoint>& pts, const std::string& title);

} // namespace annulus

#include "annulus/io.hpp"
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

using namespace annulus;

TEST_CASE("JSON doubles round-trip exactly") {
    const std::vector<double> values{pi, 1.0 / 3.0, 0.1, 1e-300, -2.718281828459045, 6.02214076e23,
                                     std::nextafter(1.0, 2.0)};
    const json back = json::parse(dump_json(json(values)));
    for (std::size_t i = 0; i < values.size(); ++i) CHECK(back[i].get<double>() == values[i]);
}

TEST_CASE("non-finite values serialize as null") {
    const json j{{"x", std::numeric_limits<double>::quiet_NaN()}, {"y", std::numeric_limits<double>::infinity()}};
    const json back = json::parse(dump_json(j));
    CHECK(back["x"].is_null());
    CHECK(back["y"].is_null());
}

TEST_CASE("CSV has a header and 17 significant digits") {
    const std::vector<TaggedPoint> pts{{pi, -1.0 / 7.0, "a"}, {0.1, 1e-17, "b"}};
    const std::string csv = points_csv(pts);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "omega,beta,tag");
    for (const TaggedPoint& x : pts) {
        REQUIRE(std::getline(in, line));
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        CHECK(std::strtod(line.substr(0, c1).c_str(), nullptr) == x.omega);
        CHECK(std::strtod(line.substr(c1 + 1, c2 - c1 - 1).c_str(), nullptr) == x.beta);
        CHECK(line.substr(c2 + 1) == x.tag);
    }
    CHECK_FALSE(std::getline(in, line));
}

TEST_CASE("polyline tagging wraps omega") {
    Polyline c;
    c.points = {{3.0, 0.1}, {3.5, 0.2}};
    const auto pts = tag_polyline(c, "w");
    REQUIRE(pts.size() == 2);
    CHECK(pts[1].omega == doctest::Approx(3.5 - 2 * pi));
    CHECK(pts[1].tag == "w");
}

TEST_CASE("SVG draws one marker per finite point") {
    const std::vector<TaggedPoint> pts{{0, 0, "a"}, {1, 0.5, "b"}, {std::nan(""), 0, "a"}};
    const std::string svg = scatter_svg(pts, "test");
    CHECK(svg.rfind("<svg", 0) == 0);
    std::size_t count = 0;
    for (std::size_t pos = svg.find("<circle"); pos != std::string::npos; pos = svg.find("<circle", pos + 1)) ++count;
    CHECK(count == 2);
}

TEST_CASE("report fields") {
    const ConeReport r = cone_preservation_check({0.8, 1e-3}, SamplingOptions{200, 3, 1}, Gate::relaxed);
    const json j = r;
    for (const char* key : {"params", "samples", "pass", "margins", "rho_observed", "seed"}) CHECK(j.contains(key));
    CHECK(j["seed"] == 3);

    const NormalFamily f = build_X(0.8, 12);
    const json fj = f;
    for (const char* key : {"delta", "n", "d", "points"}) CHECK(fj.contains(key));
    REQUIRE(!fj["points"].empty());
    for (const char* key : {"omega", "theta", "m", "kind"}) CHECK(fj["points"][0].contains(key));
    CHECK(fj["n"].get<int>() == static_cast<int>(f.points.size()));

    Params p;
    from_json(json(Params{0.25, 0.5}), p);
    CHECK(p.delta == 0.25);
    CHECK(p.r == 0.5);
}

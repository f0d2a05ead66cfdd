#include "doctest.h"

#include "finray/errors.hpp"
#include "finray/materials.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace finray;

namespace {

StressStrainCurve curve_of(std::vector<StressStrainSample> s) {
    StressStrainCurve c;
    c.samples = std::move(s);
    return c;
}

}  // namespace

TEST_CASE("stress-strain: unit arithmetic") {
    const DogboneSpec spec{33.0, 6.0, 2.0};
    const auto c = to_stress_strain({{{0, 0}, {10, 6}, {33, 12}}}, spec);
    REQUIRE(c.samples.size() == 3);
    CHECK(c.samples[2].stress == 1.0);  // 12 N over 12 mm^2
    CHECK(c.samples[2].strain == 1.0);
    CHECK(c.samples[1].stress == 0.5);
    CHECK_FALSE(c.break_index);
}

TEST_CASE("stress-strain: linear record recovers its modulus") {
    const DogboneSpec spec{25.0, 4.0, 1.5};
    for (double E : {0.35, 1.2, 7.0}) {
        TensileRecord r;
        for (int i = 0; i <= 40; ++i) {
            const double ext = 0.0625 * i;
            r.samples.push_back({ext, E * (ext / spec.gauge_length) * spec.area()});
        }
        const auto c = to_stress_strain(r, spec);
        CHECK(std::abs(initial_modulus(c, 0.1) - E) < 1e-9);
    }
}

TEST_CASE("stress-strain: record errors") {
    const DogboneSpec spec;
    CHECK_THROWS_AS(to_stress_strain({}, spec), InvalidRecord);
    CHECK_THROWS_AS(to_stress_strain({{{0, 0}, {2, 1}, {1.5, 2}}}, spec), InvalidRecord);
    CHECK_THROWS_AS(to_stress_strain({{{0, 0}}}, DogboneSpec{33, 0, 2}), InvalidArgument);
}

TEST_CASE("stress-strain: doubling force and area leaves stress unchanged") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(0.0, 5.0);
    TensileRecord r, r2;
    double ext = 0.0;
    for (int i = 0; i < 50; ++i) {
        ext += U(rng);
        const double f = U(rng);
        r.samples.push_back({ext, f});
        r2.samples.push_back({ext, 2 * f});
    }
    const auto a = to_stress_strain(r, {30, 5, 2});
    const auto b = to_stress_strain(r2, {30, 10, 2});
    for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i].stress == b.samples[i].stress);
}

TEST_CASE("uts: peak before softening") {
    CHECK(uts(curve_of({{0, 0}, {0.5, 0.7}, {1.0, 1.2}, {1.5, 1.37}})) == 1.37);
    CHECK(uts(curve_of({{0, 0}, {1, 0}, {2, 0}})) == 0.0);
    const auto soft = curve_of({{0, 0}, {0.5, 0.8}, {1.0, 1.1}, {1.5, 0.9}, {2.0, 0.7}});
    CHECK(uts(soft) == 1.1);
    CHECK(uts(soft) != soft.samples.back().stress);
}

TEST_CASE("elongation: drop detection and the no-break flag") {
    auto c = curve_of({{0, 0}, {1.0, 0.1}, {2.0, 0.2}, {2.67, 0.23}, {2.7, 0.01}, {2.8, 0.0}});
    const Elongation e = elongation_at_break(c);
    CHECK(e.broke);
    CHECK(e.percent == doctest::Approx(267.0).epsilon(1e-12));
    CHECK(e.break_index == 4u);

    const Elongation none = elongation_at_break(curve_of({{0, 0}, {1, 0.5}, {3.5, 0.6}}));
    CHECK_FALSE(none.broke);
    CHECK(none.percent == 350.0);

    // 0.3 of a 0.5 peak survives the default fraction but not 0.7.
    auto mild = curve_of({{0, 0}, {1, 0.5}, {2, 0.3}});
    CHECK_FALSE(elongation_at_break(mild, 0.5).broke);
    CHECK(elongation_at_break(mild, 0.7).percent == 100.0);
    CHECK_THROWS_AS(elongation_at_break(mild, 0.0), InvalidArgument);
    CHECK_THROWS_AS(elongation_at_break(mild, 1.0), InvalidArgument);
}

TEST_CASE("elongation: rupture at strain 12.12") {
    const DogboneSpec spec;
    PaintCurveParams p{"x", 1.37, 12.12};
    const auto c = to_stress_strain(synthetic_tensile_record(p, spec), spec);
    REQUIRE(c.break_index);
    CHECK(elongation_at_break(c).percent == doctest::Approx(1212.0).epsilon(1e-12));
}

TEST_CASE("properties: uts bounds every sample, elongation bounded by final strain") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        StressStrainCurve c;
        double strain = 0.0;
        const int n = 1 + static_cast<int>(U(rng) * 30);
        for (int i = 0; i < n; ++i) {
            c.samples.push_back({strain, U(rng) * 2});
            strain += U(rng);
        }
        const double peak = uts(c);
        for (const auto& s : c.samples) CHECK(peak >= s.stress);
        CHECK(elongation_at_break(c, 0.05 + 0.9 * U(rng)).percent <= c.samples.back().strain * 100.0);
    }
}

TEST_CASE("summary: four paints reproduce the tabulated values in input order") {
    const DogboneSpec spec;
    std::vector<std::pair<std::string, StressStrainCurve>> curves;
    for (const auto& p : reference_paints()) curves.emplace_back(p.name, to_stress_strain(synthetic_tensile_record(p, spec), spec));
    const auto rows = summarize(curves);
    REQUIRE(rows.size() == 4);
    const double uts_expect[] = {1.37, 1.65, 0.23, 0.26};
    const double elong_expect[] = {1212, 1348, 267, 269};
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(rows[i].name == curves[i].first);
        CHECK(rows[i].uts_mpa == doctest::Approx(uts_expect[i]).epsilon(1e-12));
        CHECK(rows[i].elongation_pct == doctest::Approx(elong_expect[i]).epsilon(1e-12));
        CHECK(rows[i].broke);
    }
    std::ostringstream os;
    write_summary_csv(os, rows);
    CHECK(os.str().rfind("name,UTS_MPa,elongation_pct\nacrylic_adhesive_1,1.37,", 0) == 0);

    const auto one = summarize({{"single", curve_of({{0, 0}, {1, 1}})}});
    REQUIRE(one.size() == 1);
    CHECK(one[0].name == "single");
    CHECK_THROWS_AS(summarize({}), InvalidArgument);
}

TEST_CASE("tensile csv: parse, round trip, errors") {
    const auto r = parse_tensile_csv("extension_mm,force_N\r\n0,0\n1.5, 2.25\n\n3,4e-1\n");
    REQUIRE(r.samples.size() == 3);
    CHECK(r.samples[1].force == 2.25);
    CHECK(r.samples[2].force == 0.4);

    std::ostringstream os;
    write_tensile_csv(os, r);
    const auto back = parse_tensile_csv(os.str());
    for (std::size_t i = 0; i < r.samples.size(); ++i) {
        CHECK(back.samples[i].extension == r.samples[i].extension);
        CHECK(back.samples[i].force == r.samples[i].force);
    }

    CHECK_THROWS_AS(parse_tensile_csv("ext,force\n0,0\n"), ParseError);
    CHECK_THROWS_AS(parse_tensile_csv("extension_mm,force_N\n0,zero\n"), ParseError);
    CHECK_THROWS_AS(parse_tensile_csv("extension_mm,force_N\n0,0,0\n"), ParseError);
    CHECK_THROWS_AS(parse_tensile_csv("extension_mm,force_N\n"), InvalidRecord);
    CHECK_THROWS_AS(parse_tensile_csv("extension_mm,force_N\n2,0\n1,0\n"), InvalidRecord);
    try {
        parse_tensile_csv("extension_mm,force_N\n0,0\n1,x\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("stress-strain plot is a standalone svg") {
    const DogboneSpec spec;
    const auto p = reference_paints().front();
    const std::string svg = stress_strain_svg({{p.name, to_stress_strain(synthetic_tensile_record(p, spec), spec)}});
    CHECK(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0) == 0);
    CHECK(svg.find("acrylic_adhesive_1") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
}

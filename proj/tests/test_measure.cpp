#include <sstream>

#include "crmlab/errors.hpp"
#include "crmlab/measure.hpp"
#include "crmlab/random.hpp"
#include "doctest.h"

using namespace crm;

TEST_CASE("r_map builds sorted measures") {
    CHECK(r_map(Configuration{}).empty());
    const auto one = r_map(Configuration({{Point(0.3), 1.5}}));
    REQUIRE(one.size() == 1);
    CHECK(one.atoms()[0] == WeightedAtom{Point(0.3), 1.5});
    const auto two = r_map(Configuration({{Point(0.7), 0.5}, {Point(0.1), 2.0}}));
    REQUIRE(two.size() == 2);
    CHECK(two.atoms()[0].location == Point(0.1));
    CHECK(two.atoms()[1].location == Point(0.7));
}

TEST_CASE("r_map is a bijection") {
    Philox4x32 rng(17, 0);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<MarkedPoint> pts;
        const int n = static_cast<int>(rng.uniform() * 20);
        for (int i = 0; i < n; ++i) pts.push_back({Point{rng.uniform(), rng.uniform()}, rng.uniform_open() * 5});
        const Configuration gamma(pts);
        CHECK(r_inverse(r_map(gamma)) == gamma);
        const auto eta = r_map(gamma);
        CHECK(r_map(r_inverse(eta)) == eta);
    }
}

TEST_CASE("measures reject invalid atoms") {
    CHECK_THROWS_AS(DiscreteMeasure({{Point(0.2), 1.0}, {Point(0.2), 2.0}}), PinpointingError);
    CHECK_THROWS_AS(Configuration({{Point(0.2), 1.0}, {Point(0.2), 2.0}}), PinpointingError);
    CHECK_THROWS_AS(DiscreteMeasure({{Point(0.2), 0.0}}), DomainError);
    CHECK_THROWS_AS(DiscreteMeasure({{Point(0.2), -1.0}}), DomainError);
}

TEST_CASE("integrate and mass") {
    CHECK(integrate(DiscreteMeasure{}, [](const Point&) { return 1.0; }) == 0.0);
    CHECK(integrate(DiscreteMeasure({{Point(0.5), 2.0}}), [](const Point&) { return 1.0; }) == 2.0);
    const DiscreteMeasure eta({{Point(0.1), 2.0}, {Point(0.7), 0.5}});
    CHECK(integrate(eta, [](const Point& x) { return x[0]; }) == doctest::Approx(0.55).epsilon(1e-15));
    CHECK(mass(eta, Window::interval(0.0, 0.5)) == 2.0);
    CHECK(mass(eta, Window::interval(0.0, 1.0)) == 2.5);
}

TEST_CASE("restrict_level") {
    const DiscreteMeasure eta({{Point(0.1), 2.0}, {Point(0.7), 0.05}});
    CHECK(restrict_level(eta, 10) == DiscreteMeasure({{Point(0.1), 2.0}}));
    CHECK(restrict_level(eta, 20) == eta);
    CHECK(restrict_level(DiscreteMeasure{}, 3).empty());
    CHECK_THROWS_AS(restrict_level(eta, 0), DomainError);
    CHECK(restrict_window(eta, Window::interval(0.5, 1.0)) == DiscreteMeasure({{Point(0.7), 0.05}}));
}

TEST_CASE("CSV round trip") {
    const DiscreteMeasure a({{Point{0.1, 0.2}, 1.0 / 3.0}, {Point{0.7, 0.9}, 2e-7}});
    const DiscreteMeasure b({{Point{0.5, 0.5}, 4.0}});
    std::stringstream ss;
    write_csv(ss, {a, DiscreteMeasure{}, b}, 2);
    CHECK(ss.str().rfind("replicate,x_1,x_2,weight\n", 0) == 0);
    const auto back = read_csv(ss);
    REQUIRE(back.size() == 3);
    CHECK(back[0] == a);
    CHECK(back[1].empty());
    CHECK(back[2] == b);

    std::stringstream single;
    write_csv(single, a, 2);
    CHECK(single.str().rfind("x_1,x_2,weight\n", 0) == 0);
    CHECK(read_csv(single).front() == a);

    std::stringstream bad("x_1,weight\n0.5,abc\n");
    CHECK_THROWS_AS(read_csv(bad), ConfigError);
}

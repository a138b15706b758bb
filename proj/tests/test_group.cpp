#include <cmath>
#include <numbers>
#include <vector>

#include "crmlab/errors.hpp"
#include "crmlab/group.hpp"
#include "crmlab/random.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace crm;

namespace {

DiscreteMeasure random_measure(Philox4x32& rng, int n) {
    std::vector<WeightedAtom> atoms;
    for (int i = 0; i < n; ++i) atoms.push_back({Point(rng.uniform()), 0.01 + 3.0 * rng.uniform()});
    return DiscreteMeasure(atoms);
}

GroupElement random_element(Philox4x32& rng) {
    const double w = 0.1 + 0.2 * rng.uniform();
    const double a = (rng.uniform() - 0.5) * 1.6 * w / kBumpDerivativeSup;
    const Diffeo phi = Diffeo::bump(a, 0.3 + 0.4 * rng.uniform(), w);
    const Current theta = Current::bumps({{2.0 * (rng.uniform() - 0.5), Point(0.2 + 0.6 * rng.uniform()), 0.15},
                                          {rng.uniform() - 0.5, Point(0.2 + 0.6 * rng.uniform()), 0.25}});
    return {phi, theta};
}

void check_close(const DiscreteMeasure& a, const DiscreteMeasure& b, double tol) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::abs(a.atoms()[i].location[0] - b.atoms()[i].location[0]) <=
              tol * std::max(1.0, std::abs(b.atoms()[i].location[0])));
        CHECK(std::abs(a.atoms()[i].weight - b.atoms()[i].weight) <= tol * b.atoms()[i].weight);
    }
}

}  // namespace

TEST_CASE("bump profile") {
    CHECK(bump(0.0) == doctest::Approx(std::exp(-1.0)));
    CHECK(bump(1.0) == 0.0);
    CHECK(bump(-1.5) == 0.0);
    double sup = 0.0;
    for (int i = 0; i <= 200000; ++i) sup = std::max(sup, std::abs(bump_derivative(-1.0 + i * 1e-5)));
    CHECK(sup == doctest::Approx(kBumpDerivativeSup).epsilon(1e-8));
}

TEST_CASE("current action") {
    const DiscreteMeasure eta({{Point(0.5), 2.0}, {Point(0.9), 1.0}});
    CHECK(apply_current(Current::identity(), eta) == eta);
    CHECK(apply_current(Current::bump(0.0, Point(0.5), 0.2), eta) == eta);
    const Current two = Current::step(Window::interval(0.0, 0.7), 2.0, true);
    CHECK(apply_current(two, DiscreteMeasure({{Point(0.5), 2.0}})) == DiscreteMeasure({{Point(0.5), 4.0}}));
    CHECK(apply_current(two, DiscreteMeasure{}).empty());
    CHECK_THROWS_AS(Current::step(Window::interval(0.0, 0.7), 2.0, false), DomainError);

    const Current c = Current::bumps({{0.7, Point(0.4), 0.2}, {-0.3, Point(0.5), 0.1}});
    CHECK(c.inf_bound() > 0.0);
    for (int i = 0; i <= 1000; ++i) {
        const double v = c(Point(i * 1e-3));
        CHECK(v >= c.inf_bound());
        CHECK(v <= c.sup_bound());
    }
    CHECK(c(Point(0.9)) == 1.0);
    CHECK(c(Point(0.4)) == doctest::Approx(std::exp(0.7 * oracle::bump(0.0) - 0.3 * oracle::bump(-1.0))));
}

TEST_CASE("diffeo action") {
    const DiscreteMeasure eta({{Point(0.5), 2.0}, {Point(0.55), 1.0}});
    CHECK(apply_diffeo(Diffeo::identity(), eta) == eta);
    // phi(x) = x + 1.25 (x - 0.4)(0.8 - x) on [0.4, 0.8]
    const auto bend = [](double x) { return x + 1.25 * (x - 0.4) * (0.8 - x); };
    const Diffeo shift = Diffeo::callable(
        [&](const Point& x) { return Point(x[0] < 0.4 || x[0] > 0.8 ? x[0] : bend(x[0])); },
        [&](const Point& y) {
            if (y[0] < 0.4 || y[0] > 0.8) return y;
            return Point(oracle::bisect(bend, y[0], 0.4, 0.8));
        },
        [](const Point& x) { return 1.0 + 1.25 * (1.2 - 2.0 * x[0]); }, Window::interval(0.4, 0.8));
    CHECK(shift(Point(0.5))[0] == doctest::Approx(0.5375));
    const auto moved = apply_diffeo(shift, DiscreteMeasure({{Point(0.5), 2.0}}));
    CHECK(moved.atoms()[0].location[0] == doctest::Approx(0.5375));
    CHECK(moved.atoms()[0].weight == 2.0);

    // a map that reverses two atoms still yields a sorted measure
    const Diffeo flip = Diffeo::callable([](const Point& x) { return Point(1.0 - x[0]); },
                                         [](const Point& y) { return Point(1.0 - y[0]); },
                                         [](const Point&) { return 1.0; }, Window::interval(0.0, 1.0));
    const auto flipped = apply_diffeo(flip, eta);
    CHECK(flipped.atoms()[0].location[0] == doctest::Approx(0.45));
    CHECK(flipped.atoms()[0].weight == 1.0);
    CHECK(flipped.atoms()[1].location[0] == doctest::Approx(0.5));

    const Diffeo squash = Diffeo::callable([](const Point&) { return Point(0.3); },
                                           [](const Point& y) { return y; }, [](const Point&) { return 1.0; },
                                           Window::interval(0.0, 1.0));
    CHECK_THROWS_AS(apply_diffeo(squash, eta), PinpointingError);
}

TEST_CASE("bump diffeo inverse and Jacobian") {
    CHECK_THROWS_AS(Diffeo::bump(0.5, 0.5, 0.2), DomainError);
    const double a = 0.15;
    const double c = 0.5;
    const double w = 0.25;
    const Diffeo phi = Diffeo::bump(a, c, w);
    const auto fwd = [&](double x) { return x + a * oracle::bump((x - c) / w); };
    for (int i = 0; i <= 400; ++i) {
        const double x = -0.1 + i * 1.2 / 400;
        CHECK(phi(Point(x))[0] == doctest::Approx(fwd(x)).epsilon(1e-15));
        CHECK(std::abs(phi.inverse_at(phi(Point(x)))[0] - x) < 1e-10);
        CHECK(std::abs(phi.inverse_at(Point(x))[0] - oracle::bisect(fwd, x, x - 0.2, x + 0.2)) < 1e-12);
        const double exact = jacobian(phi, Point(x));
        const double fd = jacobian(phi, Point(x), JacobianMode::finite_difference);
        CHECK(fd == doctest::Approx(exact).epsilon(1e-5));
        CHECK(exact > 0.0);
    }
    CHECK(jacobian(phi, Point(2.0)) == 1.0);
    CHECK(jacobian(Diffeo::identity(), Point(0.3)) == 1.0);
    CHECK(jacobian(Diffeo::bump(0.0, 0.5, 0.2), Point(0.5)) == 1.0);
}

TEST_CASE("group action composes") {
    const DiscreteMeasure one({{Point(0.5), 2.0}});
    const Diffeo phi = Diffeo::callable([](const Point& x) { return Point(x[0] == 0.5 ? 0.6 : x[0]); },
                                        [](const Point& y) { return Point(y[0] == 0.6 ? 0.5 : y[0]); },
                                        [](const Point&) { return 1.0; }, Window::interval(0.0, 1.0));
    const Current theta = Current::callable([](const Point& x) { return x[0] == 0.6 ? 3.0 : 1.0; },
                                            Window::interval(0.0, 1.0), 1.0, 3.0);
    CHECK(apply_group({phi, theta}, one) == DiscreteMeasure({{Point(0.6), 6.0}}));
    CHECK(apply_group(GroupElement::identity(), one) == one);

    Philox4x32 rng(4, 0);
    for (int rep = 0; rep < 100; ++rep) {
        const auto eta = random_measure(rng, 12);
        const auto g1 = random_element(rng);
        const auto g2 = random_element(rng);
        CHECK(apply_group({g1.phi, Current::identity()}, eta) == apply_diffeo(g1.phi, eta));
        check_close(apply_group(compose(g1, g2), eta), apply_group(g1, apply_group(g2, eta)), 1e-12);
        check_close(apply_group(compose(g1, GroupElement::identity()), eta), apply_group(g1, eta), 1e-15);
        check_close(apply_group(compose(GroupElement::identity(), g2), eta), apply_group(g2, eta), 1e-15);
        check_close(apply_group(inverse(g1), apply_group(g1, eta)), eta, 1e-10);
        check_close(apply_group(compose(inverse(g1), g1), eta), eta, 1e-10);
        check_close(apply_group(compose(compose(g1, g2), g1), eta), apply_group(compose(g1, compose(g2, g1)), eta),
                    1e-10);
    }
    CHECK(inverse(GroupElement::identity()).is_identity());
    const auto g = random_element(rng);
    const auto inv = inverse(GroupElement{g.phi, Current::identity()});
    CHECK(inv.theta.is_identity());
    for (const double x : {0.1, 0.35, 0.5, 0.62}) {
        CHECK(inv.phi(Point(x))[0] == doctest::Approx(g.phi.inverse_at(Point(x))[0]).epsilon(1e-15));
    }
}

TEST_CASE("two-dimensional callable diffeo") {
    const Window box(Point{0.0, 0.0}, Point{1.0, 1.0});
    const auto s = [](double y) { return 0.1 * std::sin(std::numbers::pi * y); };
    const Diffeo shear = Diffeo::callable(
        [&](const Point& p) { return Point{p[0] + s(p[1]) * p[0] * (1 - p[0]), p[1]}; },
        [&](const Point& q) {
            const double k = s(q[1]);
            if (k == 0.0) return q;
            // solve x + k x (1 - x) = q0
            const double b = 1.0 + k;
            const double x = (b - std::sqrt(b * b - 4.0 * k * q[0])) / (2.0 * k);
            return Point{x, q[1]};
        },
        [&](const Point& p) { return 1.0 + s(p[1]) * (1.0 - 2.0 * p[0]); }, box);
    for (const Point p : {Point{0.3, 0.4}, Point{0.8, 0.1}, Point{0.5, 0.5}}) {
        CHECK(jacobian(shear, p, JacobianMode::finite_difference) == doctest::Approx(jacobian(shear, p)).epsilon(1e-6));
        const Point back = shear.inverse_at(shear(p));
        CHECK(back[0] == doctest::Approx(p[0]).epsilon(1e-12));
    }
}

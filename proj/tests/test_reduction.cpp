#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "adiab/model.hpp"
#include "adiab/reduction.hpp"

using namespace adiab;

namespace {

GenericSlowFast example_system(const ExampleSystem& sys) {
    // Box wide enough for the flow-box grid eta in [1, 3], xi in [-11, 11].
    return make_cartesian_example(sys, DomainBox{-4.0, 1.0, -3.0, 3.0, -2.0, 26.0});
}

FlowBoxChart closed_form_chart() {
    FlowBoxChart chart;
    chart.forward = [](double xi, double eta) { return xy_from_flowbox(xi, eta); };
    chart.inverse = [](double x, double y) { return flowbox_from_xy(x, y); };
    chart.xi_min = -50.0;
    chart.xi_max = 50.0;
    chart.eta_min = 0.1;
    chart.eta_max = 10.0;
    return chart;
}

} // namespace

TEST_CASE("energy reduction on the explicit model is the linear solve") {
    const ExampleSystem sys(1.3);
    const GenericSlowFast gen = example_system(sys);
    const double h0 = 0.7, eps = 0.12, phi = 0.4, x = 1.1, y = 0.6;
    const double I = isoenergetic_reduce(gen, phi, y, x, h0, eps);
    const double expect =
        (h0 - 0.5 * y * y - std::exp(-x) - eps * std::cos(phi) * std::exp(-x)) / 1.3;
    CHECK_THAT(I, Catch::Matchers::WithinAbs(expect, 1e-13));
    // right inverse: substituting back reproduces h0
    CHECK_THAT(gen.H0(I, y, x) + eps * gen.H1(I, phi, y, x),
               Catch::Matchers::WithinAbs(h0, 1e-12));
}

TEST_CASE("frozen-coupling reduction is phase independent") {
    const ExampleSystem sys(1.0);
    const GenericSlowFast gen = example_system(sys);
    const double I_ref = isoenergetic_reduce(gen, 0.0, 0.3, 1.0, 0.5, 0.0);
    for (int i = 1; i <= 16; ++i) {
        const double phi = 2.0 * detail::pi_v<double> * i / 16.0;
        CHECK_THAT(isoenergetic_reduce(gen, phi, 0.3, 1.0, 0.5, 0.0),
                   Catch::Matchers::WithinAbs(I_ref, 1e-12));
    }
}

TEST_CASE("nonlinear reduction matches a bisection oracle") {
    GenericSlowFast gen;
    gen.H0 = [](double I, double y, double x) {
        return I + I * I / 10.0 + 0.5 * y * y + std::exp(-x);
    };
    gen.dH0_dI = [](double I, double, double) { return 1.0 + I / 5.0; };
    gen.dH0_dy = [](double, double y, double) { return y; };
    gen.dH0_dx = [](double, double, double x) { return -std::exp(-x); };
    auto zero4 = [](double, double, double, double) { return 0.0; };
    gen.H1 = zero4;
    gen.dH1_dI = zero4;
    gen.dH1_dphi = zero4;
    gen.dH1_dy = zero4;
    gen.dH1_dx = zero4;
    gen.box = DomainBox{-4.0, 4.0, -3.0, 3.0, -2.0, 20.0};
    gen.validate();

    const double y = 0.4, x = 0.9, h0 = 1.7;
    const double I = isoenergetic_reduce(gen, 0.0, y, x, h0, 0.0);
    // bisection from scratch
    auto resid = [&](double II) { return gen.H0(II, y, x) - h0; };
    double a = -4.0, b = 4.0;
    REQUIRE(resid(a) * resid(b) < 0.0);
    for (int i = 0; i < 100; ++i) {
        const double m = 0.5 * (a + b);
        (resid(a) * resid(m) <= 0.0 ? b : a) = m;
    }
    CHECK_THAT(I, Catch::Matchers::WithinAbs(0.5 * (a + b), 1e-12));
}

TEST_CASE("chart Jacobian determinants") {
    SECTION("identity chart") {
        FlowBoxChart id;
        id.forward = [](double xi, double eta) {
            return std::pair<double, double>{xi, eta};
        };
        id.xi_min = -10.0;
        id.xi_max = 10.0;
        id.eta_min = -10.0;
        id.eta_max = 10.0;
        CHECK_THAT(jacobian_det(id, 0.3, 1.2), Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
    SECTION("scaled chart doubles the determinant") {
        FlowBoxChart sc = closed_form_chart();
        sc.forward = [](double xi, double eta) {
            auto [x, y] = xy_from_flowbox(xi, eta);
            return std::pair<double, double>{x, 2.0 * y};
        };
        CHECK_THAT(jacobian_det(sc, 0.7, 2.0), Catch::Matchers::WithinAbs(2.0, 1e-7));
    }
    SECTION("closed-form chart is canonical") {
        const FlowBoxChart chart = closed_form_chart();
        CHECK_THAT(jacobian_det(chart, 0.7, 2.0),
                   Catch::Matchers::WithinAbs(1.0, 1e-7));
        for (double xi : {-8.0, -2.5, 0.1, 4.0})
            for (double eta : {1.0, 2.0, 3.0})
                CHECK_THAT(jacobian_det(chart, xi, eta),
                           Catch::Matchers::WithinAbs(1.0, 1e-6));
    }
    SECTION("stencil too near the edge is rejected") {
        const FlowBoxChart chart = closed_form_chart();
        CHECK_THROWS_AS(jacobian_det(chart, chart.xi_max, 2.0), std::runtime_error);
    }
}

TEST_CASE("constructed flow-box chart") {
    const ExampleSystem sys(1.0);
    const GenericSlowFast gen = example_system(sys);
    std::vector<double> xi_grid, eta_grid;
    for (double xi = -11.0; xi <= 11.0 + 1e-9; xi += 2.75) xi_grid.push_back(xi);
    for (double eta = 0.9; eta <= 3.1 + 1e-9; eta += 0.55) eta_grid.push_back(eta);
    // h0 = 0 puts the slow level value eta on the section I = -eta, so the
    // chart coincides with the closed-form solution of the explicit model.
    const FlowBoxChart chart = build_flowbox(gen, 0.0, xi_grid, eta_grid);

    SECTION("agrees with the closed form") {
        for (double xi = -10.0; xi <= 10.0 + 1e-9; xi += 2.5)
            for (double eta : {1.0, 1.5, 2.0, 2.5, 3.0}) {
                const auto [x, y] = chart.forward(xi, eta);
                const auto [xr, yr] = xy_from_flowbox(xi, eta);
                CHECK_THAT(x, Catch::Matchers::WithinAbs(xr, 1e-8));
                CHECK_THAT(y, Catch::Matchers::WithinAbs(yr, 1e-8));
            }
    }

    SECTION("rows are level sets of the slow energy") {
        for (const auto& gp : chart.grid) {
            const double F0 = -isoenergetic_reduce(gen, 0.0, gp.y, gp.x, 0.0, 0.0);
            CHECK_THAT(F0, Catch::Matchers::WithinAbs(gp.eta, 1e-10));
        }
    }

    SECTION("forward and inverse round-trip") {
        for (double xi : {-6.0, -1.0, 2.0, 8.0})
            for (double eta : {1.2, 2.0, 2.8}) {
                const auto [x, y] = chart.forward(xi, eta);
                const auto [xi2, eta2] = chart.inverse(x, y);
                CHECK_THAT(xi2, Catch::Matchers::WithinAbs(xi, 1e-10));
                CHECK_THAT(eta2, Catch::Matchers::WithinAbs(eta, 1e-10));
            }
    }

    SECTION("unit determinant at random interior points") {
        std::mt19937 rng(2024);
        std::uniform_real_distribution<double> u_xi(-9.0, 9.0), u_eta(1.05, 2.95);
        for (int i = 0; i < 50; ++i)
            CHECK_THAT(jacobian_det(chart, u_xi(rng), u_eta(rng)),
                       Catch::Matchers::WithinAbs(1.0, 1e-6));
    }

    SECTION("degenerate grids are rejected") {
        CHECK_THROWS_AS(build_flowbox(gen, 0.0, {0.0}, eta_grid),
                        std::invalid_argument);
    }
}

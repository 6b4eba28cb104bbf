#include <doctest.h>

#include <cmath>

#include "tpfem/coeff.hpp"

using namespace tpfem;

namespace {

constexpr double kTau = 2.0 * 3.14159265358979323846;

BoundaryValueProblem ex1_bvp() {
    BoundaryValueProblem b;
    b.epsilon = 1e-4;
    b.p = [](double x) { return std::cos(kTau * x); };
    b.dp = [](double x) { return -kTau * std::sin(kTau * x); };
    b.b = [](double) { return 1.0; };
    b.f = [](double x) { return 1.0 / (1.0 + x * x); };
    b.x_left = 0.0;
    b.x_right = 1.0;
    b.waive_condition = true;
    return b;
}

BoundaryValueProblem ex2_bvp() {
    BoundaryValueProblem b;
    b.epsilon = 1e-4;
    b.p = [](double x) { return 1.0 - x * x; };
    b.dp = [](double x) { return -2.0 * x; };
    b.b = [](double) { return 3.0; };
    b.f = [](double x) { return std::exp(x); };
    b.x_left = -1.0;
    b.x_right = 1.0;
    return b;
}

std::vector<SingularPoint> classify(const BoundaryValueProblem& b) {
    return classify_singular_points(b, find_turning_points(b, 4096));
}

}  // namespace

TEST_CASE("neighborhood width delta") {
    // ex1 kept singulars {0.25, 0.75, 1}: min gap 0.25 -> delta = 1/12
    NeighborhoodPlan p1 = plan_neighborhoods(classify(ex1_bvp()), 0.0, 1.0);
    CHECK(p1.delta == doctest::Approx(1.0 / 12.0).epsilon(1e-9));
    REQUIRE(p1.j_intervals.size() == 3);
    CHECK(p1.j_intervals[2].second == doctest::Approx(1.0));  // clipped at the boundary

    NeighborhoodPlan p2 = plan_neighborhoods(classify(ex2_bvp()), -1.0, 1.0);
    CHECK(p2.delta == doctest::Approx(0.1));

    // single singular point: width/3 replaces the (undefined) min gap
    SingularPoint lone{0.0, SingularKind::MultipleBoundaryTP, 0.0, std::nullopt};
    NeighborhoodPlan p3 = plan_neighborhoods({lone}, 0.0, 0.12);
    CHECK(p3.delta == doctest::Approx(0.04));

    CHECK(plan_neighborhoods({}, 0.0, 1.0).j_intervals.empty());

    // neighborhoods are pairwise disjoint by construction
    for (std::size_t i = 1; i < p1.j_intervals.size(); ++i)
        CHECK(p1.j_intervals[i].first > p1.j_intervals[i - 1].second);
}

TEST_CASE("element models: anchored tangent, midpoint constant") {
    BoundaryValueProblem bvp = ex2_bvp();
    auto singulars = classify(bvp);
    Partition part = build_partition(-1.0, 1.0, 64, {-1.0, 1.0});
    NeighborhoodPlan plan = plan_neighborhoods(singulars, -1.0, 1.0);
    PiecewiseCoefficients coeffs = approximate_coefficients(bvp, part, plan);

    // first element is adjacent to s = -1: pbar = 2 (x + 1)
    REQUIRE(coeffs.pbar[0].kind == PBar::Kind::Linear);
    CHECK(coeffs.pbar[0].slope == doctest::Approx(2.0));
    CHECK(coeffs.pbar[0].x_star == doctest::Approx(-1.0));
    CHECK(coeffs.pbar[0].value == doctest::Approx(0.0));
    CHECK(coeffs.pbar[0](-1.0 + 0.01) == doctest::Approx(0.02).epsilon(1e-12));
    // its dual reaction coefficient uses the exact tangent slope
    CHECK(coeffs.bhat(0) == doctest::Approx(3.0 - 2.0));

    // a mid-domain element is far from the neighborhoods: midpoint constant
    int mid_k = 32;  // element [0, 1/32]
    CHECK(coeffs.pbar[mid_k].kind == PBar::Kind::Constant);
    double m = 0.5 * (part.nodes[mid_k] + part.nodes[mid_k + 1]);
    CHECK(coeffs.pbar[mid_k].c == doctest::Approx(1.0 - m * m));
    CHECK(coeffs.bbar[mid_k] == doctest::Approx(3.0));
    CHECK(coeffs.fbar[mid_k] == doctest::Approx(std::exp(m)));
}

TEST_CASE("midpoint-in-Jr rule for the oscillating coefficient") {
    BoundaryValueProblem bvp = ex1_bvp();
    auto singulars = classify(bvp);
    Partition part = build_partition(0.0, 1.0, 8, {0.25, 0.75});
    NeighborhoodPlan plan = plan_neighborhoods(singulars, 0.0, 1.0);
    PiecewiseCoefficients coeffs = approximate_coefficients(bvp, part, plan);
    // element [0.5 - 1/16, 0.5 + 1/16]... with N=8 element 4 is [0.5, 0.625],
    // midpoint 0.5625; use element [0.375, 0.5], midpoint 0.4375 in J_r:
    REQUIRE(coeffs.pbar[3].kind == PBar::Kind::Constant);
    CHECK(coeffs.pbar[3].c == doctest::Approx(std::cos(kTau * 0.4375)));
}

TEST_CASE("linear p is reproduced exactly inside the neighborhoods") {
    BoundaryValueProblem b;
    b.epsilon = 1e-3;
    b.p = [](double x) { return 2.0 * x + 1.0; };  // zero at -0.5, repulsive
    b.dp = [](double) { return 2.0; };
    b.b = [](double) { return 5.0; };
    b.f = [](double) { return 1.0; };
    b.x_left = -1.0;
    b.x_right = 0.0;
    // repulsive interior point plus the two outflow layers (p < 0 at the left
    // endpoint, p > 0 at the right one)
    auto singulars = classify(b);
    REQUIRE(singulars.size() == 3);
    CHECK(singulars[0].kind == SingularKind::ExponentialBoundaryLayer);
    CHECK(singulars[1].kind == SingularKind::RepulsiveInteriorTP);
    CHECK(singulars[2].kind == SingularKind::ExponentialBoundaryLayer);

    Partition part = build_partition(-1.0, 0.0, 16, {-1.0, -0.5, 0.0});
    NeighborhoodPlan plan = plan_neighborhoods(singulars, -1.0, 0.0);
    PiecewiseCoefficients coeffs = approximate_coefficients(b, part, plan);
    for (int k = 0; k < part.n_elements(); ++k) {
        double m = 0.5 * (part.nodes[k] + part.nodes[k + 1]);
        if (plan.neighborhood_of(m) >= 0) {
            REQUIRE(coeffs.pbar[k].kind == PBar::Kind::Linear);
            CHECK(coeffs.pbar[k](m) == doctest::Approx(b.p(m)).epsilon(1e-14));
        }
    }
    // jumps vanish where both sides reproduce p exactly
    for (int k = 1; k < part.n_elements(); ++k) {
        double x = part.nodes[k];
        if (plan.neighborhood_of(x - 1e-6) >= 0 && plan.neighborhood_of(x + 1e-6) >= 0)
            CHECK(std::fabs(coeffs.jump[k - 1]) < 1e-14);
    }
}

TEST_CASE("approximation quality: h^2 inside J, h|x-s| on anchor elements") {
    BoundaryValueProblem bvp = ex2_bvp();
    auto singulars = classify(bvp);
    NeighborhoodPlan plan = plan_neighborhoods(singulars, -1.0, 1.0);

    auto fit = [&](int n, double& c_mid, double& c_anchor, double& max_jump) {
        Partition part = build_partition(-1.0, 1.0, n, {-1.0, 1.0});
        PiecewiseCoefficients coeffs = approximate_coefficients(bvp, part, plan);
        c_mid = c_anchor = max_jump = 0.0;
        for (int k = 0; k < part.n_elements(); ++k) {
            double xl = part.nodes[k], xr = part.nodes[k + 1];
            double h = xr - xl, m = 0.5 * (xl + xr);
            int j = plan.neighborhood_of(m);
            if (j < 0 || coeffs.pbar[k].kind != PBar::Kind::Linear) continue;
            double s = plan.singular_points[j].location;
            bool anchored_at_s = coeffs.pbar[k].x_star == s;
            for (int q = 0; q <= 8; ++q) {
                double x = xl + h * q / 8.0;
                double err = std::fabs(bvp.p(x) - coeffs.pbar[k](x));
                if (anchored_at_s) {
                    if (std::fabs(x - s) > 1e-12) c_anchor = std::max(c_anchor, err / (h * std::fabs(x - s)));
                } else {
                    c_mid = std::max(c_mid, err / (h * h));
                }
            }
        }
        for (double j : coeffs.jump) max_jump = std::max(max_jump, std::fabs(j));
    };

    double cm64, ca64, j64;
    fit(64, cm64, ca64, j64);
    for (int n : {128, 256, 512}) {
        double cm, ca, j;
        fit(n, cm, ca, j);
        CHECK(cm <= 1.2 * cm64 + 1e-12);  // constants do not grow under refinement
        CHECK(ca <= 1.2 * ca64 + 1e-12);
        CHECK(j <= j64 * (1.2 * 64.0 / n));  // jumps shrink linearly in h
    }
}

TEST_CASE("element adjacent to two singular points is rejected") {
    BoundaryValueProblem bvp = ex2_bvp();
    Partition part = build_partition(-1.0, 1.0, 4, {-1.0, -0.5});
    NeighborhoodPlan plan;
    plan.delta = 0.6;  // oversized neighborhoods force the ambiguity
    plan.singular_points = {{-1.0, SingularKind::BoundaryTPPositiveSlope, 2.0, std::nullopt},
                            {-0.5, SingularKind::RepulsiveInteriorTP, 1.0, std::nullopt}};
    plan.j_intervals = {{-1.0, -0.4}, {-1.0, 0.1}};
    CHECK_THROWS_AS(approximate_coefficients(bvp, part, plan), ConfigError);
}

#include <doctest.h>

#include <cmath>
#include <random>

#include "tpfem/assemble.hpp"
#include "tpfem/norms.hpp"

using namespace tpfem;

namespace {

Partition uniform(double a, double b, int n) { return build_partition(a, b, n, {}); }

}  // namespace

TEST_CASE("linf_h") {
    CHECK(linf_h({1.0, -3.0, 2.0}) == doctest::Approx(3.0));
    CHECK(linf_h(std::vector<double>(7, -2.5)) == doctest::Approx(2.5));
    CHECK_THROWS_AS(linf_h({}), ConfigError);
}

TEST_CASE("l2_h weights telescope to the interval length") {
    Partition p = uniform(0.0, 1.0, 16);
    std::vector<double> ones(17, 1.0);
    CHECK(l2_h(ones, p) == doctest::Approx(1.0).epsilon(1e-14));

    std::vector<double> zeros(17, 0.0);
    CHECK(l2_h(zeros, p) == doctest::Approx(0.0));

    // single interior spike on N=10: one weight of h = 1/10
    Partition q = uniform(0.0, 1.0, 10);
    std::vector<double> spike(11, 0.0);
    spike[4] = 1.0;
    CHECK(l2_h(spike, q) == doctest::Approx(std::sqrt(0.1)).epsilon(1e-14));

    CHECK_THROWS_AS(l2_h(ones, q), ConfigError);  // length mismatch
}

TEST_CASE("energy_h") {
    Partition p = uniform(0.0, 1.0, 8);
    std::vector<double> c(9, 3.0);
    CHECK(energy_h(c, p, 0.7) == doctest::Approx(l2_h(c, p)).epsilon(1e-14));

    std::vector<double> ramp(9);
    for (int i = 0; i <= 8; ++i) ramp[i] = p.nodes[i];
    CHECK(energy_h(ramp, p, 0.0) == doctest::Approx(l2_h(ramp, p)).epsilon(1e-14));
    // derivative quotients of the ramp are 1: energy^2 = l2^2 + eps * 1
    double e = energy_h(ramp, p, 0.5);
    double l = l2_h(ramp, p);
    CHECK(e * e - l * l == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("norm axioms and ordering on random grid functions") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    Partition p = uniform(-1.0, 1.0, 24);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> u(25), v(25);
        for (auto& x : u) x = dist(rng);
        for (auto& x : v) x = dist(rng);
        double alpha = dist(rng);
        std::vector<double> au(25), upv(25);
        for (int i = 0; i < 25; ++i) {
            au[i] = alpha * u[i];
            upv[i] = u[i] + v[i];
        }
        for (double eps : {0.0, 1e-3, 1.0}) {
            auto norm = [&](const std::vector<double>& w) { return energy_h(w, p, eps); };
            CHECK(norm(au) == doctest::Approx(std::fabs(alpha) * norm(u)).epsilon(1e-12));
            CHECK(norm(upv) <= norm(u) + norm(v) + 1e-12);
        }
        CHECK(linf_h(au) == doctest::Approx(std::fabs(alpha) * linf_h(u)).epsilon(1e-12));
        CHECK(l2_h(u, p) <= energy_h(u, p, 1e-4) + 1e-15);
        // energy approaches l2 as eps -> 0
        CHECK(energy_h(u, p, 1e-12) == doctest::Approx(l2_h(u, p)).epsilon(1e-6));
    }
}

TEST_CASE("restriction is exact on nested grids and rejects others") {
    Partition fine = uniform(0.0, 1.0, 32);
    std::vector<double> fv(33);
    for (int i = 0; i <= 32; ++i) fv[i] = std::sin(fine.nodes[i]);
    Reference ref = GridReference{fine, fv};

    Partition coarse = uniform(0.0, 1.0, 8);
    auto r = restrict_reference(ref, coarse);
    for (int i = 0; i <= 8; ++i) CHECK(r[i] == std::sin(coarse.nodes[i]));

    Partition off = uniform(0.0, 1.0, 24);  // 24 does not divide 32
    CHECK_THROWS_AS(restrict_reference(ref, off), EvaluationError);
}

TEST_CASE("error_report rates") {
    auto make_sol = [](int n, double value) {
        GridSolution s;
        s.partition = uniform(0.0, 1.0, n);
        s.values.assign(n + 1, value);
        s.info.epsilon = 1.0;
        return s;
    };
    auto zero_ref = [](double) { return Reference(ExactReference([](double) { return 0.0; })); };

    // errors halving each refinement: all rates exactly 1
    std::vector<GridSolution> sols;
    for (int n : {16, 32, 64}) sols.push_back(make_sol(n, 8.0 / n));
    ErrorReport rep = error_report(sols, zero_ref, "zero");
    REQUIRE(rep.rows.size() == 3);
    CHECK_FALSE(rep.rows[0].rate_linf.has_value());
    CHECK(*rep.rows[1].rate_linf == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(*rep.rows[2].rate_linf == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(*rep.rows[2].rate_energy == doctest::Approx(1.0).epsilon(1e-10));

    // solution equal to the reference: zero errors, no rates
    auto self = make_sol(16, 0.0);
    ErrorReport rep2 = error_report({self}, zero_ref, "zero");
    CHECK(rep2.rows[0].linf == 0.0);
    CHECK_FALSE(rep2.rows[0].rate_linf.has_value());
}

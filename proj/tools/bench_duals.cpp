// Timing comparison: serial vs OpenMP test-function construction, plus the
// end-to-end solve, on the boundary-turning-point benchmark problem.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tpfem/examples.hpp"

using namespace tpfem;

namespace {

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

struct Case {
    DualMode mode;
    int n;
};

double time_build(const PiecewiseCoefficients& coeffs, const Partition& part, double eps,
                  DualMode mode, int n1, bool parallel, int reps) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        double t0 = now_s();
        auto tests = parallel ? build_test_functions(coeffs, part, eps, mode, n1)
                              : build_test_functions_serial(coeffs, part, eps, mode, n1);
        best = std::min(best, now_s() - t0);
        if (tests.empty()) std::printf("?");
    }
    return best;
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; both columns run serial\n");
#endif

    const double eps = 1e-6;
    ExampleSpec spec = example_ex2();
    const Case cases[] = {
        {DualMode::Exact, 1024}, {DualMode::Exact, 4096},
        {DualMode::Tfpm, 1024},  {DualMode::Tfpm, 4096},
    };

    std::printf("%-8s %-6s %12s %12s %9s\n", "duals", "N", "serial [s]", "openmp [s]", "speedup");
    for (const Case& c : cases) {
        BoundaryValueProblem bvp = make_bvp(spec, eps);
        std::vector<SingularPoint> singulars =
            classify_singular_points(bvp, find_turning_points(bvp, 4096));
        std::vector<double> locs;
        for (const auto& s : singulars) locs.push_back(s.location);
        Partition part = build_partition(bvp.x_left, bvp.x_right, c.n, locs);
        NeighborhoodPlan plan = plan_neighborhoods(singulars, bvp.x_left, bvp.x_right);
        PiecewiseCoefficients coeffs = approximate_coefficients(bvp, part, plan);

        double ts = time_build(coeffs, part, eps, c.mode, 256, false, 3);
        double tp = time_build(coeffs, part, eps, c.mode, 256, true, 3);
        std::printf("%-8s %-6d %12.4f %12.4f %8.2fx\n",
                    c.mode == DualMode::Exact ? "exact" : "tfpm", c.n, ts, tp, ts / tp);
    }
    return 0;
}

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "tpfem/output.hpp"

using namespace tpfem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

/// Minimal XML well-formedness check: tags balance, one root element.
bool xml_well_formed(const std::string& text) {
    std::vector<std::string> stack;
    std::size_t i = 0;
    int roots = 0;
    while (i < text.size()) {
        if (text[i] != '<') { ++i; continue; }
        std::size_t end = text.find('>', i);
        if (end == std::string::npos) return false;
        std::string tag = text.substr(i + 1, end - i - 1);
        i = end + 1;
        if (tag.empty()) return false;
        if (tag[0] == '?' || tag[0] == '!') continue;
        bool closing = tag[0] == '/';
        bool self_closing = tag.back() == '/';
        std::string name = tag.substr(closing ? 1 : 0);
        name = name.substr(0, name.find_first_of(" \t\n/"));
        if (closing) {
            if (stack.empty() || stack.back() != name) return false;
            stack.pop_back();
            if (stack.empty()) ++roots;
        } else if (!self_closing) {
            stack.push_back(name);
        }
    }
    return stack.empty() && roots == 1;
}

ErrorReport tiny_report() {
    ErrorReport rep;
    rep.rows.push_back({1e-2, 32, 1.5e-3, 2.5e-4, 7.0e-4, {}, {}, {}});
    rep.rows.push_back({1e-2, 64, 4.0e-4, 6.0e-5, 1.8e-4, 1.9069, 2.06, 1.96});
    return rep;
}

}  // namespace

TEST_CASE("error table CSV schema and formatting") {
    std::string csv = error_table_csv("ex2", tiny_report(), DualMode::Exact, 256);
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    CHECK(line == "example,eps,N,linf,rate_linf,l2,rate_l2,energy,rate_energy,dual_mode,N1");
    std::getline(is, line);
    CHECK(line.rfind("ex2,0.01,32,", 0) == 0);
    CHECK(line.find(",,") != std::string::npos);  // undefined rates are blank
    std::getline(is, line);
    CHECK(line.find("1.91") != std::string::npos);  // two-decimal rate
    CHECK(line.find("exact,256") != std::string::npos);

    ErrorReport empty;
    CHECK_THROWS_AS(error_table_csv("ex2", empty, DualMode::Exact, 256), ConfigError);
}

TEST_CASE("CSV emission is deterministic byte-for-byte") {
    ExampleSpec spec = example_ex3();
    spec.eps_list = {1.0, 1e-2};
    spec.n_list = {16, 32};
    RunResult r1 = run_example(spec);
    RunResult r2 = run_example(spec);
    std::string c1 = error_table_csv(spec.id, r1.table, spec.mode, spec.n1);
    std::string c2 = error_table_csv(spec.id, r2.table, spec.mode, spec.n1);
    CHECK(c1 == c2);
    CHECK(c1.find("ex3,1,16,") != std::string::npos);
}

TEST_CASE("SVG output is well-formed with one polyline per series") {
    std::vector<PlotSeries> series(2);
    series[0].label = "reference";
    series[1].label = "pgfem & upwind <test>";
    for (int i = 0; i <= 100; ++i) {
        double x = i / 100.0;
        series[0].x.push_back(x);
        series[0].y.push_back(std::sin(6.28 * x));
        series[1].x.push_back(x);
        series[1].y.push_back(std::cos(6.28 * x));
    }
    std::string path = "test_plot.svg";
    write_svg_plot(path, "overlay <&>", series, 0.0, 1.0);
    std::string text = slurp(path);
    CHECK(xml_well_formed(text));
    std::size_t count = 0, pos = 0;
    while ((pos = text.find("<polyline", pos)) != std::string::npos) {
        ++count;
        pos += 9;
    }
    CHECK(count == 2);
    std::remove(path.c_str());
}

TEST_CASE("solution plots include a magnification panel per singular point") {
    std::vector<PlotSeries> series(1);
    series[0].label = "u";
    for (int i = 0; i <= 64; ++i) {
        series[0].x.push_back(i / 64.0);
        series[0].y.push_back(i / 64.0);
    }
    std::vector<SingularPoint> sing = {{0.25, SingularKind::AttractiveInteriorTP, -1.0, 0.5},
                                       {1.0, SingularKind::ExponentialBoundaryLayer, 0.0, {}}};
    auto files = write_solution_plots("test_sol", "t", series, sing, 0.0, 1.0);
    REQUIRE(files.size() == 3);
    for (const auto& f : files) {
        CHECK(xml_well_formed(slurp(f)));
        std::remove(f.c_str());
    }
}

TEST_CASE("run manifest is valid JSON with config and timings") {
    ExampleSpec spec = example_ex3();
    spec.eps_list = {1e-2};
    spec.n_list = {16};
    RunOptions opts;
    RunResult res = run_example(spec, opts);
    std::string path = "test_manifest.json";
    write_run_manifest(path, spec, opts, res);
    nlohmann::json j = nlohmann::json::parse(slurp(path));
    CHECK(j["config"]["example"] == "ex3");
    CHECK(j["config"]["dual_mode"] == "tfpm");
    CHECK(j["timings"].size() == 1);
    CHECK(j.contains("versions"));
    std::remove(path.c_str());
}

TEST_CASE("solution CSV writes x,u rows") {
    GridSolution s;
    s.partition = build_partition(0.0, 1.0, 4, {});
    s.values = {0.0, 0.5, 1.0, 0.5, 0.0};
    std::string path = "test_solution.csv";
    write_solution_csv(path, s);
    std::string text = slurp(path);
    CHECK(text.rfind("x,u\n0,0\n", 0) == 0);
    std::remove(path.c_str());
}

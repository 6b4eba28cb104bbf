#include "tpfem/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tpfem {

namespace {

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_eps(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::string fmt_rate(const std::optional<double>& r) {
    if (!r) return "";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", *r);
    return buf;
}

std::ofstream open_or_throw(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw EvaluationError("cannot write to '" + path + "'");
    return os;
}

const char* mode_name(DualMode m) { return m == DualMode::Exact ? "exact" : "tfpm"; }

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string error_table_csv(const std::string& example_id, const ErrorReport& report,
                            DualMode mode, int n1) {
    if (report.rows.empty()) throw ConfigError("error_table_csv: no rows to write");
    std::ostringstream os;
    os << "example,eps,N,linf,rate_linf,l2,rate_l2,energy,rate_energy,dual_mode,N1\n";
    for (const ErrorRow& r : report.rows) {
        os << example_id << ',' << fmt_eps(r.eps) << ',' << r.n << ',' << fmt_g17(r.linf) << ','
           << fmt_rate(r.rate_linf) << ',' << fmt_g17(r.l2) << ',' << fmt_rate(r.rate_l2) << ','
           << fmt_g17(r.energy) << ',' << fmt_rate(r.rate_energy) << ',' << mode_name(mode) << ','
           << n1 << '\n';
    }
    return os.str();
}

void write_error_table_csv(const std::string& path, const std::string& example_id,
                           const ErrorReport& report, DualMode mode, int n1) {
    std::string body = error_table_csv(example_id, report, mode, n1);
    open_or_throw(path) << body;
}

void write_solution_csv(const std::string& path, const GridSolution& sol) {
    auto os = open_or_throw(path);
    os << "x,u\n";
    for (std::size_t i = 0; i < sol.values.size(); ++i)
        os << fmt_g17(sol.partition.nodes[i]) << ',' << fmt_g17(sol.values[i]) << '\n';
}

void write_run_manifest(const std::string& path, const ExampleSpec& spec, const RunOptions& opts,
                        const RunResult& result) {
    nlohmann::json j;
    j["config"] = {
        {"example", spec.id},
        {"p", spec.p.to_string()},
        {"b", spec.b.to_string()},
        {"f", spec.f.to_string()},
        {"domain", {spec.x_left, spec.x_right}},
        {"u_left", spec.u_left.to_string()},
        {"u_right", spec.u_right.to_string()},
        {"eps", spec.eps_list},
        {"n", spec.n_list},
        {"dual_mode", mode_name(spec.mode)},
        {"n1", spec.n1},
        {"ref_n", opts.ref_n.value_or(spec.ref_n)},
        {"with_baseline", opts.with_baseline},
    };
    if (spec.exact_solution) j["config"]["exact_solution"] = spec.exact_solution->to_string();
    j["versions"] = {
        {"tpfem", "0.1.0"},
        {"compiler", __VERSION__},
    };
    j["singular_points"] = nlohmann::json::array();
    for (const SingularPoint& s : result.singular_points) {
        nlohmann::json sp = {{"location", s.location}, {"kind", to_string(s.kind)},
                             {"slope", s.slope}};
        if (s.lambda) sp["lambda"] = *s.lambda;
        j["singular_points"].push_back(sp);
    }
    j["timings"] = nlohmann::json::array();
    for (const GridSolution& s : result.solutions) {
        j["timings"].push_back({{"eps", s.info.epsilon},
                                {"n", s.partition.n_elements()},
                                {"duals_s", s.info.seconds_duals},
                                {"assemble_s", s.info.seconds_assemble},
                                {"solve_s", s.info.seconds_solve},
                                {"max_principle", s.info.max_principle.is_m_like},
                                {"pcf_fallbacks", s.info.pcf_fallbacks}});
    }
    j["seconds_total"] = result.seconds_total;
    j["errors"] = nlohmann::json::array();
    for (const CellError& e : result.errors)
        j["errors"].push_back({{"eps", e.eps}, {"n", e.n}, {"stage", e.stage},
                               {"message", e.message}});
    open_or_throw(path) << j.dump(2) << '\n';
}

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<PlotSeries>& series, double x_min, double x_max) {
    if (series.empty()) throw ConfigError("write_svg_plot: no series");

    double y_min = 1e300, y_max = -1e300;
    for (const PlotSeries& s : series) {
        if (s.x.size() != s.y.size()) throw ConfigError("write_svg_plot: x/y length mismatch");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (s.x[i] < x_min || s.x[i] > x_max) continue;
            y_min = std::min(y_min, s.y[i]);
            y_max = std::max(y_max, s.y[i]);
        }
    }
    if (y_min > y_max) { y_min = 0.0; y_max = 1.0; }
    double pad = 0.05 * std::max(y_max - y_min, 1e-12);
    y_min -= pad;
    y_max += pad;

    const double W = 720, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
    auto sx = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (W - ml - mr); };
    auto sy = [&](double y) { return H - mb - (y - y_min) / (y_max - y_min) * (H - mt - mb); };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

    auto os = open_or_throw(path);
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W
       << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
       << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
       << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
       << xml_escape(title) << "</text>\n";

    // axes + ticks
    os << "<g stroke=\"black\" fill=\"none\">\n"
       << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
       << H - mb << "\"/>\n"
       << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
       << "\"/>\n</g>\n";
    for (int t = 0; t <= 4; ++t) {
        double xv = x_min + (x_max - x_min) * t / 4.0;
        double yv = y_min + (y_max - y_min) * t / 4.0;
        char bx[64], by[64];
        std::snprintf(bx, sizeof(bx), "%.4g", xv);
        std::snprintf(by, sizeof(by), "%.4g", yv);
        os << "<text x=\"" << sx(xv) << "\" y=\"" << H - mb + 18
           << "\" text-anchor=\"middle\" font-size=\"11\">" << bx << "</text>\n"
           << "<text x=\"" << ml - 8 << "\" y=\"" << sy(yv) + 4
           << "\" text-anchor=\"end\" font-size=\"11\">" << by << "</text>\n";
    }

    int ci = 0;
    double ly = mt + 8;
    for (const PlotSeries& s : series) {
        const char* color = palette[ci % 5];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (s.x[i] < x_min || s.x[i] > x_max) continue;
            if (!first) os << ' ';
            os << sx(s.x[i]) << ',' << sy(s.y[i]);
            first = false;
        }
        os << "\"/>\n";
        os << "<line x1=\"" << W - mr - 150 << "\" y1=\"" << ly << "\" x2=\"" << W - mr - 130
           << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
           << "<text x=\"" << W - mr - 125 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">"
           << xml_escape(s.label) << "</text>\n";
        ly += 16;
        ++ci;
    }
    os << "</svg>\n";
}

std::vector<std::string> write_solution_plots(const std::string& base_path,
                                              const std::string& title,
                                              const std::vector<PlotSeries>& series,
                                              const std::vector<SingularPoint>& singulars,
                                              double x_left, double x_right) {
    std::vector<std::string> written;
    std::string full = base_path + ".svg";
    write_svg_plot(full, title, series, x_left, x_right);
    written.push_back(full);

    double w = x_right - x_left;
    for (const SingularPoint& s : singulars) {
        double half = 0.02 * w;
        double lo = std::max(x_left, s.location - half);
        double hi = std::min(x_right, s.location + half);
        std::ostringstream name;
        name << base_path << "_zoom_" << s.location << ".svg";
        std::ostringstream t2;
        t2 << title << " (near x=" << s.location << ")";
        write_svg_plot(name.str(), t2.str(), series, lo, hi);
        written.push_back(name.str());
    }
    return written;
}

}  // namespace tpfem

#pragma once

#include <string>
#include <vector>

#include "tpfem/examples.hpp"

namespace tpfem {

/// Header: example,eps,N,linf,rate_linf,l2,rate_l2,energy,rate_energy,dual_mode,N1
/// Floats carry 17 significant digits; rates two decimals, blank when
/// undefined. Identical inputs produce byte-identical files.
std::string error_table_csv(const std::string& example_id, const ErrorReport& report,
                            DualMode mode, int n1);
void write_error_table_csv(const std::string& path, const std::string& example_id,
                           const ErrorReport& report, DualMode mode, int n1);

/// x,u rows for a single solution.
void write_solution_csv(const std::string& path, const GridSolution& sol);

/// Full run manifest: configuration, library/compiler versions, per-cell and
/// total timings (timings live here, never in the CSV).
void write_run_manifest(const std::string& path, const ExampleSpec& spec, const RunOptions& opts,
                        const RunResult& result);

struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
};

/// Static SVG 1.1 line plot, one polyline per series.
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<PlotSeries>& series, double x_min, double x_max);

/// Overlay of the computed solutions plus a magnification panel per singular
/// point (written as separate files next to `base_path`).
std::vector<std::string> write_solution_plots(const std::string& base_path,
                                              const std::string& title,
                                              const std::vector<PlotSeries>& series,
                                              const std::vector<SingularPoint>& singulars,
                                              double x_left, double x_right);

}  // namespace tpfem

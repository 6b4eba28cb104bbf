#include "tpfem/norms.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tpfem/assemble.hpp"
#include "tpfem/errors.hpp"

namespace tpfem {

double linf_h(const std::vector<double>& values) {
    if (values.empty()) throw ConfigError("linf_h of an empty grid function");
    double m = 0.0;
    for (double v : values) m = std::max(m, std::fabs(v));
    return m;
}

double l2_h(const std::vector<double>& values, const Partition& part) {
    if (values.size() != part.nodes.size())
        throw ConfigError("l2_h: values/partition length mismatch");
    int n = part.n_elements();
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
        double h_i = i >= 1 ? part.element_size(i) : 0.0;        // h_0 = 0
        double h_ip1 = i + 1 <= n ? part.element_size(i + 1) : 0.0;  // h_{N+1} = 0
        s += values[i] * values[i] * 0.5 * (h_i + h_ip1);
    }
    return std::sqrt(s);
}

double energy_h(const std::vector<double>& values, const Partition& part, double eps) {
    if (values.size() != part.nodes.size())
        throw ConfigError("energy_h: values/partition length mismatch");
    double l2 = l2_h(values, part);
    double d = 0.0;
    for (int i = 1; i <= part.n_elements(); ++i) {
        double h = part.element_size(i);
        double q = (values[i] - values[i - 1]) / h;
        d += q * q * h;
    }
    return std::sqrt(l2 * l2 + eps * d);
}

std::vector<double> restrict_reference(const Reference& ref, const Partition& part) {
    std::vector<double> out(part.nodes.size());
    if (const auto* exact = std::get_if<ExactReference>(&ref)) {
        for (std::size_t i = 0; i < part.nodes.size(); ++i) out[i] = (*exact)(part.nodes[i]);
        return out;
    }
    const auto& gr = std::get<GridReference>(ref);
    const double span = std::fabs(gr.grid.x_right() - gr.grid.x_left());
    const double tol = 1e-12 * std::max(1.0, span);
    for (std::size_t i = 0; i < part.nodes.size(); ++i) {
        double x = part.nodes[i];
        auto it = std::lower_bound(gr.grid.nodes.begin(), gr.grid.nodes.end(), x - tol);
        if (it == gr.grid.nodes.end() || std::fabs(*it - x) > tol)
            throw EvaluationError("error_report: grids are not nested (no reference node at x=" +
                                  std::to_string(x) + ")");
        out[i] = gr.values[static_cast<std::size_t>(it - gr.grid.nodes.begin())];
    }
    return out;
}

ErrorReport error_report(const std::vector<GridSolution>& solutions,
                         const std::function<Reference(double eps)>& reference_for_eps,
                         std::string reference_kind) {
    ErrorReport rep;
    rep.reference_kind = std::move(reference_kind);

    // group by eps, preserving first-appearance order of eps values
    std::vector<double> eps_order;
    for (const GridSolution& s : solutions) {
        double e = s.info.epsilon;
        if (std::find(eps_order.begin(), eps_order.end(), e) == eps_order.end())
            eps_order.push_back(e);
    }

    for (double eps : eps_order) {
        Reference ref = reference_for_eps(eps);
        std::map<int, ErrorRow> rows;
        for (const GridSolution& s : solutions) {
            if (s.info.epsilon != eps) continue;
            std::vector<double> rv = restrict_reference(ref, s.partition);
            std::vector<double> diff(s.values.size());
            for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = s.values[i] - rv[i];
            ErrorRow row{eps, s.partition.n_elements(), linf_h(diff), l2_h(diff, s.partition),
                         energy_h(diff, s.partition, eps), {}, {}, {}};
            rows[row.n] = row;
        }
        for (auto& [n, row] : rows) {
            auto coarser = rows.find(n / 2);
            if (n % 2 == 0 && coarser != rows.end()) {
                auto rate = [](double e_coarse, double e_fine) -> std::optional<double> {
                    if (e_coarse <= 0.0 || e_fine <= 0.0) return std::nullopt;
                    return std::log2(e_coarse / e_fine);
                };
                row.rate_linf = rate(coarser->second.linf, row.linf);
                row.rate_l2 = rate(coarser->second.l2, row.l2);
                row.rate_energy = rate(coarser->second.energy, row.energy);
            }
            rep.rows.push_back(row);
        }
    }
    return rep;
}

}  // namespace tpfem

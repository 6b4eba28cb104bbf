#pragma once

#include <cmath>
#include <vector>

#include "tpfem/errors.hpp"

namespace tpfem {

/// Partition x_0 < x_1 < ... < x_N with singular locations flagged.
struct Partition {
    std::vector<double> nodes;
    std::vector<bool> singular;

    int n_elements() const { return static_cast<int>(nodes.size()) - 1; }
    double x_left() const { return nodes.front(); }
    double x_right() const { return nodes.back(); }
    /// h_i = x_i - x_{i-1}, i in [1, N]
    double element_size(int i) const { return nodes[i] - nodes[i - 1]; }
    double h_max() const {
        double h = 0.0;
        for (int i = 1; i < static_cast<int>(nodes.size()); ++i)
            h = std::max(h, element_size(i));
        return h;
    }
};

/// Uniform grid of N+1 nodes; each interior singular point not already on the
/// grid is snapped onto the nearest interior node (the node moves, the count
/// stays). Endpoints never move.
Partition build_partition(double x_left, double x_right, int n,
                          const std::vector<double>& singular_points);

struct LayerSpec {
    enum class Width { Eps, SqrtEps };
    enum class Side { Left, Right, Both };  // side of the location the fine region sits on
    double location;
    Width width = Width::Eps;
    Side side = Side::Left;
};

/// Piecewise-uniform layer-adapted mesh: each layer side gets a fine region of
/// width tau = min(free_width/4, 2*scale*ln N); the rest of the budget is
/// uniform over the complement.
Partition shishkin_mesh(double x_left, double x_right, int n, double eps,
                        const std::vector<LayerSpec>& layers);

}  // namespace tpfem

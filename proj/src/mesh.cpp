#include "tpfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tpfem {

Partition build_partition(double x_left, double x_right, int n,
                          const std::vector<double>& singular_points) {
    if (n < 4) throw ConfigError("build_partition needs N >= 4");
    if (!(x_left < x_right)) throw ConfigError("build_partition needs x_left < x_right");

    Partition part;
    part.nodes.resize(n + 1);
    part.singular.assign(n + 1, false);
    double h = (x_right - x_left) / n;
    for (int i = 0; i <= n; ++i) part.nodes[i] = x_left + i * h;
    part.nodes[0] = x_left;
    part.nodes[n] = x_right;

    const double tol = 1e-12 * std::max(1.0, std::fabs(x_left) + std::fabs(x_right));
    std::vector<int> taken;
    for (double s : singular_points) {
        if (s < x_left - tol || s > x_right + tol) {
            std::ostringstream os;
            os << "singular point " << s << " lies outside [" << x_left << ", " << x_right << "]";
            throw ConfigError(os.str());
        }
        int k;
        if (std::fabs(s - x_left) <= tol) k = 0;
        else if (std::fabs(s - x_right) <= tol) k = n;
        else {
            k = static_cast<int>(std::lround((s - x_left) / h));
            k = std::clamp(k, 1, n - 1);  // endpoints never move
            if (std::find(taken.begin(), taken.end(), k) != taken.end()) {
                std::ostringstream os;
                os << "two singular points snap to the same node (index " << k
                   << "); increase N to separate them";
                throw ConfigError(os.str());
            }
            taken.push_back(k);
            part.nodes[k] = s;
        }
        part.singular[k] = true;
    }

    for (int i = 1; i <= n; ++i) {
        if (!(part.nodes[i] > part.nodes[i - 1]))
            throw ConfigError("snapping produced a non-monotone partition; increase N");
    }
    return part;
}

namespace {

struct FineRegion {
    double lo, hi;
};

}  // namespace

Partition shishkin_mesh(double x_left, double x_right, int n, double eps,
                        const std::vector<LayerSpec>& layers) {
    if (n < 4) throw ConfigError("shishkin_mesh needs N >= 4");
    if (!(x_left < x_right)) throw ConfigError("shishkin_mesh needs x_left < x_right");

    // Expand Both into two one-sided entries.
    struct Sidee {
        double loc;
        int dir;  // -1: fine region [loc - tau, loc]; +1: [loc, loc + tau]
        double scale;
    };
    std::vector<Sidee> sides;
    std::vector<double> locs;
    for (const LayerSpec& l : layers) {
        if (l.location < x_left || l.location > x_right)
            throw ConfigError("layer location outside the domain");
        double sc = l.width == LayerSpec::Width::Eps ? eps : std::sqrt(eps);
        if (l.side == LayerSpec::Side::Left || l.side == LayerSpec::Side::Both)
            sides.push_back({l.location, -1, sc});
        if (l.side == LayerSpec::Side::Right || l.side == LayerSpec::Side::Both)
            sides.push_back({l.location, +1, sc});
        locs.push_back(l.location);
    }

    Partition part;
    if (sides.empty()) {
        part.nodes.resize(n + 1);
        part.singular.assign(n + 1, false);
        for (int i = 0; i <= n; ++i) part.nodes[i] = x_left + (x_right - x_left) * i / n;
        return part;
    }

    int s = static_cast<int>(sides.size());
    if (n % (2 * s) != 0 || n % 4 != 0) {
        std::ostringstream os;
        os << "shishkin_mesh with " << s << " layer side(s) needs N divisible by "
           << std::max(4, 2 * s);
        throw ConfigError(os.str());
    }

    // Free width toward the neighbouring layer location (or the far endpoint).
    std::vector<FineRegion> regions;
    for (const Sidee& sd : sides) {
        double limit = sd.dir < 0 ? x_left : x_right;
        for (double other : locs) {
            if (sd.dir < 0 && other < sd.loc - 1e-15) limit = std::max(limit, other);
            if (sd.dir > 0 && other > sd.loc + 1e-15) limit = std::min(limit, other);
        }
        double free_w = std::fabs(sd.loc - limit);
        double tau = std::min(free_w / 4.0, 2.0 * sd.scale * std::log(static_cast<double>(n)));
        if (!(tau > 0.0)) throw ConfigError("shishkin_mesh: degenerate transition width");
        if (sd.dir < 0) regions.push_back({sd.loc - tau, sd.loc});
        else regions.push_back({sd.loc, sd.loc + tau});
    }
    std::sort(regions.begin(), regions.end(),
              [](const FineRegion& a, const FineRegion& b) { return a.lo < b.lo; });
    for (int i = 1; i < static_cast<int>(regions.size()); ++i) {
        if (regions[i].lo < regions[i - 1].hi - 1e-15)
            throw ConfigError("shishkin_mesh: overlapping layer regions");
    }

    // Budget: N/(2s) intervals per fine region, the remaining N/2 distributed
    // over the complement segments proportionally to length.
    int fine_each = n / (2 * s);
    int coarse_total = n - fine_each * s;

    std::vector<std::pair<double, double>> coarse;
    double cursor = x_left;
    for (const FineRegion& r : regions) {
        if (r.lo > cursor + 1e-15) coarse.push_back({cursor, r.lo});
        cursor = r.hi;
    }
    if (cursor < x_right - 1e-15) coarse.push_back({cursor, x_right});

    double coarse_len = 0.0;
    for (auto& c : coarse) coarse_len += c.second - c.first;
    std::vector<int> coarse_n(coarse.size(), 0);
    int assigned = 0;
    for (std::size_t i = 0; i < coarse.size(); ++i) {
        int ni = static_cast<int>(std::lround(coarse_total * (coarse[i].second - coarse[i].first) /
                                              coarse_len));
        ni = std::max(1, ni);
        coarse_n[i] = ni;
        assigned += ni;
    }
    // fix rounding drift on the largest segment
    if (!coarse.empty() && assigned != coarse_total) {
        std::size_t big = 0;
        for (std::size_t i = 1; i < coarse.size(); ++i)
            if (coarse[i].second - coarse[i].first > coarse[big].second - coarse[big].first) big = i;
        coarse_n[big] += coarse_total - assigned;
        if (coarse_n[big] < 1) throw ConfigError("shishkin_mesh: budget too small; increase N");
    }

    // Assemble segments in order.
    struct Seg {
        double lo, hi;
        int count;
    };
    std::vector<Seg> segs;
    std::size_t ci = 0;
    cursor = x_left;
    for (const FineRegion& r : regions) {
        if (r.lo > cursor + 1e-15) {
            segs.push_back({coarse[ci].first, coarse[ci].second, coarse_n[ci]});
            ++ci;
        }
        segs.push_back({r.lo, r.hi, fine_each});
        cursor = r.hi;
    }
    if (ci < coarse.size()) segs.push_back({coarse[ci].first, coarse[ci].second, coarse_n[ci]});

    part.nodes.clear();
    part.nodes.push_back(x_left);
    for (const Seg& sg : segs) {
        for (int i = 1; i <= sg.count; ++i)
            part.nodes.push_back(sg.lo + (sg.hi - sg.lo) * i / sg.count);
    }
    part.nodes.back() = x_right;
    part.singular.assign(part.nodes.size(), false);

    if (static_cast<int>(part.nodes.size()) != n + 1)
        throw ConfigError("shishkin_mesh: internal budget mismatch");
    for (std::size_t i = 1; i < part.nodes.size(); ++i)
        if (!(part.nodes[i] > part.nodes[i - 1]))
            throw ConfigError("shishkin_mesh produced a non-monotone mesh");
    return part;
}

}  // namespace tpfem

#include "qgdetect/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qgd {

std::string to_string(GridKind k) {
    return k == GridKind::Static ? "static" : "adaptive";
}

GridKind grid_kind_from_string(const std::string& s) {
    if (s == "static") return GridKind::Static;
    if (s == "adaptive") return GridKind::Adaptive;
    throw std::invalid_argument("unknown grid kind '" + s + "'");
}

int QuantizationGrid::quantize(double x) const {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument("quantize: input outside [0, 1]");
    // First edge strictly above x; the class below it is the one whose
    // half-open interval holds x. x == 1 lands past the end, i.e. in the
    // closed top class.
    auto it = std::upper_bound(edges.begin(), edges.end(), x);
    auto y = static_cast<int>(it - edges.begin()) - 1;
    return std::min(y, m - 1);
}

double QuantizationGrid::bin_midpoint(int cls) const {
    if (cls < 0 || cls >= m)
        throw std::invalid_argument("bin_midpoint: class out of range");
    return 0.5 * (edges[cls] + edges[cls + 1]);
}

QuantizationGrid build_static_grid(int m) {
    if (m < 2) throw std::invalid_argument("build_static_grid: m < 2");
    QuantizationGrid g;
    g.kind = GridKind::Static;
    g.m = m;
    g.edges.resize(m + 1);
    for (int y = 0; y <= m; ++y)
        g.edges[y] = static_cast<double>(y) / m;
    g.edges[m] = 1.0;
    return g;
}

QuantizationGrid build_adaptive_grid(std::span<const double> samples, int m) {
    if (m < 2) throw std::invalid_argument("build_adaptive_grid: m < 2");
    if (samples.empty())
        throw std::invalid_argument("build_adaptive_grid: empty sample set");
    for (double s : samples)
        if (!(s >= 0.0 && s <= 1.0))
            throw std::invalid_argument("build_adaptive_grid: sample outside [0, 1]");

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());

    const std::size_t n = sorted.size();
    const std::size_t k = (n + m - 1) / m;

    QuantizationGrid g;
    g.kind = GridKind::Adaptive;
    g.m = m;
    g.edges.resize(m + 1);
    g.edges[0] = 0.0;
    g.edges[m] = 1.0;
    for (int y = 1; y < m; ++y) {
        std::size_t idx = std::min(static_cast<std::size_t>(y) * k, n - 1);
        g.edges[y] = sorted[idx];
    }
    return g;
}

GridDiagnostics diagnostics(const QuantizationGrid& grid,
                            std::span<const double> samples) {
    GridDiagnostics d;
    d.counts.assign(grid.m, 0);
    d.fractions.assign(grid.m, 0.0);
    for (double s : samples)
        ++d.counts[grid.quantize(s)];
    if (!samples.empty()) {
        for (int y = 0; y < grid.m; ++y)
            d.fractions[y] =
                static_cast<double>(d.counts[y]) / static_cast<double>(samples.size());
    }

    std::vector<double> widths(grid.m);
    for (int y = 0; y < grid.m; ++y)
        widths[y] = grid.edges[y + 1] - grid.edges[y];
    std::sort(widths.begin(), widths.end());
    const std::size_t h = widths.size() / 2;
    d.median_bin_width = (widths.size() % 2 == 1)
                             ? widths[h]
                             : 0.5 * (widths[h - 1] + widths[h]);
    return d;
}

} // namespace qgd

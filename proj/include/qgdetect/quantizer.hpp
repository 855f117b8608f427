#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace qgd {

enum class GridKind { Static, Adaptive };

std::string to_string(GridKind k);
GridKind grid_kind_from_string(const std::string& s);

// Partition of [0, 1] into m classes. edges has m+1 entries, non-decreasing,
// edges.front() == 0, edges.back() == 1. Class y covers [edges[y], edges[y+1])
// except the top class, which is closed at 1. Adaptive grids may contain
// zero-width bins when the sample distribution has heavy ties; quantize still
// maps every input to the one class whose interval actually contains it.
struct QuantizationGrid {
    GridKind kind = GridKind::Static;
    int m = 0;
    std::vector<double> edges;

    int quantize(double x) const;
    double bin_midpoint(int cls) const;
};

// Equal-width bins: edges[y] = y/m.
QuantizationGrid build_static_grid(int m);

// Equal-population bins: interior edge y sits at the sorted sample with
// index y*ceil(n/m) (clamped to the last sample). Outer edges pinned to 0
// and 1 regardless of the sample range.
QuantizationGrid build_adaptive_grid(std::span<const double> samples, int m);

struct GridDiagnostics {
    std::vector<std::size_t> counts;
    std::vector<double> fractions;
    double median_bin_width = 0.0;
};

GridDiagnostics diagnostics(const QuantizationGrid& grid,
                            std::span<const double> samples);

} // namespace qgd

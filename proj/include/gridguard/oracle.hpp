#pragma once

#include <vector>

#include "gridguard/auth.hpp"
#include "gridguard/grid.hpp"
#include "gridguard/hashstore.hpp"

namespace gridguard {

/// Ground-truth corruption report: the exact corrupted cell set, its
/// 4-neighbor connected components, and per-component hv-convexity.
struct DiffReport {
    Region cells;
    std::vector<Region> components;
    std::vector<bool> hv_convex;

    bool empty() const { return cells.empty(); }
    /// Component containing the given cell; throws if the cell is clean.
    const Region& component_of(CellCoord c) const;
};

/// Exact cell-by-cell diff in O(N) cell reads; components via flood fill.
DiffReport brute_force_diff(const Grid& actual, const Grid& original);

/// Same report derived from a sift store by verifying all N per-cell
/// digests; exactly N signature verifications.
DiffReport brute_force_store_scan(const Grid& actual, const Store& sift, CostMeter& meter);

}  // namespace gridguard

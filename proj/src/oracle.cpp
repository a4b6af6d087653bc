#include "gridguard/oracle.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>

namespace gridguard {

namespace {

DiffReport report_from_cells(std::vector<CellCoord> corrupted) {
    DiffReport report;
    report.cells = Region(std::move(corrupted));

    std::unordered_set<CellCoord, CellCoordHash> pending(report.cells.cells().begin(), report.cells.cells().end());
    while (!pending.empty()) {
        // Deterministic component order: seed each flood fill from the
        // smallest remaining cell in row-major order.
        CellCoord start = *std::min_element(pending.begin(), pending.end());
        std::vector<CellCoord> component;
        std::deque<CellCoord> queue{start};
        pending.erase(start);
        while (!queue.empty()) {
            CellCoord c = queue.front();
            queue.pop_front();
            component.push_back(c);
            const CellCoord nbrs[4] = {
                {c.row + 1, c.col}, {c.row, c.col + 1}, {c.row - 1, c.col}, {c.row, c.col - 1}};
            for (CellCoord nb : nbrs) {
                auto it = pending.find(nb);
                if (it != pending.end()) {
                    pending.erase(it);
                    queue.push_back(nb);
                }
            }
        }
        Region region(std::move(component));
        report.hv_convex.push_back(is_hv_convex(region));
        report.components.push_back(std::move(region));
    }
    return report;
}

}  // namespace

const Region& DiffReport::component_of(CellCoord c) const {
    for (const Region& comp : components)
        if (comp.contains(c)) return comp;
    throw InvalidArgument("cell is not corrupted");
}

DiffReport brute_force_diff(const Grid& actual, const Grid& original) {
    if (actual.m() != original.m() || actual.cell_size() != original.cell_size())
        throw MismatchError("grids have different dimensions");
    std::vector<CellCoord> corrupted;
    for (uint32_t r = 0; r < actual.m(); ++r)
        for (uint32_t c = 0; c < actual.m(); ++c) {
            CellCoord cc{r, c};
            auto a = actual.cell(cc), b = original.cell(cc);
            if (!std::equal(a.begin(), a.end(), b.begin())) corrupted.push_back(cc);
        }
    return report_from_cells(std::move(corrupted));
}

DiffReport brute_force_store_scan(const Grid& actual, const Store& sift, CostMeter& meter) {
    if (sift.variant() != StoreVariant::Sift) throw MismatchError("store scan needs a sift store");
    sift.require_matches(actual);
    std::vector<CellCoord> corrupted;
    for (uint32_t r = 0; r < actual.m(); ++r)
        for (uint32_t c = 0; c < actual.m(); ++c) {
            CellCoord cc{r, c};
            if (!sift.verify(actual, sift.digest_or_throw(single_cell_desc(cc)), meter)) corrupted.push_back(cc);
        }
    return report_from_cells(std::move(corrupted));
}

}  // namespace gridguard

#include "gridguard/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "gridguard/rng.hpp"
#include "gridguard/wire.hpp"

namespace gridguard {

namespace {

constexpr char kGridMagic[4] = {'G', '2', 'D', 'G'};
constexpr uint32_t kGridVersion = 1;

using CoordSet = std::unordered_set<CellCoord, CellCoordHash>;

void check_grid_params(uint32_t m, uint32_t cell_size) {
    if (m < 2 || !std::has_single_bit(m))
        throw InvalidArgument("grid side must be a power of 2, at least 2; got " + std::to_string(m));
    if (cell_size == 0) throw InvalidArgument("cell size must be at least 1 byte");
}

}  // namespace

// ---------------------------------------------------------------------------
// Grid

Grid::Grid(uint32_t m, uint32_t cell_size, std::vector<uint8_t> cells)
    : m_(m), cell_size_(cell_size), cells_(std::move(cells)) {
    check_grid_params(m, cell_size);
    const uint64_t want = n() * cell_size_;
    if (cells_.size() != want)
        throw InvalidArgument("grid payload is " + std::to_string(cells_.size()) + " bytes, expected " +
                              std::to_string(want));
}

Grid Grid::filled(uint32_t m, uint32_t cell_size, uint64_t seed) {
    check_grid_params(m, cell_size);
    std::vector<uint8_t> bytes(uint64_t{m} * m * cell_size);
    std::mt19937_64 eng(seed);
    size_t i = 0;
    while (i < bytes.size()) {
        uint64_t word = eng();
        for (int b = 0; b < 8 && i < bytes.size(); ++b, ++i) bytes[i] = static_cast<uint8_t>(word >> (8 * b));
    }
    return Grid(m, cell_size, std::move(bytes));
}

std::span<const uint8_t> Grid::cell(CellCoord c) const {
    if (!in_bounds(c)) throw InvalidArgument("cell out of bounds");
    return std::span<const uint8_t>(cells_).subspan((uint64_t{c.row} * m_ + c.col) * cell_size_, cell_size_);
}

std::span<uint8_t> Grid::cell_mut(CellCoord c) {
    if (!in_bounds(c)) throw InvalidArgument("cell out of bounds");
    return std::span<uint8_t>(cells_).subspan((uint64_t{c.row} * m_ + c.col) * cell_size_, cell_size_);
}

Grid new_grid(uint32_t m, uint32_t cell_size, uint64_t seed) { return Grid::filled(m, cell_size, seed); }

// ---------------------------------------------------------------------------
// Region

Region::Region(std::vector<CellCoord> cells) : cells_(std::move(cells)) {
    std::sort(cells_.begin(), cells_.end());
    cells_.erase(std::unique(cells_.begin(), cells_.end()), cells_.end());
}

Region Region::rectangle(uint32_t row0, uint32_t col0, uint32_t rows, uint32_t cols) {
    std::vector<CellCoord> cells;
    cells.reserve(uint64_t{rows} * cols);
    for (uint32_t r = row0; r < row0 + rows; ++r)
        for (uint32_t c = col0; c < col0 + cols; ++c) cells.push_back({r, c});
    return Region(std::move(cells));
}

bool Region::contains(CellCoord c) const {
    return std::binary_search(cells_.begin(), cells_.end(), c);
}

// ---------------------------------------------------------------------------
// Grid file format: "G2DG", version u32, m u32, cell_size u32, payload.

uint64_t save_grid(const Grid& grid, std::ostream& sink) {
    std::vector<uint8_t> header;
    header.insert(header.end(), kGridMagic, kGridMagic + 4);
    wire::put_u32(header, kGridVersion);
    wire::put_u32(header, grid.m());
    wire::put_u32(header, grid.cell_size());
    sink.write(reinterpret_cast<const char*>(header.data()), static_cast<std::streamsize>(header.size()));
    sink.write(reinterpret_cast<const char*>(grid.bytes().data()), static_cast<std::streamsize>(grid.bytes().size()));
    if (!sink) throw Error("grid write failed");
    return header.size() + grid.bytes().size();
}

Grid load_grid(std::istream& source) {
    std::vector<uint8_t> data((std::istreambuf_iterator<char>(source)), std::istreambuf_iterator<char>());
    wire::Reader r(data);
    auto magic = r.get_bytes(4, "magic");
    if (!std::equal(magic.begin(), magic.end(), kGridMagic)) throw FormatError("not a grid file (bad magic)");
    uint32_t version = r.get_u32("version");
    if (version != kGridVersion) throw FormatError("unsupported grid file version " + std::to_string(version));
    uint32_t m = r.get_u32("side length");
    uint32_t cell_size = r.get_u32("cell size");
    if (m < 2 || !std::has_single_bit(m)) throw FormatError("grid header: side length must be a power of 2");
    if (cell_size == 0) throw FormatError("grid header: zero cell size");
    auto payload = r.get_bytes(uint64_t{m} * m * cell_size, "cell payload");
    if (!r.done()) throw FormatError("trailing bytes after grid payload");
    return Grid(m, cell_size, std::vector<uint8_t>(payload.begin(), payload.end()));
}

uint64_t save_grid_file(const Grid& grid, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    return save_grid(grid, out);
}

Grid load_grid_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    return load_grid(in);
}

// ---------------------------------------------------------------------------
// Corruption injection

void xor_region(Grid& grid, const Region& region, uint64_t seed) {
    if (region.empty()) throw InvalidArgument("corruption region is empty");
    for (CellCoord c : region.cells())
        if (!grid.in_bounds(c)) throw InvalidArgument("corruption region leaves the grid");
    std::mt19937_64 eng(seed);
    for (CellCoord c : region.cells()) {
        auto payload = grid.cell_mut(c);
        // First mask byte is drawn from 1..255 so the cell always changes.
        payload[0] ^= static_cast<uint8_t>(1 + draw_below(eng, 255));
        for (size_t i = 1; i < payload.size(); ++i) payload[i] ^= static_cast<uint8_t>(eng());
    }
}

Grid inject_corruption(const Grid& grid, const Region& region, uint64_t seed) {
    Grid out = grid;
    xor_region(out, region, seed);
    return out;
}

// ---------------------------------------------------------------------------
// Region predicates

bool is_connected(const Region& region) {
    if (region.empty()) return true;
    CoordSet pending(region.cells().begin(), region.cells().end());
    std::deque<CellCoord> queue;
    queue.push_back(region.cells().front());
    pending.erase(region.cells().front());
    while (!queue.empty()) {
        CellCoord c = queue.front();
        queue.pop_front();
        const CellCoord nbrs[4] = {{c.row + 1, c.col},
                                   {c.row, c.col + 1},
                                   {c.row - 1, c.col},   // wraps for row 0; never present in the set
                                   {c.row, c.col - 1}};
        for (CellCoord nb : nbrs) {
            auto it = pending.find(nb);
            if (it != pending.end()) {
                pending.erase(it);
                queue.push_back(nb);
            }
        }
    }
    return pending.empty();
}

bool is_hv_convex(const Region& region) {
    // Cells are sorted row-major, so row slices are consecutive runs of the
    // vector; a row slice is contiguous iff count == max-min+1.
    const auto& cells = region.cells();
    for (size_t i = 0; i < cells.size();) {
        size_t j = i;
        while (j < cells.size() && cells[j].row == cells[i].row) ++j;
        if (cells[j - 1].col - cells[i].col + 1 != j - i) return false;
        i = j;
    }
    // Column slices.
    struct ColSpan {
        uint32_t min_row, max_row;
        size_t count;
    };
    std::unordered_map<uint32_t, ColSpan> cols;
    for (CellCoord c : cells) {
        auto [it, fresh] = cols.try_emplace(c.col, ColSpan{c.row, c.row, 1});
        if (!fresh) {
            it->second.min_row = std::min(it->second.min_row, c.row);
            it->second.max_row = std::max(it->second.max_row, c.row);
            ++it->second.count;
        }
    }
    for (const auto& [col, span] : cols)
        if (span.max_row - span.min_row + 1 != span.count) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Shape generators

namespace {

// Relative offsets of an axis-aligned ellipse with semi-axes (ar, ac).
std::vector<std::pair<int64_t, int64_t>> ellipse_offsets(double ar, double ac) {
    std::vector<std::pair<int64_t, int64_t>> out;
    int64_t rmax = static_cast<int64_t>(std::floor(ar));
    for (int64_t dr = -rmax; dr <= rmax; ++dr) {
        double rem = 1.0 - (dr / ar) * (dr / ar);
        if (rem < 0) continue;
        int64_t cmax = static_cast<int64_t>(std::floor(ac * std::sqrt(rem)));
        for (int64_t dc = -cmax; dc <= cmax; ++dc) out.emplace_back(dr, dc);
    }
    return out;
}

// Places a set of relative offsets at a center that keeps them in bounds.
CellCoord place_center(const Grid& grid, const std::vector<std::pair<int64_t, int64_t>>& offsets,
                       std::optional<CellCoord> anchor, std::mt19937_64& eng) {
    int64_t hr = 0, hc = 0;
    for (auto [dr, dc] : offsets) {
        hr = std::max({hr, dr, -dr});
        hc = std::max({hc, dc, -dc});
    }
    const int64_t m = grid.m();
    if (2 * hr + 1 > m || 2 * hc + 1 > m) throw InvalidArgument("shape does not fit the grid");
    if (anchor) {
        int64_t r = anchor->row, c = anchor->col;
        if (r < hr || r > m - 1 - hr || c < hc || c > m - 1 - hc)
            throw InvalidArgument("shape does not fit the grid at the given anchor");
        return *anchor;
    }
    uint32_t r = static_cast<uint32_t>(hr + static_cast<int64_t>(draw_below(eng, m - 2 * hr)));
    uint32_t c = static_cast<uint32_t>(hc + static_cast<int64_t>(draw_below(eng, m - 2 * hc)));
    return {r, c};
}

Region place_offsets(CellCoord center, const std::vector<std::pair<int64_t, int64_t>>& offsets) {
    std::vector<CellCoord> cells;
    cells.reserve(offsets.size());
    for (auto [dr, dc] : offsets)
        cells.push_back({static_cast<uint32_t>(center.row + dr), static_cast<uint32_t>(center.col + dc)});
    return Region(std::move(cells));
}

Region gen_rectangle(const Grid& grid, const RegionShapeSpec& spec, std::mt19937_64& eng) {
    if (spec.rows == 0 || spec.cols == 0) throw InvalidArgument("rectangle extents must be positive");
    if (spec.rows > grid.m() || spec.cols > grid.m()) throw InvalidArgument("rectangle larger than grid");
    uint32_t r0, c0;
    if (spec.anchor) {
        r0 = spec.anchor->row;
        c0 = spec.anchor->col;
        if (r0 + spec.rows > grid.m() || c0 + spec.cols > grid.m())
            throw InvalidArgument("rectangle does not fit at the given anchor");
    } else {
        r0 = static_cast<uint32_t>(draw_below(eng, grid.m() - spec.rows + 1));
        c0 = static_cast<uint32_t>(draw_below(eng, grid.m() - spec.cols + 1));
    }
    return Region::rectangle(r0, c0, spec.rows, spec.cols);
}

Region gen_disc(const Grid& grid, const RegionShapeSpec& spec, std::mt19937_64& eng) {
    double r = spec.radius;
    auto offsets = ellipse_offsets(r + 1e-9, r + 1e-9);
    CellCoord center = place_center(grid, offsets, spec.anchor, eng);
    return place_offsets(center, offsets);
}

Region gen_random_connected(const Grid& grid, const RegionShapeSpec& spec, std::mt19937_64& eng) {
    if (spec.target == 0) throw InvalidArgument("target cell count must be positive");
    if (spec.target > grid.n()) throw InvalidArgument("target cell count exceeds grid size");
    CellCoord start = spec.anchor ? *spec.anchor
                                  : CellCoord{static_cast<uint32_t>(draw_below(eng, grid.m())),
                                              static_cast<uint32_t>(draw_below(eng, grid.m()))};
    if (!grid.in_bounds(start)) throw InvalidArgument("anchor outside grid");

    CoordSet members{start};
    CoordSet seen{start};
    std::vector<CellCoord> frontier;
    auto push_neighbors = [&](CellCoord c) {
        const int64_t m = grid.m();
        const int64_t moves[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (auto [dr, dc] : moves) {
            int64_t nr = int64_t{c.row} + dr, nc = int64_t{c.col} + dc;
            if (nr < 0 || nc < 0 || nr >= m || nc >= m) continue;
            CellCoord nb{static_cast<uint32_t>(nr), static_cast<uint32_t>(nc)};
            if (seen.insert(nb).second) frontier.push_back(nb);
        }
    };
    push_neighbors(start);
    while (members.size() < spec.target) {
        if (frontier.empty()) throw InvalidArgument("grid too small for requested region");
        size_t pick = draw_below(eng, frontier.size());
        CellCoord next = frontier[pick];
        frontier[pick] = frontier.back();
        frontier.pop_back();
        members.insert(next);
        push_neighbors(next);
    }
    return Region(std::vector<CellCoord>(members.begin(), members.end()));
}

// Random hv-convex connected region with exactly `target` cells: start from a
// randomly proportioned ellipse with at least `target` cells, then peel end
// cells off the current top or bottom row. Peeling an end cell of an extreme
// row keeps every row and column slice contiguous and keeps the region
// connected, so the predicates survive down to the exact count.
Region gen_hv_convex(const Grid& grid, const RegionShapeSpec& spec, std::mt19937_64& eng) {
    if (spec.target == 0) throw InvalidArgument("target cell count must be positive");
    double aspect = 0.5 + static_cast<double>(draw_below(eng, 1501)) / 1000.0;  // rows:cols in [0.5, 2]
    double wr = std::sqrt(aspect), wc = 1.0 / std::sqrt(aspect);

    auto count_at = [&](double s) { return ellipse_offsets(std::max(s * wr, 1e-9), std::max(s * wc, 1e-9)).size(); };
    double hi = 0.5;
    while (count_at(hi) < spec.target) {
        hi *= 2;
        if (hi > 4.0 * grid.m()) throw InvalidArgument("target cell count exceeds what fits the grid");
    }
    double lo = 0;
    for (int iter = 0; iter < 60; ++iter) {
        double mid = (lo + hi) / 2;
        if (count_at(mid) >= spec.target)
            hi = mid;
        else
            lo = mid;
    }
    auto offsets = ellipse_offsets(std::max(hi * wr, 1e-9), std::max(hi * wc, 1e-9));

    CellCoord center = place_center(grid, offsets, spec.anchor, eng);
    Region filled = place_offsets(center, offsets);
    std::vector<CellCoord> cells = filled.cells();  // sorted row-major

    while (cells.size() > spec.target) {
        bool from_top = draw_below(eng, 2) == 0;
        bool from_left = draw_below(eng, 2) == 0;
        // Extreme row is the first or last run of the sorted vector.
        size_t lo_i = 0, hi_i = 0;
        if (from_top) {
            hi_i = 0;
            while (hi_i + 1 < cells.size() && cells[hi_i + 1].row == cells[0].row) ++hi_i;
            lo_i = 0;
        } else {
            lo_i = cells.size() - 1;
            while (lo_i > 0 && cells[lo_i - 1].row == cells.back().row) --lo_i;
            hi_i = cells.size() - 1;
        }
        cells.erase(cells.begin() + static_cast<std::ptrdiff_t>(from_left ? lo_i : hi_i));
    }
    return Region(std::move(cells));
}

}  // namespace

Region generate_region(const Grid& grid, const RegionShapeSpec& spec) {
    std::mt19937_64 eng(spec.seed);
    switch (spec.kind) {
        case RegionKind::Rectangle: return gen_rectangle(grid, spec, eng);
        case RegionKind::Disc: return gen_disc(grid, spec, eng);
        case RegionKind::RandomConnected: return gen_random_connected(grid, spec, eng);
        case RegionKind::HvConvexRandom: return gen_hv_convex(grid, spec, eng);
    }
    throw InvalidArgument("unknown region kind");
}

}  // namespace gridguard

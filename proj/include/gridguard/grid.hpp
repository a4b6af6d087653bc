#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridguard/errors.hpp"

namespace gridguard {

struct CellCoord {
    uint32_t row = 0;
    uint32_t col = 0;

    // Row-major order: (row, col) lexicographic.
    auto operator<=>(const CellCoord&) const = default;
};

struct CellCoordHash {
    size_t operator()(CellCoord c) const {
        return std::hash<uint64_t>{}((uint64_t{c.row} << 32) | c.col);
    }
};

/// Square m x m array of fixed-size cell payloads, row-major.
/// m is a power of 2; N = m*m. Immutable after construction except for
/// the explicit corruption paths below.
class Grid {
public:
    Grid(uint32_t m, uint32_t cell_size, std::vector<uint8_t> cells);

    /// Deterministic pseudo-random fill from a seed.
    static Grid filled(uint32_t m, uint32_t cell_size, uint64_t seed);

    uint32_t m() const { return m_; }
    uint32_t cell_size() const { return cell_size_; }
    uint64_t n() const { return uint64_t{m_} * m_; }

    bool in_bounds(CellCoord c) const { return c.row < m_ && c.col < m_; }

    std::span<const uint8_t> cell(CellCoord c) const;
    std::span<uint8_t> cell_mut(CellCoord c);
    std::span<const uint8_t> bytes() const { return cells_; }

    bool operator==(const Grid&) const = default;

private:
    uint32_t m_;
    uint32_t cell_size_;
    std::vector<uint8_t> cells_;
};

/// Finite set of cell coordinates, kept sorted row-major and deduplicated.
class Region {
public:
    Region() = default;
    explicit Region(std::vector<CellCoord> cells);

    static Region rectangle(uint32_t row0, uint32_t col0, uint32_t rows, uint32_t cols);

    size_t size() const { return cells_.size(); }
    bool empty() const { return cells_.empty(); }
    bool contains(CellCoord c) const;
    const std::vector<CellCoord>& cells() const { return cells_; }

    bool operator==(const Region&) const = default;

private:
    std::vector<CellCoord> cells_;
};

enum class RegionKind {
    Rectangle,
    Disc,
    RandomConnected,
    HvConvexRandom,
};

/// Shape request for generate_region. anchor is the rectangle's top-left
/// corner or the disc/random shape's start cell; left empty it is drawn
/// from the seed.
struct RegionShapeSpec {
    RegionKind kind = RegionKind::Rectangle;
    std::optional<CellCoord> anchor;
    uint32_t rows = 0;    // rectangle
    uint32_t cols = 0;    // rectangle
    uint32_t radius = 0;  // disc
    uint64_t target = 0;  // random kinds: requested cell count
    uint64_t seed = 0;
};

Grid new_grid(uint32_t m, uint32_t cell_size, uint64_t seed);

uint64_t save_grid(const Grid& grid, std::ostream& sink);
Grid load_grid(std::istream& source);
uint64_t save_grid_file(const Grid& grid, const std::string& path);
Grid load_grid_file(const std::string& path);

/// XORs every cell of the region with a seeded nonzero mask. Self-inverse:
/// applying it twice with the same seed restores the grid.
void xor_region(Grid& grid, const Region& region, uint64_t seed);

/// Copying variant of xor_region; every cell in the region differs from the
/// original in at least one byte, all other cells are untouched.
Grid inject_corruption(const Grid& grid, const Region& region, uint64_t seed);

Region generate_region(const Grid& grid, const RegionShapeSpec& spec);

/// True iff the region forms one component under 4-neighbor adjacency.
/// Empty regions count as connected.
bool is_connected(const Region& region);

/// True iff every row slice and every column slice of the region is a single
/// contiguous run. Empty regions count as hv-convex.
bool is_hv_convex(const Region& region);

}  // namespace gridguard

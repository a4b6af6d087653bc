#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "gridguard/auth.hpp"
#include "gridguard/grid.hpp"
#include "gridguard/hashstore.hpp"

namespace gridguard {

enum class Verdict : uint8_t { Clean, Corrupted };

/// Failing row/column index sets from the layer sieve; the candidate cells
/// are their Cartesian product, a superset of the true corrupted area.
struct ApproxRegion {
    std::vector<uint32_t> rows;
    std::vector<uint32_t> cols;

    bool contains(CellCoord c) const;
    uint64_t candidate_count() const { return uint64_t{rows.size()} * cols.size(); }
    Region to_region() const;
};

struct DetectionOutcome {
    Verdict verdict = Verdict::Clean;
    std::optional<CellCoord> found_cell;   // a truly corrupted cell, when one is pinned down
    std::optional<Region> region;          // exact region via spread
    std::optional<ApproxRegion> approx;    // sieve result
    uint64_t trials = 0;                   // probabilistic sample count
    CostMeter meter;                       // snapshot at completion
};

/// Per-cell corruption test. Implementations charge the meter themselves:
/// one cell for a byte comparison, a full verify_region for digest tests.
using CellTest = std::function<bool(CellCoord)>;

CellTest byte_compare_test(const Grid& actual, const Grid& original, CostMeter& meter);
/// Uses the store's per-cell digests (sift/quad/boundary cells, adaptive leaves).
CellTest digest_cell_test(const Grid& actual, const Store& store, CostMeter& meter);

// ---------------------------------------------------------------------------
// Detectors

/// Uniform sampling without replacement against the pristine original,
/// stopping at the first mismatch.
DetectionOutcome detect_probabilistic(const Grid& actual, const Grid& original, uint64_t seed,
                                      CostMeter& meter);

/// BFS over 4-neighbors from a known corrupted cell; returns its full
/// connected corrupted component. Tests at most t + 4t cells.
Region spread_region(const Grid& actual, const CellTest& is_corrupted, CellCoord seed_cell,
                     CostMeter& meter);

/// Root check then quadrant descent, row-major tie-break.
DetectionOutcome detect_quad(const Grid& actual, const Store& quad, CostMeter& meter);

/// Result of the 1-D halving search on a line.
struct LineHit {
    CellCoord cell;
    bool directly_verified = false;        // pinned by a length-1 interval verification
    std::optional<CellCoord> alternate;    // other boundary cell when inferred from both halves failing
    uint32_t offset = 0;                   // cell's position along the line
    std::optional<uint32_t> alt_offset;
};

/// Halving search: verify both halves each iteration; both failing pins the
/// boundary pair, one failing narrows the interval. nullopt means both
/// top-level halves verified clean.
std::optional<LineHit> line_binary_search(const Grid& grid, const DigestIndex& index, const KeyMaterial& key,
                                          const LineId& line, CostMeter& meter);

/// As line_binary_search but a corrupted line is a precondition; throws
/// InvalidArgument when both top-level halves verify clean.
CellCoord detect_1d_binary(const Grid& grid, const DigestIndex& index, const KeyMaterial& key,
                           const LineId& line, CostMeter& meter);

/// Staged walk over per-cell digests at positions that are multiples of
/// length/2^k, skipping already-checked cells. nullopt = line clean.
std::optional<CellCoord> detect_sift_1d(const Grid& grid, const DigestIndex& index, const KeyMaterial& key,
                                        const LineId& line, CostMeter& meter);

/// Quadrant descent that switches to median-line binary search as soon as
/// two or more quadrants fail. Assumes an hv-convex corrupted region;
/// raises ConvexityError instead of returning an unverified cell when the
/// assumption breaks down.
DetectionOutcome detect_improved(const Grid& actual, const Store& boundary, CostMeter& meter);

/// Staged column sweep, then the 1-D sift inside the first failing column.
DetectionOutcome detect_sift_2d(const Grid& actual, const Store& sift, CostMeter& meter);

/// Improved and sift schemes dovetailed one cells-touched unit at a time;
/// stops at the first Found, runs both out on clean grids.
DetectionOutcome detect_hybrid(const Grid& actual, const Store& boundary, const Store& sift,
                               CostMeter& meter);

/// Verifies every row and column layer digest (always all 2m) and returns
/// the failing-product approximation.
DetectionOutcome detect_sieve(const Grid& actual, const Store& sieve, CostMeter& meter);

/// Root-down descent of the variable-degree tree.
DetectionOutcome detect_adaptive(const Grid& actual, const Store& tree, CostMeter& meter);

// ---------------------------------------------------------------------------
// Steppers

enum class StepResult : uint8_t { NeedMoreWork, Found, Clean };

/// Resumable detector; each step() consumes exactly one unit of the
/// cells-touched budget, and a verification executes (and meters) once its
/// descriptor size in cells has been paid. Found/Clean are terminal.
class Stepper {
public:
    virtual ~Stepper() = default;
    virtual StepResult step() = 0;
    virtual std::optional<CellCoord> found() const = 0;
};

std::unique_ptr<Stepper> make_improved_stepper(const Grid& actual, const Store& boundary, CostMeter& meter);
std::unique_ptr<Stepper> make_sift_stepper(const Grid& actual, const Store& sift, CostMeter& meter);

// ---------------------------------------------------------------------------
// Composition

enum class Scheme : uint8_t {
    Probabilistic,
    Quad,
    Improved,
    Sift,
    Hybrid,
    Sieve,
    Adaptive,
};

const char* scheme_name(Scheme s);
std::optional<Scheme> scheme_from_name(const std::string& name);

/// Everything a scheme might need; only the relevant entries must be set.
struct StoreSet {
    const Grid* original = nullptr;
    const Store* quad = nullptr;
    const Store* boundary = nullptr;
    const Store* sift = nullptr;
    const Store* sieve = nullptr;
    const Store* adaptive = nullptr;
};

/// Dispatches to the scheme's detector; no spreading.
DetectionOutcome run_scheme(const Grid& actual, const StoreSet& stores, Scheme scheme, uint64_t seed,
                            CostMeter& meter);

/// Runs the chosen detector, then recovers the full connected component by
/// spreading from the found cell. The sieve scheme returns its approximate
/// region directly and never spreads.
DetectionOutcome locate_and_spread(const Grid& actual, const StoreSet& stores, Scheme scheme, uint64_t seed,
                                   CostMeter& meter);

}  // namespace gridguard

#include "gridguard/detect.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "gridguard/rng.hpp"

namespace gridguard {

namespace {

using CoordSet = std::unordered_set<CellCoord, CellCoordHash>;

const SignedDigest& index_digest(const DigestIndex& index, const RegionDescriptor& desc) {
    const SignedDigest* d = index.find(desc);
    if (!d) throw MismatchError("required digest missing from the store (wrong store for this grid?)");
    return *d;
}

void require_variant(const Store& store, StoreVariant v, const char* who) {
    if (store.variant() != v)
        throw MismatchError(std::string(who) + " needs a " + store_variant_name(v) + " store, got " +
                            store_variant_name(store.variant()));
}

// Offsets along a length-L line in sift stage order: stage k visits the
// 1-based positions that are multiples of L/2^k and were not visited by an
// earlier stage (the odd multiples, except stage 1 which takes both L/2
// and L). Exactly L offsets come out.
class StagedWalk {
public:
    explicit StagedWalk(uint32_t length) : length_(length), spacing_(length / 2) {
        if (length < 2 || !std::has_single_bit(length))
            throw InvalidArgument("staged walk needs a power-of-2 length, at least 2");
    }

    std::optional<uint32_t> next() {
        if (yielded_ == length_) return std::nullopt;
        uint32_t pos = spacing_ * multiple_;  // 1-based
        ++yielded_;
        advance_cursor();
        return pos - 1;
    }

    bool done() const { return yielded_ == length_; }

private:
    void advance_cursor() {
        if (yielded_ == length_) return;
        if (stage_ == 1) {
            if (multiple_ == 1) {
                multiple_ = 2;
                return;
            }
        } else {
            multiple_ += 2;
            if (uint64_t{multiple_} * spacing_ <= length_) return;
        }
        ++stage_;
        spacing_ /= 2;
        multiple_ = 1;
    }

    uint32_t length_;
    uint32_t spacing_;
    uint32_t stage_ = 1;
    uint32_t multiple_ = 1;
    uint32_t yielded_ = 0;
};

}  // namespace

// ---------------------------------------------------------------------------
// ApproxRegion

bool ApproxRegion::contains(CellCoord c) const {
    return std::binary_search(rows.begin(), rows.end(), c.row) &&
           std::binary_search(cols.begin(), cols.end(), c.col);
}

Region ApproxRegion::to_region() const {
    std::vector<CellCoord> cells;
    cells.reserve(rows.size() * cols.size());
    for (uint32_t r : rows)
        for (uint32_t c : cols) cells.push_back({r, c});
    return Region(std::move(cells));
}

// ---------------------------------------------------------------------------
// Per-cell tests

CellTest byte_compare_test(const Grid& actual, const Grid& original, CostMeter& meter) {
    if (actual.m() != original.m() || actual.cell_size() != original.cell_size())
        throw MismatchError("grids have different dimensions");
    return [&actual, &original, &meter](CellCoord c) {
        meter.cells_touched += 1;
        auto a = actual.cell(c), b = original.cell(c);
        return !std::equal(a.begin(), a.end(), b.begin());
    };
}

CellTest digest_cell_test(const Grid& actual, const Store& store, CostMeter& meter) {
    store.require_matches(actual);
    return [&actual, &store, &meter](CellCoord c) {
        const SignedDigest* d = store.index().find(single_cell_desc(c));
        if (!d) d = store.index().find(RowRunDesc{c.row, c.col, 1});  // adaptive leaves
        if (!d) throw InvalidArgument("store has no per-cell digests to test with");
        return !store.verify(actual, *d, meter);
    };
}

// ---------------------------------------------------------------------------
// Probabilistic search (model 1: the original grid is at hand)

DetectionOutcome detect_probabilistic(const Grid& actual, const Grid& original, uint64_t seed,
                                      CostMeter& meter) {
    if (actual.m() != original.m() || actual.cell_size() != original.cell_size())
        throw MismatchError("grids have different dimensions");
    const uint64_t n = actual.n();
    const uint32_t m = actual.m();
    std::mt19937_64 eng(seed);
    // Lazy Fisher-Yates: sampling without replacement as a seeded permutation
    // walk, touching only the entries actually drawn.
    std::unordered_map<uint64_t, uint64_t> perm;
    auto slot = [&](uint64_t i) {
        auto it = perm.find(i);
        return it == perm.end() ? i : it->second;
    };

    DetectionOutcome out;
    for (uint64_t i = 0; i < n; ++i) {
        uint64_t j = i + draw_below(eng, n - i);
        uint64_t pick = slot(j);
        perm[j] = slot(i);
        ++out.trials;
        meter.cells_touched += 1;
        CellCoord cell{static_cast<uint32_t>(pick / m), static_cast<uint32_t>(pick % m)};
        auto a = actual.cell(cell), b = original.cell(cell);
        if (!std::equal(a.begin(), a.end(), b.begin())) {
            out.verdict = Verdict::Corrupted;
            out.found_cell = cell;
            break;
        }
    }
    out.meter = meter;
    return out;
}

// ---------------------------------------------------------------------------
// Spread

Region spread_region(const Grid& actual, const CellTest& is_corrupted, CellCoord seed_cell,
                     CostMeter& meter) {
    (void)meter;  // the per-cell test carries the meter it charges
    if (!actual.in_bounds(seed_cell)) throw InvalidArgument("seed cell out of bounds");
    if (!is_corrupted(seed_cell)) throw InvalidArgument("seed cell is not corrupted");
    CoordSet tested{seed_cell};
    std::vector<CellCoord> members{seed_cell};
    std::deque<CellCoord> queue{seed_cell};
    const uint32_t m = actual.m();
    while (!queue.empty()) {
        CellCoord c = queue.front();
        queue.pop_front();
        const int64_t moves[4][2] = {{-1, 0}, {0, -1}, {0, 1}, {1, 0}};
        for (auto [dr, dc] : moves) {
            int64_t nr = int64_t{c.row} + dr, nc = int64_t{c.col} + dc;
            if (nr < 0 || nc < 0 || nr >= m || nc >= m) continue;
            CellCoord nb{static_cast<uint32_t>(nr), static_cast<uint32_t>(nc)};
            if (!tested.insert(nb).second) continue;
            if (is_corrupted(nb)) {
                members.push_back(nb);
                queue.push_back(nb);
            }
        }
    }
    return Region(std::move(members));
}

// ---------------------------------------------------------------------------
// Quadrant descent

DetectionOutcome detect_quad(const Grid& actual, const Store& quad, CostMeter& meter) {
    require_variant(quad, StoreVariant::Quad, "quad descent");
    quad.require_matches(actual);
    const uint32_t m = actual.m();
    DetectionOutcome out;
    if (quad.verify(actual, quad.digest_or_throw(RectDesc{0, 0, m, m}), meter)) {
        out.meter = meter;
        return out;  // clean grid: one root verification
    }
    uint32_t r0 = 0, c0 = 0, side = m;
    while (side > 1) {
        const uint32_t half = side / 2;
        int failing = -1;
        for (int i = 0; i < 4; ++i) {
            RectDesc child{r0 + (i / 2) * half, c0 + (i % 2) * half, half, half};
            bool ok = quad.verify(actual, quad.digest_or_throw(child), meter);
            if (!ok && failing < 0) failing = i;  // row-major tie-break
        }
        if (failing < 0) throw MismatchError("node digest failed but all quadrants verified: store is inconsistent");
        r0 += (failing / 2) * half;
        c0 += (failing % 2) * half;
        side = half;
    }
    out.verdict = Verdict::Corrupted;
    out.found_cell = CellCoord{r0, c0};
    out.meter = meter;
    return out;
}

// ---------------------------------------------------------------------------
// 1-D halving search

std::optional<LineHit> line_binary_search(const Grid& grid, const DigestIndex& index, const KeyMaterial& key,
                                          const LineId& line, CostMeter& meter) {
    if (line.length < 2 || !std::has_single_bit(line.length))
        throw InvalidArgument("line length must be a power of 2, at least 2");
    uint32_t off = 0, len = line.length;
    while (true) {
        const uint32_t half = len / 2;
        bool left_bad =
            !verify_region(key, grid, index_digest(index, line_run_desc(line, off, half)), meter);
        bool right_bad =
            !verify_region(key, grid, index_digest(index, line_run_desc(line, off + half, half)), meter);
        if (left_bad && right_bad) {
            // The corrupted run straddles the midpoint; the two boundary
            // cells flank it. Verified outright when the halves are cells.
            LineHit hit;
            hit.offset = off + half - 1;
            hit.cell = line.cell_at(hit.offset);
            hit.directly_verified = half == 1;
            hit.alt_offset = off + half;
            hit.alternate = line.cell_at(*hit.alt_offset);
            return hit;
        }
        if (left_bad != right_bad) {
            uint32_t pick = left_bad ? off : off + half;
            if (half == 1) {
                LineHit hit;
                hit.offset = pick;
                hit.cell = line.cell_at(pick);
                hit.directly_verified = true;
                return hit;
            }
            off = pick;
            len = half;
            continue;
        }
        // Neither half failed.
        if (len == line.length) return std::nullopt;  // clean line
        throw MismatchError("interval digest failed but both halves verified: store is inconsistent");
    }
}

CellCoord detect_1d_binary(const Grid& grid, const DigestIndex& index, const KeyMaterial& key,
                           const LineId& line, CostMeter& meter) {
    auto hit = line_binary_search(grid, index, key, line, meter);
    if (!hit) throw InvalidArgument("line is clean: both top-level halves verified");
    return hit->cell;
}

std::optional<CellCoord> detect_sift_1d(const Grid& grid, const DigestIndex& index, const KeyMaterial& key,
                                        const LineId& line, CostMeter& meter) {
    StagedWalk walk(line.length);
    while (auto off = walk.next()) {
        CellCoord cell = line.cell_at(*off);
        if (!verify_region(key, grid, index_digest(index, single_cell_desc(cell)), meter)) return cell;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Improved scheme stepper
//
// Budgeted execution: a verification is planned, paid for one cells-touched
// unit per step, and executed (and metered) on the step that completes the
// payment, so step counts and meter totals agree at every terminal state.

namespace {

class ImprovedStepper final : public Stepper {
public:
    ImprovedStepper(const Grid& grid, const Store& store, CostMeter& meter)
        : grid_(grid), store_(store), meter_(meter) {
        require_variant(store, StoreVariant::Boundary, "improved scheme");
        store.require_matches(grid);
        node_ = {0, 0, grid.m()};
    }

    StepResult step() override {
        if (final_) return *final_;
        if (!pending_) plan();
        ++paid_;
        if (paid_ < pending_cost_) return StepResult::NeedMoreWork;
        const bool ok = store_.verify(grid_, *pending_, meter_);
        pending_ = nullptr;
        paid_ = 0;
        advance(ok);
        return final_ ? *final_ : StepResult::NeedMoreWork;
    }

    std::optional<CellCoord> found() const override { return found_; }

private:
    enum class Phase { Descend, Line, Confirm };
    struct Node {
        uint32_t r0, c0, side;
    };

    void set_pending(const RegionDescriptor& desc) {
        pending_ = &store_.digest_or_throw(desc);
        pending_cost_ = descriptor_cell_count(desc);
    }

    void plan() {
        switch (phase_) {
            case Phase::Descend: {
                const uint32_t half = node_.side / 2;
                set_pending(RectDesc{node_.r0 + (child_ / 2) * half, node_.c0 + (child_ % 2) * half, half, half});
                return;
            }
            case Phase::Line: {
                const uint32_t half = ival_len_ / 2;
                const uint32_t off = checking_right_ ? ival_off_ + half : ival_off_;
                set_pending(line_run_desc(lines_[line_idx_], off, half));
                return;
            }
            case Phase::Confirm:
                set_pending(line_run_desc(lines_[line_idx_], confirm_offs_[confirm_idx_], 1));
                return;
        }
    }

    void advance(bool ok) {
        switch (phase_) {
            case Phase::Descend: advance_descend(ok); return;
            case Phase::Line: advance_line(ok); return;
            case Phase::Confirm: advance_confirm(ok); return;
        }
    }

    void advance_descend(bool ok) {
        if (!ok) failing_.push_back(child_);
        if (++child_ < 4) return;
        if (failing_.empty()) {
            if (at_root_) {
                final_ = StepResult::Clean;
                return;
            }
            throw MismatchError("node digest failed but all quadrants verified: store is inconsistent");
        }
        at_root_ = false;
        const uint32_t half = node_.side / 2;
        if (failing_.size() == 1) {
            const int f = failing_[0];
            Node child{node_.r0 + (f / 2) * half, node_.c0 + (f % 2) * half, half};
            if (child.side == 1) {
                set_found({child.r0, child.c0});  // the failing quadrant is a single verified cell
                return;
            }
            node_ = child;
            child_ = 0;
            failing_.clear();
            return;
        }
        // Two or more corrupted quadrants: the region straddles a median
        // line of this node. Search the vertical line first.
        auto fails = [&](int i) { return std::find(failing_.begin(), failing_.end(), i) != failing_.end(); };
        const bool left = fails(0) || fails(2), right = fails(1) || fails(3);
        const bool top = fails(0) || fails(1), bottom = fails(2) || fails(3);
        lines_.clear();
        if (left && right) lines_.push_back(LineId{LineAxis::Col, node_.c0 + half, node_.r0, node_.side});
        if (top && bottom) lines_.push_back(LineId{LineAxis::Row, node_.r0 + half, node_.c0, node_.side});
        phase_ = Phase::Line;
        line_idx_ = 0;
        start_line();
    }

    void start_line() {
        ival_off_ = 0;
        ival_len_ = lines_[line_idx_].length;
        checking_right_ = false;
        left_failed_ = false;
    }

    void advance_line(bool ok) {
        if (!checking_right_) {
            left_failed_ = !ok;
            checking_right_ = true;
            return;
        }
        const bool right_failed = !ok;
        const uint32_t half = ival_len_ / 2;
        const LineId& line = lines_[line_idx_];
        if (left_failed_ && right_failed) {
            if (half == 1) {
                set_found(line.cell_at(ival_off_));  // both cells verified corrupted; take the left
                return;
            }
            confirm_offs_[0] = ival_off_ + half - 1;
            confirm_offs_[1] = ival_off_ + half;
            confirm_idx_ = 0;
            phase_ = Phase::Confirm;
            return;
        }
        if (left_failed_ != right_failed) {
            const uint32_t off = left_failed_ ? ival_off_ : ival_off_ + half;
            if (half == 1) {
                set_found(line.cell_at(off));
                return;
            }
            ival_off_ = off;
            ival_len_ = half;
            checking_right_ = false;
            return;
        }
        if (ival_len_ == line.length) {
            next_line();  // whole line clean; the straddle must be on the other one
            return;
        }
        throw MismatchError("interval digest failed but both halves verified: store is inconsistent");
    }

    void advance_confirm(bool ok) {
        if (!ok) {
            set_found(lines_[line_idx_].cell_at(confirm_offs_[confirm_idx_]));
            return;
        }
        if (++confirm_idx_ < 2) return;  // boundary cell clean; try its partner
        next_line();
    }

    void next_line() {
        if (++line_idx_ < lines_.size()) {
            phase_ = Phase::Line;
            start_line();
            return;
        }
        throw ConvexityError(
            "quadrant digests fail but no boundary median line yields a corrupted cell; "
            "the corrupted region is not a single hv-convex shape");
    }

    void set_found(CellCoord cell) {
        found_ = cell;
        final_ = StepResult::Found;
    }

    const Grid& grid_;
    const Store& store_;
    CostMeter& meter_;

    const SignedDigest* pending_ = nullptr;
    uint64_t pending_cost_ = 0;
    uint64_t paid_ = 0;
    std::optional<StepResult> final_;
    std::optional<CellCoord> found_;

    Phase phase_ = Phase::Descend;
    Node node_{};
    int child_ = 0;
    std::vector<int> failing_;
    bool at_root_ = true;

    std::vector<LineId> lines_;
    size_t line_idx_ = 0;
    uint32_t ival_off_ = 0, ival_len_ = 0;
    bool checking_right_ = false;
    bool left_failed_ = false;

    uint32_t confirm_offs_[2] = {0, 0};
    int confirm_idx_ = 0;
};

// ---------------------------------------------------------------------------
// Sift stepper

class SiftStepper final : public Stepper {
public:
    SiftStepper(const Grid& grid, const Store& store, CostMeter& meter)
        : grid_(grid), store_(store), meter_(meter), column_walk_(grid.m()), cell_walk_(grid.m()) {
        require_variant(store, StoreVariant::Sift, "sift scheme");
        store.require_matches(grid);
    }

    StepResult step() override {
        if (final_) return *final_;
        if (!pending_) plan();
        ++paid_;
        if (paid_ < pending_cost_) return StepResult::NeedMoreWork;
        const bool ok = store_.verify(grid_, *pending_, meter_);
        pending_ = nullptr;
        paid_ = 0;
        advance(ok);
        return final_ ? *final_ : StepResult::NeedMoreWork;
    }

    std::optional<CellCoord> found() const override { return found_; }

private:
    void set_pending(const RegionDescriptor& desc) {
        pending_ = &store_.digest_or_throw(desc);
        pending_cost_ = descriptor_cell_count(desc);
    }

    void plan() {
        if (!in_column_) {
            auto col = column_walk_.next();
            if (!col) throw MismatchError("sift column walk exhausted unexpectedly");
            cur_col_ = *col;
            set_pending(ColRunDesc{cur_col_, 0, grid_.m()});
            return;
        }
        auto row = cell_walk_.next();
        if (!row) throw MismatchError("column digest failed but every cell in it verified: store is inconsistent");
        cur_row_ = *row;
        set_pending(single_cell_desc({cur_row_, fail_col_}));
    }

    void advance(bool ok) {
        if (!in_column_) {
            if (!ok) {
                in_column_ = true;
                fail_col_ = cur_col_;
                cell_walk_ = StagedWalk(grid_.m());
                return;
            }
            if (column_walk_.done()) final_ = StepResult::Clean;
            return;
        }
        if (!ok) {
            found_ = CellCoord{cur_row_, fail_col_};
            final_ = StepResult::Found;
        }
    }

    const Grid& grid_;
    const Store& store_;
    CostMeter& meter_;

    const SignedDigest* pending_ = nullptr;
    uint64_t pending_cost_ = 0;
    uint64_t paid_ = 0;
    std::optional<StepResult> final_;
    std::optional<CellCoord> found_;

    StagedWalk column_walk_;
    StagedWalk cell_walk_;
    bool in_column_ = false;
    uint32_t cur_col_ = 0, cur_row_ = 0, fail_col_ = 0;
};

DetectionOutcome run_to_completion(Stepper& stepper, CostMeter& meter) {
    StepResult r;
    do {
        r = stepper.step();
    } while (r == StepResult::NeedMoreWork);
    DetectionOutcome out;
    out.verdict = r == StepResult::Found ? Verdict::Corrupted : Verdict::Clean;
    out.found_cell = stepper.found();
    out.meter = meter;
    return out;
}

}  // namespace

std::unique_ptr<Stepper> make_improved_stepper(const Grid& actual, const Store& boundary, CostMeter& meter) {
    return std::make_unique<ImprovedStepper>(actual, boundary, meter);
}

std::unique_ptr<Stepper> make_sift_stepper(const Grid& actual, const Store& sift, CostMeter& meter) {
    return std::make_unique<SiftStepper>(actual, sift, meter);
}

DetectionOutcome detect_improved(const Grid& actual, const Store& boundary, CostMeter& meter) {
    ImprovedStepper stepper(actual, boundary, meter);
    return run_to_completion(stepper, meter);
}

DetectionOutcome detect_sift_2d(const Grid& actual, const Store& sift, CostMeter& meter) {
    SiftStepper stepper(actual, sift, meter);
    return run_to_completion(stepper, meter);
}

// ---------------------------------------------------------------------------
// Hybrid: strict alternation, one cells-touched unit per turn

DetectionOutcome detect_hybrid(const Grid& actual, const Store& boundary, const Store& sift,
                               CostMeter& meter) {
    ImprovedStepper a1(actual, boundary, meter);
    SiftStepper a2(actual, sift, meter);
    std::optional<StepResult> r1, r2;
    bool a1_errored = false;
    std::optional<ConvexityError> a1_error;

    DetectionOutcome out;
    while (true) {
        if (!r1 && !a1_errored) {
            try {
                StepResult r = a1.step();
                if (r == StepResult::Found) {
                    out.verdict = Verdict::Corrupted;
                    out.found_cell = a1.found();
                    break;
                }
                if (r == StepResult::Clean) r1 = r;
            } catch (const ConvexityError& e) {
                // The sift side needs no convexity; let it finish the job.
                a1_errored = true;
                a1_error = e;
            }
        }
        if (!r2) {
            StepResult r = a2.step();
            if (r == StepResult::Found) {
                out.verdict = Verdict::Corrupted;
                out.found_cell = a2.found();
                break;
            }
            if (r == StepResult::Clean) r2 = r;
        }
        if (r2 && (r1 || a1_errored)) {
            // Clean consensus; a convexity complaint with a clean grid means
            // the stores disagree about the data.
            if (a1_errored) throw *a1_error;
            break;
        }
    }
    out.meter = meter;
    return out;
}

// ---------------------------------------------------------------------------
// Layer sieve

DetectionOutcome detect_sieve(const Grid& actual, const Store& sieve, CostMeter& meter) {
    require_variant(sieve, StoreVariant::Sieve, "layer sieve");
    sieve.require_matches(actual);
    const uint32_t m = actual.m();
    ApproxRegion approx;
    for (uint32_t r = 0; r < m; ++r)
        if (!sieve.verify(actual, sieve.digest_or_throw(RowRunDesc{r, 0, m}), meter)) approx.rows.push_back(r);
    for (uint32_t c = 0; c < m; ++c)
        if (!sieve.verify(actual, sieve.digest_or_throw(ColRunDesc{c, 0, m}), meter)) approx.cols.push_back(c);

    DetectionOutcome out;
    if (approx.rows.empty() && approx.cols.empty()) {
        out.meter = meter;
        return out;
    }
    if (approx.rows.empty() || approx.cols.empty())
        throw MismatchError("one sieve layer fails while the other is clean: impossible for real corruption, "
                            "the store itself is damaged");
    out.verdict = Verdict::Corrupted;
    out.approx = std::move(approx);
    out.meter = meter;
    return out;
}

// ---------------------------------------------------------------------------
// Adaptive tree descent

DetectionOutcome detect_adaptive(const Grid& actual, const Store& tree, CostMeter& meter) {
    require_variant(tree, StoreVariant::Adaptive, "adaptive descent");
    tree.require_matches(actual);
    const AdaptiveShape shape = adaptive_shape(actual.n());
    const uint32_t m = actual.m();

    DetectionOutcome out;
    if (tree.verify(actual, tree.digest_or_throw(row_major_range_desc(0, shape.n, m)), meter)) {
        out.meter = meter;
        return out;
    }
    uint64_t node = 0;
    for (uint32_t d = 0; d < shape.height; ++d) {
        const uint64_t degree = shape.degree_at(d);
        const uint64_t child_len = shape.level_lens[d + 1];
        int64_t failing = -1;
        for (uint64_t j = 0; j < degree; ++j) {
            const uint64_t child = node * degree + j;
            bool ok = tree.verify(actual, tree.digest_or_throw(row_major_range_desc(child * child_len, child_len, m)),
                                  meter);
            if (!ok && failing < 0) failing = static_cast<int64_t>(j);
        }
        if (failing < 0)
            throw MismatchError("node digest failed but every child verified: store is inconsistent");
        node = node * degree + static_cast<uint64_t>(failing);
    }
    out.verdict = Verdict::Corrupted;
    out.found_cell = CellCoord{static_cast<uint32_t>(node / m), static_cast<uint32_t>(node % m)};
    out.meter = meter;
    return out;
}

// ---------------------------------------------------------------------------
// Scheme composition

const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::Probabilistic: return "prob";
        case Scheme::Quad: return "quad";
        case Scheme::Improved: return "improved";
        case Scheme::Sift: return "sift";
        case Scheme::Hybrid: return "hybrid";
        case Scheme::Sieve: return "sieve";
        case Scheme::Adaptive: return "adaptive";
    }
    return "?";
}

std::optional<Scheme> scheme_from_name(const std::string& name) {
    for (Scheme s : {Scheme::Probabilistic, Scheme::Quad, Scheme::Improved, Scheme::Sift, Scheme::Hybrid,
                     Scheme::Sieve, Scheme::Adaptive})
        if (name == scheme_name(s)) return s;
    return std::nullopt;
}

DetectionOutcome run_scheme(const Grid& actual, const StoreSet& stores, Scheme scheme, uint64_t seed,
                            CostMeter& meter) {
    auto need = [](const auto* p, const char* what) -> decltype(p) {
        if (!p) throw InvalidArgument(std::string("scheme requires ") + what);
        return p;
    };
    switch (scheme) {
        case Scheme::Probabilistic:
            return detect_probabilistic(actual, *need(stores.original, "the original grid"), seed, meter);
        case Scheme::Quad: return detect_quad(actual, *need(stores.quad, "a quad store"), meter);
        case Scheme::Improved:
            return detect_improved(actual, *need(stores.boundary, "a boundary store"), meter);
        case Scheme::Sift: return detect_sift_2d(actual, *need(stores.sift, "a sift store"), meter);
        case Scheme::Hybrid:
            return detect_hybrid(actual, *need(stores.boundary, "a boundary store"),
                                 *need(stores.sift, "a sift store"), meter);
        case Scheme::Sieve: return detect_sieve(actual, *need(stores.sieve, "a sieve store"), meter);
        case Scheme::Adaptive:
            return detect_adaptive(actual, *need(stores.adaptive, "an adaptive store"), meter);
    }
    throw InvalidArgument("unknown scheme");
}

DetectionOutcome locate_and_spread(const Grid& actual, const StoreSet& stores, Scheme scheme, uint64_t seed,
                                   CostMeter& meter) {
    DetectionOutcome out = run_scheme(actual, stores, scheme, seed, meter);

    if (out.verdict == Verdict::Corrupted && scheme != Scheme::Sieve && out.found_cell) {
        CellTest test;
        if (stores.original)
            test = byte_compare_test(actual, *stores.original, meter);
        else if (stores.sift)
            test = digest_cell_test(actual, *stores.sift, meter);
        else if (stores.quad)
            test = digest_cell_test(actual, *stores.quad, meter);
        else if (stores.boundary)
            test = digest_cell_test(actual, *stores.boundary, meter);
        else if (stores.adaptive)
            test = digest_cell_test(actual, *stores.adaptive, meter);
        if (test) {
            out.region = spread_region(actual, test, *out.found_cell, meter);
            out.meter = meter;
        }
    }
    return out;
}

}  // namespace gridguard

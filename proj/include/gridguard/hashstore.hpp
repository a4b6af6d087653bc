#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "gridguard/auth.hpp"
#include "gridguard/grid.hpp"

namespace gridguard {

enum class StoreVariant : uint8_t {
    Quad = 0,
    Boundary = 1,
    Sift = 2,
    Sieve = 3,
    Adaptive = 4,
};

const char* store_variant_name(StoreVariant v);

/// Descriptor -> digest lookup over an externally owned digest array.
class DigestIndex {
public:
    DigestIndex() = default;
    explicit DigestIndex(const std::vector<SignedDigest>& digests) { build(digests); }

    void build(const std::vector<SignedDigest>& digests);
    const SignedDigest* find(const RegionDescriptor& desc) const;

private:
    std::unordered_map<std::string, const SignedDigest*> map_;
};

/// One built (or loaded) signed-hash store. The digest list is immutable and
/// kept in the variant's canonical order; the index serves detector lookups.
class Store {
public:
    Store(StoreVariant variant, KeyMaterial key, uint32_t m, uint32_t cell_size,
          std::vector<SignedDigest> digests);

    Store(Store&&) = default;
    Store& operator=(Store&&) = default;
    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    StoreVariant variant() const { return variant_; }
    KeyMode mode() const { return key_.mode(); }
    uint32_t m() const { return m_; }
    uint32_t cell_size() const { return cell_size_; }
    const std::vector<SignedDigest>& digests() const { return digests_; }
    const DigestIndex& index() const { return index_; }
    const KeyMaterial& key() const { return key_; }

    /// MAC-mode stores loaded from disk carry no key; hand them the shared
    /// secret before verifying.
    void attach_key(KeyMaterial key);
    bool can_verify() const { return key_.can_verify(); }

    /// Grid/store compatibility gate used by every detector.
    void require_matches(const Grid& grid) const;

    const SignedDigest& digest_or_throw(const RegionDescriptor& desc) const;
    bool verify(const Grid& grid, const SignedDigest& digest, CostMeter& meter) const;

private:
    StoreVariant variant_;
    KeyMaterial key_;
    uint32_t m_;
    uint32_t cell_size_;
    std::vector<SignedDigest> digests_;
    DigestIndex index_;
};

// ---------------------------------------------------------------------------
// Builders

Store build_quad_store(const Grid& grid, const KeyMaterial& key);
Store build_boundary_store(const Grid& grid, const KeyMaterial& key);
Store build_sift_store(const Grid& grid, const KeyMaterial& key);
Store build_layer_sieve(const Grid& grid, const KeyMaterial& key);
Store build_adaptive_tree(const Grid& grid, const KeyMaterial& key);

uint64_t store_size(const Store& store);

// ---------------------------------------------------------------------------
// Adaptive tree shape
//
// Height h with degree 2^(h-d) at depth d, so the degrees multiply out to N
// and log2(N) must be the triangular number h(h+1)/2.

struct AdaptiveShape {
    uint32_t height = 0;
    uint64_t n = 0;
    std::vector<uint64_t> level_counts;  // nodes per depth, root first
    std::vector<uint64_t> level_lens;    // cells covered per node at each depth

    uint32_t degree_at(uint32_t depth) const { return uint32_t{1} << (height - depth); }
    uint64_t node_count() const;
};

/// Throws InvalidArgument naming the nearest conforming sizes when log2(n)
/// is not triangular.
AdaptiveShape adaptive_shape(uint64_t n);

/// Contiguous row-major cell range [start, start+len) as a descriptor.
/// Power-of-2 lengths either cover whole rows or stay inside one row.
RegionDescriptor row_major_range_desc(uint64_t start, uint64_t len, uint32_t m);

// ---------------------------------------------------------------------------
// 1-D lines
//
// A line is a full or partial row/column of the grid; the improved scheme
// stores a dyadic-interval digest tree per median line, and the sift scheme
// walks per-cell digests along one.

enum class LineAxis : uint8_t { Row = 0, Col = 1 };

struct LineId {
    LineAxis axis = LineAxis::Row;
    uint32_t index = 0;   // the fixed row (Row) or column (Col)
    uint32_t origin = 0;  // first position along the line
    uint32_t length = 0;  // power of 2 for dyadic trees

    CellCoord cell_at(uint32_t offset) const {
        return axis == LineAxis::Row ? CellCoord{index, origin + offset} : CellCoord{origin + offset, index};
    }
};

RegionDescriptor line_run_desc(const LineId& line, uint32_t offset, uint32_t len);

/// All 2L-1 dyadic sub-interval digests of the line, level order.
std::vector<SignedDigest> build_line_tree(const Grid& grid, const KeyMaterial& key, const LineId& line);

/// Per-cell digests (1x1 rects) along the line.
std::vector<SignedDigest> build_line_cell_digests(const Grid& grid, const KeyMaterial& key, const LineId& line);

// ---------------------------------------------------------------------------
// Persistence

uint64_t save_store(const Store& store, std::ostream& sink);
Store load_store(std::istream& source);
Store load_store(std::istream& source, StoreVariant expected);
uint64_t save_store_file(const Store& store, const std::string& path);
Store load_store_file(const std::string& path);
Store load_store_file(const std::string& path, StoreVariant expected);

}  // namespace gridguard

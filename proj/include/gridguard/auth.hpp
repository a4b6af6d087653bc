#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "gridguard/grid.hpp"
#include "gridguard/wire.hpp"

namespace gridguard {

// ---------------------------------------------------------------------------
// Region descriptors
//
// A descriptor pins down an exact cell set plus its canonical traversal
// order. The variant index doubles as the wire kind byte.

struct RectDesc {
    uint32_t row0 = 0, col0 = 0, rows = 0, cols = 0;
    bool operator==(const RectDesc&) const = default;
};

struct RowRunDesc {
    uint32_t row = 0, col0 = 0, len = 0;
    bool operator==(const RowRunDesc&) const = default;
};

struct ColRunDesc {
    uint32_t col = 0, row0 = 0, len = 0;
    bool operator==(const ColRunDesc&) const = default;
};

struct CellListDesc {
    std::vector<CellCoord> cells;  // sorted row-major; use make_cell_list
    bool operator==(const CellListDesc&) const = default;
};

using RegionDescriptor = std::variant<RectDesc, RowRunDesc, ColRunDesc, CellListDesc>;

RegionDescriptor single_cell_desc(CellCoord c);
CellListDesc make_cell_list(std::vector<CellCoord> cells);

uint64_t descriptor_cell_count(const RegionDescriptor& desc);
bool descriptor_in_bounds(const RegionDescriptor& desc, const Grid& grid);

/// Visits the descriptor's cells in canonical order: row-major for rect,
/// left-to-right for row runs, top-to-bottom for column runs, stored order
/// for cell lists.
template <class F>
void for_each_cell(const RegionDescriptor& desc, F&& f) {
    if (const auto* r = std::get_if<RectDesc>(&desc)) {
        for (uint32_t dr = 0; dr < r->rows; ++dr)
            for (uint32_t dc = 0; dc < r->cols; ++dc) f(CellCoord{r->row0 + dr, r->col0 + dc});
    } else if (const auto* rr = std::get_if<RowRunDesc>(&desc)) {
        for (uint32_t i = 0; i < rr->len; ++i) f(CellCoord{rr->row, rr->col0 + i});
    } else if (const auto* cr = std::get_if<ColRunDesc>(&desc)) {
        for (uint32_t i = 0; i < cr->len; ++i) f(CellCoord{cr->row0 + i, cr->col});
    } else {
        for (CellCoord c : std::get<CellListDesc>(desc).cells) f(c);
    }
}

void encode_descriptor(const RegionDescriptor& desc, std::vector<uint8_t>& out);
RegionDescriptor decode_descriptor(wire::Reader& reader);

// ---------------------------------------------------------------------------
// Keys and digests

enum class KeyMode : uint8_t { Mac = 0, Signature = 1 };

constexpr size_t kMacTagBytes = 32;  // HMAC-SHA-256
constexpr size_t kSigTagBytes = 64;  // Ed25519 detached
constexpr size_t kKeySeedBytes = 32;
constexpr size_t kVerifyKeyBytes = 32;

size_t tag_bytes(KeyMode mode);

/// Signing/verification material. MAC mode uses one shared 32-byte key for
/// both sides; signature mode keeps the Ed25519 secret key out of anything
/// persisted, so a loaded store can only verify.
class KeyMaterial {
public:
    static KeyMaterial mac(std::span<const uint8_t> key32);
    static KeyMaterial signature_from_seed(std::span<const uint8_t> seed32);
    static KeyMaterial signature_verify_only(std::span<const uint8_t> pubkey32);
    /// Mode is known but no material is present yet (a loaded MAC store
    /// before attach_key). Both can_sign and can_verify are false.
    static KeyMaterial absent(KeyMode mode);
    /// Expands a 64-bit test seed into full key material for the given mode.
    static KeyMaterial from_seed(KeyMode mode, uint64_t seed);

    KeyMode mode() const { return mode_; }
    bool can_sign() const;
    bool can_verify() const;
    std::span<const uint8_t> verify_key() const;  // signature mode only

    std::vector<uint8_t> sign(std::span<const uint8_t> content_hash) const;
    bool check(std::span<const uint8_t> content_hash, std::span<const uint8_t> tag) const;

private:
    KeyMaterial() = default;
    KeyMode mode_ = KeyMode::Mac;
    std::vector<uint8_t> mac_key_;    // 32 bytes when present
    std::vector<uint8_t> sign_key_;   // Ed25519 secret, 64 bytes when present
    std::vector<uint8_t> verify_pk_;  // Ed25519 public, 32 bytes when present
};

/// Descriptor plus the fixed-width authentication tag over its content hash.
struct SignedDigest {
    RegionDescriptor descriptor;
    std::vector<uint8_t> tag;

    bool operator==(const SignedDigest&) const = default;
};

// ---------------------------------------------------------------------------
// Cost accounting

/// Counters for one detection run. verify_region charges one signature
/// verification, one hash computation, and the descriptor's cell count;
/// direct byte comparisons charge cells_touched only.
struct CostMeter {
    uint64_t sig_verifications = 0;
    uint64_t cells_touched = 0;
    uint64_t hash_computations = 0;

    bool operator==(const CostMeter&) const = default;
};

// ---------------------------------------------------------------------------
// Operations

/// Descriptor wire encoding followed by the covered cell payloads in
/// canonical order. Deterministic; the preimage of every digest.
std::vector<uint8_t> canonical_bytes(const Grid& grid, const RegionDescriptor& desc);

std::vector<uint8_t> sha256(std::span<const uint8_t> data);

SignedDigest sign_region(const KeyMaterial& key, const Grid& grid, const RegionDescriptor& desc);

bool verify_region(const KeyMaterial& key, const Grid& grid, const SignedDigest& digest, CostMeter& meter);

}  // namespace gridguard

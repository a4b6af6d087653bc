#include "gridguard/auth.hpp"

#include <sodium.h>

#include <algorithm>
#include <mutex>

#include "gridguard/rng.hpp"

namespace gridguard {

namespace {

void ensure_sodium() {
    static std::once_flag flag;
    std::call_once(flag, [] {
        if (sodium_init() < 0) throw Error("libsodium initialization failed");
    });
}

}  // namespace

// ---------------------------------------------------------------------------
// Descriptors

RegionDescriptor single_cell_desc(CellCoord c) { return RectDesc{c.row, c.col, 1, 1}; }

CellListDesc make_cell_list(std::vector<CellCoord> cells) {
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    return CellListDesc{std::move(cells)};
}

uint64_t descriptor_cell_count(const RegionDescriptor& desc) {
    if (const auto* r = std::get_if<RectDesc>(&desc)) return uint64_t{r->rows} * r->cols;
    if (const auto* rr = std::get_if<RowRunDesc>(&desc)) return rr->len;
    if (const auto* cr = std::get_if<ColRunDesc>(&desc)) return cr->len;
    return std::get<CellListDesc>(desc).cells.size();
}

bool descriptor_in_bounds(const RegionDescriptor& desc, const Grid& grid) {
    const uint64_t m = grid.m();
    if (const auto* r = std::get_if<RectDesc>(&desc))
        return r->rows > 0 && r->cols > 0 && uint64_t{r->row0} + r->rows <= m && uint64_t{r->col0} + r->cols <= m;
    if (const auto* rr = std::get_if<RowRunDesc>(&desc))
        return rr->len > 0 && rr->row < m && uint64_t{rr->col0} + rr->len <= m;
    if (const auto* cr = std::get_if<ColRunDesc>(&desc))
        return cr->len > 0 && cr->col < m && uint64_t{cr->row0} + cr->len <= m;
    const auto& cells = std::get<CellListDesc>(desc).cells;
    if (cells.empty()) return false;
    return std::all_of(cells.begin(), cells.end(), [&](CellCoord c) { return grid.in_bounds(c); });
}

void encode_descriptor(const RegionDescriptor& desc, std::vector<uint8_t>& out) {
    wire::put_u8(out, static_cast<uint8_t>(desc.index()));
    if (const auto* r = std::get_if<RectDesc>(&desc)) {
        wire::put_u32(out, r->row0);
        wire::put_u32(out, r->col0);
        wire::put_u32(out, r->rows);
        wire::put_u32(out, r->cols);
    } else if (const auto* rr = std::get_if<RowRunDesc>(&desc)) {
        wire::put_u32(out, rr->row);
        wire::put_u32(out, rr->col0);
        wire::put_u32(out, rr->len);
    } else if (const auto* cr = std::get_if<ColRunDesc>(&desc)) {
        wire::put_u32(out, cr->col);
        wire::put_u32(out, cr->row0);
        wire::put_u32(out, cr->len);
    } else {
        const auto& cells = std::get<CellListDesc>(desc).cells;
        wire::put_u32(out, static_cast<uint32_t>(cells.size()));
        for (CellCoord c : cells) {
            wire::put_u32(out, c.row);
            wire::put_u32(out, c.col);
        }
    }
}

RegionDescriptor decode_descriptor(wire::Reader& reader) {
    uint8_t kind = reader.get_u8("descriptor kind");
    switch (kind) {
        case 0: {
            RectDesc r;
            r.row0 = reader.get_u32("rect row0");
            r.col0 = reader.get_u32("rect col0");
            r.rows = reader.get_u32("rect rows");
            r.cols = reader.get_u32("rect cols");
            return r;
        }
        case 1: {
            RowRunDesc r;
            r.row = reader.get_u32("row-run row");
            r.col0 = reader.get_u32("row-run col0");
            r.len = reader.get_u32("row-run len");
            return r;
        }
        case 2: {
            ColRunDesc r;
            r.col = reader.get_u32("col-run col");
            r.row0 = reader.get_u32("col-run row0");
            r.len = reader.get_u32("col-run len");
            return r;
        }
        case 3: {
            uint32_t count = reader.get_u32("cell-list count");
            std::vector<CellCoord> cells;
            cells.reserve(count);
            for (uint32_t i = 0; i < count; ++i) {
                uint32_t row = reader.get_u32("cell-list row");
                uint32_t col = reader.get_u32("cell-list col");
                cells.push_back({row, col});
            }
            return CellListDesc{std::move(cells)};
        }
        default: throw FormatError("unknown descriptor kind " + std::to_string(kind));
    }
}

// ---------------------------------------------------------------------------
// KeyMaterial

size_t tag_bytes(KeyMode mode) { return mode == KeyMode::Mac ? kMacTagBytes : kSigTagBytes; }

KeyMaterial KeyMaterial::mac(std::span<const uint8_t> key32) {
    ensure_sodium();
    if (key32.size() != crypto_auth_hmacsha256_KEYBYTES) throw InvalidArgument("MAC key must be 32 bytes");
    KeyMaterial k;
    k.mode_ = KeyMode::Mac;
    k.mac_key_.assign(key32.begin(), key32.end());
    return k;
}

KeyMaterial KeyMaterial::signature_from_seed(std::span<const uint8_t> seed32) {
    ensure_sodium();
    if (seed32.size() != crypto_sign_SEEDBYTES) throw InvalidArgument("signature seed must be 32 bytes");
    KeyMaterial k;
    k.mode_ = KeyMode::Signature;
    k.sign_key_.resize(crypto_sign_SECRETKEYBYTES);
    k.verify_pk_.resize(crypto_sign_PUBLICKEYBYTES);
    crypto_sign_seed_keypair(k.verify_pk_.data(), k.sign_key_.data(), seed32.data());
    return k;
}

KeyMaterial KeyMaterial::signature_verify_only(std::span<const uint8_t> pubkey32) {
    ensure_sodium();
    if (pubkey32.size() != crypto_sign_PUBLICKEYBYTES) throw InvalidArgument("verification key must be 32 bytes");
    KeyMaterial k;
    k.mode_ = KeyMode::Signature;
    k.verify_pk_.assign(pubkey32.begin(), pubkey32.end());
    return k;
}

KeyMaterial KeyMaterial::absent(KeyMode mode) {
    KeyMaterial k;
    k.mode_ = mode;
    return k;
}

KeyMaterial KeyMaterial::from_seed(KeyMode mode, uint64_t seed) {
    std::vector<uint8_t> bytes(kKeySeedBytes);
    for (size_t i = 0; i < bytes.size(); ++i) bytes[i] = static_cast<uint8_t>(mix_seed(seed, i) & 0xff);
    return mode == KeyMode::Mac ? mac(bytes) : signature_from_seed(bytes);
}

bool KeyMaterial::can_sign() const {
    return mode_ == KeyMode::Mac ? !mac_key_.empty() : !sign_key_.empty();
}

bool KeyMaterial::can_verify() const {
    return mode_ == KeyMode::Mac ? !mac_key_.empty() : !verify_pk_.empty();
}

std::span<const uint8_t> KeyMaterial::verify_key() const {
    if (mode_ != KeyMode::Signature || verify_pk_.empty())
        throw InvalidArgument("no verification key available");
    return verify_pk_;
}

std::vector<uint8_t> KeyMaterial::sign(std::span<const uint8_t> content_hash) const {
    ensure_sodium();
    if (!can_sign()) throw InvalidArgument("signing key not available");
    if (mode_ == KeyMode::Mac) {
        std::vector<uint8_t> tag(crypto_auth_hmacsha256_BYTES);
        crypto_auth_hmacsha256(tag.data(), content_hash.data(), content_hash.size(), mac_key_.data());
        return tag;
    }
    std::vector<uint8_t> tag(crypto_sign_BYTES);
    crypto_sign_detached(tag.data(), nullptr, content_hash.data(), content_hash.size(), sign_key_.data());
    return tag;
}

bool KeyMaterial::check(std::span<const uint8_t> content_hash, std::span<const uint8_t> tag) const {
    ensure_sodium();
    if (!can_verify()) throw InvalidArgument("verification key not available");
    if (tag.size() != tag_bytes(mode_)) return false;
    if (mode_ == KeyMode::Mac)
        return crypto_auth_hmacsha256_verify(tag.data(), content_hash.data(), content_hash.size(),
                                             mac_key_.data()) == 0;
    return crypto_sign_verify_detached(tag.data(), content_hash.data(), content_hash.size(),
                                       verify_pk_.data()) == 0;
}

// ---------------------------------------------------------------------------
// Sign / verify

std::vector<uint8_t> canonical_bytes(const Grid& grid, const RegionDescriptor& desc) {
    if (!descriptor_in_bounds(desc, grid)) throw InvalidArgument("descriptor out of grid bounds");
    std::vector<uint8_t> out;
    out.reserve(32 + descriptor_cell_count(desc) * grid.cell_size());
    encode_descriptor(desc, out);
    for_each_cell(desc, [&](CellCoord c) { wire::put_bytes(out, grid.cell(c)); });
    return out;
}

std::vector<uint8_t> sha256(std::span<const uint8_t> data) {
    ensure_sodium();
    std::vector<uint8_t> hash(crypto_hash_sha256_BYTES);
    crypto_hash_sha256(hash.data(), data.data(), data.size());
    return hash;
}

SignedDigest sign_region(const KeyMaterial& key, const Grid& grid, const RegionDescriptor& desc) {
    auto hash = sha256(canonical_bytes(grid, desc));
    return SignedDigest{desc, key.sign(hash)};
}

bool verify_region(const KeyMaterial& key, const Grid& grid, const SignedDigest& digest, CostMeter& meter) {
    auto hash = sha256(canonical_bytes(grid, digest.descriptor));
    meter.sig_verifications += 1;
    meter.hash_computations += 1;
    meter.cells_touched += descriptor_cell_count(digest.descriptor);
    return key.check(hash, digest.tag);
}

}  // namespace gridguard

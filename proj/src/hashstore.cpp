#include "gridguard/hashstore.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <istream>
#include <ostream>

#include "gridguard/wire.hpp"

namespace gridguard {

namespace {

constexpr char kStoreMagic[4] = {'H', 'S', 'T', '1'};

std::string encoded(const RegionDescriptor& desc) {
    std::vector<uint8_t> bytes;
    encode_descriptor(desc, bytes);
    return std::string(bytes.begin(), bytes.end());
}

void require_signing(const KeyMaterial& key) {
    if (!key.can_sign()) throw InvalidArgument("store build requires a signing key");
}

}  // namespace

const char* store_variant_name(StoreVariant v) {
    switch (v) {
        case StoreVariant::Quad: return "quad";
        case StoreVariant::Boundary: return "boundary";
        case StoreVariant::Sift: return "sift";
        case StoreVariant::Sieve: return "sieve";
        case StoreVariant::Adaptive: return "adaptive";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// DigestIndex / Store

void DigestIndex::build(const std::vector<SignedDigest>& digests) {
    map_.clear();
    map_.reserve(digests.size());
    // Duplicate descriptors (the leaf base-case entries) keep the first copy.
    for (const auto& d : digests) map_.try_emplace(encoded(d.descriptor), &d);
}

const SignedDigest* DigestIndex::find(const RegionDescriptor& desc) const {
    auto it = map_.find(encoded(desc));
    return it == map_.end() ? nullptr : it->second;
}

Store::Store(StoreVariant variant, KeyMaterial key, uint32_t m, uint32_t cell_size,
             std::vector<SignedDigest> digests)
    : variant_(variant), key_(std::move(key)), m_(m), cell_size_(cell_size), digests_(std::move(digests)) {
    index_.build(digests_);
}

void Store::attach_key(KeyMaterial key) {
    if (key.mode() != key_.mode()) throw MismatchError("key mode does not match store mode");
    key_ = std::move(key);
}

void Store::require_matches(const Grid& grid) const {
    if (grid.m() != m_ || grid.cell_size() != cell_size_)
        throw MismatchError("store was built for a " + std::to_string(m_) + "x" + std::to_string(m_) +
                            " grid with " + std::to_string(cell_size_) + "-byte cells");
    if (!can_verify()) throw InvalidArgument("store has no verification key attached");
}

const SignedDigest& Store::digest_or_throw(const RegionDescriptor& desc) const {
    const SignedDigest* d = index_.find(desc);
    if (!d) throw MismatchError("store is missing a digest the detector needs (wrong store for this grid?)");
    return *d;
}

bool Store::verify(const Grid& grid, const SignedDigest& digest, CostMeter& meter) const {
    return verify_region(key_, grid, digest, meter);
}

// ---------------------------------------------------------------------------
// Builders

Store build_quad_store(const Grid& grid, const KeyMaterial& key) {
    require_signing(key);
    const uint32_t m = grid.m();
    std::vector<SignedDigest> digests;
    // Root certifies the clean grid in one verification, then quadrant levels
    // down to single cells.
    digests.push_back(sign_region(key, grid, RectDesc{0, 0, m, m}));
    for (uint32_t side = m / 2; side >= 1; side /= 2)
        for (uint32_t r0 = 0; r0 < m; r0 += side)
            for (uint32_t c0 = 0; c0 < m; c0 += side)
                digests.push_back(sign_region(key, grid, RectDesc{r0, c0, side, side}));
    // Each cell appears once more: the recursion bottoms out at a per-cell
    // digest in addition to the cell's entry as a quadrant of its parent.
    for (uint32_t r = 0; r < m; ++r)
        for (uint32_t c = 0; c < m; ++c) digests.push_back(sign_region(key, grid, RectDesc{r, c, 1, 1}));
    return Store(StoreVariant::Quad, key, m, grid.cell_size(), std::move(digests));
}

Store build_boundary_store(const Grid& grid, const KeyMaterial& key) {
    require_signing(key);
    const uint32_t m = grid.m();
    std::vector<SignedDigest> digests;
    // Internal node levels: per node its 4 child quadrants plus the two
    // median-line dyadic trees spanning the node's side.
    for (uint32_t side = m; side >= 2; side /= 2) {
        for (uint32_t r0 = 0; r0 < m; r0 += side) {
            for (uint32_t c0 = 0; c0 < m; c0 += side) {
                const uint32_t half = side / 2;
                digests.push_back(sign_region(key, grid, RectDesc{r0, c0, half, half}));
                digests.push_back(sign_region(key, grid, RectDesc{r0, c0 + half, half, half}));
                digests.push_back(sign_region(key, grid, RectDesc{r0 + half, c0, half, half}));
                digests.push_back(sign_region(key, grid, RectDesc{r0 + half, c0 + half, half, half}));
                LineId vertical{LineAxis::Col, c0 + half, r0, side};
                LineId horizontal{LineAxis::Row, r0 + half, c0, side};
                for (auto& d : build_line_tree(grid, key, vertical)) digests.push_back(std::move(d));
                for (auto& d : build_line_tree(grid, key, horizontal)) digests.push_back(std::move(d));
            }
        }
    }
    // Per-cell base digests, as in the quad store.
    for (uint32_t r = 0; r < m; ++r)
        for (uint32_t c = 0; c < m; ++c) digests.push_back(sign_region(key, grid, RectDesc{r, c, 1, 1}));
    return Store(StoreVariant::Boundary, key, m, grid.cell_size(), std::move(digests));
}

Store build_sift_store(const Grid& grid, const KeyMaterial& key) {
    require_signing(key);
    const uint32_t m = grid.m();
    std::vector<SignedDigest> digests;
    for (uint32_t c = 0; c < m; ++c) digests.push_back(sign_region(key, grid, ColRunDesc{c, 0, m}));
    for (uint32_t r = 0; r < m; ++r)
        for (uint32_t c = 0; c < m; ++c) digests.push_back(sign_region(key, grid, RectDesc{r, c, 1, 1}));
    return Store(StoreVariant::Sift, key, m, grid.cell_size(), std::move(digests));
}

Store build_layer_sieve(const Grid& grid, const KeyMaterial& key) {
    require_signing(key);
    const uint32_t m = grid.m();
    std::vector<SignedDigest> digests;
    for (uint32_t r = 0; r < m; ++r) digests.push_back(sign_region(key, grid, RowRunDesc{r, 0, m}));
    for (uint32_t c = 0; c < m; ++c) digests.push_back(sign_region(key, grid, ColRunDesc{c, 0, m}));
    return Store(StoreVariant::Sieve, key, m, grid.cell_size(), std::move(digests));
}

// ---------------------------------------------------------------------------
// Adaptive tree

uint64_t AdaptiveShape::node_count() const {
    uint64_t total = 0;
    for (uint64_t c : level_counts) total += c;
    return total;
}

AdaptiveShape adaptive_shape(uint64_t n) {
    if (n < 2 || !std::has_single_bit(n)) throw InvalidArgument("cell count must be a power of 2, at least 2");
    const uint32_t log_n = static_cast<uint32_t>(std::countr_zero(n));
    uint32_t h = 0;
    while (h * (h + 1) / 2 < log_n) ++h;
    if (h * (h + 1) / 2 != log_n) {
        uint32_t below = (h - 1) * h / 2;
        uint32_t above = h * (h + 1) / 2;
        throw InvalidArgument("adaptive tree needs log2(N) to be h(h+1)/2 for some h; N=" + std::to_string(n) +
                              " does not conform, nearest conforming sizes are N=" +
                              std::to_string(uint64_t{1} << below) + " and N=" + std::to_string(uint64_t{1} << above));
    }
    AdaptiveShape shape;
    shape.height = h;
    shape.n = n;
    shape.level_counts.assign(h + 1, 1);
    shape.level_lens.assign(h + 1, n);
    for (uint32_t d = 1; d <= h; ++d) {
        shape.level_counts[d] = shape.level_counts[d - 1] << (h - d + 1);
        shape.level_lens[d] = shape.level_lens[d - 1] >> (h - d + 1);
    }
    return shape;
}

RegionDescriptor row_major_range_desc(uint64_t start, uint64_t len, uint32_t m) {
    if (len >= m)
        return RectDesc{static_cast<uint32_t>(start / m), 0, static_cast<uint32_t>(len / m), m};
    return RowRunDesc{static_cast<uint32_t>(start / m), static_cast<uint32_t>(start % m),
                      static_cast<uint32_t>(len)};
}

Store build_adaptive_tree(const Grid& grid, const KeyMaterial& key) {
    require_signing(key);
    AdaptiveShape shape = adaptive_shape(grid.n());
    std::vector<SignedDigest> digests;
    for (uint32_t d = 0; d <= shape.height; ++d) {
        const uint64_t len = shape.level_lens[d];
        for (uint64_t i = 0; i < shape.level_counts[d]; ++i)
            digests.push_back(sign_region(key, grid, row_major_range_desc(i * len, len, grid.m())));
    }
    return Store(StoreVariant::Adaptive, key, grid.m(), grid.cell_size(), std::move(digests));
}

uint64_t store_size(const Store& store) { return store.digests().size(); }

// ---------------------------------------------------------------------------
// Lines

RegionDescriptor line_run_desc(const LineId& line, uint32_t offset, uint32_t len) {
    if (line.axis == LineAxis::Row) return RowRunDesc{line.index, line.origin + offset, len};
    return ColRunDesc{line.index, line.origin + offset, len};
}

std::vector<SignedDigest> build_line_tree(const Grid& grid, const KeyMaterial& key, const LineId& line) {
    if (!std::has_single_bit(line.length)) throw InvalidArgument("dyadic line tree needs a power-of-2 length");
    std::vector<SignedDigest> digests;
    digests.reserve(2 * size_t{line.length} - 1);
    for (uint32_t len = line.length; len >= 1; len /= 2)
        for (uint32_t off = 0; off < line.length; off += len)
            digests.push_back(sign_region(key, grid, line_run_desc(line, off, len)));
    return digests;
}

std::vector<SignedDigest> build_line_cell_digests(const Grid& grid, const KeyMaterial& key, const LineId& line) {
    std::vector<SignedDigest> digests;
    digests.reserve(line.length);
    for (uint32_t i = 0; i < line.length; ++i)
        digests.push_back(sign_region(key, grid, single_cell_desc(line.cell_at(i))));
    return digests;
}

// ---------------------------------------------------------------------------
// Persistence: "HST1", variant u8, mode u8, m u32, cell_size u32,
// digest count u64, records, then the verification key in signature mode.

uint64_t save_store(const Store& store, std::ostream& sink) {
    std::vector<uint8_t> out;
    out.insert(out.end(), kStoreMagic, kStoreMagic + 4);
    wire::put_u8(out, static_cast<uint8_t>(store.variant()));
    wire::put_u8(out, static_cast<uint8_t>(store.mode()));
    wire::put_u32(out, store.m());
    wire::put_u32(out, store.cell_size());
    wire::put_u64(out, store.digests().size());
    for (const auto& d : store.digests()) {
        encode_descriptor(d.descriptor, out);
        wire::put_bytes(out, d.tag);
    }
    if (store.mode() == KeyMode::Signature) wire::put_bytes(out, store.key().verify_key());
    sink.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!sink) throw Error("store write failed");
    return out.size();
}

Store load_store(std::istream& source) {
    std::vector<uint8_t> data((std::istreambuf_iterator<char>(source)), std::istreambuf_iterator<char>());
    wire::Reader r(data);
    auto magic = r.get_bytes(4, "magic");
    if (!std::equal(magic.begin(), magic.end(), kStoreMagic)) throw FormatError("not a store file (bad magic)");
    uint8_t variant_byte = r.get_u8("variant");
    if (variant_byte > 4) throw FormatError("unknown store variant " + std::to_string(variant_byte));
    uint8_t mode_byte = r.get_u8("key mode");
    if (mode_byte > 1) throw FormatError("unknown key mode " + std::to_string(mode_byte));
    const auto variant = static_cast<StoreVariant>(variant_byte);
    const auto mode = static_cast<KeyMode>(mode_byte);
    uint32_t m = r.get_u32("side length");
    uint32_t cell_size = r.get_u32("cell size");
    if (m < 2 || !std::has_single_bit(m)) throw FormatError("store header: side length must be a power of 2");
    if (cell_size == 0) throw FormatError("store header: zero cell size");
    uint64_t count = r.get_u64("digest count");
    std::vector<SignedDigest> digests;
    digests.reserve(count);
    const size_t tag_len = tag_bytes(mode);
    for (uint64_t i = 0; i < count; ++i) {
        RegionDescriptor desc = decode_descriptor(r);
        auto tag = r.get_bytes(tag_len, "digest tag");
        digests.push_back(SignedDigest{std::move(desc), std::vector<uint8_t>(tag.begin(), tag.end())});
    }
    KeyMaterial key = [&] {
        if (mode == KeyMode::Signature)
            return KeyMaterial::signature_verify_only(r.get_bytes(kVerifyKeyBytes, "verification key"));
        // MAC stores never embed the shared key; attach it before verifying.
        return KeyMaterial::absent(KeyMode::Mac);
    }();
    if (!r.done()) throw FormatError("trailing bytes after store payload");
    return Store(variant, std::move(key), m, cell_size, std::move(digests));
}

Store load_store(std::istream& source, StoreVariant expected) {
    Store store = load_store(source);
    if (store.variant() != expected)
        throw MismatchError(std::string("store variant mismatch: file holds a ") +
                            store_variant_name(store.variant()) + " store, expected " +
                            store_variant_name(expected));
    return store;
}

uint64_t save_store_file(const Store& store, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    return save_store(store, out);
}

Store load_store_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    return load_store(in);
}

Store load_store_file(const std::string& path, StoreVariant expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    return load_store(in, expected);
}

}  // namespace gridguard

#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "gridguard/errors.hpp"

namespace gridguard::wire {

// All on-disk integers are little-endian.

inline void put_u8(std::vector<uint8_t>& out, uint8_t v) { out.push_back(v); }

inline void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 24));
}

inline void put_u64(std::vector<uint8_t>& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

inline void put_bytes(std::vector<uint8_t>& out, std::span<const uint8_t> bytes) {
    out.insert(out.end(), bytes.begin(), bytes.end());
}

/// Cursor over a fully buffered input. Running past the end raises
/// TruncationError naming the field that was being read.
class Reader {
public:
    explicit Reader(std::span<const uint8_t> data) : data_(data) {}

    size_t remaining() const { return data_.size() - pos_; }
    bool done() const { return pos_ == data_.size(); }

    uint8_t get_u8(const char* what) {
        need(1, what);
        return data_[pos_++];
    }

    uint32_t get_u32(const char* what) {
        need(4, what);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t{data_[pos_ + i]} << (8 * i);
        pos_ += 4;
        return v;
    }

    uint64_t get_u64(const char* what) {
        need(8, what);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t{data_[pos_ + i]} << (8 * i);
        pos_ += 8;
        return v;
    }

    std::span<const uint8_t> get_bytes(size_t n, const char* what) {
        need(n, what);
        auto s = data_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

private:
    void need(size_t n, const char* what) {
        if (data_.size() - pos_ < n)
            throw TruncationError(std::string("truncated input while reading ") + what);
    }

    std::span<const uint8_t> data_;
    size_t pos_ = 0;
};

}  // namespace gridguard::wire

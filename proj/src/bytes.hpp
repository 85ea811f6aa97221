// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
// Little-endian byte writing/reading with bounds checks.
//
#pragma once

#include "hra/common.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace hra::detail {

class ByteWriter {
public:
    explicit ByteWriter(std::vector<std::uint8_t> &out) : mOut(out) {}

    void u8(std::uint8_t v) { mOut.push_back(v); }
    void u16(std::uint16_t v) { put(v, 2); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void bytes(const void *data, std::size_t n) {
        const auto *p = static_cast<const std::uint8_t *>(data);
        mOut.insert(mOut.end(), p, p + n);
    }
    std::size_t size() const { return mOut.size(); }
    /// Overwrites 4 bytes at `at`.
    void patch_u32(std::size_t at, std::uint32_t v) {
        for (int i = 0; i < 4; ++i) mOut[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
    }
    void patch_u64(std::size_t at, std::uint64_t v) {
        for (int i = 0; i < 8; ++i) mOut[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
    }

private:
    void put(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) mOut.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    std::vector<std::uint8_t> &mOut;
};

class ByteReader {
public:
    ByteReader(const std::uint8_t *data, std::size_t size, std::string what)
        : mData(data), mSize(size), mWhat(std::move(what)) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    float f32() { return std::bit_cast<float>(u32()); }
    void bytes(void *dst, std::size_t n) {
        need(n);
        std::memcpy(dst, mData + mPos, n);
        mPos += n;
    }
    const std::uint8_t *take(std::size_t n) {
        need(n);
        const auto *p = mData + mPos;
        mPos += n;
        return p;
    }
    std::size_t pos() const { return mPos; }
    std::size_t remaining() const { return mSize - mPos; }
    bool done() const { return mPos == mSize; }

    void need(std::size_t n) const {
        if (n > mSize - mPos) throw FormatError("malformed container: truncated " + mWhat);
    }

private:
    std::uint64_t get(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= std::uint64_t(mData[mPos + i]) << (8 * i);
        mPos += static_cast<std::size_t>(n);
        return v;
    }
    const std::uint8_t *mData;
    std::size_t mSize;
    std::size_t mPos = 0;
    std::string mWhat;
};

inline std::uint16_t load_u16(const std::uint8_t *p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
inline std::uint32_t load_u32(const std::uint8_t *p) {
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
           (std::uint32_t(p[3]) << 24);
}
inline float load_f32(const std::uint8_t *p) { return std::bit_cast<float>(load_u32(p)); }

} // namespace hra::detail

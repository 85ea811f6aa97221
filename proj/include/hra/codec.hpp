// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
// Chunked splat compression with two-phase decode.
//
// Splats are stored sorted by parent triangle in chunks of 256. Each chunk
// carries per-chunk float ranges followed by a positional block (flags, u/v,
// w, delta-varint triangle ids) and a fixed-stride attribute record block, so
// that positions can be decoded for every splat while full attributes are
// decoded only for a sparse, sorted index set. Layout: docs/hra_format.md.
//
#pragma once

#include "hra/splats.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace hra {

inline constexpr std::uint32_t kChunkSize = 256;

enum class CodecProfile : std::uint8_t {
    standard   = 0, ///< 16-bit scales, 8-bit higher SH bands
    aggressive = 1, ///< 8-bit scales, 11-10-11 DC, SH band 1 only at 6 bits
};

const char *to_string(CodecProfile profile);

struct ChunkedSplatBuffer {
    CodecProfile profile = CodecProfile::standard;
    int sh_degree        = 3;
    std::uint32_t count  = 0;
    std::vector<std::uint32_t> chunk_offsets; ///< byte offset of each chunk inside payload
    std::vector<std::uint8_t> payload;
    /// stored index -> caller's index; empty when the input was already sorted
    /// by triangle. Not serialized.
    std::vector<std::uint32_t> source_order;

    std::size_t chunk_count() const { return chunk_offsets.size(); }
    /// Serialized size of the SPLC section body.
    std::size_t byte_size() const;
    /// Float32 structure-of-arrays baseline: (u,v,w), rotation, scale, opacity, SH.
    static std::size_t raw_bytes(std::size_t count, int sh_degree);
    double ratio() const { return double(byte_size()) / double(raw_bytes(count, sh_degree)); }
};

ChunkedSplatBuffer compress_splats(const SplatAttributes &splats, CodecProfile profile = CodecProfile::standard);

PositionView decompress_positions(const ChunkedSplatBuffer &buffer, unsigned threads = 1);

/// Full attributes for `indices` (sorted ascending, in range); output element i
/// belongs to indices[i].
SplatAttributes decompress_full(const ChunkedSplatBuffer &buffer, std::span<const std::uint32_t> indices,
                                unsigned threads = 1);

SplatAttributes decompress_all(const ChunkedSplatBuffer &buffer, unsigned threads = 1);

/// Checks the chunk directory and every chunk header. Throws FormatError.
void check_buffer(const ChunkedSplatBuffer &buffer);

/// Largest per-axis scale over the buffer, from chunk headers only.
float max_scale(const ChunkedSplatBuffer &buffer);
float max_scale(const SplatAttributes &splats);

/// Per-chunk declared ranges, exposed for error-bound checks.
struct ChunkRanges {
    float w_min, w_max;
    std::array<float, 3> log_scale_min, log_scale_max;
    std::array<float, 3> dc_min, dc_max;
    std::vector<float> band_min, band_max; ///< bands 1..degree
};
ChunkRanges chunk_ranges(const ChunkedSplatBuffer &buffer, std::size_t chunk);

namespace detail {
void put_varint(std::vector<std::uint8_t> &out, std::uint32_t value);
/// Reads one LEB128 value at `pos`, advancing it. Throws FormatError past `end`.
std::uint32_t get_varint(const std::uint8_t *data, std::size_t end, std::size_t &pos);

std::uint32_t encode_rotation(const Quatf &q);
Quatf decode_rotation(std::uint32_t bits);
} // namespace detail

} // namespace hra

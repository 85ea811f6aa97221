// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
#include "hra/codec.hpp"

#include "bytes.hpp"
#include "hra/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hra {

const char *to_string(CodecProfile profile) {
    return profile == CodecProfile::aggressive ? "aggressive" : "default";
}

namespace detail {

void put_varint(std::vector<std::uint8_t> &out, std::uint32_t value) {
    while (value >= 0x80) {
        out.push_back(static_cast<std::uint8_t>(value | 0x80));
        value >>= 7;
    }
    out.push_back(static_cast<std::uint8_t>(value));
}

std::uint32_t get_varint(const std::uint8_t *data, std::size_t end, std::size_t &pos) {
    std::uint32_t value = 0;
    for (int shift = 0; shift < 35; shift += 7) {
        if (pos >= end) throw FormatError("corrupt chunk: truncated triangle id stream");
        const std::uint8_t b = data[pos++];
        value |= std::uint32_t(b & 0x7f) << shift;
        if ((b & 0x80) == 0) return value;
    }
    throw FormatError("corrupt chunk: varint overflow");
}

namespace {
constexpr double kRotRange = 0.70710678118654752440; // 1/sqrt(2)
constexpr int kRotHalf     = 511;                    // codes 0..1022, 511 is exact zero
} // namespace

namespace {

std::uint32_t encode_rotation_once(const Quatf &q) {
    double c[4] = {q.x(), q.y(), q.z(), q.w()};
    const double norm = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2] + c[3] * c[3]);
    int largest = 0;
    for (int i = 0; i < 4; ++i) {
        c[i] /= norm;
        if (std::abs(c[i]) > std::abs(c[largest])) largest = i;
    }
    const double sign = c[largest] < 0.0 ? -1.0 : 1.0;
    std::uint32_t bits = std::uint32_t(largest) << 30;
    int shift = 20;
    for (int i = 0; i < 4; ++i) {
        if (i == largest) continue;
        const double x = std::clamp(sign * c[i] / kRotRange, -1.0, 1.0);
        const auto code = static_cast<std::uint32_t>(std::llround(x * kRotHalf) + kRotHalf);
        bits |= code << shift;
        shift -= 10;
    }
    return bits;
}

} // namespace

std::uint32_t encode_rotation(const Quatf &q) {
    // Near-ties between the two largest components can flip the dropped index
    // on re-encode. Settle on a code that decodes and re-encodes to itself.
    std::uint32_t bits = encode_rotation_once(q);
    for (int i = 0; i < 8; ++i) {
        const std::uint32_t again = encode_rotation_once(decode_rotation(bits));
        if (again == bits) break;
        bits = again;
    }
    return bits;
}

Quatf decode_rotation(std::uint32_t bits) {
    const int largest = int(bits >> 30);
    double c[4];
    double sum = 0.0;
    int shift = 20;
    for (int i = 0; i < 4; ++i) {
        if (i == largest) continue;
        const int code = int((bits >> shift) & 0x3ff);
        c[i] = double(code - kRotHalf) / kRotHalf * kRotRange;
        sum += c[i] * c[i];
        shift -= 10;
    }
    c[largest] = std::sqrt(std::max(0.0, 1.0 - sum));
    return Quatf(float(c[3]), float(c[0]), float(c[1]), float(c[2]));
}

} // namespace detail

namespace {

using detail::load_f32;
using detail::load_u16;
using detail::load_u32;

constexpr std::uint32_t kQ16 = 65535;
constexpr std::uint32_t kQ11 = 2047;
constexpr std::uint32_t kQ10 = 1023;
constexpr std::uint32_t kQ8  = 255;
constexpr std::uint32_t kQ6  = 63;

constexpr std::uint16_t kChunkHasNormalScale = 1;
constexpr std::uint8_t kFlagLabel     = 1;
constexpr std::uint8_t kFlagSurface2d = 2;

int stored_bands(CodecProfile p, int degree) {
    return p == CodecProfile::standard ? degree : std::min(degree, 1);
}

std::size_t header_bytes(CodecProfile p, int degree) {
    return 8 + 8 + 24 + 24 + 8 * std::size_t(stored_bands(p, degree));
}

std::size_t record_bytes(CodecProfile p, int degree) {
    const std::size_t higher = 3 * std::size_t(sh_coeff_count(degree) - 1);
    if (p == CodecProfile::standard) return 4 + 6 + 1 + 6 + higher;
    return 4 + 3 + 1 + 4 + (degree >= 1 ? 7 : 0);
}

std::uint32_t quantize(double x, double lo, double hi, std::uint32_t levels) {
    if (!(hi > lo)) return 0;
    const double t = (x - lo) / (hi - lo) * double(levels);
    return static_cast<std::uint32_t>(std::clamp<long long>(std::llround(t), 0, levels));
}

float dequantize(std::uint32_t q, float lo, float hi, std::uint32_t levels) {
    if (q == 0) return lo;
    if (q >= levels) return hi;
    const double x = double(lo) + double(q) / double(levels) * (double(hi) - double(lo));
    return std::clamp(static_cast<float>(x), lo, hi);
}

struct ChunkHeader {
    std::uint32_t n     = 0;
    std::uint16_t flags = 0;
    std::uint32_t records_offset = 0;
    float w_min = 0, w_max = 0;
    float ls_min[3]{}, ls_max[3]{};
    float dc_min[3]{}, dc_max[3]{};
    float band_min[3]{}, band_max[3]{};
    int bands = 0;
};

struct ChunkSpan {
    const std::uint8_t *data;
    std::size_t size;
};

ChunkSpan chunk_span(const ChunkedSplatBuffer &buf, std::size_t c) {
    const std::size_t begin = buf.chunk_offsets[c];
    const std::size_t end   = c + 1 < buf.chunk_count() ? buf.chunk_offsets[c + 1] : buf.payload.size();
    return {buf.payload.data() + begin, end - begin};
}

std::uint32_t expected_count(const ChunkedSplatBuffer &buf, std::size_t c) {
    return std::min<std::uint32_t>(kChunkSize, buf.count - std::uint32_t(c) * kChunkSize);
}

ChunkHeader read_header(const ChunkedSplatBuffer &buf, std::size_t c) {
    const auto [data, size] = chunk_span(buf, c);
    const int bands         = stored_bands(buf.profile, buf.sh_degree);
    const std::size_t hb    = header_bytes(buf.profile, buf.sh_degree);
    auto bad = [&](const char *why) {
        return FormatError("corrupt chunk header: chunk " + std::to_string(c) + ": " + why);
    };
    if (size < hb) throw bad("truncated");
    ChunkHeader h;
    h.n              = load_u16(data);
    h.flags          = load_u16(data + 2);
    h.records_offset = load_u32(data + 4);
    const std::uint8_t *p = data + 8;
    auto f = [&p] {
        const float v = load_f32(p);
        p += 4;
        return v;
    };
    h.w_min = f();
    h.w_max = f();
    for (auto &x : h.ls_min) x = f();
    for (auto &x : h.ls_max) x = f();
    for (auto &x : h.dc_min) x = f();
    for (auto &x : h.dc_max) x = f();
    h.bands = bands;
    for (int b = 0; b < bands; ++b) h.band_min[b] = f();
    for (int b = 0; b < bands; ++b) h.band_max[b] = f();

    if (h.n != expected_count(buf, c)) throw bad("splat count mismatch");
    auto range_ok = [](float lo, float hi) { return std::isfinite(lo) && std::isfinite(hi) && lo <= hi; };
    if (!range_ok(h.w_min, h.w_max)) throw bad("invalid w range");
    for (int a = 0; a < 3; ++a)
        if (!range_ok(h.ls_min[a], h.ls_max[a]) || !range_ok(h.dc_min[a], h.dc_max[a]))
            throw bad("invalid scale or color range");
    for (int b = 0; b < bands; ++b)
        if (!range_ok(h.band_min[b], h.band_max[b])) throw bad("invalid SH band range");
    const std::size_t positional = hb + std::size_t(h.n) * 7;
    if (h.records_offset < positional) throw bad("record block overlaps positions");
    if (h.records_offset + std::size_t(h.n) * record_bytes(buf.profile, buf.sh_degree) != size)
        throw bad("record block size mismatch");
    return h;
}

void check_finite(const SplatAttributes &s, std::size_t i) {
    auto bad = [i](const char *what) {
        return ValidationError("non-finite attribute value: splat " + std::to_string(i) + " " + what);
    };
    if (!std::isfinite(s.u[i]) || !std::isfinite(s.v[i]) || !std::isfinite(s.w[i])) throw bad("position");
    if (!s.rotation[i].coeffs().allFinite()) throw bad("rotation");
    if (!std::isfinite(s.opacity[i])) throw bad("opacity");
    for (float x : s.sh_of(i))
        if (!std::isfinite(x)) throw bad("sh");
    const int axes = s.surface2d[i] ? 2 : 3;
    for (int a = 0; a < axes; ++a)
        if (!std::isfinite(std::log(double(s.scale[i][a])))) throw bad("scale");
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double x) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    bool empty() const { return lo > hi; }
    float flo() const { return empty() ? 0.0f : float(lo); }
    float fhi() const { return empty() ? 0.0f : float(hi); }
};

void encode_chunk(const SplatAttributes &s, std::span<const std::uint32_t> idx, CodecProfile profile,
                  std::vector<std::uint8_t> &out) {
    const int degree = s.sh_degree;
    const int bands  = stored_bands(profile, degree);
    const std::size_t chunk_start = out.size();

    Range w, ls[3], dc[3], band[3];
    for (auto i : idx) {
        if (!s.surface2d[i]) w.add(s.w[i]); // surface splats store w = 0 implicitly
        const int axes = s.surface2d[i] ? 2 : 3;
        for (int a = 0; a < axes; ++a) ls[a].add(float(std::log(double(s.scale[i][a]))));
        const auto sh = s.sh_of(i);
        for (int c = 0; c < 3; ++c) dc[c].add(sh[c]);
        for (int b = 1; b <= bands; ++b)
            for (int k = b * b; k < (b + 1) * (b + 1); ++k)
                for (int c = 0; c < 3; ++c) band[b - 1].add(sh[std::size_t(k) * 3 + c]);
    }

    detail::ByteWriter wr(out);
    wr.u16(static_cast<std::uint16_t>(idx.size()));
    wr.u16(ls[2].empty() ? 0 : kChunkHasNormalScale);
    const std::size_t records_at = wr.size();
    wr.u32(0);
    wr.f32(w.flo());
    wr.f32(w.fhi());
    for (auto &r : ls) wr.f32(r.flo());
    for (auto &r : ls) wr.f32(r.fhi());
    for (auto &r : dc) wr.f32(r.flo());
    for (auto &r : dc) wr.f32(r.fhi());
    for (int b = 0; b < bands; ++b) wr.f32(band[b].flo());
    for (int b = 0; b < bands; ++b) wr.f32(band[b].fhi());

    // Quantization uses the float ranges as written so decode and re-encode agree.
    auto lo = [](const Range &r) { return double(r.flo()); };
    auto hi = [](const Range &r) { return double(r.fhi()); };

    for (auto i : idx)
        wr.u8(static_cast<std::uint8_t>((s.label[i] ? kFlagLabel : 0) | (s.surface2d[i] ? kFlagSurface2d : 0)));
    for (auto i : idx) {
        const auto qu = quantize(s.u[i], 0.0, 1.0, kQ16);
        auto qv       = quantize(s.v[i], 0.0, 1.0, kQ16);
        qv            = std::min(qv, kQ16 - qu);
        wr.u16(static_cast<std::uint16_t>(qu));
        wr.u16(static_cast<std::uint16_t>(qv));
    }
    for (auto i : idx)
        wr.u16(static_cast<std::uint16_t>(s.surface2d[i] ? 0 : quantize(s.w[i], lo(w), hi(w), kQ16)));
    std::uint32_t previous = 0;
    for (auto i : idx) {
        detail::put_varint(out, s.triangle[i] - previous);
        previous = s.triangle[i];
    }

    wr.patch_u32(records_at, static_cast<std::uint32_t>(out.size() - chunk_start));

    for (auto i : idx) {
        wr.u32(detail::encode_rotation(s.rotation[i]));
        const std::uint32_t qs = profile == CodecProfile::standard ? kQ16 : kQ8;
        for (int a = 0; a < 3; ++a) {
            std::uint32_t q = 0;
            if (a < 2 || !s.surface2d[i]) q = quantize(float(std::log(double(s.scale[i][a]))), lo(ls[a]), hi(ls[a]), qs);
            if (qs == kQ16)
                wr.u16(static_cast<std::uint16_t>(q));
            else
                wr.u8(static_cast<std::uint8_t>(q));
        }
        wr.u8(static_cast<std::uint8_t>(quantize(s.opacity[i], 0.0, 1.0, kQ8)));
        const auto sh = s.sh_of(i);
        if (profile == CodecProfile::standard) {
            for (int c = 0; c < 3; ++c) wr.u16(static_cast<std::uint16_t>(quantize(sh[c], lo(dc[c]), hi(dc[c]), kQ16)));
            for (int b = 1; b <= degree; ++b)
                for (int k = b * b; k < (b + 1) * (b + 1); ++k)
                    for (int c = 0; c < 3; ++c)
                        wr.u8(static_cast<std::uint8_t>(quantize(sh[std::size_t(k) * 3 + c], lo(band[b - 1]), hi(band[b - 1]), kQ8)));
        } else {
            const std::uint32_t r = quantize(sh[0], lo(dc[0]), hi(dc[0]), kQ11);
            const std::uint32_t g = quantize(sh[1], lo(dc[1]), hi(dc[1]), kQ10);
            const std::uint32_t b = quantize(sh[2], lo(dc[2]), hi(dc[2]), kQ11);
            wr.u32((r << 21) | (g << 11) | b);
            if (degree >= 1) {
                std::uint64_t acc = 0;
                int bit = 0;
                for (int k = 1; k < 4; ++k)
                    for (int c = 0; c < 3; ++c) {
                        acc |= std::uint64_t(quantize(sh[std::size_t(k) * 3 + c], lo(band[0]), hi(band[0]), kQ6)) << bit;
                        bit += 6;
                    }
                for (int byte = 0; byte < 7; ++byte) wr.u8(static_cast<std::uint8_t>(acc >> (8 * byte)));
            }
        }
    }
}

/// Decodes the triangle ids of a whole chunk.
void decode_triangles(const std::uint8_t *chunk, const ChunkHeader &h, std::size_t header_size,
                      std::uint32_t *out) {
    std::size_t pos = header_size + std::size_t(h.n) * 7;
    std::uint32_t t = 0;
    for (std::uint32_t k = 0; k < h.n; ++k) {
        t += detail::get_varint(chunk, h.records_offset, pos);
        out[k] = t;
    }
}

struct Positional {
    std::uint8_t flags;
    float u, v, w;
};

Positional decode_positional(const std::uint8_t *chunk, const ChunkHeader &h, std::size_t header_size,
                             std::uint32_t k) {
    Positional p;
    p.flags = chunk[header_size + k];
    const std::uint8_t *uv = chunk + header_size + h.n + std::size_t(k) * 4;
    const std::uint32_t qu = load_u16(uv);
    const std::uint32_t qv = load_u16(uv + 2);
    p.u = dequantize(qu, 0.0f, 1.0f, kQ16);
    p.v = std::min(dequantize(qv, 0.0f, 1.0f, kQ16), 1.0f - p.u);
    p.w = (p.flags & kFlagSurface2d)
              ? 0.0f
              : dequantize(load_u16(chunk + header_size + std::size_t(h.n) * 5 + std::size_t(k) * 2), h.w_min,
                           h.w_max, kQ16);
    return p;
}

void decode_record(const std::uint8_t *rec, const ChunkHeader &h, CodecProfile profile, int degree, bool surface2d,
                   Quatf &rotation, Vec3f &scale, float &opacity, std::span<float> sh) {
    rotation = detail::decode_rotation(load_u32(rec));
    rec += 4;
    for (int a = 0; a < 3; ++a) {
        std::uint32_t q;
        if (profile == CodecProfile::standard) {
            q = load_u16(rec);
            rec += 2;
        } else {
            q = *rec++;
        }
        const std::uint32_t levels = profile == CodecProfile::standard ? kQ16 : kQ8;
        if (a == 2 && surface2d)
            scale[a] = 0.0f;
        else
            scale[a] = static_cast<float>(std::exp(double(dequantize(q, h.ls_min[a], h.ls_max[a], levels))));
    }
    opacity = dequantize(*rec++, 0.0f, 1.0f, kQ8);
    std::fill(sh.begin(), sh.end(), 0.0f);
    if (profile == CodecProfile::standard) {
        for (int c = 0; c < 3; ++c) {
            sh[c] = dequantize(load_u16(rec), h.dc_min[c], h.dc_max[c], kQ16);
            rec += 2;
        }
        for (int b = 1; b <= degree; ++b)
            for (int k = b * b; k < (b + 1) * (b + 1); ++k)
                for (int c = 0; c < 3; ++c)
                    sh[std::size_t(k) * 3 + c] = dequantize(*rec++, h.band_min[b - 1], h.band_max[b - 1], kQ8);
    } else {
        const std::uint32_t dc = load_u32(rec);
        rec += 4;
        sh[0] = dequantize(dc >> 21, h.dc_min[0], h.dc_max[0], kQ11);
        sh[1] = dequantize((dc >> 11) & kQ10, h.dc_min[1], h.dc_max[1], kQ10);
        sh[2] = dequantize(dc & kQ11, h.dc_min[2], h.dc_max[2], kQ11);
        if (degree >= 1) {
            std::uint64_t acc = 0;
            for (int byte = 0; byte < 7; ++byte) acc |= std::uint64_t(rec[byte]) << (8 * byte);
            int bit = 0;
            for (int k = 1; k < 4; ++k)
                for (int c = 0; c < 3; ++c) {
                    sh[std::size_t(k) * 3 + c] = dequantize(std::uint32_t((acc >> bit) & kQ6), h.band_min[0], h.band_max[0], kQ6);
                    bit += 6;
                }
        }
    }
}

} // namespace

std::size_t ChunkedSplatBuffer::byte_size() const { return 16 + 4 * chunk_offsets.size() + payload.size(); }

std::size_t ChunkedSplatBuffer::raw_bytes(std::size_t count, int sh_degree) {
    return count * 4 * (3 + 4 + 3 + 1 + 3 * std::size_t(sh_coeff_count(sh_degree)));
}

ChunkedSplatBuffer compress_splats(const SplatAttributes &splats, CodecProfile profile) {
    if (splats.sh_degree < 0 || splats.sh_degree > 3) throw std::invalid_argument("SH degree must be in 0..3");
    const std::size_t n = splats.size();
    for (std::size_t i = 0; i < n; ++i) check_finite(splats, i);

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    const bool sorted = std::is_sorted(splats.triangle.begin(), splats.triangle.end());
    if (!sorted)
        std::stable_sort(order.begin(), order.end(),
                         [&](std::uint32_t a, std::uint32_t b) { return splats.triangle[a] < splats.triangle[b]; });

    ChunkedSplatBuffer buf;
    buf.profile   = profile;
    buf.sh_degree = splats.sh_degree;
    buf.count     = static_cast<std::uint32_t>(n);
    buf.payload.reserve(n * (record_bytes(profile, splats.sh_degree) + 8) + 128);
    for (std::size_t begin = 0; begin < n; begin += kChunkSize) {
        const std::size_t end = std::min<std::size_t>(n, begin + kChunkSize);
        buf.chunk_offsets.push_back(static_cast<std::uint32_t>(buf.payload.size()));
        encode_chunk(splats, std::span(order).subspan(begin, end - begin), profile, buf.payload);
    }
    if (!sorted) buf.source_order = std::move(order);
    return buf;
}

void check_buffer(const ChunkedSplatBuffer &buffer) {
    if (buffer.sh_degree < 0 || buffer.sh_degree > 3) throw FormatError("corrupt splat buffer: SH degree");
    const std::size_t chunks = (std::size_t(buffer.count) + kChunkSize - 1) / kChunkSize;
    if (buffer.chunk_count() != chunks) throw FormatError("corrupt splat buffer: chunk directory size");
    for (std::size_t c = 0; c < chunks; ++c) {
        const std::size_t end = c + 1 < chunks ? buffer.chunk_offsets[c + 1] : buffer.payload.size();
        if (buffer.chunk_offsets[c] > end || end > buffer.payload.size())
            throw FormatError("corrupt splat buffer: chunk directory not increasing");
        read_header(buffer, c);
    }
}

PositionView decompress_positions(const ChunkedSplatBuffer &buffer, unsigned threads) {
    PositionView out;
    out.triangle.resize(buffer.count);
    out.u.resize(buffer.count);
    out.v.resize(buffer.count);
    out.w.resize(buffer.count);
    out.label.resize(buffer.count);
    const std::size_t hb = header_bytes(buffer.profile, buffer.sh_degree);
    parallel_for(threads, buffer.chunk_count(), [&](std::size_t cb, std::size_t ce, unsigned) {
        for (std::size_t c = cb; c < ce; ++c) {
            const ChunkHeader h   = read_header(buffer, c);
            const auto *chunk     = chunk_span(buffer, c).data;
            const std::size_t base = c * kChunkSize;
            decode_triangles(chunk, h, hb, out.triangle.data() + base);
            for (std::uint32_t k = 0; k < h.n; ++k) {
                const auto p        = decode_positional(chunk, h, hb, k);
                out.u[base + k]     = p.u;
                out.v[base + k]     = p.v;
                out.w[base + k]     = p.w;
                out.label[base + k] = (p.flags & kFlagLabel) ? 1 : 0;
            }
        }
    });
    return out;
}

SplatAttributes decompress_full(const ChunkedSplatBuffer &buffer, std::span<const std::uint32_t> indices,
                                unsigned threads) {
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= buffer.count)
            throw std::out_of_range("decompress_full: index " + std::to_string(indices[i]) + " out of range");
        if (i > 0 && indices[i] <= indices[i - 1])
            throw std::invalid_argument("decompress_full: indices must be strictly ascending");
    }
    SplatAttributes out;
    out.sh_degree = buffer.sh_degree;
    out.resize(indices.size());
    if (indices.empty()) return out;

    const std::size_t hb     = header_bytes(buffer.profile, buffer.sh_degree);
    const std::size_t stride = record_bytes(buffer.profile, buffer.sh_degree);
    parallel_for(threads, indices.size(), [&](std::size_t ib, std::size_t ie, unsigned) {
        std::size_t current = std::numeric_limits<std::size_t>::max();
        ChunkHeader h;
        const std::uint8_t *chunk = nullptr;
        std::uint32_t tri[kChunkSize];
        for (std::size_t i = ib; i < ie; ++i) {
            const std::size_t c = indices[i] / kChunkSize;
            const auto k        = std::uint32_t(indices[i] % kChunkSize);
            if (c != current) {
                current = c;
                h       = read_header(buffer, c);
                chunk   = chunk_span(buffer, c).data;
                decode_triangles(chunk, h, hb, tri);
            }
            const auto p     = decode_positional(chunk, h, hb, k);
            out.triangle[i]  = tri[k];
            out.u[i]         = p.u;
            out.v[i]         = p.v;
            out.w[i]         = p.w;
            out.label[i]     = (p.flags & kFlagLabel) ? 1 : 0;
            out.surface2d[i] = (p.flags & kFlagSurface2d) ? 1 : 0;
            decode_record(chunk + h.records_offset + std::size_t(k) * stride, h, buffer.profile, buffer.sh_degree,
                          out.surface2d[i] != 0, out.rotation[i], out.scale[i], out.opacity[i], out.sh_of(i));
        }
    });
    return out;
}

SplatAttributes decompress_all(const ChunkedSplatBuffer &buffer, unsigned threads) {
    std::vector<std::uint32_t> all(buffer.count);
    std::iota(all.begin(), all.end(), 0u);
    return decompress_full(buffer, all, threads);
}

float max_scale(const ChunkedSplatBuffer &buffer) {
    float best = 0.0f;
    for (std::size_t c = 0; c < buffer.chunk_count(); ++c) {
        const ChunkHeader h = read_header(buffer, c);
        const int axes      = (h.flags & kChunkHasNormalScale) ? 3 : 2;
        for (int a = 0; a < axes; ++a) best = std::max(best, static_cast<float>(std::exp(double(h.ls_max[a]))));
    }
    return best;
}

float max_scale(const SplatAttributes &splats) {
    float best = 0.0f;
    for (const auto &s : splats.scale) best = std::max(best, s.maxCoeff());
    return best;
}

ChunkRanges chunk_ranges(const ChunkedSplatBuffer &buffer, std::size_t chunk) {
    const ChunkHeader h = read_header(buffer, chunk);
    ChunkRanges r;
    r.w_min = h.w_min;
    r.w_max = h.w_max;
    for (int a = 0; a < 3; ++a) {
        r.log_scale_min[a] = h.ls_min[a];
        r.log_scale_max[a] = h.ls_max[a];
        r.dc_min[a]        = h.dc_min[a];
        r.dc_max[a]        = h.dc_max[a];
    }
    r.band_min.assign(h.band_min, h.band_min + h.bands);
    r.band_max.assign(h.band_max, h.band_max + h.bands);
    return r;
}

} // namespace hra

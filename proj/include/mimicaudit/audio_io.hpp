#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "mimicaudit/errors.hpp"
#include "mimicaudit/file_io.hpp"

namespace mimicaudit {

// Decoded audio: mono samples in [-1, 1].
struct AudioClip {
    std::vector<double> samples;
    int sample_rate = 0;
    std::string source_path;
};

namespace detail {

inline std::uint16_t read_u16le(std::span<const std::uint8_t> b, std::size_t off) {
    return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

inline std::uint32_t read_u32le(std::span<const std::uint8_t> b, std::size_t off) {
    return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
           (static_cast<std::uint32_t>(b[off + 2]) << 16) |
           (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

inline bool chunk_id_is(std::span<const std::uint8_t> b, std::size_t off, const char* id) {
    return std::memcmp(b.data() + off, id, 4) == 0;
}

struct WavFormat {
    std::uint16_t audio_format = 0;
    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t bits_per_sample = 0;
};

}  // namespace detail

// Parses a RIFF/WAVE byte stream. Supported payloads: 16-bit PCM (format tag 1)
// and 32-bit IEEE float (format tag 3), mono or stereo. Stereo is downmixed by
// averaging the two channels. Unknown chunks are skipped; chunk order is not
// assumed (a "data" chunk before "fmt " is tolerated).
inline AudioClip decode_wav(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 12) throw FormatError("wav: too short for a RIFF header");
    if (!detail::chunk_id_is(bytes, 0, "RIFF") || !detail::chunk_id_is(bytes, 8, "WAVE"))
        throw FormatError("wav: missing RIFF/WAVE signature");

    detail::WavFormat fmt;
    bool have_fmt = false;
    std::size_t data_off = 0, data_len = 0;
    bool have_data = false;

    // Chunk scan. Each chunk is 8 bytes of header (id + payload size) plus the
    // payload, padded to an even boundary.
    std::size_t off = 12;
    while (off + 8 <= bytes.size()) {
        const std::size_t payload = detail::read_u32le(bytes, off + 4);
        const std::size_t body = off + 8;
        if (detail::chunk_id_is(bytes, off, "fmt ")) {
            if (payload < 16 || body + 16 > bytes.size())
                throw FormatError("wav: fmt chunk too small");
            fmt.audio_format = detail::read_u16le(bytes, body);
            fmt.channels = detail::read_u16le(bytes, body + 2);
            fmt.sample_rate = detail::read_u32le(bytes, body + 4);
            fmt.bits_per_sample = detail::read_u16le(bytes, body + 14);
            have_fmt = true;
        } else if (detail::chunk_id_is(bytes, off, "data")) {
            if (body + payload > bytes.size())
                throw TruncationError("wav: data chunk declares " + std::to_string(payload) +
                                      " bytes but only " + std::to_string(bytes.size() - body) +
                                      " remain");
            data_off = body;
            data_len = payload;
            have_data = true;
        }
        off = body + payload + (payload & 1);
    }

    if (!have_fmt) throw FormatError("wav: no fmt chunk");
    if (!have_data) throw FormatError("wav: no data chunk");
    if (fmt.sample_rate == 0) throw FormatError("wav: zero sample rate");
    if (fmt.channels != 1 && fmt.channels != 2)
        throw UnsupportedFormatError("wav: " + std::to_string(fmt.channels) +
                                     " channels (want mono or stereo)");

    std::size_t bytes_per_sample = 0;
    if (fmt.audio_format == 1) {
        if (fmt.bits_per_sample != 16)
            throw UnsupportedFormatError("wav: " + std::to_string(fmt.bits_per_sample) +
                                         "-bit PCM (want 16)");
        bytes_per_sample = 2;
    } else if (fmt.audio_format == 3) {
        if (fmt.bits_per_sample != 32)
            throw UnsupportedFormatError("wav: " + std::to_string(fmt.bits_per_sample) +
                                         "-bit float (want 32)");
        bytes_per_sample = 4;
    } else {
        throw UnsupportedFormatError("wav: format tag " + std::to_string(fmt.audio_format) +
                                     " (want 1 = PCM or 3 = IEEE float)");
    }

    const std::size_t frame_bytes = bytes_per_sample * fmt.channels;
    const std::size_t n_frames = data_len / frame_bytes;  // trailing partial frame ignored

    AudioClip clip;
    clip.sample_rate = static_cast<int>(fmt.sample_rate);
    clip.samples.resize(n_frames);
    for (std::size_t i = 0; i < n_frames; ++i) {
        double acc = 0.0;
        for (std::uint16_t c = 0; c < fmt.channels; ++c) {
            const std::size_t p = data_off + i * frame_bytes + c * bytes_per_sample;
            if (fmt.audio_format == 1) {
                const auto raw = static_cast<std::int16_t>(detail::read_u16le(bytes, p));
                acc += raw / 32768.0;
            } else {
                const std::uint32_t w = detail::read_u32le(bytes, p);
                float f;
                std::memcpy(&f, &w, sizeof f);
                double v = f;
                if (!std::isfinite(v)) v = 0.0;  // poisoned float payloads become silence
                acc += std::clamp(v, -1.0, 1.0);
            }
        }
        clip.samples[i] = std::clamp(acc / fmt.channels, -1.0, 1.0);
    }
    return clip;
}

inline AudioClip decode_wav_file(const std::filesystem::path& path) {
    AudioClip clip = decode_wav(read_binary_file(path));
    clip.source_path = path.string();
    return clip;
}

namespace detail {

// Kaiser window (beta 8.6) sampled into a table once; the resampler evaluates
// it millions of times and the Bessel call is far too slow to sit in that loop.
inline double kaiser_window(double u) {
    constexpr int kTableSize = 16384;
    static const std::vector<double> table = [] {
        constexpr double kBeta = 8.6;
        std::vector<double> t(kTableSize + 1);
        const double norm = std::cyl_bessel_i(0.0, kBeta);
        for (int i = 0; i <= kTableSize; ++i) {
            const double x = static_cast<double>(i) / kTableSize;  // in [0, 1]
            t[i] = std::cyl_bessel_i(0.0, kBeta * std::sqrt(1.0 - x * x)) / norm;
        }
        return t;
    }();
    const double a = std::abs(u);
    if (a >= 1.0) return 0.0;
    const double pos = a * kTableSize;
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return table[i] + frac * (table[i + 1] - table[i]);
}

inline double sinc(double x) {
    if (x == 0.0) return 1.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

}  // namespace detail

// Sample-rate conversion with a windowed-sinc kernel (Kaiser beta 8.6,
// half-width 32 output-rate zero crossings). When downsampling, the kernel is
// widened and its cutoff lowered by the rate ratio so it also acts as the
// anti-aliasing filter. Each output sample renormalizes by the local kernel
// sum, which keeps a constant input exactly constant near the edges too.
inline AudioClip resample(const AudioClip& clip, int target_rate) {
    if (clip.sample_rate <= 0) throw ParamError("resample: clip has no sample rate");
    if (target_rate <= 0) throw ParamError("resample: target rate must be positive");
    if (target_rate == clip.sample_rate) return clip;

    AudioClip out;
    out.sample_rate = target_rate;
    out.source_path = clip.source_path;

    const std::size_t in_len = clip.samples.size();
    const std::size_t out_len =
        static_cast<std::size_t>(in_len * static_cast<std::uint64_t>(target_rate) /
                                 static_cast<std::uint64_t>(clip.sample_rate));
    out.samples.resize(out_len);
    if (out_len == 0) return out;

    const double ratio = static_cast<double>(target_rate) / clip.sample_rate;
    const double cutoff = std::min(1.0, ratio);       // fraction of input Nyquist
    constexpr double kHalfWidthZeroCrossings = 32.0;  // at the cutoff rate
    const double half_width = kHalfWidthZeroCrossings / cutoff;  // in input samples

    for (std::size_t n = 0; n < out_len; ++n) {
        const double center = static_cast<double>(n) / ratio;  // position in input
        const auto lo = static_cast<std::int64_t>(std::ceil(center - half_width));
        const auto hi = static_cast<std::int64_t>(std::floor(center + half_width));
        double acc = 0.0, wsum = 0.0;
        for (std::int64_t k = lo; k <= hi; ++k) {
            const double d = (static_cast<double>(k) - center) * cutoff;
            const double w = detail::sinc(d) * detail::kaiser_window(d / kHalfWidthZeroCrossings);
            wsum += w;
            if (k >= 0 && k < static_cast<std::int64_t>(in_len))
                acc += w * clip.samples[static_cast<std::size_t>(k)];
        }
        out.samples[n] = std::clamp(wsum > 0.0 ? acc / wsum : 0.0, -1.0, 1.0);
    }
    return out;
}

// Truncates to at most max_seconds of audio. Clips already short enough come
// back untouched, so the operation is idempotent.
inline AudioClip clip_duration(const AudioClip& clip, double max_seconds) {
    if (!(max_seconds > 0.0)) throw ParamError("clip_duration: max_seconds must be positive");
    if (clip.sample_rate <= 0) throw ParamError("clip_duration: clip has no sample rate");
    const auto max_samples =
        static_cast<std::size_t>(std::floor(max_seconds * clip.sample_rate));
    if (clip.samples.size() <= max_samples) return clip;
    AudioClip out = clip;
    out.samples.resize(max_samples);
    return out;
}

namespace detail {

inline void append_u16le(std::vector<std::uint8_t>& b, std::uint16_t v) {
    b.push_back(static_cast<std::uint8_t>(v & 0xff));
    b.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void append_u32le(std::vector<std::uint8_t>& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

inline void append_wav_header(std::vector<std::uint8_t>& b, std::uint16_t format_tag,
                              std::uint16_t channels, std::uint32_t sample_rate,
                              std::uint16_t bits, std::uint32_t data_bytes) {
    const std::uint16_t block_align = static_cast<std::uint16_t>(channels * bits / 8);
    b.insert(b.end(), {'R', 'I', 'F', 'F'});
    append_u32le(b, 36 + data_bytes);
    b.insert(b.end(), {'W', 'A', 'V', 'E'});
    b.insert(b.end(), {'f', 'm', 't', ' '});
    append_u32le(b, 16);
    append_u16le(b, format_tag);
    append_u16le(b, channels);
    append_u32le(b, sample_rate);
    append_u32le(b, sample_rate * block_align);
    append_u16le(b, block_align);
    append_u16le(b, bits);
    b.insert(b.end(), {'d', 'a', 't', 'a'});
    append_u32le(b, data_bytes);
}

}  // namespace detail

// Serializes interleaved samples as a canonical 16-bit PCM WAVE file.
inline std::vector<std::uint8_t> encode_wav_pcm16(std::span<const double> interleaved,
                                                  int sample_rate, int channels = 1) {
    if (sample_rate <= 0) throw ParamError("encode_wav_pcm16: sample rate must be positive");
    if (channels != 1 && channels != 2) throw ParamError("encode_wav_pcm16: want 1 or 2 channels");
    if (interleaved.size() % channels != 0)
        throw ParamError("encode_wav_pcm16: sample count not a multiple of channel count");
    std::vector<std::uint8_t> b;
    const auto data_bytes = static_cast<std::uint32_t>(interleaved.size() * 2);
    b.reserve(44 + data_bytes);
    detail::append_wav_header(b, 1, static_cast<std::uint16_t>(channels),
                              static_cast<std::uint32_t>(sample_rate), 16, data_bytes);
    for (const double v : interleaved) {
        const double c = std::clamp(v, -1.0, 1.0);
        const auto q = static_cast<std::int32_t>(
            std::clamp(std::llround(c * 32768.0), -32768LL, 32767LL));
        detail::append_u16le(b, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    }
    return b;
}

// Serializes interleaved samples as a 32-bit IEEE-float WAVE file.
inline std::vector<std::uint8_t> encode_wav_float32(std::span<const double> interleaved,
                                                    int sample_rate, int channels = 1) {
    if (sample_rate <= 0) throw ParamError("encode_wav_float32: sample rate must be positive");
    if (channels != 1 && channels != 2)
        throw ParamError("encode_wav_float32: want 1 or 2 channels");
    if (interleaved.size() % channels != 0)
        throw ParamError("encode_wav_float32: sample count not a multiple of channel count");
    std::vector<std::uint8_t> b;
    const auto data_bytes = static_cast<std::uint32_t>(interleaved.size() * 4);
    b.reserve(44 + data_bytes);
    detail::append_wav_header(b, 3, static_cast<std::uint16_t>(channels),
                              static_cast<std::uint32_t>(sample_rate), 32, data_bytes);
    for (const double v : interleaved) {
        const auto f = static_cast<float>(v);
        std::uint32_t w;
        std::memcpy(&w, &f, sizeof w);
        detail::append_u32le(b, w);
    }
    return b;
}

}  // namespace mimicaudit

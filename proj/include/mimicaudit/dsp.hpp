#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "mimicaudit/audio_io.hpp"
#include "mimicaudit/errors.hpp"

namespace mimicaudit {

// Short-time analysis geometry. The window is a periodic Hann; with centered
// framing, frame t is centered on sample t * hop_length and the signal is
// reflect-padded at both ends.
struct StftParams {
    std::size_t frame_length = 2048;  // must be a power of two
    std::size_t hop_length = 512;     // in (0, frame_length]
    bool centered = true;

    void validate() const;
};

namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace detail

inline void StftParams::validate() const {
    if (!detail::is_pow2(frame_length))
        throw ParamError("stft: frame_length must be a power of two, got " +
                         std::to_string(frame_length));
    if (hop_length == 0 || hop_length > frame_length)
        throw ParamError("stft: hop_length must be in (0, frame_length]");
}

// ------------------------------------------------------------------- fft ---

// Radix-2 decimation-in-time FFT with precomputed bit-reversal and twiddle
// tables. Build once per transform size, reuse across frames.
class FftPlan {
public:
    explicit FftPlan(std::size_t n) : n_(n) {
        if (!detail::is_pow2(n)) throw ParamError("fft: size must be a power of two");
        bitrev_.resize(n);
        std::size_t bits = 0;
        while ((std::size_t{1} << bits) < n) ++bits;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
            bitrev_[i] = r;
        }
        twiddles_.resize(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k)
            twiddles_[k] = std::polar(1.0, -2.0 * std::numbers::pi *
                                               static_cast<double>(k) / static_cast<double>(n));
    }

    std::size_t size() const { return n_; }

    // In-place forward transform of n complex points.
    void transform(std::vector<std::complex<double>>& a) const {
        if (a.size() != n_) throw ParamError("fft: buffer size does not match plan");
        for (std::size_t i = 0; i < n_; ++i)
            if (bitrev_[i] > i) std::swap(a[i], a[bitrev_[i]]);
        for (std::size_t len = 2; len <= n_; len <<= 1) {
            const std::size_t stride = n_ / len;
            for (std::size_t blk = 0; blk < n_; blk += len) {
                for (std::size_t j = 0; j < len / 2; ++j) {
                    const std::complex<double> t = twiddles_[j * stride] * a[blk + j + len / 2];
                    const std::complex<double> u = a[blk + j];
                    a[blk + j] = u + t;
                    a[blk + j + len / 2] = u - t;
                }
            }
        }
    }

    // Forward transform of a real signal; returns bins 0..n/2 (the
    // non-redundant half of the Hermitian spectrum).
    std::vector<std::complex<double>> real_transform(std::span<const double> x) const {
        if (x.size() != n_) throw ParamError("fft: input size does not match plan");
        std::vector<std::complex<double>> a(x.begin(), x.end());
        transform(a);
        a.resize(n_ / 2 + 1);
        return a;
    }

private:
    std::size_t n_;
    std::vector<std::complex<double>> twiddles_;
    std::vector<std::size_t> bitrev_;
};

// One-shot convenience wrapper; plans per call.
inline std::vector<std::complex<double>> fft_real(std::span<const double> x) {
    return FftPlan(x.size()).real_transform(x);
}

// --------------------------------------------------------------- framing ---

namespace detail {

// Reflection without repeating the edge sample: ..., x2, x1, | x0, x1, ...,
// x[n-1], | x[n-2], x[n-3], ...
inline std::size_t reflect_index(std::int64_t i, std::size_t n) {
    if (n == 1) return 0;
    const std::int64_t period = 2 * (static_cast<std::int64_t>(n) - 1);
    std::int64_t j = i % period;
    if (j < 0) j += period;
    if (j >= static_cast<std::int64_t>(n)) j = period - j;
    return static_cast<std::size_t>(j);
}

}  // namespace detail

inline std::size_t frame_count(std::size_t n_samples, const StftParams& p) {
    if (p.centered) return n_samples == 0 ? 0 : 1 + n_samples / p.hop_length;
    return n_samples < p.frame_length ? 0 : 1 + (n_samples - p.frame_length) / p.hop_length;
}

// Calls fn(frame) for each analysis frame, unwindowed. Frames are gathered
// into a scratch buffer that is reused across calls.
template <typename F>
void for_each_frame(std::span<const double> x, const StftParams& p, F&& fn) {
    p.validate();
    const std::size_t n_frames = frame_count(x.size(), p);
    if (n_frames == 0) throw EmptyInputError("framing: no complete frame in input");
    std::vector<double> frame(p.frame_length);
    for (std::size_t t = 0; t < n_frames; ++t) {
        const std::int64_t start =
            static_cast<std::int64_t>(t * p.hop_length) -
            (p.centered ? static_cast<std::int64_t>(p.frame_length / 2) : 0);
        for (std::size_t i = 0; i < p.frame_length; ++i) {
            const std::int64_t src = start + static_cast<std::int64_t>(i);
            frame[i] = (src >= 0 && src < static_cast<std::int64_t>(x.size()))
                           ? x[static_cast<std::size_t>(src)]
                           : x[detail::reflect_index(src, x.size())];
        }
        fn(std::span<const double>(frame));
    }
}

// ----------------------------------------------------------- spectrogram ---

// Power spectrogram, frame-major storage.
struct Spectrogram {
    std::vector<double> power;     // power[t * n_bins + k]
    std::vector<double> bin_freqs; // Hz, one per bin
    std::size_t n_bins = 0;
    std::size_t n_frames = 0;
    int sample_rate = 0;
    StftParams params;

    double at(std::size_t bin, std::size_t t) const { return power[t * n_bins + bin]; }
    std::span<const double> frame(std::size_t t) const {
        return std::span<const double>(power).subspan(t * n_bins, n_bins);
    }
};

inline std::vector<double> hann_window(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                    static_cast<double>(n));
    return w;
}

inline Spectrogram power_spectrogram(const AudioClip& clip, const StftParams& p = {}) {
    p.validate();
    if (clip.sample_rate <= 0) throw ParamError("spectrogram: clip has no sample rate");
    if (clip.samples.empty()) throw EmptyInputError("spectrogram: empty clip");

    Spectrogram s;
    s.params = p;
    s.sample_rate = clip.sample_rate;
    s.n_bins = p.frame_length / 2 + 1;
    s.n_frames = frame_count(clip.samples.size(), p);
    s.power.reserve(s.n_bins * s.n_frames);
    s.bin_freqs.resize(s.n_bins);
    for (std::size_t k = 0; k < s.n_bins; ++k)
        s.bin_freqs[k] = static_cast<double>(k) * clip.sample_rate /
                         static_cast<double>(p.frame_length);

    const std::vector<double> window = hann_window(p.frame_length);
    const FftPlan plan(p.frame_length);
    std::vector<double> buf(p.frame_length);
    for_each_frame(clip.samples, p, [&](std::span<const double> frame) {
        for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = frame[i] * window[i];
        const auto spectrum = plan.real_transform(buf);
        for (const auto& c : spectrum) s.power.push_back(std::norm(c));
    });
    return s;
}

// ------------------------------------------------------------- mel scale ---

inline double hz_to_mel(double hz) {
    if (hz < 0.0) throw ParamError("hz_to_mel: negative frequency");
    return 2595.0 * std::log10(1.0 + hz / 700.0);
}

inline double mel_to_hz(double mel) {
    if (mel < 0.0) throw ParamError("mel_to_hz: negative mel value");
    return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

// 10 * log10(power), floored at 1e-10 (== -100 dB for silence).
inline double power_to_db(double power) {
    return 10.0 * std::log10(std::max(power, 1e-10));
}

// Triangular mel filterbank over FFT power bins. Filter centers are uniform on
// the mel axis; each triangle is normalized by 2 / its Hz bandwidth so wider
// high-frequency filters don't dominate.
class MelFilterbank {
public:
    MelFilterbank(std::size_t n_mels, std::size_t n_bins, int sample_rate, double f_min = 0.0,
                  double f_max = 0.0) {
        if (n_mels == 0) throw ParamError("mel: need at least one filter");
        if (n_bins < 2) throw ParamError("mel: need at least two bins");
        if (sample_rate <= 0) throw ParamError("mel: sample rate must be positive");
        const double nyquist = sample_rate / 2.0;
        if (f_max <= 0.0) f_max = nyquist;
        if (f_min < 0.0 || f_min >= f_max || f_max > nyquist + 1e-9)
            throw ParamError("mel: need 0 <= f_min < f_max <= nyquist");

        n_bins_ = n_bins;
        const double bin_hz = nyquist / static_cast<double>(n_bins - 1);

        // n_mels + 2 edges, uniform in mel; triangle m spans edges m..m+2 with
        // its apex at edge m+1.
        const double mel_lo = hz_to_mel(f_min), mel_hi = hz_to_mel(f_max);
        std::vector<double> edge_hz(n_mels + 2);
        for (std::size_t i = 0; i < edge_hz.size(); ++i)
            edge_hz[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                                static_cast<double>(n_mels + 1));

        bands_.resize(n_mels);
        for (std::size_t m = 0; m < n_mels; ++m) {
            const double lo = edge_hz[m], mid = edge_hz[m + 1], hi = edge_hz[m + 2];
            const double norm = 2.0 / (hi - lo);
            Band& band = bands_[m];
            band.peak_hz = mid;
            band.first = n_bins;  // set on first supported bin
            for (std::size_t k = 0; k < n_bins; ++k) {
                const double f = static_cast<double>(k) * bin_hz;
                const double up = (f - lo) / (mid - lo);
                const double down = (hi - f) / (hi - mid);
                const double w = std::max(0.0, std::min(up, down)) * norm;
                if (w > 0.0) {
                    if (band.first == n_bins) band.first = k;
                    band.weights.push_back(w);
                } else if (band.first != n_bins) {
                    break;  // support is contiguous; past it now
                }
            }
        }
    }

    std::size_t n_mels() const { return bands_.size(); }
    std::size_t n_bins() const { return n_bins_; }
    double peak_hz(std::size_t m) const { return bands_[m].peak_hz; }

    double weight(std::size_t m, std::size_t k) const {
        const Band& b = bands_[m];
        if (k < b.first || k >= b.first + b.weights.size()) return 0.0;
        return b.weights[k - b.first];
    }

    // out[m] = sum_k weight(m, k) * power_frame[k]
    void apply(std::span<const double> power_frame, std::span<double> out) const {
        if (power_frame.size() != n_bins_)
            throw ParamError("mel: frame has " + std::to_string(power_frame.size()) +
                             " bins, filterbank expects " + std::to_string(n_bins_));
        if (out.size() != bands_.size()) throw ParamError("mel: output size mismatch");
        for (std::size_t m = 0; m < bands_.size(); ++m) {
            const Band& b = bands_[m];
            double acc = 0.0;
            for (std::size_t i = 0; i < b.weights.size(); ++i)
                acc += b.weights[i] * power_frame[b.first + i];
            out[m] = acc;
        }
    }

private:
    struct Band {
        std::size_t first = 0;
        std::vector<double> weights;
        double peak_hz = 0.0;
    };
    std::vector<Band> bands_;
    std::size_t n_bins_ = 0;
};

// ------------------------------------------------------------------- dct ---

// Orthonormal DCT-II. Power-of-two lengths go through a length-N FFT of the
// even/odd-permuted sequence; anything else falls back to the direct cosine
// sum. Both routes produce the same transform (the tests cross-check them).
inline std::vector<double> dct2_ortho(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n == 0) throw ParamError("dct: empty input");
    std::vector<double> c(n);
    const double s0 = std::sqrt(1.0 / static_cast<double>(n));
    const double sk = std::sqrt(2.0 / static_cast<double>(n));

    if (n >= 2 && detail::is_pow2(n)) {
        // y = [x0, x2, x4, ..., x5, x3, x1]
        std::vector<std::complex<double>> y(n);
        for (std::size_t i = 0; i * 2 < n; ++i) y[i] = x[2 * i];
        for (std::size_t i = 0; 2 * i + 1 < n; ++i) y[n - 1 - i] = x[2 * i + 1];
        FftPlan(n).transform(y);
        for (std::size_t k = 0; k < n; ++k) {
            const auto rot = std::polar(1.0, -std::numbers::pi * static_cast<double>(k) /
                                                 (2.0 * static_cast<double>(n)));
            c[k] = (k == 0 ? s0 : sk) * (rot * y[k]).real();
        }
        return c;
    }

    for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            acc += x[i] * std::cos(std::numbers::pi * (static_cast<double>(i) + 0.5) *
                                   static_cast<double>(k) / static_cast<double>(n));
        c[k] = (k == 0 ? s0 : sk) * acc;
    }
    return c;
}

}  // namespace mimicaudit

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "mimicaudit/audio_io.hpp"
#include "mimicaudit/dsp.hpp"
#include "mimicaudit/errors.hpp"

namespace mimicaudit {

inline constexpr int kFeatureCount = 26;
inline constexpr int kFeatureSchemaVersion = 1;
inline constexpr std::size_t kNumMels = 128;
inline constexpr std::size_t kNumMfcc = 20;
inline constexpr int kPipelineSampleRate = 22050;
inline constexpr double kDefaultMaxSeconds = 20.0;

// One clip summarized as 26 numbers, in this frozen order:
//   [0] zcr  [1] rmse  [2] centroid  [3] bandwidth  [4] rolloff  [5] chroma
//   [6..25] mfcc01..mfcc20
struct FeatureVector {
    std::array<double, kFeatureCount> values{};
    int schema_version = kFeatureSchemaVersion;
};

inline const std::array<std::string, kFeatureCount>& feature_names() {
    static const std::array<std::string, kFeatureCount> names = [] {
        std::array<std::string, kFeatureCount> n;
        n[0] = "zcr";
        n[1] = "rmse";
        n[2] = "centroid";
        n[3] = "bandwidth";
        n[4] = "rolloff";
        n[5] = "chroma";
        for (std::size_t i = 0; i < kNumMfcc; ++i) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "mfcc%02zu", i + 1);
            n[6 + i] = buf;
        }
        return n;
    }();
    return names;
}

// ------------------------------------------------------- temporal features ---

// Mean per-frame rate of adjacent sign changes. Zero counts as positive, so a
// touch of the zero line without a crossing is not a crossing.
inline double zero_crossing_rate(std::span<const double> samples, const StftParams& p = {}) {
    double acc = 0.0;
    std::size_t n_frames = 0;
    for_each_frame(samples, p, [&](std::span<const double> frame) {
        std::size_t crossings = 0;
        for (std::size_t i = 1; i < frame.size(); ++i) {
            const bool a = frame[i - 1] >= 0.0, b = frame[i] >= 0.0;
            if (a != b) ++crossings;
        }
        acc += static_cast<double>(crossings) / static_cast<double>(frame.size());
        ++n_frames;
    });
    return acc / static_cast<double>(n_frames);
}

// Mean per-frame root-mean-square amplitude.
inline double rmse(std::span<const double> samples, const StftParams& p = {}) {
    double acc = 0.0;
    std::size_t n_frames = 0;
    for_each_frame(samples, p, [&](std::span<const double> frame) {
        double sq = 0.0;
        for (const double v : frame) sq += v * v;
        acc += std::sqrt(sq / static_cast<double>(frame.size()));
        ++n_frames;
    });
    return acc / static_cast<double>(n_frames);
}

// ------------------------------------------------------- spectral features ---
// All three are magnitude-weighted (sqrt of the power bins) and averaged over
// frames; a frame with no energy contributes 0.

inline double spectral_centroid(const Spectrogram& s) {
    if (s.n_frames == 0) throw EmptyInputError("centroid: spectrogram has no frames");
    double acc = 0.0;
    for (std::size_t t = 0; t < s.n_frames; ++t) {
        double msum = 0.0, fsum = 0.0;
        for (std::size_t k = 0; k < s.n_bins; ++k) {
            const double m = std::sqrt(s.at(k, t));
            msum += m;
            fsum += s.bin_freqs[k] * m;
        }
        acc += msum > 0.0 ? fsum / msum : 0.0;
    }
    return acc / static_cast<double>(s.n_frames);
}

// Magnitude-weighted standard deviation of frequency about the per-frame
// centroid.
inline double spectral_bandwidth(const Spectrogram& s) {
    if (s.n_frames == 0) throw EmptyInputError("bandwidth: spectrogram has no frames");
    double acc = 0.0;
    for (std::size_t t = 0; t < s.n_frames; ++t) {
        double msum = 0.0, fsum = 0.0;
        for (std::size_t k = 0; k < s.n_bins; ++k) {
            const double m = std::sqrt(s.at(k, t));
            msum += m;
            fsum += s.bin_freqs[k] * m;
        }
        if (msum <= 0.0) continue;  // contributes 0
        const double centroid = fsum / msum;
        double var = 0.0;
        for (std::size_t k = 0; k < s.n_bins; ++k) {
            const double d = s.bin_freqs[k] - centroid;
            var += d * d * std::sqrt(s.at(k, t));
        }
        acc += std::sqrt(var / msum);
    }
    return acc / static_cast<double>(s.n_frames);
}

// Frequency below which `fraction` of the per-frame magnitude lies; mean over
// frames. fraction = 1 lands on the highest bin with any energy.
inline double spectral_rolloff(const Spectrogram& s, double fraction = 0.85) {
    if (!(fraction > 0.0) || fraction > 1.0)
        throw ParamError("rolloff: fraction must be in (0, 1]");
    if (s.n_frames == 0) throw EmptyInputError("rolloff: spectrogram has no frames");
    double acc = 0.0;
    std::vector<double> mag(s.n_bins);
    for (std::size_t t = 0; t < s.n_frames; ++t) {
        double total = 0.0;
        for (std::size_t k = 0; k < s.n_bins; ++k) {
            mag[k] = std::sqrt(s.at(k, t));
            total += mag[k];
        }
        if (total <= 0.0) continue;
        const double target = fraction * total;
        double running = 0.0;
        for (std::size_t k = 0; k < s.n_bins; ++k) {
            running += mag[k];
            if (running >= target) {
                acc += s.bin_freqs[k];
                break;
            }
        }
    }
    return acc / static_cast<double>(s.n_frames);
}

// ----------------------------------------------------------------- chroma ---

namespace detail {

// Pitch class of a frequency, 0 = C .. 11 = B, via round-to-nearest semitone
// distance from A4 = 440 Hz (pitch class 9).
inline int pitch_class(double hz) {
    const auto semitones = static_cast<long long>(std::llround(12.0 * std::log2(hz / 440.0)));
    return static_cast<int>((((semitones + 9) % 12) + 12) % 12);
}

}  // namespace detail

// Per-frame chroma: power folded onto 12 pitch classes, normalized by the
// frame's maximum class energy (all-zero frames stay all zero).
inline std::vector<std::array<double, 12>> chroma_profile(const Spectrogram& s) {
    if (s.n_frames == 0) throw EmptyInputError("chroma: spectrogram has no frames");
    std::vector<std::array<double, 12>> profiles(s.n_frames);
    for (std::size_t t = 0; t < s.n_frames; ++t) {
        std::array<double, 12> e{};
        for (std::size_t k = 0; k < s.n_bins; ++k) {
            if (s.bin_freqs[k] <= 0.0) continue;  // DC has no pitch
            e[detail::pitch_class(s.bin_freqs[k])] += s.at(k, t);
        }
        double peak = 0.0;
        for (const double v : e) peak = std::max(peak, v);
        if (peak > 0.0)
            for (double& v : e) v /= peak;
        profiles[t] = e;
    }
    return profiles;
}

// Grand mean of the normalized chroma profile over classes and frames.
inline double chroma_mean(const Spectrogram& s) {
    const auto profiles = chroma_profile(s);
    double acc = 0.0;
    for (const auto& p : profiles)
        for (const double v : p) acc += v;
    return acc / (12.0 * static_cast<double>(profiles.size()));
}

// ------------------------------------------------------------------- mfcc ---

// Cepstral coefficients: mel energies -> dB -> orthonormal DCT-II, first
// n_coeffs terms, averaged over frames.
inline std::vector<double> mfcc(const Spectrogram& s, const MelFilterbank& fb,
                                std::size_t n_coeffs = kNumMfcc) {
    if (fb.n_bins() != s.n_bins)
        throw ParamError("mfcc: filterbank expects " + std::to_string(fb.n_bins()) +
                         " bins, spectrogram has " + std::to_string(s.n_bins));
    if (n_coeffs == 0 || n_coeffs > fb.n_mels())
        throw ParamError("mfcc: n_coeffs must be in [1, n_mels]");
    if (s.n_frames == 0) throw EmptyInputError("mfcc: spectrogram has no frames");

    std::vector<double> acc(n_coeffs, 0.0);
    std::vector<double> mel(fb.n_mels());
    for (std::size_t t = 0; t < s.n_frames; ++t) {
        fb.apply(s.frame(t), mel);
        for (double& v : mel) v = power_to_db(v);
        const auto cep = dct2_ortho(mel);
        for (std::size_t i = 0; i < n_coeffs; ++i) acc[i] += cep[i];
    }
    for (double& v : acc) v /= static_cast<double>(s.n_frames);
    return acc;
}

// ---------------------------------------------------------------- summary ---

// The full 26-dimensional clip summary. The clip should already be at the
// pipeline rate (the extractor itself is rate-agnostic; bin frequencies follow
// clip.sample_rate).
inline FeatureVector extract_features(const AudioClip& clip, const StftParams& p = {}) {
    const Spectrogram sgram = power_spectrogram(clip, p);
    const MelFilterbank fb(kNumMels, sgram.n_bins, clip.sample_rate);

    FeatureVector fv;
    fv.values[0] = zero_crossing_rate(clip.samples, p);
    fv.values[1] = rmse(clip.samples, p);
    fv.values[2] = spectral_centroid(sgram);
    fv.values[3] = spectral_bandwidth(sgram);
    fv.values[4] = spectral_rolloff(sgram);
    fv.values[5] = chroma_mean(sgram);
    const auto cep = mfcc(sgram, fb);
    for (std::size_t i = 0; i < kNumMfcc; ++i) fv.values[6 + i] = cep[i];
    return fv;
}

}  // namespace mimicaudit

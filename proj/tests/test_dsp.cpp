#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "mimicaudit/dsp.hpp"
#include "support/oracles.hpp"
#include "support/wav_fixtures.hpp"

using namespace mimicaudit;
using Catch::Approx;

// ===========================================================================
// mel scale
// ===========================================================================

TEST_CASE("mel conversion hits its anchor points", "[dsp][mel]") {
    CHECK(hz_to_mel(0.0) == 0.0);
    CHECK(mel_to_hz(0.0) == 0.0);
    // 700 Hz doubles the log argument: 2595 * log10(2)
    CHECK(hz_to_mel(700.0) == Approx(2595.0 * std::log10(2.0)).epsilon(1e-12));
    CHECK(hz_to_mel(700.0) == Approx(781.17).margin(0.01));
    CHECK(mel_to_hz(2595.0 * std::log10(2.0)) == Approx(700.0).margin(1e-9));
}

TEST_CASE("mel conversion round-trips and is monotone", "[dsp][mel]") {
    for (const double hz : {1.0, 100.0, 440.0, 1000.0, 3000.0, 8000.0, 11025.0})
        CHECK(mel_to_hz(hz_to_mel(hz)) == Approx(hz).epsilon(1e-9));

    Rng rng(99);
    for (int i = 0; i < 200; ++i) {
        const double a = 11025.0 * rng.next_double();
        const double b = 11025.0 * rng.next_double();
        if (a < b)
            CHECK(hz_to_mel(a) < hz_to_mel(b));
        else if (a > b)
            CHECK(hz_to_mel(a) > hz_to_mel(b));
    }
}

TEST_CASE("mel conversion rejects negative inputs", "[dsp][mel]") {
    CHECK_THROWS_AS(hz_to_mel(-1.0), ParamError);
    CHECK_THROWS_AS(mel_to_hz(-1.0), ParamError);
}

TEST_CASE("power_to_db floors at -100 dB", "[dsp]") {
    CHECK(power_to_db(1.0) == 0.0);
    CHECK(power_to_db(100.0) == Approx(20.0));
    CHECK(power_to_db(0.0) == Approx(-100.0));
    CHECK(power_to_db(1e-30) == Approx(-100.0));
}

// ===========================================================================
// fft
// ===========================================================================

TEST_CASE("fft of an impulse is flat", "[dsp][fft]") {
    std::vector<double> x(8, 0.0);
    x[0] = 1.0;
    const auto spectrum = fft_real(x);
    REQUIRE(spectrum.size() == 5);
    for (const auto& c : spectrum) {
        CHECK(c.real() == Approx(1.0).margin(1e-12));
        CHECK(c.imag() == Approx(0.0).margin(1e-12));
    }
}

TEST_CASE("fft of a constant concentrates in the DC bin", "[dsp][fft]") {
    const std::vector<double> x(4, 1.0);
    const auto spectrum = fft_real(x);
    REQUIRE(spectrum.size() == 3);
    CHECK(spectrum[0].real() == Approx(4.0));
    CHECK(std::abs(spectrum[1]) == Approx(0.0).margin(1e-12));
    CHECK(std::abs(spectrum[2]) == Approx(0.0).margin(1e-12));
}

TEST_CASE("fft matches the direct transform on random input", "[dsp][fft]") {
    for (const std::size_t n : {16UL, 256UL, 2048UL}) {
        const auto x = fixtures::white_noise(n, 1.0, 1000 + n);
        const auto fast = fft_real(x);
        const auto slow = oracles::naive_dft(x);
        for (std::size_t k = 0; k < fast.size(); ++k) {
            CHECK(fast[k].real() == Approx(slow[k].real()).margin(1e-8));
            CHECK(fast[k].imag() == Approx(slow[k].imag()).margin(1e-8));
        }
    }
}

TEST_CASE("fft is linear", "[dsp][fft]") {
    const std::size_t n = 256;
    const auto a = fixtures::white_noise(n, 1.0, 21);
    const auto b = fixtures::white_noise(n, 1.0, 22);
    std::vector<double> mix(n);
    for (std::size_t i = 0; i < n; ++i) mix[i] = 2.0 * a[i] - 0.5 * b[i];

    const auto fa = fft_real(a), fb = fft_real(b), fmix = fft_real(mix);
    for (std::size_t k = 0; k < fmix.size(); ++k) {
        const auto expected = 2.0 * fa[k] - 0.5 * fb[k];
        CHECK(std::abs(fmix[k] - expected) < 1e-9);
    }
}

TEST_CASE("fft satisfies Parseval's identity", "[dsp][fft]") {
    const std::size_t n = 1024;
    const auto x = fixtures::white_noise(n, 0.7, 5);
    double time_energy = 0.0;
    for (const double v : x) time_energy += v * v;

    const auto spectrum = fft_real(x);
    double freq_energy = std::norm(spectrum.front()) + std::norm(spectrum.back());
    for (std::size_t k = 1; k + 1 < spectrum.size(); ++k) freq_energy += 2.0 * std::norm(spectrum[k]);
    CHECK(freq_energy / static_cast<double>(n) == Approx(time_energy).epsilon(1e-10));
}

TEST_CASE("fft rejects non-power-of-two sizes", "[dsp][fft]") {
    CHECK_THROWS_AS(fft_real(std::vector<double>(3, 0.0)), ParamError);
    CHECK_THROWS_AS(fft_real(std::vector<double>{}), ParamError);
    CHECK_THROWS_AS(FftPlan(12), ParamError);
}

// ===========================================================================
// spectrogram
// ===========================================================================

TEST_CASE("stft parameters are validated", "[dsp][stft]") {
    CHECK_THROWS_AS((StftParams{1000, 512, true}.validate()), ParamError);
    CHECK_THROWS_AS((StftParams{2048, 0, true}.validate()), ParamError);
    CHECK_THROWS_AS((StftParams{2048, 4096, true}.validate()), ParamError);
    CHECK_NOTHROW(StftParams{}.validate());
}

TEST_CASE("centered frame count is 1 + floor(len / hop)", "[dsp][stft]") {
    const StftParams p;
    CHECK(frame_count(1, p) == 1);
    CHECK(frame_count(511, p) == 1);
    CHECK(frame_count(512, p) == 2);
    CHECK(frame_count(22050, p) == 1 + 22050 / 512);

    AudioClip clip;
    clip.sample_rate = 22050;
    clip.samples = fixtures::white_noise(10000, 0.5, 17);
    const Spectrogram s = power_spectrogram(clip);
    CHECK(s.n_frames == 1 + 10000 / 512);
    CHECK(s.n_bins == 1025);
    CHECK(s.power.size() == s.n_frames * s.n_bins);
}

TEST_CASE("uncentered framing needs one full frame", "[dsp][stft]") {
    const StftParams p{2048, 512, false};
    CHECK(frame_count(2047, p) == 0);
    CHECK(frame_count(2048, p) == 1);
    CHECK(frame_count(2048 + 512, p) == 2);

    AudioClip clip;
    clip.sample_rate = 22050;
    clip.samples.resize(100, 0.1);
    CHECK_THROWS_AS(power_spectrogram(clip, p), EmptyInputError);
}

TEST_CASE("spectrogram of a 1 kHz tone peaks at the 1 kHz bin", "[dsp][stft]") {
    AudioClip clip;
    clip.sample_rate = 22050;
    clip.samples = fixtures::sine(1000.0, 22050, 1.0, 0.5);
    const Spectrogram s = power_spectrogram(clip);

    // nearest bin to 1000 Hz: round(1000 * 2048 / 22050) = 93
    for (std::size_t t = 0; t < s.n_frames; ++t) {
        std::size_t peak = 0;
        for (std::size_t k = 0; k < s.n_bins; ++k)
            if (s.at(k, t) > s.at(peak, t)) peak = k;
        const std::size_t center = t * 512;
        if (center < 1024 || center + 1024 > clip.samples.size()) {
            // boundary frames see reflected padding, which smears the peak
            // by up to one bin either way
            CHECK(peak >= 92);
            CHECK(peak <= 94);
        } else {
            CHECK(peak == 93);
        }
    }
    CHECK(s.bin_freqs[93] == Approx(93.0 * 22050.0 / 2048.0));
}

TEST_CASE("spectrogram of silence is all zero", "[dsp][stft]") {
    AudioClip clip;
    clip.sample_rate = 22050;
    clip.samples.assign(5000, 0.0);
    const Spectrogram s = power_spectrogram(clip);
    for (const double p : s.power) CHECK(p == 0.0);
}

TEST_CASE("spectrogram rejects an empty clip", "[dsp][stft]") {
    AudioClip clip;
    clip.sample_rate = 22050;
    CHECK_THROWS_AS(power_spectrogram(clip), EmptyInputError);
}

TEST_CASE("spectrogram power agrees with a direct windowed DFT", "[dsp][stft]") {
    AudioClip clip;
    clip.sample_rate = 22050;
    clip.samples = fixtures::white_noise(4000, 0.5, 23);
    const StftParams p;
    const Spectrogram s = power_spectrogram(clip, p);

    // recompute frame 3 by hand: reflect framing + periodic Hann + naive DFT
    const std::size_t t = 3;
    std::vector<double> frame(p.frame_length);
    const long long start = static_cast<long long>(t * p.hop_length) -
                            static_cast<long long>(p.frame_length / 2);
    for (std::size_t i = 0; i < p.frame_length; ++i) {
        const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                              static_cast<double>(p.frame_length));
        frame[i] = oracles::reflect_at(clip.samples, start + static_cast<long long>(i)) * w;
    }
    const auto slow = oracles::naive_dft(frame);
    for (std::size_t k = 0; k < s.n_bins; ++k)
        CHECK(s.at(k, t) == Approx(std::norm(slow[k])).margin(1e-8));
}

// ===========================================================================
// mel filterbank
// ===========================================================================

TEST_CASE("filterbank has the documented shape and positive rows", "[dsp][mel]") {
    const MelFilterbank fb(128, 1025, 22050);
    REQUIRE(fb.n_mels() == 128);
    REQUIRE(fb.n_bins() == 1025);
    for (std::size_t m = 0; m < fb.n_mels(); ++m) {
        double row_sum = 0.0;
        for (std::size_t k = 0; k < fb.n_bins(); ++k) row_sum += fb.weight(m, k);
        CHECK(row_sum > 0.0);
    }
}

TEST_CASE("filter peaks are uniform on the mel axis", "[dsp][mel]") {
    const MelFilterbank fb(128, 1025, 22050);
    const double mel_step = hz_to_mel(11025.0) / 129.0;
    for (std::size_t m = 0; m < fb.n_mels(); ++m) {
        CHECK(hz_to_mel(fb.peak_hz(m)) ==
              Approx(mel_step * static_cast<double>(m + 1)).margin(1e-6));
        if (m > 0) CHECK(fb.peak_hz(m) > fb.peak_hz(m - 1));
    }
}

TEST_CASE("a flat spectrum excites every filter", "[dsp][mel]") {
    const MelFilterbank fb(128, 1025, 22050);
    const std::vector<double> flat(1025, 1.0);
    std::vector<double> out(128);
    fb.apply(flat, out);
    for (const double v : out) CHECK(v > 0.0);
}

TEST_CASE("filterbank triangles match the edge formula", "[dsp][mel]") {
    const std::size_t n_mels = 16, n_bins = 257;
    const int rate = 8000;
    const MelFilterbank fb(n_mels, n_bins, rate);

    const double mel_hi = hz_to_mel(4000.0);
    std::vector<double> edges(n_mels + 2);
    for (std::size_t i = 0; i < edges.size(); ++i)
        edges[i] = mel_to_hz(mel_hi * static_cast<double>(i) / static_cast<double>(n_mels + 1));

    for (std::size_t m = 0; m < n_mels; ++m)
        for (std::size_t k = 0; k < n_bins; ++k) {
            const double f = static_cast<double>(k) * rate / (2.0 * (n_bins - 1));
            const double up = (f - edges[m]) / (edges[m + 1] - edges[m]);
            const double down = (edges[m + 2] - f) / (edges[m + 2] - edges[m + 1]);
            const double expected =
                std::max(0.0, std::min(up, down)) * 2.0 / (edges[m + 2] - edges[m]);
            CHECK(fb.weight(m, k) == Approx(expected).margin(1e-12));
        }
}

TEST_CASE("filterbank validates its parameters", "[dsp][mel]") {
    CHECK_THROWS_AS(MelFilterbank(0, 1025, 22050), ParamError);
    CHECK_THROWS_AS(MelFilterbank(128, 1, 22050), ParamError);
    CHECK_THROWS_AS(MelFilterbank(128, 1025, 0), ParamError);
    CHECK_THROWS_AS(MelFilterbank(128, 1025, 22050, -5.0), ParamError);
    CHECK_THROWS_AS(MelFilterbank(128, 1025, 22050, 500.0, 400.0), ParamError);
    CHECK_THROWS_AS(MelFilterbank(128, 1025, 22050, 0.0, 20000.0), ParamError);
}

// ===========================================================================
// dct
// ===========================================================================

TEST_CASE("dct of a constant concentrates in c0", "[dsp][dct]") {
    const std::vector<double> x(4, 1.0);
    const auto c = dct2_ortho(x);
    REQUIRE(c.size() == 4);
    CHECK(c[0] == Approx(2.0).margin(1e-12));  // sqrt(1/4) * 4
    for (std::size_t k = 1; k < 4; ++k) CHECK(c[k] == Approx(0.0).margin(1e-12));
}

TEST_CASE("dct fast path matches the cosine sum", "[dsp][dct]") {
    for (const std::size_t n : {2UL, 8UL, 128UL, 512UL}) {
        const auto x = fixtures::white_noise(n, 1.0, 3000 + n);
        const auto fast = dct2_ortho(x);
        const auto slow = oracles::naive_dct2_ortho(x);
        for (std::size_t k = 0; k < n; ++k) CHECK(fast[k] == Approx(slow[k]).margin(1e-9));
    }
}

TEST_CASE("dct handles non-power-of-two lengths", "[dsp][dct]") {
    const auto x = fixtures::white_noise(12, 1.0, 77);
    const auto got = dct2_ortho(x);
    const auto want = oracles::naive_dct2_ortho(x);
    for (std::size_t k = 0; k < x.size(); ++k) CHECK(got[k] == Approx(want[k]).margin(1e-10));
}

TEST_CASE("orthonormal dct preserves energy", "[dsp][dct]") {
    for (const std::size_t n : {7UL, 64UL, 128UL}) {
        const auto x = fixtures::white_noise(n, 1.0, 4000 + n);
        const auto c = dct2_ortho(x);
        double ex = 0.0, ec = 0.0;
        for (const double v : x) ex += v * v;
        for (const double v : c) ec += v * v;
        CHECK(ec == Approx(ex).epsilon(1e-10));
    }
}

TEST_CASE("dct edge cases", "[dsp][dct]") {
    CHECK(dct2_ortho(std::vector<double>{3.0})[0] == Approx(3.0));
    CHECK_THROWS_AS(dct2_ortho(std::vector<double>{}), ParamError);
}

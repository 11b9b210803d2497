#pragma once

// Brute-force reference implementations. Each one recomputes a result from its
// defining formula with none of the production shortcuts (no FFT butterflies,
// no banded filter storage, no trapezoids), so agreement is meaningful.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "mimicaudit/dataset.hpp"
#include "mimicaudit/features.hpp"
#include "mimicaudit/nn.hpp"

namespace oracles {

// Direct O(n^2) DFT. The twiddle factors come from a single table indexed by
// (k*t) mod n, which keeps 2048-point comparisons affordable while staying a
// straight transcription of the definition.
inline std::vector<std::complex<double>> naive_dft(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> tw(n);
    for (std::size_t j = 0; j < n; ++j)
        tw[j] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(j) /
                                    static_cast<double>(n));
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) acc += x[t] * tw[(k * t) % n];
        out[k] = acc;
    }
    return out;
}

// Orthonormal DCT-II straight from the cosine sum.
inline std::vector<double> naive_dct2_ortho(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<double> c(n);
    for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (std::size_t t = 0; t < n; ++t)
            acc += x[t] * std::cos(std::numbers::pi * (static_cast<double>(t) + 0.5) *
                                   static_cast<double>(k) / static_cast<double>(n));
        c[k] = (k == 0 ? std::sqrt(1.0 / static_cast<double>(n))
                       : std::sqrt(2.0 / static_cast<double>(n))) *
               acc;
    }
    return c;
}

// Reflected sample lookup, re-derived by walking step by step instead of with
// modular arithmetic.
inline double reflect_at(std::span<const double> x, long long i) {
    const auto n = static_cast<long long>(x.size());
    if (n == 1) return x[0];
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * (n - 1) - i;
    }
    return x[static_cast<std::size_t>(i)];
}

// Full cepstral pipeline recomputed from scratch: centered reflect framing,
// periodic Hann, naive DFT power, per-bin triangular mel weights evaluated
// from the edge formula, dB with the 1e-10 floor, naive DCT, mean over frames.
inline std::vector<double> mfcc_reference(std::span<const double> samples, int sample_rate,
                                          std::size_t frame_length, std::size_t hop,
                                          std::size_t n_mels, std::size_t n_coeffs) {
    const std::size_t n_bins = frame_length / 2 + 1;
    const double nyquist = sample_rate / 2.0;

    const auto hz2mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
    const auto mel2hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
    std::vector<double> edges(n_mels + 2);
    for (std::size_t i = 0; i < edges.size(); ++i)
        edges[i] = mel2hz(hz2mel(nyquist) * static_cast<double>(i) /
                          static_cast<double>(n_mels + 1));

    std::vector<double> window(frame_length);
    for (std::size_t i = 0; i < frame_length; ++i)
        window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                         static_cast<double>(frame_length));

    const std::size_t n_frames = 1 + samples.size() / hop;
    std::vector<double> acc(n_coeffs, 0.0);
    std::vector<double> frame(frame_length), power(n_bins), mel_db(n_mels);
    for (std::size_t t = 0; t < n_frames; ++t) {
        const long long start = static_cast<long long>(t * hop) -
                                static_cast<long long>(frame_length / 2);
        for (std::size_t i = 0; i < frame_length; ++i)
            frame[i] = reflect_at(samples, start + static_cast<long long>(i)) * window[i];
        const auto spectrum = naive_dft(frame);
        for (std::size_t k = 0; k < n_bins; ++k) power[k] = std::norm(spectrum[k]);

        for (std::size_t m = 0; m < n_mels; ++m) {
            double e = 0.0;
            for (std::size_t k = 0; k < n_bins; ++k) {
                const double f = static_cast<double>(k) * sample_rate /
                                 static_cast<double>(frame_length);
                const double up = (f - edges[m]) / (edges[m + 1] - edges[m]);
                const double down = (edges[m + 2] - f) / (edges[m + 2] - edges[m + 1]);
                const double tri = std::max(0.0, std::min(up, down));
                e += tri * (2.0 / (edges[m + 2] - edges[m])) * power[k];
            }
            mel_db[m] = 10.0 * std::log10(std::max(e, 1e-10));
        }
        const auto cep = naive_dct2_ortho(mel_db);
        for (std::size_t i = 0; i < n_coeffs; ++i) acc[i] += cep[i];
    }
    for (double& v : acc) v /= static_cast<double>(n_frames);
    return acc;
}

// AUC as the Mann-Whitney pair statistic: fraction of (positive, negative)
// pairs ranked correctly, ties counting one half.
inline double pairwise_auc(std::span<const double> scores,
                           std::span<const mimicaudit::Label> labels) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != mimicaudit::Label::kFaked) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != mimicaudit::Label::kReal) continue;
            ++pairs;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

// Mean batch loss for a model run without dropout; the probe the gradient
// checker differentiates numerically.
inline double batch_loss(const mimicaudit::MlpModel& model,
                         const std::vector<std::vector<double>>& rows,
                         const std::vector<int>& labels) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto logits = mimicaudit::forward(model, rows[i], mimicaudit::RunMode::kInfer);
        acc += mimicaudit::softmax_xent(logits, labels[i]).loss;
    }
    return acc / static_cast<double>(rows.size());
}

struct GradCheckResult {
    double max_rel_error = 0.0;
    double max_abs_error = 0.0;
};

// Central finite differences over every weight and bias. Errors are scaled by
// the larger of the two gradients, floored at 1 (the loss itself is O(1)), so
// the check is relative for large gradients and absolute for near-zero ones —
// a tiny denominator would otherwise turn ~1e-10 difference-quotient round-off
// into spurious blowups.
inline GradCheckResult finite_difference_check(mimicaudit::MlpModel model,
                                               const mimicaudit::Gradients& analytic,
                                               const std::vector<std::vector<double>>& rows,
                                               const std::vector<int>& labels,
                                               double epsilon = 1e-6) {
    GradCheckResult r;
    const auto probe = [&](double& param, double expected) {
        const double saved = param;
        param = saved + epsilon;
        const double hi = batch_loss(model, rows, labels);
        param = saved - epsilon;
        const double lo = batch_loss(model, rows, labels);
        param = saved;
        const double numeric = (hi - lo) / (2.0 * epsilon);
        const double abs_err = std::abs(numeric - expected);
        const double denom = std::max({std::abs(numeric), std::abs(expected), 1.0});
        r.max_abs_error = std::max(r.max_abs_error, abs_err);
        r.max_rel_error = std::max(r.max_rel_error, abs_err / denom);
    };
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        for (std::size_t i = 0; i < model.layers[l].w.size(); ++i)
            probe(model.layers[l].w[i], analytic.w[l][i]);
        for (std::size_t i = 0; i < model.layers[l].b.size(); ++i)
            probe(model.layers[l].b[i], analytic.b[l][i]);
    }
    return r;
}

}  // namespace oracles

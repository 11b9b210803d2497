#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mimicaudit/dataset.hpp"
#include "mimicaudit/errors.hpp"
#include "mimicaudit/file_io.hpp"
#include "mimicaudit/json_io.hpp"

namespace mimicaudit {

// Mimicked speech ("faked") is the positive class throughout.
struct ConfusionMatrix {
    std::int64_t tp = 0;  // faked, predicted faked
    std::int64_t fp = 0;  // real, predicted faked
    std::int64_t fn = 0;  // faked, predicted real
    std::int64_t tn = 0;  // real, predicted real

    std::int64_t total() const { return tp + fp + fn + tn; }
};

inline ConfusionMatrix confusion(std::span<const Label> truth, std::span<const Label> predicted) {
    if (truth.size() != predicted.size())
        throw ParamError("confusion: label/prediction length mismatch");
    if (truth.empty()) throw EmptyInputError("confusion: no samples");
    ConfusionMatrix c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool pos = truth[i] == Label::kFaked;
        const bool hit = predicted[i] == Label::kFaked;
        if (pos && hit)
            ++c.tp;
        else if (!pos && hit)
            ++c.fp;
        else if (pos && !hit)
            ++c.fn;
        else
            ++c.tn;
    }
    return c;
}

struct MetricsReport {
    double sensitivity = 0.0;        // tp / (tp + fn)
    double specificity = 0.0;        // tn / (tn + fp)
    double fall_out = 0.0;           // fp / (fp + tn)
    double miss_rate = 0.0;          // fn / (fn + tp)
    double precision = 0.0;          // tp / (tp + fp)
    double accuracy = 0.0;           // (tp + tn) / total
    double balanced_accuracy = 0.0;  // (sensitivity + specificity) / 2
    double f1 = 0.0;                 // 2 * precision * sensitivity / (precision + sensitivity)
    ConfusionMatrix confusion;
};

// Derives the eight summary metrics. A zero denominator makes the metric
// undefined, which is an error rather than a silent 0 or NaN.
inline MetricsReport compute_metrics(const ConfusionMatrix& c) {
    if (c.tp < 0 || c.fp < 0 || c.fn < 0 || c.tn < 0)
        throw ParamError("metrics: negative count");
    if (c.total() == 0) throw EmptyInputError("metrics: empty confusion matrix");
    if (c.tp + c.fn == 0)
        throw MetricError("sensitivity undefined: no positive samples (tp + fn = 0)");
    if (c.tn + c.fp == 0)
        throw MetricError("specificity undefined: no negative samples (tn + fp = 0)");
    if (c.tp + c.fp == 0)
        throw MetricError("precision undefined: nothing predicted positive (tp + fp = 0)");

    MetricsReport r;
    r.confusion = c;
    const auto d = [](std::int64_t num, std::int64_t den) {
        return static_cast<double>(num) / static_cast<double>(den);
    };
    r.sensitivity = d(c.tp, c.tp + c.fn);
    r.specificity = d(c.tn, c.tn + c.fp);
    r.fall_out = d(c.fp, c.fp + c.tn);
    r.miss_rate = d(c.fn, c.fn + c.tp);
    r.precision = d(c.tp, c.tp + c.fp);
    r.accuracy = d(c.tp + c.tn, c.total());
    r.balanced_accuracy = 0.5 * (r.sensitivity + r.specificity);
    if (r.precision + r.sensitivity <= 0.0)
        throw MetricError("f1 undefined: precision + sensitivity = 0");
    r.f1 = 2.0 * r.precision * r.sensitivity / (r.precision + r.sensitivity);
    return r;
}

// -------------------------------------------------------------------- roc ---

struct RocPoint {
    double threshold = 0.0;  // classify positive when score >= threshold
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;  // from (0, 0) to (1, 1), thresholds descending
    double auc = 0.0;
    double eer = 0.0;
};

namespace detail {

inline double trapezoid_area(const std::vector<RocPoint>& pts) {
    double area = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        area += (pts[i].fpr - pts[i - 1].fpr) * (pts[i].tpr + pts[i - 1].tpr) * 0.5;
    return area;
}

// Point on the polyline where fpr == 1 - tpr (false accepts == false rejects).
// fpr + tpr - 1 is nondecreasing along the curve from -1 to +1, so exactly one
// crossing segment exists.
inline double equal_error_rate(const std::vector<RocPoint>& pts) {
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double x1 = pts[i - 1].fpr, y1 = pts[i - 1].tpr;
        const double x2 = pts[i].fpr, y2 = pts[i].tpr;
        const double g1 = x1 + y1 - 1.0, g2 = x2 + y2 - 1.0;
        if (g1 > 0.0 || g2 < 0.0) continue;
        const double dx = x2 - x1, dy = y2 - y1;
        if (dx + dy <= 0.0) return x1;  // degenerate: endpoints coincide on g = 0
        const double s = (1.0 - y1 - x1) / (dx + dy);
        return x1 + s * dx;
    }
    return 0.5;  // unreachable for a well-formed curve
}

}  // namespace detail

// ROC over positive-class scores. One point per distinct score value
// (samples sharing a score move together), anchored at (0, 0) with a
// threshold just above the maximum score.
inline RocCurve roc_curve(std::span<const double> scores, std::span<const Label> truth) {
    if (scores.size() != truth.size()) throw ParamError("roc: score/label length mismatch");
    if (scores.empty()) throw EmptyInputError("roc: no samples");
    for (const double s : scores)
        if (!std::isfinite(s)) throw ParamError("roc: non-finite score");

    std::int64_t n_pos = 0, n_neg = 0;
    for (const Label l : truth) (l == Label::kFaked ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0)
        throw DataError("roc: need both classes, got " + std::to_string(n_pos) +
                        " positive / " + std::to_string(n_neg) + " negative");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.points.push_back({scores[order[0]] + 1.0, 0.0, 0.0});
    std::int64_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double s = scores[order[i]];
        for (; i < order.size() && scores[order[i]] == s; ++i)
            (truth[order[i]] == Label::kFaked ? tp : fp)++;
        curve.points.push_back({s, static_cast<double>(fp) / static_cast<double>(n_neg),
                                static_cast<double>(tp) / static_cast<double>(n_pos)});
    }
    curve.auc = detail::trapezoid_area(curve.points);
    curve.eer = detail::equal_error_rate(curve.points);
    return curve;
}

// ------------------------------------------------------------ serializers ---

inline std::string report_to_json(const MetricsReport& r, double auc, double eer) {
    JsonWriter w;
    w.begin_object();
    w.key("confusion").begin_object();
    w.key("tp").value(r.confusion.tp);
    w.key("fp").value(r.confusion.fp);
    w.key("fn").value(r.confusion.fn);
    w.key("tn").value(r.confusion.tn);
    w.end_object();
    w.key("metrics").begin_object();
    w.key("sensitivity").value(r.sensitivity);
    w.key("specificity").value(r.specificity);
    w.key("fall_out").value(r.fall_out);
    w.key("miss_rate").value(r.miss_rate);
    w.key("precision").value(r.precision);
    w.key("accuracy").value(r.accuracy);
    w.key("balanced_accuracy").value(r.balanced_accuracy);
    w.key("f1").value(r.f1);
    w.end_object();
    w.key("auc").value(auc);
    w.key("eer").value(eer);
    w.end_object();
    std::string out = w.take();
    out += '\n';
    return out;
}

inline void write_report_json(const MetricsReport& r, double auc, double eer,
                              const std::filesystem::path& path) {
    atomic_write_file(path, report_to_json(r, auc, eer));
}

inline void write_roc_csv(const RocCurve& c, const std::filesystem::path& path) {
    std::string out = "threshold,fpr,tpr\n";
    for (const auto& p : c.points) {
        out += format_g17(p.threshold);
        out += ',';
        out += format_g17(p.fpr);
        out += ',';
        out += format_g17(p.tpr);
        out += '\n';
    }
    atomic_write_file(path, out);
}

}  // namespace mimicaudit

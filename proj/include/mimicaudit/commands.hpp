#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mimicaudit/audio_io.hpp"
#include "mimicaudit/dataset.hpp"
#include "mimicaudit/errors.hpp"
#include "mimicaudit/features.hpp"
#include "mimicaudit/json_io.hpp"
#include "mimicaudit/metrics.hpp"
#include "mimicaudit/nn.hpp"

namespace mimicaudit {

// Process exit codes; anything unexpected maps to 1.
namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kUnexpected = 1;
inline constexpr int kInputFormat = 2;
inline constexpr int kIo = 3;
inline constexpr int kData = 4;
inline constexpr int kSchema = 5;
}  // namespace exit_code

// Runs a command body and folds the error taxonomy into exit codes.
template <typename Fn>
int run_command(std::ostream& err, Fn&& fn) {
    try {
        fn();
        return exit_code::kOk;
    } catch (const SchemaError& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::kSchema;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::kIo;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::kData;
    } catch (const MetricError& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::kData;
    } catch (const Error& e) {  // format, naming, truncation, params, empty input
        err << "error: " << e.what() << '\n';
        return exit_code::kInputFormat;
    } catch (const std::exception& e) {
        err << "unexpected error: " << e.what() << '\n';
        return exit_code::kUnexpected;
    }
}

// Decode -> resample to the pipeline rate -> cap duration -> summarize.
inline FeatureVector features_from_wav(const std::filesystem::path& path, double max_seconds) {
    AudioClip clip = decode_wav_file(path);
    clip = resample(clip, kPipelineSampleRate);
    clip = clip_duration(clip, max_seconds);
    return extract_features(clip);
}

// ---------------------------------------------------------------- extract ---

struct ExtractOptions {
    std::filesystem::path input_dir;
    std::filesystem::path output;
    double max_seconds = kDefaultMaxSeconds;
};

inline int cmd_extract(const ExtractOptions& opts, std::ostream& out, std::ostream& err) {
    return run_command(err, [&] {
        DatasetManifest manifest = build_manifest(opts.input_dir);
        DatasetManifest kept;
        std::size_t skipped = 0;
        for (auto& sample : manifest.samples) {
            try {
                sample.features = features_from_wav(sample.path, opts.max_seconds);
                kept.samples.push_back(std::move(sample));
            } catch (const FormatError& e) {
                err << "warning: skipping " << sample.path << ": " << e.what() << '\n';
                ++skipped;
            } catch (const EmptyInputError& e) {
                err << "warning: skipping " << sample.path << ": " << e.what() << '\n';
                ++skipped;
            } catch (const IoError& e) {
                err << "warning: skipping " << sample.path << ": " << e.what() << '\n';
                ++skipped;
            }
        }
        write_feature_csv(kept, opts.output);
        out << "extracted " << kept.samples.size() << " clip(s) (" << kept.count(Label::kReal)
            << " real, " << kept.count(Label::kFaked) << " faked, " << skipped
            << " skipped) -> " << opts.output.string() << '\n';
    });
}

// ------------------------------------------------------------------ train ---

struct TrainOptions {
    std::filesystem::path features_csv;
    std::filesystem::path model_out;
    std::optional<std::filesystem::path> history_out;  // default: model path, .history.csv
    double test_fraction = 0.2004;
    TrainConfig train;
};

inline std::filesystem::path default_history_path(const std::filesystem::path& model_path) {
    std::filesystem::path p = model_path;
    p.replace_extension(".history.csv");
    return p;
}

inline int cmd_train(const TrainOptions& opts, std::ostream& out, std::ostream& err) {
    return run_command(err, [&] {
        const DatasetManifest manifest = read_feature_csv(opts.features_csv);
        const SplitConfig split_cfg{opts.test_fraction, opts.train.validation_fraction,
                                    opts.train.seed};
        const auto [train_set, test_set] = split(manifest, split_cfg);

        std::vector<FeatureVector> features;
        std::vector<Label> labels;
        for (const auto& s : train_set.samples) {
            features.push_back(*s.features);
            labels.push_back(s.label);
        }

        TrainResult result = train(features, labels, opts.train);
        save_model(result.model, opts.model_out);
        const std::filesystem::path history_path =
            opts.history_out.value_or(default_history_path(opts.model_out));
        write_history_csv(result.history, history_path);

        const std::size_t last = result.history.train_loss.size() - 1;
        out << "trained on " << train_set.samples.size() << " sample(s) ("
            << test_set.samples.size() << " held out for test)\n"
            << "final epoch: train_loss=" << format_g17(result.history.train_loss[last])
            << " val_loss=" << format_g17(result.history.val_loss[last])
            << " train_acc=" << format_g17(result.history.train_acc[last])
            << " val_acc=" << format_g17(result.history.val_acc[last]) << '\n'
            << "model -> " << opts.model_out.string() << '\n'
            << "history -> " << history_path.string() << '\n';
    });
}

// --------------------------------------------------------------- evaluate ---

enum class EvalSubset { kAll, kTrain, kTest };

struct EvaluateOptions {
    std::filesystem::path features_csv;
    std::filesystem::path model_file;
    std::filesystem::path report_out;
    std::optional<std::filesystem::path> roc_out;
    EvalSubset subset = EvalSubset::kAll;
    double test_fraction = 0.2004;
    std::uint64_t seed = 0;  // must match training's seed for train/test subsets
};

inline int cmd_evaluate(const EvaluateOptions& opts, std::ostream& out, std::ostream& err) {
    return run_command(err, [&] {
        const DatasetManifest manifest = read_feature_csv(opts.features_csv);
        const MlpModel model = load_model(opts.model_file);

        // The split is a pure function of (manifest, fraction, seed), so the
        // training partition can be reconstructed here without any shared state.
        DatasetManifest subset;
        if (opts.subset == EvalSubset::kAll) {
            subset = manifest;
        } else {
            auto [train_set, test_set] = split(manifest, {opts.test_fraction, 0.2, opts.seed});
            subset = opts.subset == EvalSubset::kTrain ? std::move(train_set)
                                                       : std::move(test_set);
        }
        if (subset.samples.empty()) throw DataError("evaluate: no samples in selected subset");

        std::vector<Label> truth, predicted;
        std::vector<double> scores;
        for (const auto& s : subset.samples) {
            const auto probs = predict_proba(model, *s.features);
            truth.push_back(s.label);
            predicted.push_back(probs[1] > probs[0] ? Label::kFaked : Label::kReal);
            scores.push_back(probs[1]);
        }

        const ConfusionMatrix cm = confusion(truth, predicted);
        const MetricsReport report = compute_metrics(cm);
        const RocCurve roc = roc_curve(scores, truth);

        write_report_json(report, roc.auc, roc.eer, opts.report_out);
        if (opts.roc_out) write_roc_csv(roc, *opts.roc_out);

        out << "evaluated " << subset.samples.size() << " sample(s)\n"
            << "confusion: tp=" << cm.tp << " fp=" << cm.fp << " fn=" << cm.fn
            << " tn=" << cm.tn << '\n'
            << "sensitivity        " << format_g17(report.sensitivity) << '\n'
            << "specificity        " << format_g17(report.specificity) << '\n'
            << "fall_out           " << format_g17(report.fall_out) << '\n'
            << "miss_rate          " << format_g17(report.miss_rate) << '\n'
            << "precision          " << format_g17(report.precision) << '\n'
            << "accuracy           " << format_g17(report.accuracy) << '\n'
            << "balanced_accuracy  " << format_g17(report.balanced_accuracy) << '\n'
            << "f1                 " << format_g17(report.f1) << '\n'
            << "auc                " << format_g17(roc.auc) << '\n'
            << "eer                " << format_g17(roc.eer) << '\n'
            << "report -> " << opts.report_out.string() << '\n';
        if (opts.roc_out) out << "roc -> " << opts.roc_out->string() << '\n';
    });
}

// ---------------------------------------------------------------- predict ---

struct PredictOptions {
    std::filesystem::path model_file;
    std::filesystem::path wav_path;
    double max_seconds = kDefaultMaxSeconds;
};

inline int cmd_predict(const PredictOptions& opts, std::ostream& out, std::ostream& err) {
    return run_command(err, [&] {
        const MlpModel model = load_model(opts.model_file);
        const FeatureVector fv = features_from_wav(opts.wav_path, opts.max_seconds);
        const auto probs = predict_proba(model, fv);
        const Prediction pred = predict(model, fv);

        JsonWriter w;
        w.begin_object();
        w.key("file").value(std::string_view(opts.wav_path.filename().string()));
        w.key("label").value(std::string_view(label_name(pred.label)));
        w.key("confidence").value(pred.confidence);
        w.key("prob_real").value(probs[0]);
        w.key("prob_faked").value(probs[1]);
        w.end_object();
        out << w.take() << '\n';
    });
}

}  // namespace mimicaudit

// Command-line front end: argument parsing wired to the library commands.
// All real work (and the exit-code mapping) lives in mimicaudit/commands.hpp.

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "mimicaudit/commands.hpp"

namespace ma = mimicaudit;

int main(int argc, char** argv) {
    CLI::App app{
        "mimic_audit: trains and runs a small neural net that separates\n"
        "human-mimicked speech from genuine speech using spectral features"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from an ini/toml file");
    app.set_version_flag("--version", "mimic_audit 1.0.0");

    auto* extract = app.add_subcommand("extract", "scan a wav directory into a feature csv");
    std::string ex_input, ex_output;
    double ex_max_seconds = ma::kDefaultMaxSeconds;
    extract->add_option("-i,--input-dir", ex_input, "directory of <4 digits><r|f>.wav clips")
        ->required();
    extract->add_option("-o,--output", ex_output, "feature csv to write")->required();
    extract
        ->add_option("--max-seconds", ex_max_seconds, "analyze at most this much audio per clip")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    auto* train = app.add_subcommand("train", "fit the classifier on a feature csv");
    std::string tr_features, tr_model, tr_history;
    ma::TrainConfig tr_cfg;
    double tr_test_split = 0.2004;
    train->add_option("-f,--features", tr_features, "feature csv from extract")->required();
    train->add_option("-m,--model", tr_model, "model json to write")->required();
    train->add_option("--history", tr_history,
                      "per-epoch loss/accuracy csv (default: model path with .history.csv)");
    train->add_option("--epochs", tr_cfg.epochs, "training epochs")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    train->add_option("--batch-size", tr_cfg.batch_size, "minibatch size")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    train->add_option("--learning-rate", tr_cfg.learning_rate, "adam step size")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    train
        ->add_option("--val-split", tr_cfg.validation_fraction,
                     "fraction of the training partition monitored each epoch")
        ->capture_default_str();
    train->add_option("--test-split", tr_test_split, "fraction of the csv held out for test")
        ->capture_default_str();
    train->add_option("--seed", tr_cfg.seed, "rng seed for split, init, shuffles and dropout")
        ->capture_default_str()
        ->envname("MIMIC_AUDIT_SEED");

    auto* evaluate = app.add_subcommand("evaluate", "score a feature csv against a model");
    std::string ev_features, ev_model, ev_report, ev_roc;
    std::string ev_subset = "all";
    double ev_test_split = 0.2004;
    std::uint64_t ev_seed = 0;
    evaluate->add_option("-f,--features", ev_features, "feature csv from extract")->required();
    evaluate->add_option("-m,--model", ev_model, "model json from train")->required();
    evaluate->add_option("-r,--report", ev_report, "metrics json to write")->required();
    evaluate->add_option("--roc-out", ev_roc, "roc curve csv to write");
    evaluate->add_option("--subset", ev_subset, "which rows to score")
        ->capture_default_str()
        ->check(CLI::IsMember({"all", "train", "test"}));
    evaluate
        ->add_option("--test-split", ev_test_split,
                     "test fraction used at training time (for --subset train/test)")
        ->capture_default_str();
    evaluate->add_option("--seed", ev_seed, "seed used at training time")
        ->capture_default_str()
        ->envname("MIMIC_AUDIT_SEED");

    auto* predict = app.add_subcommand("predict", "classify one wav clip");
    std::string pr_model, pr_wav;
    double pr_max_seconds = ma::kDefaultMaxSeconds;
    predict->add_option("-m,--model", pr_model, "model json from train")->required();
    predict->add_option("wav", pr_wav, "clip to classify")->required();
    predict
        ->add_option("--max-seconds", pr_max_seconds, "analyze at most this much audio")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {  // --help, --version
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the usage error
        return ma::exit_code::kInputFormat;
    }

    if (extract->parsed()) {
        ma::ExtractOptions opts;
        opts.input_dir = ex_input;
        opts.output = ex_output;
        opts.max_seconds = ex_max_seconds;
        return ma::cmd_extract(opts, std::cout, std::cerr);
    }
    if (train->parsed()) {
        ma::TrainOptions opts;
        opts.features_csv = tr_features;
        opts.model_out = tr_model;
        if (!tr_history.empty()) opts.history_out = tr_history;
        opts.test_fraction = tr_test_split;
        opts.train = tr_cfg;
        return ma::cmd_train(opts, std::cout, std::cerr);
    }
    if (evaluate->parsed()) {
        ma::EvaluateOptions opts;
        opts.features_csv = ev_features;
        opts.model_file = ev_model;
        opts.report_out = ev_report;
        if (!ev_roc.empty()) opts.roc_out = ev_roc;
        opts.subset = ev_subset == "train"  ? ma::EvalSubset::kTrain
                      : ev_subset == "test" ? ma::EvalSubset::kTest
                                            : ma::EvalSubset::kAll;
        opts.test_fraction = ev_test_split;
        opts.seed = ev_seed;
        return ma::cmd_evaluate(opts, std::cout, std::cerr);
    }
    if (predict->parsed()) {
        ma::PredictOptions opts;
        opts.model_file = pr_model;
        opts.wav_path = pr_wav;
        opts.max_seconds = pr_max_seconds;
        return ma::cmd_predict(opts, std::cout, std::cerr);
    }
    return ma::exit_code::kUnexpected;  // unreachable: a subcommand is required
}

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mimicaudit/errors.hpp"
#include "mimicaudit/features.hpp"
#include "mimicaudit/file_io.hpp"
#include "mimicaudit/json_io.hpp"
#include "mimicaudit/rng.hpp"

namespace mimicaudit {

enum class Label : int { kReal = 0, kFaked = 1 };

inline const char* label_name(Label l) { return l == Label::kFaked ? "faked" : "real"; }

inline Label label_from_name(std::string_view s) {
    if (s == "real") return Label::kReal;
    if (s == "faked") return Label::kFaked;
    throw FormatError("unknown label '" + std::string(s) + "' (want real or faked)");
}

struct LabeledSample {
    int index = 0;
    Label label = Label::kReal;
    std::string path;  // source file; may be just a basename after CSV round-trip
    std::optional<FeatureVector> features;
};

struct DatasetManifest {
    std::vector<LabeledSample> samples;

    std::size_t count(Label l) const {
        std::size_t c = 0;
        for (const auto& s : samples)
            if (s.label == l) ++c;
        return c;
    }
};

// Corpus naming convention: four decimal digits then a class letter, e.g.
// "0001f.wav" -> (1, faked), "0123r.wav" -> (123, real). Anything after the
// fifth character (normally the extension) is not inspected.
inline std::pair<int, Label> parse_label(const std::string& filename) {
    const std::string name = std::filesystem::path(filename).filename().string();
    if (name.size() < 5)
        throw NamingError("'" + name + "': name too short for <4 digits><r|f>");
    int index = 0;
    for (int i = 0; i < 4; ++i) {
        const char c = name[static_cast<std::size_t>(i)];
        if (c < '0' || c > '9')
            throw NamingError("'" + name + "': character " + std::to_string(i + 1) +
                              " is not a digit");
        index = index * 10 + (c - '0');
    }
    Label label;
    if (name[4] == 'r')
        label = Label::kReal;
    else if (name[4] == 'f')
        label = Label::kFaked;
    else
        throw NamingError("'" + name + "': character 5 must be 'r' or 'f'");
    return {index, label};
}

// Scans a directory for .wav files and derives labels from their names.
// Non-wav files are ignored; a wav with a malformed name is an error (silently
// skipping it would silently shrink the corpus).
inline DatasetManifest build_manifest(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec))
        throw IoError("not a readable directory: " + dir.string());

    DatasetManifest m;
    std::filesystem::directory_iterator it(dir, ec);
    if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
    for (const auto& entry : it) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (ext != ".wav") continue;
        const auto [index, label] = parse_label(entry.path().filename().string());
        m.samples.push_back({index, label, entry.path().string(), std::nullopt});
    }

    std::sort(m.samples.begin(), m.samples.end(),
              [](const LabeledSample& a, const LabeledSample& b) { return a.index < b.index; });
    for (std::size_t i = 1; i < m.samples.size(); ++i)
        if (m.samples[i].index == m.samples[i - 1].index)
            throw DataError("duplicate sample index " + std::to_string(m.samples[i].index) +
                            " (" + m.samples[i - 1].path + " vs " + m.samples[i].path + ")");
    return m;
}

// ------------------------------------------------------------------ split ---

struct SplitConfig {
    double test_fraction = 0.2004;
    double validation_fraction = 0.2;  // consumed later, during training
    std::uint64_t seed = 0;
};

// Stratified train/test split. The overall test size is round(fraction * n);
// it is apportioned to the classes by largest remainder, so each class's test
// share matches the global fraction to within one sample. Selection within a
// class is a seeded shuffle, which makes the split a pure function of
// (manifest, fraction, seed).
inline std::pair<DatasetManifest, DatasetManifest> split(const DatasetManifest& m,
                                                         const SplitConfig& cfg) {
    if (!(cfg.test_fraction > 0.0) || !(cfg.test_fraction < 1.0))
        throw ParamError("split: test_fraction must be in (0, 1)");
    const std::size_t n = m.samples.size();
    if (n < 2) throw DataError("split: need at least two samples");

    std::array<std::vector<std::size_t>, 2> groups;  // positions, [real, faked]
    for (std::size_t i = 0; i < n; ++i)
        groups[static_cast<std::size_t>(m.samples[i].label)].push_back(i);
    if (groups[0].empty() || groups[1].empty())
        throw DataError("split: both classes must be present");

    auto total_test = static_cast<std::size_t>(
        std::llround(cfg.test_fraction * static_cast<double>(n)));
    total_test = std::clamp<std::size_t>(total_test, 1, n - 1);

    // Largest-remainder apportionment across the two classes.
    std::array<std::size_t, 2> quota{};
    std::array<double, 2> frac{};
    std::size_t assigned = 0;
    for (std::size_t g = 0; g < 2; ++g) {
        const double ideal = static_cast<double>(total_test) *
                             static_cast<double>(groups[g].size()) / static_cast<double>(n);
        quota[g] = static_cast<std::size_t>(ideal);
        frac[g] = ideal - static_cast<double>(quota[g]);
        assigned += quota[g];
    }
    while (assigned < total_test) {
        std::size_t pick = frac[0] > frac[1]                                ? 0
                           : frac[1] > frac[0]                              ? 1
                           : (groups[0].size() >= groups[1].size() ? 0 : 1);  // tie: bigger class
        if (quota[pick] >= groups[pick].size()) pick = 1 - pick;
        ++quota[pick];
        frac[pick] = -1.0;
        ++assigned;
    }

    DatasetManifest train, test;
    Rng rng(cfg.seed);
    for (std::size_t g = 0; g < 2; ++g) {  // fixed order: real, then faked
        std::vector<std::size_t> order = groups[g];
        rng.shuffle(order);
        for (std::size_t i = 0; i < order.size(); ++i)
            (i < quota[g] ? test : train).samples.push_back(m.samples[order[i]]);
    }
    auto by_index = [](const LabeledSample& a, const LabeledSample& b) {
        return a.index < b.index;
    };
    std::sort(train.samples.begin(), train.samples.end(), by_index);
    std::sort(test.samples.begin(), test.samples.end(), by_index);
    return {std::move(train), std::move(test)};
}

// ----------------------------------------------------------------- scaler ---

// Per-feature standardization parameters. Fit on training data only; applying
// the same transform to test data is what keeps evaluation honest.
struct Scaler {
    std::array<double, kFeatureCount> mean{};
    std::array<double, kFeatureCount> std_dev{};
};

inline Scaler fit_scaler(const std::vector<FeatureVector>& rows) {
    if (rows.size() < 2) throw DataError("scaler: need at least two samples to fit");
    Scaler sc;
    const double n = static_cast<double>(rows.size());
    for (const auto& r : rows)
        for (int i = 0; i < kFeatureCount; ++i) sc.mean[i] += r.values[i];
    for (int i = 0; i < kFeatureCount; ++i) sc.mean[i] /= n;
    for (const auto& r : rows)
        for (int i = 0; i < kFeatureCount; ++i) {
            const double d = r.values[i] - sc.mean[i];
            sc.std_dev[i] += d * d;
        }
    for (int i = 0; i < kFeatureCount; ++i)
        sc.std_dev[i] = std::max(std::sqrt(sc.std_dev[i] / n), 1e-12);  // population std
    return sc;
}

inline std::array<double, kFeatureCount> apply_scaler(const Scaler& sc, const FeatureVector& fv) {
    std::array<double, kFeatureCount> out;
    for (int i = 0; i < kFeatureCount; ++i)
        out[i] = (fv.values[i] - sc.mean[i]) / sc.std_dev[i];
    return out;
}

// -------------------------------------------------------------------- csv ---

inline std::string feature_csv_header() {
    std::string h = "filename";
    for (const auto& name : feature_names()) {
        h += ',';
        h += name;
    }
    h += ",label";
    return h;
}

namespace detail {

inline std::string csv_row_name(const LabeledSample& s) {
    if (!s.path.empty()) return std::filesystem::path(s.path).filename().string();
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d%c.wav", s.index, s.label == Label::kFaked ? 'f' : 'r');
    return buf;
}

inline double parse_csv_double(std::string_view cell, std::size_t row, std::size_t col) {
    double v{};
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size())
        throw FormatError("features csv: row " + std::to_string(row) + ", column " +
                          std::to_string(col + 1) + ": '" + std::string(cell) +
                          "' is not a number");
    return v;
}

}  // namespace detail

// Feature table as CSV: filename, 26 feature columns, label name. Numbers are
// written with 17 significant digits so a round-trip restores exact values.
inline void write_feature_csv(const DatasetManifest& m, const std::filesystem::path& path) {
    std::string out = feature_csv_header();
    out += '\n';
    for (const auto& s : m.samples) {
        if (!s.features)
            throw DataError("features csv: sample " + detail::csv_row_name(s) +
                            " has no features");
        out += detail::csv_row_name(s);
        for (const double v : s.features->values) {
            out += ',';
            out += format_g17(v);
        }
        out += ',';
        out += label_name(s.label);
        out += '\n';
    }
    atomic_write_file(path, out);
}

// Reads a feature table back. The label column is authoritative; when the
// filename also encodes a label the two must agree. Filenames outside the
// naming convention are allowed (the row ordinal becomes the sample index).
inline DatasetManifest read_feature_csv(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);

    std::vector<std::string_view> lines;
    for (std::size_t pos = 0; pos < text.size();) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string_view line(text.data() + pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        pos = eol + 1;
    }
    if (lines.empty() || lines[0] != feature_csv_header())
        throw FormatError("features csv: bad or missing header");

    DatasetManifest m;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::string_view line = lines[li];
        if (line.empty()) continue;
        std::vector<std::string_view> cells;
        for (std::size_t pos = 0;;) {
            const std::size_t comma = line.find(',', pos);
            cells.push_back(line.substr(pos, comma - pos));
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
        if (cells.size() != 2 + kFeatureCount)
            throw FormatError("features csv: row " + std::to_string(li) + ": expected " +
                              std::to_string(2 + kFeatureCount) + " columns, got " +
                              std::to_string(cells.size()));

        LabeledSample s;
        s.path = std::string(cells.front());
        s.label = label_from_name(cells.back());
        s.features = FeatureVector{};
        for (int i = 0; i < kFeatureCount; ++i)
            s.features->values[i] =
                detail::parse_csv_double(cells[static_cast<std::size_t>(i) + 1], li, i + 1);
        try {
            const auto [index, named] = parse_label(s.path);
            if (named != s.label)
                throw FormatError("features csv: row " + std::to_string(li) + ": filename '" +
                                  s.path + "' encodes label " + label_name(named) +
                                  " but label column says " + label_name(s.label));
            s.index = index;
        } catch (const NamingError&) {
            s.index = static_cast<int>(li - 1);  // no convention name; use row ordinal
        }
        m.samples.push_back(std::move(s));
    }

    std::sort(m.samples.begin(), m.samples.end(),
              [](const LabeledSample& a, const LabeledSample& b) { return a.index < b.index; });
    for (std::size_t i = 1; i < m.samples.size(); ++i)
        if (m.samples[i].index == m.samples[i - 1].index)
            throw DataError("features csv: duplicate sample index " +
                            std::to_string(m.samples[i].index));
    return m;
}

}  // namespace mimicaudit

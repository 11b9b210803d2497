#pragma once

#include <cstdio>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "mimicaudit/errors.hpp"

namespace mimicaudit {

// 17 significant digits: enough to round-trip any double exactly, and stable
// across platforms, so serialized artifacts are byte-reproducible.
inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Minimal streaming JSON emitter. Exists because the persisted artifacts pin
// their number format to %.17g and their bytes to be deterministic; a
// general-purpose serializer with shortest-round-trip floats can't promise
// either. Reading JSON back goes through a full parser elsewhere.
class JsonWriter {
public:
    std::string take() { return std::move(out_); }

    JsonWriter& begin_object() {
        prefix();
        out_ += '{';
        first_.push_back(true);
        return *this;
    }

    JsonWriter& end_object() {
        first_.pop_back();
        out_ += '}';
        return *this;
    }

    JsonWriter& begin_array() {
        prefix();
        out_ += '[';
        first_.push_back(true);
        return *this;
    }

    JsonWriter& end_array() {
        first_.pop_back();
        out_ += ']';
        return *this;
    }

    JsonWriter& key(std::string_view k) {
        if (!first_.back()) out_ += ',';
        first_.back() = false;
        quote(k);
        out_ += ':';
        after_key_ = true;
        return *this;
    }

    JsonWriter& value(double v) {
        prefix();
        out_ += format_g17(v);
        return *this;
    }

    // One template instead of per-width overloads so every integer type
    // (int64_t is long here, long long elsewhere) resolves without ambiguity.
    template <typename T,
              std::enable_if_t<std::is_integral_v<T> && !std::is_same_v<T, bool>, int> = 0>
    JsonWriter& value(T v) {
        prefix();
        out_ += std::to_string(v);
        return *this;
    }

    JsonWriter& value(std::string_view s) {
        prefix();
        quote(s);
        return *this;
    }

    JsonWriter& value(bool b) {
        prefix();
        out_ += b ? "true" : "false";
        return *this;
    }

private:
    void prefix() {
        if (after_key_) {
            after_key_ = false;
            return;
        }
        if (!first_.empty()) {
            if (!first_.back()) out_ += ',';
            first_.back() = false;
        }
    }

    void quote(std::string_view s) {
        out_ += '"';
        for (const char c : s) {
            switch (c) {
                case '"': out_ += "\\\""; break;
                case '\\': out_ += "\\\\"; break;
                case '\n': out_ += "\\n"; break;
                case '\r': out_ += "\\r"; break;
                case '\t': out_ += "\\t"; break;
                default:
                    if (static_cast<unsigned char>(c) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof buf, "\\u%04x", c);
                        out_ += buf;
                    } else {
                        out_ += c;
                    }
            }
        }
        out_ += '"';
    }

    std::string out_;
    std::vector<bool> first_;
    bool after_key_ = false;
};

}  // namespace mimicaudit

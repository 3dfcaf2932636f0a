#pragma once

// Minimal CSV emission: comma-delimited, header first, 12 significant digits.

#include <cstdio>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace aegis::csv {

inline std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

/// Fields never contain commas, quotes or newlines here; anything that does is quoted anyway.
inline std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

class Writer {
public:
    Writer(std::ostream& out, std::initializer_list<std::string_view> header) : out_(out) { row(header); }

    void row(std::initializer_list<std::string_view> fields) {
        bool first = true;
        for (auto f : fields) {
            if (!first) out_ << ',';
            out_ << escape(f);
            first = false;
        }
        out_ << '\n';
    }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << escape(fields[i]);
        }
        out_ << '\n';
    }

private:
    std::ostream& out_;
};

}  // namespace aegis::csv

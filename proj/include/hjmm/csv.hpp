#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "hjmm/errors.hpp"

namespace hjmm {

// shortest representation that round-trips the double exactly
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first < last && (*first == ' ' || *first == '\t')) ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc())
        throw ScenarioError("not a number: '" + s + "'");
    for (const char* p = res.ptr; p < last; ++p)
        if (*p != ' ' && *p != '\t' && *p != '\r')
            throw ScenarioError("trailing characters after number: '" + s + "'");
    return v;
}

inline long long parse_integer(const std::string& s) {
    long long v = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first < last && (*first == ' ' || *first == '\t')) ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc())
        throw ScenarioError("not an integer: '" + s + "'");
    for (const char* p = res.ptr; p < last; ++p)
        if (*p != ' ' && *p != '\t' && *p != '\r')
            throw ScenarioError("trailing characters after integer: '" + s + "'");
    return v;
}

// Minimal RFC 4180 writer: CRLF line endings, fields quoted when they contain
// a comma, quote or newline.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            write_field(fields[i]);
        }
        out_ << "\r\n";
    }

    void comment(const std::string& text) { out_ << "# " << text << "\r\n"; }

    void close() { out_.close(); }

private:
    void write_field(const std::string& f) {
        const bool needs_quote = f.find_first_of(",\"\r\n") != std::string::npos;
        if (!needs_quote) {
            out_ << f;
            return;
        }
        out_ << '"';
        for (char c : f) {
            if (c == '"') out_ << "\"\"";
            else out_ << c;
        }
        out_ << '"';
    }

    std::ofstream out_;
};

// splits one CSV line (no embedded newlines in our files)
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c == '\r') {
            // swallow the CR of a CRLF ending
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

} // namespace hjmm

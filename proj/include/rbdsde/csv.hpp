#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "rbdsde/errors.hpp"

namespace rbdsde {

/// CSV writer: header row, RFC-4180 quoting, '.' decimal separator, doubles
/// at 17 significant digits so values round-trip bit-exactly.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header)
        : header_(std::move(header)) {}

    static std::string format_double(double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

    void add_row(const std::vector<std::string>& cells) {
        if (cells.size() != header_.size())
            throw InvalidArgument("CsvWriter: row width mismatch");
        rows_.push_back(cells);
    }

    std::string to_string() const {
        std::string out;
        append_row(out, header_);
        for (const auto& r : rows_) append_row(out, r);
        return out;
    }

    void write_file(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error("CsvWriter: cannot open " + path);
        f << to_string();
        if (!f) throw Error("CsvWriter: write failed for " + path);
    }

private:
    static void append_row(std::string& out,
                           const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k) out.push_back(',');
            out += quote(cells[k]);
        }
        out.push_back('\n');
    }

    static std::string quote(const std::string& s) {
        if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += "\"\"";
            else q.push_back(c);
        }
        q.push_back('"');
        return q;
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

} // namespace rbdsde

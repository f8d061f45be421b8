#pragma once
// Minimal CSV emission with fixed float formatting so identical runs produce
// byte-identical files.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace vbl {

inline std::string csv_num(double x, int precision = 17) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, x);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, int precision = 17)
        : out_(path), precision_(precision) {}
    bool ok() const { return static_cast<bool>(out_); }

    void header(const std::vector<std::string>& cols) { write_row(cols); }

    CsvWriter& cell(const std::string& s) {
        row_.push_back(s);
        return *this;
    }
    CsvWriter& cell(double x) {
        row_.push_back(csv_num(x, precision_));
        return *this;
    }
    CsvWriter& cell(int x) {
        row_.push_back(std::to_string(x));
        return *this;
    }
    void end_row() {
        write_row(row_);
        row_.clear();
    }

private:
    void write_row(const std::vector<std::string>& cols) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (i) out_ << ',';
            out_ << cols[i];
        }
        out_ << '\n';
    }
    std::ofstream out_;
    int precision_;
    std::vector<std::string> row_;
};

}  // namespace vbl

#include "latmscale/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace latms::io {

std::string JValue::format_double(double d) {
    if (std::isnan(d)) return "\"nan\"";
    if (std::isinf(d)) return d > 0 ? "\"inf\"" : "\"-inf\"";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", d);
    return buf;
}

void JValue::write_string(std::ostringstream& os, const std::string& s) {
    os << '"';
    for (char c : s) {
        switch (c) {
            case '"':
                os << "\\\"";
                break;
            case '\\':
                os << "\\\\";
                break;
            case '\n':
                os << "\\n";
                break;
            case '\t':
                os << "\\t";
                break;
            default:
                os << c;
        }
    }
    os << '"';
}

void JValue::write(std::ostringstream& os, int indent, int depth) const {
    const std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
    const std::string pad0(static_cast<std::size_t>(indent) * depth, ' ');
    if (std::holds_alternative<std::nullptr_t>(v_)) {
        os << "null";
    } else if (std::holds_alternative<bool>(v_)) {
        os << (std::get<bool>(v_) ? "true" : "false");
    } else if (std::holds_alternative<long long>(v_)) {
        os << std::get<long long>(v_);
    } else if (std::holds_alternative<double>(v_)) {
        os << format_double(std::get<double>(v_));
    } else if (std::holds_alternative<std::string>(v_)) {
        write_string(os, std::get<std::string>(v_));
    } else if (std::holds_alternative<Object>(v_)) {
        const auto& obj = std::get<Object>(v_);
        if (obj.empty()) {
            os << "{}";
            return;
        }
        os << "{\n";
        for (std::size_t i = 0; i < obj.size(); ++i) {
            os << pad;
            write_string(os, obj[i].first);
            os << ": ";
            obj[i].second.write(os, indent, depth + 1);
            if (i + 1 < obj.size()) os << ",";
            os << "\n";
        }
        os << pad0 << "}";
    } else {
        const auto& arr = std::get<Array>(v_);
        if (arr.empty()) {
            os << "[]";
            return;
        }
        os << "[\n";
        for (std::size_t i = 0; i < arr.size(); ++i) {
            os << pad;
            arr[i].write(os, indent, depth + 1);
            if (i + 1 < arr.size()) os << ",";
            os << "\n";
        }
        os << pad0 << "]";
    }
}

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) {
    std::string line;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) line += ",";
        line += header[i];
    }
    lines_.push_back(std::move(line));
}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw std::invalid_argument("CsvWriter: row width mismatch");
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ",";
        line += cells[i];
    }
    lines_.push_back(std::move(line));
}

void CsvWriter::add_comment(const std::string& text) { lines_.push_back("# " + text); }

std::string CsvWriter::str() const {
    std::string out;
    for (const auto& l : lines_) {
        out += l;
        out += "\n";
    }
    return out;
}

std::string CsvWriter::cell(double d) {
    if (std::isnan(d)) return "undefined";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", d);
    return buf;
}

std::string CsvWriter::cell(long long i) { return std::to_string(i); }

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << contents;
}

}  // namespace latms::io

#pragma once

#include <complex>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace latms::io {

/// Small ordered JSON document builder. Keys keep insertion order and floats
/// are rendered with 17 significant digits so that identical runs produce
/// byte-identical files.
class JValue {
  public:
    using Object = std::vector<std::pair<std::string, JValue>>;
    using Array = std::vector<JValue>;

    JValue() : v_(nullptr) {}
    JValue(std::nullptr_t) : v_(nullptr) {}
    JValue(bool b) : v_(b) {}
    JValue(int i) : v_(static_cast<long long>(i)) {}
    JValue(long long i) : v_(i) {}
    JValue(std::size_t i) : v_(static_cast<long long>(i)) {}
    JValue(double d) : v_(d) {}
    JValue(const char* s) : v_(std::string(s)) {}
    JValue(std::string s) : v_(std::move(s)) {}
    JValue(Object o) : v_(std::move(o)) {}
    JValue(Array a) : v_(std::move(a)) {}

    static JValue object() { return JValue(Object{}); }
    static JValue array() { return JValue(Array{}); }
    static JValue complex(std::complex<double> z) {
        JValue o = object();
        o.set("re", z.real());
        o.set("im", z.imag());
        return o;
    }

    JValue& set(const std::string& key, JValue val) {
        auto& obj = std::get<Object>(v_);
        for (auto& [k, v] : obj)
            if (k == key) {
                v = std::move(val);
                return *this;
            }
        obj.emplace_back(key, std::move(val));
        return *this;
    }

    JValue& push(JValue val) {
        std::get<Array>(v_).push_back(std::move(val));
        return *this;
    }

    std::string dump(int indent = 2) const {
        std::ostringstream os;
        write(os, indent, 0);
        os << "\n";
        return os.str();
    }

    static std::string format_double(double d);

  private:
    void write(std::ostringstream& os, int indent, int depth) const;
    static void write_string(std::ostringstream& os, const std::string& s);

    std::variant<std::nullptr_t, bool, long long, double, std::string, Object, Array> v_;
};

/// CSV emitter with fixed 12-significant-digit float formatting.
class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> header);

    void add_row(const std::vector<std::string>& cells);
    void add_comment(const std::string& text);  // emitted as "# text"
    std::string str() const;

    static std::string cell(double d);
    static std::string cell(long long i);
    static std::string cell(int i) { return cell(static_cast<long long>(i)); }

  private:
    std::vector<std::string> lines_;
    std::size_t width_;
};

void write_file(const std::string& path, const std::string& contents);

}  // namespace latms::io

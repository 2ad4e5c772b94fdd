#include <windctl/table_io.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace windctl {

CsvWriter::CsvWriter(std::string_view schema, std::vector<std::string> header) : columns_(header.size()) {
    buffer_ += "# schema: ";
    buffer_ += schema;
    buffer_ += '\n';
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) buffer_ += ',';
        buffer_ += header[i];
    }
    buffer_ += '\n';
}

CsvWriter & CsvWriter::cell(std::string_view s) {
    if (s.find_first_of(",\n\"") != std::string_view::npos)
        throw std::invalid_argument("CSV cell contains a delimiter: " + std::string(s));
    if (in_row_++) buffer_ += ',';
    buffer_ += s;
    return *this;
}

CsvWriter & CsvWriter::cell(double v) { return cell(std::string_view(format_double(v))); }
CsvWriter & CsvWriter::cell(long long v) { return cell(std::string_view(std::to_string(v))); }
CsvWriter & CsvWriter::cell(unsigned long long v) { return cell(std::string_view(std::to_string(v))); }

void CsvWriter::end_row() {
    if (in_row_ != columns_)
        throw std::logic_error("CSV row has " + std::to_string(in_row_) + " cells, header has " + std::to_string(columns_));
    buffer_ += '\n';
    in_row_ = 0;
}

void CsvWriter::write_file(const std::string & path) const { write_text_file(path, buffer_); }

std::string format_double(double v) {
    if (v == 0.0) return "0"; // folds -0
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[512];
    // Plain notation in the range reports use; shortest otherwise.
    const double mag = std::abs(v);
    auto [ptr, ec] = mag >= 1e-4 && mag < 1e15 ? std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed)
                                               : std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw std::runtime_error("cannot format number");
    return std::string(buf, ptr);
}

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw std::invalid_argument("table has no column \"" + std::string(name) + "\"");
}

namespace {

std::vector<std::string> split(const std::string & line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    for (auto & s : out) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    }
    return out;
}

} // namespace

CsvTable parse_csv(const std::string & text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string tag = "# schema: ";
            if (line.rfind(tag, 0) == 0 && !have_header) t.schema = line.substr(tag.size());
            continue;
        }
        auto cells = split(line);
        if (!have_header) {
            t.header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != t.header.size())
            throw std::invalid_argument("line " + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                                        " fields, found " + std::to_string(cells.size()));
        t.rows.push_back(std::move(cells));
    }
    if (!have_header) throw std::invalid_argument("table has no header row");
    return t;
}

CsvTable read_csv_file(const std::string & path) { return parse_csv(read_text_file(path)); }

double parse_double(const std::string & s, std::string_view what) {
    double v = 0.0;
    const char * first = s.data();
    const char * last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || !std::isfinite(v))
        throw std::invalid_argument("malformed " + std::string(what) + ": \"" + s + "\"");
    return v;
}

std::string read_text_file(const std::string & path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string & path, const std::string & text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path);
}

} // namespace windctl

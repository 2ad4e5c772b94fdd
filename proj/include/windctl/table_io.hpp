#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace windctl {

/// Comma-separated tables. Every file written here starts with a
/// "# schema: <name>/<version>" line followed by a header row.
class CsvWriter {
public:
    CsvWriter(std::string_view schema, std::vector<std::string> header);

    CsvWriter & cell(std::string_view s);
    CsvWriter & cell(double v);
    CsvWriter & cell(long long v);
    CsvWriter & cell(unsigned long long v);
    CsvWriter & cell(int v) { return cell(static_cast<long long>(v)); }
    CsvWriter & cell(unsigned v) { return cell(static_cast<unsigned long long>(v)); }
    CsvWriter & cell(unsigned long v) { return cell(static_cast<unsigned long long>(v)); }
    CsvWriter & cell(long v) { return cell(static_cast<long long>(v)); }
    void end_row();

    const std::string & str() const { return buffer_; }
    void write_file(const std::string & path) const;

private:
    std::size_t columns_;
    std::size_t in_row_ = 0;
    std::string buffer_;
};

/// Shortest decimal representation that round-trips.
std::string format_double(double v);

struct CsvTable {
    std::string schema;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const; // throws if absent
};

CsvTable parse_csv(const std::string & text);
CsvTable read_csv_file(const std::string & path);
double parse_double(const std::string & s, std::string_view what);

std::string read_text_file(const std::string & path);
void write_text_file(const std::string & path, const std::string & text);

} // namespace windctl

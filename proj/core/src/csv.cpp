#include "skinburst/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <locale>

namespace skinburst {

std::string format_real(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                   std::chars_format::scientific, 16);
    return std::string(buf.data(), res.ptr);
}

CsvWriter::CsvWriter(std::ostream& os, std::string_view header_comment) : os_(os) {
    os_.imbue(std::locale::classic());
    os_ << "# " << header_comment << '\n';
}

CsvWriter& CsvWriter::cell(double value) {
    if (!first_) os_ << ',';
    os_ << format_real(value);
    first_ = false;
    return *this;
}

CsvWriter& CsvWriter::cell(long long value) {
    if (!first_) os_ << ',';
    os_ << value;
    first_ = false;
    return *this;
}

CsvWriter& CsvWriter::cell(std::string_view text) {
    if (!first_) os_ << ',';
    os_ << text;
    first_ = false;
    return *this;
}

void CsvWriter::end_row() {
    os_ << '\n';
    first_ = true;
}

}  // namespace skinburst

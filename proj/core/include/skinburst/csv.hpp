#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>

namespace skinburst {

/// Fixed 17-significant-digit scientific notation, locale independent.
/// Non-finite values print as "nan", "inf" or "-inf".
std::string format_real(double value);

/// Comma-separated rows with a single leading "# ..." header line.
class CsvWriter {
public:
    CsvWriter(std::ostream& os, std::string_view header_comment);

    CsvWriter& cell(double value);
    CsvWriter& cell(long long value);
    CsvWriter& cell(int value) { return cell(static_cast<long long>(value)); }
    CsvWriter& cell(std::string_view text);
    void end_row();

private:
    std::ostream& os_;
    bool first_ = true;
};

}  // namespace skinburst

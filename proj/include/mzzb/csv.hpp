#pragma once

#include <string>
#include <vector>

namespace mzzb {

/// Shortest decimal text that round-trips (17 significant digits); "nan",
/// "inf" and "-inf" for non-finite values.
std::string format_number(double v);

/// RFC 4180 field: quoted when it contains a comma, quote, CR or LF.
std::string csv_field(const std::string& s);

/// One record terminated by LF.
std::string csv_line(const std::vector<std::string>& fields);

}  // namespace mzzb

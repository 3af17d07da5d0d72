#pragma once
// Call-log CSV format.
//
//   header:  <cred_1>,...,<cred_n>,is_fraud
//   cells:   "1" pass, "0" fail, "" missing; is_fraud is "0" or "1"
//
// Comma separated, UTF-8, no quoting. CRLF line endings are accepted on
// read; write always emits LF.

#include <filesystem>
#include <iosfwd>

#include "ivrauth/model.hpp"

namespace ivrauth {

// Errors carry the 1-based line number of the offending row.
Dataset read_csv(std::istream& in);
Dataset load_csv(const std::filesystem::path& path);

void write_csv(const Dataset& d, std::ostream& out);
void write_csv(const Dataset& d, const std::filesystem::path& path);

}  // namespace ivrauth

#include "ivrauth/csv_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace ivrauth {
namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            cells.push_back(line.substr(start));
            return cells;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

[[noreturn]] void fail_at(std::size_t line_no, const std::string& what) {
    throw DataError("line " + std::to_string(line_no) + ": " + what);
}

bool next_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

}  // namespace

Dataset read_csv(std::istream& in) {
    std::string line;
    if (!next_line(in, line)) throw DataError("line 1: missing header row");

    const auto header = split_commas(line);
    if (header.back() != "is_fraud") fail_at(1, "last column must be is_fraud");

    std::vector<CredentialId> ids;
    for (std::size_t i = 0; i + 1 < header.size(); ++i) {
        if (header[i] == "is_fraud") fail_at(1, "is_fraud must appear only as the last column");
        ids.push_back({std::string(header[i])});
    }
    Schema schema;
    try {
        schema = Schema(std::move(ids));
    } catch (const DataError& e) {
        fail_at(1, e.what());
    }

    std::vector<CallRecord> records;
    std::size_t line_no = 1;
    while (next_line(in, line)) {
        ++line_no;
        if (line.empty()) {
            // Trailing blank lines are tolerated; a blank line mid-file is not.
            std::string rest;
            while (next_line(in, rest)) {
                if (!rest.empty()) fail_at(line_no, "blank line inside data");
            }
            break;
        }
        const auto cells = split_commas(line);
        if (cells.size() != header.size())
            fail_at(line_no, "expected " + std::to_string(header.size()) + " cells, found " +
                                 std::to_string(cells.size()));

        CallRecord rec;
        rec.outcomes.reserve(schema.size());
        for (std::size_t i = 0; i < schema.size(); ++i) {
            const auto cell = cells[i];
            if (cell.empty()) {
                rec.outcomes.push_back(Outcome::Missing);
            } else if (cell == "1") {
                rec.outcomes.push_back(Outcome::Pass);
            } else if (cell == "0") {
                rec.outcomes.push_back(Outcome::Fail);
            } else {
                fail_at(line_no, "invalid value '" + std::string(cell) + "' in column " +
                                     schema[i].name);
            }
        }
        const auto label = cells.back();
        if (label == "1") {
            rec.is_fraud = true;
        } else if (label != "0") {
            fail_at(line_no, "invalid is_fraud value '" + std::string(label) + "'");
        }
        records.push_back(std::move(rec));
    }
    return Dataset(std::move(schema), std::move(records));
}

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return read_csv(in);
}

void write_csv(const Dataset& d, std::ostream& out) {
    std::string buf;
    for (const auto& c : d.schema().credentials()) {
        buf += c.name;
        buf += ',';
    }
    buf += "is_fraud\n";
    for (const auto& rec : d.records()) {
        for (auto o : rec.outcomes) {
            if (o == Outcome::Pass) buf += '1';
            else if (o == Outcome::Fail) buf += '0';
            buf += ',';
        }
        buf += rec.is_fraud ? "1\n" : "0\n";
    }
    out << buf;
}

void write_csv(const Dataset& d, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    write_csv(d, out);
    out.flush();
    if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace ivrauth

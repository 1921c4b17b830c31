#include "hde/predictions.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hde/errors.hpp"

namespace hde {
namespace {

std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        const auto first = field.find_first_not_of(" \t");
        const auto last = field.find_last_not_of(" \t\r");
        fields.push_back(first == std::string::npos ? std::string{}
                                                    : field.substr(first, last - first + 1));
    }
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

bool parse_double(const std::string& s, double& out)
{
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

}  // namespace

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

PredictionTable parse_predictions_csv(const std::string& text, const std::string& source)
{
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& msg) -> DataError {
        return DataError(source + ":" + std::to_string(line_no) + ": " + msg);
    };

    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        header = split_fields(line);
        break;
    }
    if (header.empty()) throw DataError(source + ": empty prediction file");
    if (header.size() < 3 || header.front() != "id" || header.back() != "label") {
        throw fail("header must be id,p1,...,pK,label");
    }
    const std::size_t k = header.size() - 2;
    for (std::size_t c = 0; c < k; ++c) {
        if (header[c + 1] != "p" + std::to_string(c + 1)) {
            throw fail("header column " + std::to_string(c + 2) + " must be p" +
                       std::to_string(c + 1) + ", got '" + header[c + 1] + "'");
        }
    }

    PredictionTable table;
    std::vector<double> values;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            throw fail("expected " + std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
        }
        for (std::size_t c = 0; c < k; ++c) {
            double p = 0.0;
            if (!parse_double(fields[c + 1], p)) throw fail("unparsable probability '" + fields[c + 1] + "'");
            if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
                throw fail("probability " + fields[c + 1] + " outside [0,1]");
            }
            values.push_back(p);
        }
        const std::string& lab = fields.back();
        if (lab != "0" && lab != "1") throw fail("label must be 0 or 1, got '" + lab + "'");
        table.labels.push_back(lab == "1" ? Label::positive : Label::negative);
        table.ids.push_back(fields.front());
    }
    if (table.labels.empty()) throw DataError(source + ": no prediction rows");

    table.matrix = PredictionMatrix(table.labels.size(), k);
    for (std::size_t i = 0; i < table.labels.size(); ++i)
        for (std::size_t c = 0; c < k; ++c) table.matrix(i, c) = values[i * k + c];
    return table;
}

PredictionTable load_predictions_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path.string() + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_predictions_csv(buf.str(), path.string());
}

void write_predictions_csv(const std::filesystem::path& path, const PredictionTable& table)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path.string() + ": cannot open for writing");
    out << "id";
    for (std::size_t c = 0; c < table.matrix.cols(); ++c) out << ",p" << c + 1;
    out << ",label\n";
    for (std::size_t i = 0; i < table.matrix.rows(); ++i) {
        out << table.ids[i];
        for (double p : table.matrix.row(i)) out << ',' << format_double(p);
        out << ',' << to_int(table.labels[i]) << '\n';
    }
    if (!out) throw DataError(path.string() + ": write failed");
}

}  // namespace hde

#include "microdepth/dataset.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "microdepth/errors.hpp"
#include "microdepth/format.hpp"

namespace microdepth {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& field, const std::string& context) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        throw invalid_dataset(context + ": bad numeric field '" + field + "'");
    return v;
}

namespace {

// Minimal CSV line split; fields in these files never contain commas or
// quotes (documented schema).
std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::string read_line(std::istream& in) {
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

std::string feature_header(std::size_t patch_count) {
    std::string h = "path,depth_um";
    for (std::size_t p = 0; p < patch_count; ++p)
        for (int m = 1; m <= kNumMetrics; ++m)
            h += ",m" + std::to_string(m) + "_p" + std::to_string(p);
    for (std::size_t p = 0; p < patch_count; ++p) h += ",mask_p" + std::to_string(p);
    return h;
}

} // namespace

std::vector<LabelRow> read_labels_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error(io_error::Kind::MissingFile, path + ": cannot open file");
    const std::string header = read_line(in);
    if (header != "filename,depth_um")
        throw io_error(io_error::Kind::BadHeader, path + ": expected header 'filename,depth_um'");
    std::vector<LabelRow> rows;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 2)
            throw invalid_dataset(path + ":" + std::to_string(lineno) + ": expected 2 fields");
        rows.push_back({fields[0], parse_double(fields[1], path + ":" + std::to_string(lineno))});
    }
    return rows;
}

void write_labels_csv(const std::string& path, const std::vector<LabelRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error(io_error::Kind::IoFailure, path + ": cannot open for writing");
    out << "filename,depth_um\n";
    for (const auto& r : rows) out << r.filename << "," << format_double(r.depth_um) << "\n";
    if (!out) throw io_error(io_error::Kind::IoFailure, path + ": write failed");
}

void write_feature_csv(const std::string& path, const FeatureTable& table) {
    if (table.X.rows != table.paths.size() || table.X.rows != table.depths.size() ||
        table.X.rows != table.masks.size())
        throw invalid_dataset("write_feature_csv: inconsistent table");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error(io_error::Kind::IoFailure, path + ": cannot open for writing");
    out << feature_header(table.patch_count) << "\n";
    for (std::size_t r = 0; r < table.X.rows; ++r) {
        out << table.paths[r] << "," << format_double(table.depths[r]);
        for (std::size_t c = 0; c < table.X.cols; ++c) out << "," << format_double(table.X.at(r, c));
        for (std::size_t p = 0; p < table.patch_count; ++p)
            out << "," << (table.masks[r][p] ? "1" : "0");
        out << "\n";
    }
    if (!out) throw io_error(io_error::Kind::IoFailure, path + ": write failed");
}

FeatureTable read_feature_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error(io_error::Kind::MissingFile, path + ": cannot open file");
    const std::string header = read_line(in);
    const auto cols = split_csv(header);
    // layout: 2 + 6P + P columns
    if (cols.size() < 2 + 7 || (cols.size() - 2) % 7 != 0)
        throw io_error(io_error::Kind::BadHeader, path + ": not a feature CSV header");
    const std::size_t patch_count = (cols.size() - 2) / 7;
    if (header != feature_header(patch_count))
        throw io_error(io_error::Kind::BadHeader, path + ": unexpected feature column names");

    FeatureTable t;
    t.patch_count = patch_count;
    const std::size_t dim = patch_count * kNumMetrics;
    std::vector<double> values;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != cols.size())
            throw invalid_dataset(path + ":" + std::to_string(lineno) + ": ragged row");
        const std::string ctx = path + ":" + std::to_string(lineno);
        t.paths.push_back(fields[0]);
        t.depths.push_back(parse_double(fields[1], ctx));
        for (std::size_t c = 0; c < dim; ++c) values.push_back(parse_double(fields[2 + c], ctx));
        std::vector<bool> mask(patch_count);
        for (std::size_t p = 0; p < patch_count; ++p) {
            const std::string& f = fields[2 + dim + p];
            if (f != "0" && f != "1") throw invalid_dataset(ctx + ": mask fields must be 0/1");
            mask[p] = f == "1";
        }
        t.masks.push_back(std::move(mask));
    }
    t.X.rows = t.paths.size();
    t.X.cols = dim;
    t.X.a = std::move(values);
    return t;
}

std::vector<std::vector<double>> read_embeddings_csv(const std::string& path,
                                                     const std::vector<std::string>& paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error(io_error::Kind::MissingFile, path + ": cannot open file");
    const std::string header = read_line(in);
    const auto cols = split_csv(header);
    if (cols.size() < 2 || cols[0] != "path")
        throw io_error(io_error::Kind::BadHeader, path + ": expected header 'path,e0,...'");
    for (std::size_t i = 1; i < cols.size(); ++i)
        if (cols[i] != "e" + std::to_string(i - 1))
            throw io_error(io_error::Kind::BadHeader, path + ": expected column e" +
                                                          std::to_string(i - 1) + ", got " + cols[i]);
    const std::size_t dim = cols.size() - 1;

    std::unordered_map<std::string, std::vector<double>> by_path;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        const std::string ctx = path + ":" + std::to_string(lineno);
        if (fields.size() != cols.size()) throw invalid_dataset(ctx + ": ragged embedding row");
        std::vector<double> v(dim);
        for (std::size_t i = 0; i < dim; ++i) v[i] = parse_double(fields[1 + i], ctx);
        by_path[fields[0]] = std::move(v);
    }

    std::vector<std::vector<double>> out;
    out.reserve(paths.size());
    for (const std::string& p : paths) {
        const auto it = by_path.find(p);
        if (it == by_path.end())
            throw invalid_dataset(path + ": no embedding row for '" + p + "'");
        out.push_back(it->second);
    }
    return out;
}

} // namespace microdepth

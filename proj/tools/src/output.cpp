#include "spincool/cli/output.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

namespace spincool::cli {

namespace {

void write_text(const std::filesystem::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << text;
    out.flush();
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

void ensure_dir(const std::filesystem::path &dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    }
}

} // namespace

std::string format_number(double value) {
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    std::array<char, 64> buf{};
    const auto [ptr, ec] =
        std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 12);
    (void)ec;
    return std::string(buf.data(), ptr);
}

std::string to_csv(const Table &table) {
    std::string out;
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        out += (i ? "," : "") + table.columns[i];
    }
    out += '\n';
    for (const auto &row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) {
                out += ',';
            }
            out += format_number(row[i]);
        }
        out += '\n';
    }
    return out;
}

std::vector<std::filesystem::path> write_table(const std::filesystem::path &dir,
                                               const std::string &stem, const Table &table,
                                               OutputFormat format,
                                               const nlohmann::ordered_json &config,
                                               const nlohmann::ordered_json &metadata) {
    ensure_dir(dir);
    nlohmann::ordered_json doc;
    doc["config"] = config;
    if (!metadata.is_null()) {
        doc["metadata"] = metadata;
    }
    doc["columns"] = table.columns;
    if (format == OutputFormat::csv) {
        const auto csv = dir / (stem + ".csv");
        write_text(csv, to_csv(table));
        const auto side = dir / (stem + ".csv.json");
        write_text(side, doc.dump(2) + "\n");
        return {csv, side};
    }
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto &row : table.rows) {
        nlohmann::ordered_json r;
        for (std::size_t i = 0; i < row.size() && i < table.columns.size(); ++i) {
            if (std::isfinite(row[i])) {
                r[table.columns[i]] = row[i];
            } else {
                r[table.columns[i]] = nullptr;
            }
        }
        rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
    const auto path = dir / (stem + ".json");
    write_text(path, doc.dump(2) + "\n");
    return {path};
}

std::filesystem::path write_json(const std::filesystem::path &path,
                                 const nlohmann::ordered_json &document) {
    if (path.has_parent_path()) {
        ensure_dir(path.parent_path());
    }
    write_text(path, document.dump(2) + "\n");
    return path;
}

} // namespace spincool::cli

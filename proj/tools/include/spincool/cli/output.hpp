#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "spincool/cli/config.hpp"

namespace spincool::cli {

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

/// Shortest-looking decimal with 12 significant digits, independent of locale.
std::string format_number(double value);

std::string to_csv(const Table &table);

/// Writes `<stem>.csv` plus a `<stem>.csv.json` sidecar holding the resolved
/// config and `metadata`, or a single `<stem>.json` with everything inline.
/// Returns the paths written. Throws IoError.
std::vector<std::filesystem::path> write_table(const std::filesystem::path &dir,
                                               const std::string &stem, const Table &table,
                                               OutputFormat format,
                                               const nlohmann::ordered_json &config,
                                               const nlohmann::ordered_json &metadata = {});

std::filesystem::path write_json(const std::filesystem::path &path,
                                 const nlohmann::ordered_json &document);

} // namespace spincool::cli

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "spincool/cli/commands.hpp"
#include "spincool/cli/config.hpp"
#include "spincool/cli/output.hpp"
#include "spincool/error.hpp"

using namespace spincool;
using namespace spincool::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
    const fs::path dir = fs::temp_directory_path() / ("spincool_cli_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TEST(ConfigFile, ParsesSectionsAndComments) {
    const ConfigFile f = parse_config_text("nbar = 4\n# comment\n[fig3]\nlambda = 0.1  # trailing\n"
                                           "iterations=3\n[common]\nfock_dim = 90\n");
    EXPECT_EQ(f.at("common").at("nbar"), "4");
    EXPECT_EQ(f.at("common").at("fock_dim"), "90");
    EXPECT_EQ(f.at("fig3").at("lambda"), "0.1");
    EXPECT_EQ(f.at("fig3").at("iterations"), "3");
}

TEST(ConfigFile, MalformedLinesRejected) {
    EXPECT_THROW(parse_config_text("just words\n"), ConfigError);
    EXPECT_THROW(parse_config_text("[unterminated\n"), ConfigError);
}

TEST(ConfigFile, MissingFileIsIoError) {
    EXPECT_THROW(load_config_file("/nonexistent/spincool.ini"), IoError);
}

TEST(Resolve, Precedence) {
    const ConfigFile f = parse_config_text("lambda = 0.05\nnbar = 4\n[fig3]\nlambda = 0.08\n");
    const RunConfig a = resolve_config("fig3", f, {}, ".", 1);
    EXPECT_DOUBLE_EQ(a.model.lambda, 0.08);
    EXPECT_DOUBLE_EQ(a.model.nbar, 4.0);
    const RunConfig b = resolve_config("fig3", f, {"lambda=0.09", "fig3.nbar=5"}, ".", 1);
    EXPECT_DOUBLE_EQ(b.model.lambda, 0.09);
    EXPECT_DOUBLE_EQ(b.model.nbar, 5.0);
    EXPECT_EQ(b.iterations, 10);
}

TEST(Resolve, CommonKeysOnlyApplyWhereMeaningful) {
    const ConfigFile f = parse_config_text("lambda = 0.05\ndbdz = 2e6\n");
    const RunConfig c = resolve_config("estimate-coupling", f, {}, ".", 1);
    EXPECT_DOUBLE_EQ(c.dbdz, 2e6);
    const RunConfig d = resolve_config("fig1", f, {}, ".", 1);
    EXPECT_EQ(d.model.n_spins, 1);
}

TEST(Resolve, RejectsBadInput) {
    const ConfigFile empty;
    EXPECT_THROW(resolve_config("fig9", empty, {}, ".", 1), ConfigError);
    EXPECT_THROW(resolve_config("fig3", empty, {"colour=blue"}, ".", 1), ConfigError);
    EXPECT_THROW(resolve_config("fig3", empty, {"lambda"}, ".", 1), ConfigError);
    EXPECT_THROW(resolve_config("fig3", empty, {"lambda=abc"}, ".", 1), ConfigError);
    EXPECT_THROW(resolve_config("fig3", empty, {"lambda=-0.1"}, ".", 1), ConfigError);
    EXPECT_THROW(resolve_config("fig3", empty, {"fig6.lambda=0.1"}, ".", 1), ConfigError);
    EXPECT_THROW(resolve_config("fig1", empty, {"iterations=3"}, ".", 1), ConfigError);
    EXPECT_THROW(resolve_config("fig3", parse_config_text("bogus = 1\n"), {}, ".", 1), ConfigError);
    EXPECT_THROW(resolve_config("fig3", parse_config_text("[fig3]\ngamma = 1\n"), {}, ".", 1),
                 ConfigError);
    EXPECT_THROW(resolve_config("open", empty, {"n_spins=6"}, ".", 1), ConfigError);
    EXPECT_THROW(resolve_config("optimize", empty, {"n_spins=5"}, ".", 1), ConfigError);
}

TEST(Resolve, ExperimentDefaults) {
    const ConfigFile empty;
    const RunConfig col = resolve_config("collective", empty, {}, ".", 1);
    EXPECT_EQ(col.model.n_spins, 50);
    EXPECT_DOUBLE_EQ(col.model.lambda, 0.028);
    EXPECT_EQ(col.model.basis, Basis::collective);
    EXPECT_EQ(col.iterations, 5);
    const RunConfig open = resolve_config("open", empty, {}, ".", 1);
    ASSERT_TRUE(open.rates.has_value());
    EXPECT_DOUBLE_EQ(open.rates->gamma, 1e-3);
    EXPECT_DOUBLE_EQ(open.model.nbar, 3.0);
    EXPECT_EQ(open.model.fock_dim, 60);
    const RunConfig opt = resolve_config("optimize", empty, {}, ".", 1);
    EXPECT_EQ(opt.optimize.n_spins, 2);
}

TEST(Output, NumberFormatting) {
    EXPECT_EQ(format_number(0.5), "0.5");
    EXPECT_EQ(format_number(1e-7), "1e-07");
    EXPECT_EQ(format_number(std::nan("")), "nan");
    EXPECT_EQ(format_number(HUGE_VAL), "inf");
    EXPECT_EQ(format_number(0.1 + 0.2), "0.3");
}

TEST(Output, CsvWithSidecar) {
    const fs::path dir = scratch("csv");
    const Table t{{"a", "b"}, {{1.0, 2.5}, {3.0, -4.0}}};
    const auto files = write_table(dir, "table", t, OutputFormat::csv, {{"k", 1}}, {{"m", 2}});
    ASSERT_EQ(files.size(), 2u);
    EXPECT_EQ(slurp(dir / "table.csv"), "a,b\n1,2.5\n3,-4\n");
    const auto side = nlohmann::json::parse(slurp(dir / "table.csv.json"));
    EXPECT_EQ(side["config"]["k"], 1);
    EXPECT_EQ(side["metadata"]["m"], 2);
    fs::remove_all(dir);
}

TEST(Output, JsonFormat) {
    const fs::path dir = scratch("json");
    const Table t{{"a"}, {{1.0}, {2.0}}};
    write_table(dir, "table", t, OutputFormat::json, {}, {});
    const auto doc = nlohmann::json::parse(slurp(dir / "table.json"));
    EXPECT_EQ(doc["columns"][0], "a");
    EXPECT_EQ(doc["rows"].size(), 2u);
    fs::remove_all(dir);
}

TEST(Coupling, HandValueAndScaling) {
    const double x_zpf = std::sqrt(kHbar / (2.0 * 1e-14 * 1e6));
    const double expected = kBohrMagneton * 1e6 * x_zpf / (kHbar * 1e6);
    EXPECT_NEAR(estimate_coupling(1e6, 1e-14, 1e6), expected, 1e-15);
    EXPECT_NEAR(estimate_coupling(1e6, 1e-14, 1e6), 6.3857e-3, 1e-6);
    EXPECT_NEAR(estimate_coupling(3e6, 1e-14, 1e6), 3.0 * estimate_coupling(1e6, 1e-14, 1e6), 1e-15);
    EXPECT_THROW(estimate_coupling(0.0, 1e-14, 1e6), DomainError);
    EXPECT_THROW(estimate_coupling(1e6, -1.0, 1e6), DomainError);
}

TEST(Commands, RecordCsvHeader) {
    const fs::path dir = scratch("fig3");
    const RunConfig c =
        resolve_config("fig3", {}, {"n_max=1", "iterations=2", "fock_dim=120"}, dir, 1);
    run_command(c);
    const std::string csv = slurp(dir / "fig3_N1.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "iter,mean_phonon,ratio,dx,dy,p_step,p_cum");
    fs::remove_all(dir);
}

TEST(Commands, Fig1ZeroCouplingColumnIsUnity) {
    const fs::path dir = scratch("fig1");
    const RunConfig c = resolve_config("fig1", {},
                                       {"t_points=4", "lambda_points=5", "fock_dim=120", "format=json"},
                                       dir, 1);
    run_command(c);
    const auto doc = nlohmann::json::parse(slurp(dir / "fig1_ratio.json"));
    int zero_rows = 0;
    for (const auto &row : doc["rows"]) {
        if (row["lambda"].get<double>() == 0.0) {
            EXPECT_NEAR(row["ratio"].get<double>(), 1.0, 1e-12);
            ++zero_rows;
        }
    }
    EXPECT_EQ(zero_rows, 4);
    fs::remove_all(dir);
}

TEST(Commands, OptimizeOutputDeterministic) {
    const fs::path a = scratch("opt_a");
    const fs::path b = scratch("opt_b");
    const std::vector<std::string> sets{"restarts=4", "fock_dim=120"};
    run_command(resolve_config("optimize", {}, sets, a, 1));
    run_command(resolve_config("optimize", {}, sets, b, 1));
    const std::string ja = slurp(a / "optimize.json");
    EXPECT_EQ(ja, slurp(b / "optimize.json"));
    EXPECT_TRUE(nlohmann::json::parse(ja).contains("coefficients"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Commands, EstimateCouplingSpansOperatingRange) {
    const fs::path dir = scratch("coupling");
    run_command(resolve_config("estimate-coupling", {}, {}, dir, 1));
    const std::string csv = slurp(dir / "estimate_coupling.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "dbdz,lambda");
    const auto meta = nlohmann::json::parse(slurp(dir / "estimate_coupling.csv.json"))["metadata"];
    EXPECT_NEAR(std::log10(meta["lambda_min"].get<double>()), -4.0, 0.3);
    EXPECT_NEAR(std::log10(meta["lambda_max"].get<double>()), -1.0, 0.3);
    EXPECT_TRUE(meta["in_operating_range"].get<bool>());
    fs::remove_all(dir);
}

#include "spincool/cli/commands.hpp"

#include <cmath>
#include <sstream>

#include "spincool/cli/output.hpp"
#include "spincool/error.hpp"
#include "spincool/lindblad.hpp"
#include "spincool/optimizer.hpp"
#include "spincool/protocol.hpp"

namespace spincool::cli {

namespace {

using json = nlohmann::ordered_json;

std::vector<double> lambda_grid(const RunConfig &c) {
    std::vector<double> out;
    if (c.lambda_points == 1) {
        out.push_back(c.lambda_max);
        return out;
    }
    for (int j = 0; j < c.lambda_points; ++j) {
        out.push_back(c.lambda_max * j / (c.lambda_points - 1));
    }
    return out;
}

json row_json(const SweepRow &r) {
    json j;
    j["t"] = r.t;
    j["lambda"] = r.lambda;
    j["ratio"] = r.ratio;
    j["var_ratio"] = r.var_ratio;
    j["probability"] = r.probability;
    return j;
}

Table record_table(const std::vector<IterationRecord> &records) {
    Table t{{"iter", "mean_phonon", "ratio", "dx", "dy", "p_step", "p_cum"}, {}};
    for (const auto &r : records) {
        t.rows.push_back({static_cast<double>(r.index), r.mean_phonon, r.ratio, r.dx, r.dy,
                          r.step_probability, r.cumulative_probability});
    }
    return t;
}

json run_metadata(const ProtocolRun &run) {
    json m;
    m["iterations_completed"] = run.records.size();
    if (!run.records.empty()) {
        const double p = run.records.back().cumulative_probability;
        m["final_ratio"] = run.records.back().ratio;
        m["cumulative_probability"] = p;
        m["expected_full_restarts"] = p > 0.0 ? 1.0 / p : 0.0;
    }
    if (run.halted_at) {
        m["halted_at_iteration"] = *run.halted_at;
        m["halted_probability"] = run.halted_probability;
    } else {
        m["halted_at_iteration"] = nullptr;
    }
    return m;
}

std::string describe_run(const std::string &label, const ProtocolRun &run) {
    std::ostringstream s;
    s << label << ": ";
    if (run.records.empty()) {
        s << "no successful iteration";
    } else {
        const auto &r = run.records.back();
        s << "K=" << r.index << " mean_phonon=" << format_number(r.mean_phonon)
          << " ratio=" << format_number(r.ratio) << " p_cum=" << format_number(r.cumulative_probability);
    }
    if (run.halted_at) {
        s << " (halted at iteration " << *run.halted_at << ")";
    }
    return s.str();
}

void append(CommandResult &result, const std::vector<std::filesystem::path> &files) {
    result.files.insert(result.files.end(), files.begin(), files.end());
}

[[noreturn]] void throw_halt(const std::string &label, const ProtocolRun &run) {
    std::ostringstream msg;
    msg << label << ": postselection probability " << run.halted_probability << " at iteration "
        << *run.halted_at << " is below the floor " << kProbabilityFloor
        << " (records up to the halt were written)";
    throw VanishingBranchError(msg.str(), run.halted_probability, *run.halted_at);
}

} // namespace

double estimate_coupling(double dbdz, double mass, double omega) {
    if (!(dbdz > 0.0 && mass > 0.0 && omega > 0.0)) {
        throw DomainError("estimate_coupling: gradient, mass and frequency must be positive");
    }
    const double zero_point = std::sqrt(kHbar / (2.0 * mass * omega * omega * omega));
    return kBohrMagneton * dbdz * zero_point / kHbar;
}

CommandResult cmd_fig1(const RunConfig &config) {
    ModelParams params = config.model;
    params.n_spins = 1;
    params.basis = Basis::product;
    std::vector<double> times;
    for (int i = 1; i <= config.t_points; ++i) {
        times.push_back(std::numbers::pi * i / config.t_points);
    }
    const std::vector<double> lambdas = lambda_grid(config);
    const auto rows = sweep_ratio(params, Strategy::independent(1), lambdas, times, config.jobs);

    Table ratio{{"t", "lambda", "ratio"}, {}};
    Table var{{"t", "lambda", "var_ratio"}, {}};
    for (const auto &r : rows) {
        ratio.rows.push_back({r.t, r.lambda, r.ratio});
        var.rows.push_back({r.t, r.lambda, r.var_ratio});
    }
    const SweepRow opt = locate_thermal_optimum(rows);
    const SweepRow low = grid_minimum(rows);
    json meta;
    meta["optimum"] = row_json(opt);
    meta["grid_minimum"] = row_json(low);

    const json cfg = config.to_json();
    CommandResult result;
    append(result, write_table(config.out_dir, "fig1_ratio", ratio, config.format, cfg, meta));
    append(result, write_table(config.out_dir, "fig1_variance", var, config.format, cfg, meta));
    result.summary.push_back("optimum (variance-balanced): t=" + format_number(opt.t) +
                             " lambda=" + format_number(opt.lambda) +
                             " ratio=" + format_number(opt.ratio) +
                             " dx/dy=" + format_number(opt.var_ratio));
    result.summary.push_back("grid minimum: t=" + format_number(low.t) +
                             " lambda=" + format_number(low.lambda) +
                             " ratio=" + format_number(low.ratio));
    return result;
}

CommandResult cmd_fig2(const RunConfig &config) {
    const std::vector<double> lambdas = lambda_grid(config);
    Table table{{"n_spins", "lambda", "ratio", "var_ratio", "p_step"}, {}};
    json optima = json::array();
    CommandResult result;
    double previous = 0.0;
    for (int n = 1; n <= config.n_max; ++n) {
        ModelParams params = config.model;
        params.n_spins = n;
        params.basis = Basis::product;
        const Strategy strategy = Strategy::independent(n);
        const SingleStepEvaluator eval(params, strategy);
        for (double l : lambdas) {
            const auto r = eval(l);
            table.rows.push_back({static_cast<double>(n), l, r.ratio, r.var_ratio, r.probability});
        }
        const LambdaOptimum best = optimal_lambda(params, strategy, 0.0, config.lambda_max);
        json o;
        o["n_spins"] = n;
        o["lambda"] = best.lambda;
        o["ratio"] = best.ratio;
        o["probability"] = best.probability;
        if (n > 1) {
            o["enhancement_ratio"] = best.ratio / previous;
        }
        optima.push_back(o);
        previous = best.ratio;
        result.summary.push_back("N=" + std::to_string(n) + ": lambda*=" +
                                 format_number(best.lambda) + " ratio=" + format_number(best.ratio));
    }
    json meta;
    meta["optima"] = optima;
    append(result,
           write_table(config.out_dir, "fig2", table, config.format, config.to_json(), meta));
    return result;
}

CommandResult cmd_fig3(const RunConfig &config) {
    CommandResult result;
    std::optional<std::pair<std::string, ProtocolRun>> halted;
    for (int n = 1; n <= config.n_max; ++n) {
        ModelParams params = config.model;
        params.n_spins = n;
        params.basis = Basis::product;
        ProtocolRun run = simulate_protocol(params, Strategy::independent(n), config.iterations);
        const std::string stem = "fig3_N" + std::to_string(n);
        append(result, write_table(config.out_dir, stem, record_table(run.records), config.format,
                                   config.to_json(), run_metadata(run)));
        result.summary.push_back(describe_run("N=" + std::to_string(n), run));
        if (run.halted_at && !halted) {
            halted.emplace(stem, std::move(run));
        }
    }
    if (halted) {
        throw_halt(halted->first, halted->second);
    }
    return result;
}

CommandResult cmd_fig6(const RunConfig &config) {
    CommandResult result;
    ModelParams corr = config.model;
    corr.n_spins = 3;
    corr.basis = Basis::product;
    const ProtocolRun correlated =
        simulate_protocol(corr, Strategy::correlated(target_corr3()), config.iterations);
    ModelParams ind = config.model;
    ind.n_spins = 4;
    ind.basis = Basis::product;
    const ProtocolRun independent =
        simulate_protocol(ind, Strategy::independent(4), config.iterations);

    append(result, write_table(config.out_dir, "fig6_corr3", record_table(correlated.records),
                               config.format, config.to_json(), run_metadata(correlated)));
    append(result,
           write_table(config.out_dir, "fig6_independent4", record_table(independent.records),
                       config.format, config.to_json(), run_metadata(independent)));
    result.summary.push_back(describe_run("N=3 correlated", correlated));
    result.summary.push_back(describe_run("N=4 independent", independent));
    if (correlated.halted_at) {
        throw_halt("fig6_corr3", correlated);
    }
    if (independent.halted_at) {
        throw_halt("fig6_independent4", independent);
    }
    return result;
}

CommandResult cmd_collective(const RunConfig &config) {
    ModelParams params = config.model;
    params.basis = Basis::collective;
    const ProtocolRun run =
        simulate_protocol(params, Strategy::collective(params.n_spins), config.iterations);
    CommandResult result;
    append(result, write_table(config.out_dir, "collective", record_table(run.records),
                               config.format, config.to_json(), run_metadata(run)));
    const RVector dist = fock_distribution(run.final_state);
    Table fock{{"n", "probability"}, {}};
    for (Eigen::Index n = 0; n < dist.size(); ++n) {
        fock.rows.push_back({static_cast<double>(n), dist(n)});
    }
    append(result, write_table(config.out_dir, "collective_fock", fock, config.format,
                               config.to_json(), run_metadata(run)));
    result.summary.push_back(describe_run("collective N=" + std::to_string(params.n_spins), run));
    if (run.halted_at) {
        throw_halt("collective", run);
    }
    return result;
}

CommandResult cmd_open(const RunConfig &config) {
    const LindbladRates rates = config.rates.value_or(LindbladRates{});
    ModelParams params = config.model;
    params.basis = Basis::product;
    OpenProtocolOptions options;
    options.dt = config.dt;
    options.reinitialize_spins = config.reinitialize_spins;
    const ProtocolRun run = run_protocol_open(params, Strategy::independent(params.n_spins), rates,
                                              config.iterations, options);
    json meta = run_metadata(run);
    meta["mechanics_feasible"] = rates.mechanics_feasible();
    meta["spins_feasible"] = rates.spins_feasible();
    CommandResult result;
    append(result, write_table(config.out_dir, "open", record_table(run.records), config.format,
                               config.to_json(), meta));
    result.summary.push_back(describe_run("open N=" + std::to_string(params.n_spins), run));
    if (!rates.mechanics_feasible() || !rates.spins_feasible()) {
        result.summary.push_back("note: rates lie outside the feasibility envelope");
    }
    if (run.halted_at) {
        throw_halt("open", run);
    }
    return result;
}

CommandResult cmd_optimize(const RunConfig &config) {
    const OptimizeResult best = optimize_target(config.optimize, config.model);
    json doc;
    doc["config"] = config.to_json();
    json coeffs = json::array();
    json raw = json::array();
    for (Eigen::Index i = 0; i < best.target.coefficients().size(); ++i) {
        coeffs.push_back(best.target.coefficients()(i).real());
        raw.push_back(best.raw_target.coefficients()(i).real());
    }
    doc["coefficients"] = coeffs;
    doc["raw_coefficients"] = raw;
    doc["ratio"] = best.ratio;
    doc["probability"] = best.probability;
    doc["converged"] = best.converged;
    doc["evaluations"] = best.evaluations;
    doc["best_restart"] = best.best_restart;

    const int n = config.optimize.n_spins;
    if (config.optimize.basis == Basis::product && (n == 2 || n == 3)) {
        const TargetState printed = n == 2 ? target_corr2() : target_corr3();
        const TargetEvaluation ref = evaluate_target(printed, config.model);
        json r;
        r["name"] = n == 2 ? "corr2" : "corr3";
        json pc = json::array();
        for (Eigen::Index i = 0; i < printed.coefficients().size(); ++i) {
            pc.push_back(printed.coefficients()(i).real());
        }
        r["coefficients"] = pc;
        r["ratio"] = ref.ratio;
        r["probability"] = ref.probability;
        doc["reference"] = r;
    }
    if (config.optimize.basis == Basis::product && n == 1) {
        const cplx dn = best.target.coefficients()(0);
        const cplx up = best.target.coefficients()(1);
        json bloch;
        bloch["theta"] = 2.0 * std::atan2(std::abs(dn), std::abs(up));
        bloch["delta"] = std::abs(dn) > 0.0 && std::abs(up) > 0.0 ? std::arg(dn * std::conj(up)) : 0.0;
        doc["bloch"] = bloch;
    }
    CommandResult result;
    result.files.push_back(write_json(config.out_dir / "optimize.json", doc));
    result.summary.push_back("N=" + std::to_string(n) + ": ratio=" + format_number(best.ratio) +
                             " probability=" + format_number(best.probability) +
                             (best.converged ? "" : " (not converged)"));
    return result;
}

CommandResult cmd_estimate_coupling(const RunConfig &config) {
    const double lambda = estimate_coupling(config.dbdz, config.mass, config.omega);
    Table table{{"dbdz", "lambda"}, {}};
    for (int i = 0; i < config.dbdz_points; ++i) {
        const double frac = config.dbdz_points == 1 ? 0.0 : double(i) / (config.dbdz_points - 1);
        const double g = config.dbdz_min * std::pow(config.dbdz_max / config.dbdz_min, frac);
        table.rows.push_back({g, estimate_coupling(g, config.mass, config.omega)});
    }
    json meta;
    meta["lambda"] = lambda;
    meta["lambda_min"] = table.rows.front()[1];
    meta["lambda_max"] = table.rows.back()[1];
    meta["in_operating_range"] = lambda > 1e-4 && lambda < 1e-1;
    CommandResult result;
    append(result, write_table(config.out_dir, "estimate_coupling", table, config.format,
                               config.to_json(), meta));
    result.summary.push_back("lambda = " + format_number(lambda) + " at dB/dz = " +
                             format_number(config.dbdz) + " T/m");
    result.summary.push_back("sweep: lambda in [" + format_number(table.rows.front()[1]) + ", " +
                             format_number(table.rows.back()[1]) + "]");
    return result;
}

CommandResult run_command(const RunConfig &config) {
    const std::string &e = config.experiment;
    if (e == "fig1") {
        return cmd_fig1(config);
    }
    if (e == "fig2") {
        return cmd_fig2(config);
    }
    if (e == "fig3") {
        return cmd_fig3(config);
    }
    if (e == "fig6") {
        return cmd_fig6(config);
    }
    if (e == "collective") {
        return cmd_collective(config);
    }
    if (e == "open") {
        return cmd_open(config);
    }
    if (e == "optimize") {
        return cmd_optimize(config);
    }
    if (e == "estimate-coupling") {
        return cmd_estimate_coupling(config);
    }
    throw ConfigError("unknown experiment '" + e + "'");
}

} // namespace spincool::cli

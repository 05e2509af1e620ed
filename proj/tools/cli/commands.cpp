#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "diffstiff/errors.hpp"
#include "diffstiff/fixtures.hpp"
#include "diffstiff/functions.hpp"
#include "diffstiff/optimize.hpp"
#include "diffstiff/problem_io.hpp"
#include "report.hpp"

namespace diffstiff::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kReportKind = "diffstiff-report";

struct Input {
    std::string path;
    std::string sha256;
    Problem problem;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    out << text;
}

/// Problem files and earlier reports (which echo their problem) are both accepted.
Input load_input(const std::string& path) {
    Input in;
    in.path = path;
    const std::string text = read_file(path);
    in.sha256 = sha256_hex(text);
    const json doc = json::parse(text, nullptr, false);
    if (doc.is_object() && doc.value("kind", "") == kReportKind && doc.contains("problem")) {
        in.problem = problem_from_json(doc.at("problem"));
    } else {
        in.problem = parse_problem(text);
    }
    return in;
}

json header(const std::string& command, const Input& in, const Problem& problem) {
    json doc;
    doc["kind"] = kReportKind;
    doc["command"] = command;
    doc["version"] = DIFFSTIFF_VERSION;
    doc["input"] = {{"path", in.path}, {"sha256", in.sha256}};
    json echo = problem_to_json(problem);
    doc["problem_sha256"] = sha256_hex(echo.dump());
    doc["settings"] = echo.at("optimizer");
    doc["problem"] = std::move(echo);
    return doc;
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string format(double v) {
    std::ostringstream ss;
    ss << std::setprecision(6) << v;
    return ss.str();
}

template <class F>
int guarded(const std::string& path, std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const ParseError& e) {
        err << path << ":" << e.line() << ":" << e.column() << ": " << e.what() << "\n";
        return kValidation;
    } catch (const NotPositiveDefinite& e) {
        err << path << ": singular structure: " << e.what() << "\n";
        return kSingular;
    } catch (const OptimizerError& e) {
        err << path << ": optimizer failure: " << e.what() << "\n";
        return kOptimizerFailure;
    } catch (const FiniteDifferenceError& e) {
        err << path << ": " << e.what() << "\n";
        return kSingular;
    } catch (const Error& e) {
        err << path << ": " << e.what() << "\n";
        return kValidation;
    } catch (const json::exception& e) {
        err << path << ": " << e.what() << "\n";
        return kValidation;
    } catch (const fs::filesystem_error& e) {
        err << path << ": " << e.what() << "\n";
        return kValidation;
    }
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
    std::string file;
    std::string out;
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
    const Input in = load_input(a.file);
    Evaluator ev(in.problem);
    const auto cache = ev.analyze(in.problem.initial_point());
    json doc = header("analyze", in, in.problem);
    doc["analysis"] = analysis_json(ev, cache);
    const std::string text = doc.dump(2) + "\n";
    if (a.out.empty()) {
        out << text;
    } else {
        write_file(a.out, text);
    }
    return kOk;
}

struct GradcheckArgs {
    std::string file;
    std::string output = "all";
    double h = 1e-5;
    double tolerance = 1e-4;
    std::string out;
};

int cmd_gradcheck(const GradcheckArgs& a, std::ostream& out, std::ostream& err, const Hooks& hooks) {
    const Input in = load_input(a.file);
    Evaluator ev(in.problem);
    if (hooks.evaluator) hooks.evaluator(ev);
    const auto x = in.problem.initial_point();
    const auto cache = ev.analyze(x);

    std::vector<std::size_t> outputs;
    if (a.output == "all") {
        for (std::size_t k = 0; k < ev.n_outputs(); ++k) outputs.push_back(k);
    } else {
        const auto k = ev.find_output(a.output);
        if (!k) throw ValidationError("unknown output '" + a.output + "'");
        outputs.push_back(*k);
    }
    Eigen::MatrixXd fd;
    if (outputs.size() > 1) {
        fd = ev.finite_difference_all(x, a.h);
    } else {
        fd = ev.finite_difference(x, outputs[0], a.h).transpose();
    }

    std::string csv = "output,variable,adjoint,finite_difference,rel_err,within_noise\r\n";
    constexpr double eps = std::numeric_limits<double>::epsilon();
    double worst = 0.0;
    std::string worst_at;
    std::size_t failed = 0;
    for (std::size_t r = 0; r < outputs.size(); ++r) {
        const std::size_t k = outputs[r];
        const double f0 = std::abs(ev.value(cache, k));
        const Eigen::VectorXd adj = ev.gradient(cache, k);
        const Eigen::VectorXd f = fd.row(static_cast<Eigen::Index>(outputs.size() > 1 ? k : 0)).transpose();
        for (Eigen::Index i = 0; i < adj.size(); ++i) {
            const auto iu = static_cast<std::size_t>(i);
            const double diff = std::abs(adj[i] - f[i]);
            const double rel = diff / std::max({std::abs(f[i]), std::abs(adj[i]), 1e-300});
            const double noise = 1e3 * eps * std::max(1.0, f0) / (a.h * std::max(1.0, std::abs(x[iu])));
            const bool quiet = diff <= noise;
            if (rel > a.tolerance && !quiet) ++failed;
            if (!quiet && rel > worst) {
                worst = rel;
                worst_at = ev.output_name(k) + " / " + in.problem.variables[iu].name;
            }
            const std::vector<std::string> fields{ev.output_name(k), in.problem.variables[iu].name, number(adj[i]),
                                                  number(f[i]), number(rel), quiet ? "true" : "false"};
            csv += csv_row(fields);
        }
    }
    if (a.out.empty()) {
        out << csv;
    } else {
        write_file(a.out, csv);
    }
    err << "max rel err above FD noise " << format(worst) << (worst_at.empty() ? "" : " at " + worst_at) << ", "
        << failed << " entries over tolerance, " << outputs.size() << " output(s)\n";
    return failed > 0 ? kCheckFailed : kOk;
}

struct OptimizeArgs {
    std::string file;
    std::optional<std::string> alg;
    std::optional<std::string> grad;
    std::optional<double> time;
    std::optional<std::uint64_t> seed;
    std::optional<int> max_iterations;
    std::optional<int> threads;
    std::string geometry;
    std::string out = "out";
};

OptimizerSettings apply_overrides(OptimizerSettings s, const OptimizeArgs& a) {
    if (a.alg) {
        if (*a.alg == "mma") s.algorithm = Algorithm::MMA;
        else if (*a.alg == "lbfgs") s.algorithm = Algorithm::LBFGS;
        else if (*a.alg == "ga") s.algorithm = Algorithm::GA;
    }
    if (a.grad) s.gradient = *a.grad == "fd" ? GradientMode::FiniteDifference : GradientMode::Adjoint;
    if (a.time) s.time_limit = *a.time;
    if (a.seed) s.seed = *a.seed;
    if (a.max_iterations) s.max_iterations = *a.max_iterations;
    if (a.threads) s.threads = *a.threads;
    return s;
}

int cmd_optimize(const OptimizeArgs& a, std::ostream& out) {
    const Input in = load_input(a.file);
    Problem problem = in.problem;
    if (!a.geometry.empty()) problem = with_geometry(problem, json::parse(read_file(a.geometry)));
    problem.optimizer = apply_overrides(problem.optimizer, a);
    validate(problem);

    const auto result = optimize(problem);
    const fs::path dir(a.out);
    json doc = header("optimize", in, problem);
    if (!a.geometry.empty()) doc["geometry_input"] = {{"path", a.geometry}, {"sha256", sha256_hex(read_file(a.geometry))}};
    doc["result"] = result_json(problem, result);
    if (!result.x_final.empty()) {
        Evaluator ev(problem);
        const auto cache = ev.analyze(result.x_final);
        doc["analysis"] = analysis_json(ev, cache);
        write_file(dir / "geometry.json", geometry_to_json(cache.model).dump(2) + "\n");
    }
    write_file(dir / "report.json", doc.dump(2) + "\n");
    write_file(dir / "history.csv", history_csv(result));

    out << "objective " << format(result.objective_final);
    if (!result.history.empty()) out << " (initial " << format(result.history.front().objective) << ")";
    out << ", max violation " << format(result.max_violation) << ", " << (result.feasible ? "feasible" : "infeasible")
        << ", " << to_string(result.reason) << " after " << (result.history.empty() ? 0 : result.history.back().iteration)
        << " iterations in " << format(result.wall_time) << " s\n";
    if (result.reason == Termination::AnalysisFailure) return kOptimizerFailure;
    return result.feasible ? kOk : kOptimizerFailure;
}

struct SweepArgs {
    std::string file;
    std::string groups;
    std::string materials;
    int jobs = 1;
    std::optional<double> time;
    std::string out = "sweep";
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
    const Input in = load_input(a.file);
    const auto groups = split(a.groups);
    const auto materials = split(a.materials);
    if (groups.empty() || materials.empty()) throw ValidationError("--groups and --materials need at least one entry");
    OptimizerSettings settings = in.problem.optimizer;
    settings.algorithm = Algorithm::MMA;
    if (a.time) settings.time_limit = *a.time;

    const auto runs = material_sweep(in.problem, groups, materials, a.jobs, settings);
    const fs::path dir(a.out);
    std::string csv = "id,embodied_carbon,mass,compliance,volume,objective,feasible,max_violation,iterations,"
                      "wall_time_s,termination,error\r\n";
    std::size_t failures = 0;
    for (const auto& run : runs) {
        Problem assigned = assign_materials(in.problem, groups, run.assignment);
        assigned.optimizer = settings;
        json doc = header("sweep", in, assigned);
        doc["id"] = run.id;
        doc["groups"] = groups;
        json assignment = json::object();
        for (std::size_t g = 0; g < groups.size(); ++g) {
            assignment[groups[g]] = assigned.model.materials()[run.assignment[g]].name;
        }
        doc["assignment"] = std::move(assignment);
        doc["error"] = run.error;
        if (run.error.empty()) {
            doc["result"] = result_json(assigned, run.result);
            Evaluator ev(assigned);
            doc["analysis"] = analysis_json(ev, ev.analyze(run.result.x_final));
        } else {
            ++failures;
        }
        write_file(dir / "runs" / (run.id + ".json"), doc.dump(2) + "\n");
        const bool ok = run.error.empty();
        const std::vector<std::string> fields{
            run.id,
            number(run.embodied_carbon),
            number(run.mass),
            number(run.compliance),
            number(run.volume),
            ok ? number(run.result.objective_final) : "",
            ok && run.result.feasible ? "true" : "false",
            ok ? number(run.result.max_violation) : "",
            ok && !run.result.history.empty() ? std::to_string(run.result.history.back().iteration) : "",
            ok ? number(run.result.wall_time) : "",
            ok ? to_string(run.result.reason) : "",
            run.error};
        csv += csv_row(fields);
    }
    write_file(dir / "summary.csv", csv);
    out << runs.size() << " runs, " << failures << " failed; summary in " << (dir / "summary.csv").string() << "\n";
    return failures == runs.size() ? kOptimizerFailure : kOk;
}

struct FixtureArgs {
    std::string name = "all";
    std::string out = ".";
};

int cmd_fixture(const FixtureArgs& a, std::ostream& out) {
    std::vector<std::string> names = a.name == "all" ? fixtures::names() : std::vector<std::string>{a.name};
    for (const auto& name : names) {
        const auto f = fixtures::by_name(name);
        const fs::path path = fs::path(a.out) / (name + ".json");
        write_file(path, fixtures::to_json(f).dump(2) + "\n");
        out << path.string() << "\n";
    }
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const Hooks& hooks) {
    CLI::App app{"Differentiable structural analysis and optimization of trusses and frames."};
    app.name("diffstiff");
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);

    AnalyzeArgs analyze;
    auto* c_analyze = app.add_subcommand("analyze", "Analyse a problem at its initial point and write a JSON report");
    c_analyze->add_option("file", analyze.file, "Problem file or earlier report")->required();
    c_analyze->add_option("--out", analyze.out, "Report path (default: stdout)");

    GradcheckArgs gradcheck;
    auto* c_grad = app.add_subcommand("gradcheck", "Compare adjoint gradients with central finite differences");
    c_grad->add_option("file", gradcheck.file, "Problem file")->required();
    c_grad->add_option("--output", gradcheck.output, "Output name or index, or 'all'");
    c_grad->add_option("--h", gradcheck.h, "Relative finite-difference step")->check(CLI::PositiveNumber);
    c_grad->add_option("--tol", gradcheck.tolerance, "Relative error threshold")->check(CLI::PositiveNumber);
    c_grad->add_option("--out", gradcheck.out, "CSV path (default: stdout)");

    OptimizeArgs optimize_args;
    auto* c_opt = app.add_subcommand("optimize", "Run an optimization and write report, history and geometry");
    c_opt->add_option("file", optimize_args.file, "Problem file or earlier report")->required();
    c_opt->add_option("--alg", optimize_args.alg, "mma, lbfgs or ga")->check(CLI::IsMember({"mma", "lbfgs", "ga"}));
    c_opt->add_option("--grad", optimize_args.grad, "adjoint or fd")->check(CLI::IsMember({"adjoint", "fd"}));
    c_opt->add_option("--time", optimize_args.time, "Time limit in seconds")->check(CLI::PositiveNumber);
    c_opt->add_option("--seed", optimize_args.seed, "GA seed");
    c_opt->add_option("--max-iter", optimize_args.max_iterations, "Iteration cap")->check(CLI::NonNegativeNumber);
    c_opt->add_option("--threads", optimize_args.threads, "Worker threads for gradient rows")->check(CLI::PositiveNumber);
    c_opt->add_option("--geometry", optimize_args.geometry, "Node positions from an earlier run's geometry.json");
    c_opt->add_option("--out", optimize_args.out, "Output directory");

    SweepArgs sweep;
    auto* c_sweep = app.add_subcommand("sweep", "Run one MMA optimization per material assignment");
    c_sweep->add_option("file", sweep.file, "Problem file")->required();
    c_sweep->add_option("--groups", sweep.groups, "Comma-separated element groups")->required();
    c_sweep->add_option("--materials", sweep.materials, "Comma-separated material names")->required();
    c_sweep->add_option("--jobs", sweep.jobs, "Concurrent runs")->check(CLI::PositiveNumber);
    c_sweep->add_option("--time", sweep.time, "Time limit per run in seconds")->check(CLI::PositiveNumber);
    c_sweep->add_option("--out", sweep.out, "Output directory");

    FixtureArgs fixture;
    auto* c_fix = app.add_subcommand("fixture", "Write canonical fixture problem files");
    c_fix->add_option("name", fixture.name, "Fixture name or 'all'");
    c_fix->add_option("--out", fixture.out, "Output directory");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kValidation;
    }

    if (c_analyze->parsed()) return guarded(analyze.file, err, [&] { return cmd_analyze(analyze, out); });
    if (c_grad->parsed()) return guarded(gradcheck.file, err, [&] { return cmd_gradcheck(gradcheck, out, err, hooks); });
    if (c_opt->parsed()) return guarded(optimize_args.file, err, [&] { return cmd_optimize(optimize_args, out); });
    if (c_sweep->parsed()) return guarded(sweep.file, err, [&] { return cmd_sweep(sweep, out); });
    if (c_fix->parsed()) return guarded(fixture.name, err, [&] { return cmd_fixture(fixture, out); });
    return kValidation;
}

}  // namespace diffstiff::cli

// Command-line front end: admissibility checks, expansion construction,
// reference solves, lemma suites and the convergence verdict.
#include "CLI11.hpp"

#include "surge/harness.hpp"
#include "surge/principles.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace surge;
namespace fs = std::filesystem;

struct StageClock {
    std::vector<std::pair<std::string, double>> stages;
    std::chrono::steady_clock::time_point mark = std::chrono::steady_clock::now();

    void lap(const std::string& name) {
        const auto now = std::chrono::steady_clock::now();
        stages.emplace_back(name, std::chrono::duration<double>(now - mark).count());
        mark = now;
    }
};

std::string hash_hex(const std::string& data) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(data)));
    return buf;
}

// Wall-clock log and resolved settings; deliberately kept out of the CSV
// outputs so those stay byte-identical between runs.
void write_run_manifest(const std::string& out_dir, const std::string& command,
                        const std::vector<std::pair<std::string, std::string>>& info,
                        const StageClock& clock) {
    fs::create_directories(out_dir);
    std::ofstream man(fs::path(out_dir) / "run_manifest.txt");
    if (!man) throw ConfigError("cannot write to " + out_dir);
    man << "surge 0.1.0\n";
    man << "command: " << command << '\n';
    for (const auto& [k, v] : info) man << k << ": " << v << '\n';
    char buf[64];
    for (const auto& [name, seconds] : clock.stages) {
        std::snprintf(buf, sizeof buf, "%.3f", seconds);
        man << "stage " << name << ": " << buf << " s\n";
    }
}

std::string join_eps(const std::vector<double>& eps) {
    std::string s;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (i) s += ';';
        s += format_double(eps[i]);
    }
    return s;
}

int run_check(const std::string& config) {
    const ProblemSpec spec = load_problem_file(config);
    const ConditionReport report = check_conditions(spec);
    for (const auto& c : report.checks)
        std::printf("%-24s %-4s %s\n", c.id.c_str(), c.passed ? "pass" : "FAIL",
                    c.detail.c_str());
    std::printf("%s\n", report.all_passed() ? "admissible" : "not admissible");
    return report.all_passed() ? 0 : 1;
}

int run_expand(const std::string& config, int order, double dzeta,
               const std::string& out_dir) {
    StageClock clock;
    const ProblemSpec spec = load_problem_file(config);
    ExpansionOptions eo;
    eo.order = order;
    if (dzeta > 0.0) eo.dzeta = dzeta;
    const Expansion exp = build_expansion(spec, eo);
    clock.lap("expansion");

    std::printf("states                  %d\n", spec.m);
    std::printf("slowness                %s\n", format_double(exp.slowness).c_str());
    std::printf("dispersion              %s\n",
                format_double(exp.diffusion.g).c_str());
    std::printf("diffusion               %s\n",
                format_double(exp.diffusion.mu).c_str());
    std::printf("gap                     %s\n", format_double(exp.sd.gap).c_str());
    std::printf("drift coefficient       %s\n", format_double(exp.fbar_lin).c_str());
    std::printf("self-interaction        %s\n", format_double(exp.fbar_quad).c_str());
    if (order >= 1) {
        std::printf("source (third deriv)    %s\n",
                    format_double(exp.src_third).c_str());
        std::printf("source (first deriv)    %s\n",
                    format_double(exp.src_first).c_str());
        std::printf("source (mixed)          %s\n",
                    format_double(exp.src_mixed).c_str());
    }

    fs::create_directories(out_dir);
    std::ofstream csv(fs::path(out_dir) / "amplitudes.csv", std::ios::binary);
    if (!csv) throw ConfigError("cannot write to " + out_dir);
    const AmplitudeProfile& p0 = exp.phi0;
    std::vector<int> cols;
    for (int k : {0, p0.snapshots() / 4, p0.snapshots() / 2,
                  3 * p0.snapshots() / 4, p0.snapshots() - 1})
        if (cols.empty() || k > cols.back()) cols.push_back(k);
    csv << "term,zeta,t,value\n";
    for (int term = 0; term <= (order >= 1 ? 1 : 0); ++term) {
        const AmplitudeProfile& prof = term == 0 ? exp.phi0 : exp.phi1;
        for (int k : cols)
            for (int i = 0; i < prof.nodes(); ++i)
                csv << "phi" << term << ','
                    << format_double(prof.zeta0 + i * prof.dzeta) << ','
                    << format_double(k * prof.dt) << ','
                    << format_double(prof.values(i, k)) << '\n';
    }
    clock.lap("write");

    write_run_manifest(out_dir, "expand",
                       {{"config", config},
                        {"config_hash", hash_hex(serialize_problem(spec))},
                        {"order", std::to_string(order)},
                        {"dzeta", format_double(eo.dzeta)},
                        {"slowness", format_double(exp.slowness)},
                        {"dispersion", format_double(exp.diffusion.g)},
                        {"diffusion", format_double(exp.diffusion.mu)},
                        {"gap", format_double(exp.sd.gap)}},
                       clock);
    return 0;
}

int run_solve(const std::string& config, double eps, double dx, double time,
              const std::string& out_dir) {
    StageClock clock;
    const ProblemSpec spec = load_problem_file(config);
    if (!(eps > 0.0)) throw ConfigError("eps must be positive");
    SolveOptions so;
    if (dx > 0.0) {
        if (dx > 0.25 * eps * eps * (1.0 + 1e-12))
            throw ConfigError("dx must resolve the layer: dx <= 0.25 eps^2");
        so.dx = dx;
    }
    const double t_final = time >= 0.0 ? time : spec.horizon;
    const SolveResult sol = solve_reference(spec, eps, {t_final}, so);
    clock.lap("solve");

    fs::create_directories(out_dir);
    std::ofstream csv(fs::path(out_dir) / "solution.csv", std::ios::binary);
    if (!csv) throw ConfigError("cannot write to " + out_dir);
    csv << "x";
    for (int p = 0; p < spec.m; ++p) csv << ",u" << p;
    csv << '\n';
    const Matrix& u = sol.states.back();
    for (long i = 0; i < sol.x.size(); ++i) {
        csv << format_double(sol.x[i]);
        for (int p = 0; p < spec.m; ++p) csv << ',' << format_double(u(i, p));
        csv << '\n';
    }
    clock.lap("write");

    std::printf("nodes %ld, dt %s, steps %ld, recorded t = %s\n",
                static_cast<long>(sol.x.size()), format_double(sol.dt).c_str(),
                sol.steps, format_double(sol.times.back()).c_str());
    write_run_manifest(out_dir, "solve",
                       {{"config", config},
                        {"config_hash", hash_hex(serialize_problem(spec))},
                        {"eps", format_double(eps)},
                        {"dx", format_double(sol.dx)},
                        {"time", format_double(t_final)}},
                       clock);
    return 0;
}

int run_lemmas(int count, unsigned long long seed, const std::string& out_dir) {
    StageClock clock;
    std::vector<SuiteResult> suites;
    suites.push_back(run_lemma1_suite(count, seed));
    clock.lap("lemma1");
    suites.push_back(run_lemma2_suite(count, seed));
    clock.lap("lemma2");
    suites.push_back(run_lemma3_suite(count, seed));
    clock.lap("lemma3");
    suites.push_back(run_lemma4_suite(count, seed));
    clock.lap("lemma4");
    suites.push_back(run_lemma5_suite(seed));
    clock.lap("lemma5");

    fs::create_directories(out_dir);
    bool all_ok = true;
    for (const SuiteResult& s : suites) {
        std::ofstream csv(fs::path(out_dir) / (s.name + ".csv"), std::ios::binary);
        if (!csv) throw ConfigError("cannot write to " + out_dir);
        for (const std::string& row : s.csv_rows) csv << row << '\n';
        std::printf("%-8s %-4s %s\n", s.name.c_str(), s.ok ? "pass" : "FAIL",
                    s.summary.c_str());
        all_ok = all_ok && s.ok;
    }
    clock.lap("write");
    write_run_manifest(out_dir, "lemmas",
                       {{"count", std::to_string(count)},
                        {"seed", std::to_string(seed)}},
                       clock);
    return all_ok ? 0 : 1;
}

int run_verify(const std::string& config, int order, std::vector<double> eps,
               double slack, double dzeta, int threads,
               const std::string& out_dir) {
    StageClock clock;
    const ProblemSpec spec = load_problem_file(config);
    SweepOptions opt;
    opt.order = order;
    opt.eps_values = std::move(eps);
    opt.slack = slack;
    opt.dzeta = dzeta;
    opt.threads = threads;
    const ConvergenceReport rep = error_sweep(spec, opt);
    clock.lap("sweep");
    const TheoremVerdict verdict = theorem_check(rep, opt.slack);
    emit_report(rep, spec, out_dir);
    clock.lap("report");

    std::printf("%-10s %-14s %-14s %-14s\n", "eps", "error", "defect", "ratio");
    for (const SweepEntry& en : rep.entries)
        std::printf("%-10s %-14s %-14s %-14s\n", format_double(en.eps).c_str(),
                    format_double(en.error).c_str(),
                    format_double(en.defect).c_str(),
                    format_double(en.ratio).c_str());
    std::printf("%s\n", verdict.detail.c_str());
    std::printf("verdict: %s\n", verdict.passed ? "pass" : "FAIL");

    write_run_manifest(out_dir, "verify",
                       {{"config", config},
                        {"config_hash", hash_hex(serialize_problem(spec))},
                        {"order", std::to_string(order)},
                        {"eps", join_eps(opt.eps_values)},
                        {"slack", format_double(slack)},
                        {"dzeta", format_double(rep.dzeta)},
                        {"verdict", verdict.passed ? "pass" : "fail"}},
                       clock);
    return verdict.passed ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"surge expansion toolkit for stiff transport-relaxation systems"};
    app.set_version_flag("--version", "0.1.0");
    app.require_subcommand(1);

    std::string config, out_dir = "out";
    int order = 0, count = 50, threads = 0;
    double eps = 0.0, dx = 0.0, time = -1.0, slack = 0.3, dzeta = 0.0;
    unsigned long long seed = 2026;
    std::vector<double> eps_list{0.2, 0.1, 0.05, 0.025};

    CLI::App* c_check = app.add_subcommand("check", "report the admissibility conditions");
    c_check->add_option("config", config, "problem description file")->required();

    CLI::App* c_expand =
        app.add_subcommand("expand", "build the expansion and dump its profiles");
    c_expand->add_option("config", config)->required();
    c_expand->add_option("--order", order, "expansion order (0 or 1)");
    c_expand->add_option("--dzeta", dzeta, "amplitude grid resolution");
    c_expand->add_option("--out", out_dir, "output directory");

    CLI::App* c_solve = app.add_subcommand("solve", "run the reference scheme");
    c_solve->add_option("config", config)->required();
    c_solve->add_option("--eps", eps, "perturbation parameter")->required();
    c_solve->add_option("--dx", dx, "grid step (default 0.25 eps^2)");
    c_solve->add_option("--time", time, "recording time (default the horizon)");
    c_solve->add_option("--out", out_dir, "output directory");

    CLI::App* c_lemmas =
        app.add_subcommand("lemmas", "run the randomized comparison-principle suites");
    c_lemmas->add_option("--count", count, "instances per suite");
    c_lemmas->add_option("--seed", seed, "base seed");
    c_lemmas->add_option("--out", out_dir, "output directory");

    CLI::App* c_verify =
        app.add_subcommand("verify", "measure the remainder decay and give a verdict");
    c_verify->add_option("config", config)->required();
    c_verify->add_option("--order", order, "expansion order (0 or 1)");
    c_verify->add_option("--eps", eps_list, "eps values, strictly decreasing")
        ->delimiter(',');
    c_verify->add_option("--slack", slack, "slope slack");
    c_verify->add_option("--dzeta", dzeta, "amplitude grid resolution");
    c_verify->add_option("--threads", threads, "concurrent sweeps (0 = auto)");
    c_verify->add_option("--out", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (c_check->parsed()) return run_check(config);
        if (c_expand->parsed()) return run_expand(config, order, dzeta, out_dir);
        if (c_solve->parsed()) return run_solve(config, eps, dx, time, out_dir);
        if (c_lemmas->parsed()) return run_lemmas(count, seed, out_dir);
        if (c_verify->parsed())
            return run_verify(config, order, eps_list, slack, dzeta, threads,
                              out_dir);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

// nsprobe: query-counted estimators for noise sensitivity, influence and
// bias of Boolean functions, plus exact oracles and hard-instance
// experiments. JSON for single reports, CSV for sweeps.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "nsprobe/errors.hpp"
#include "nsprobe/estimators.hpp"
#include "nsprobe/exact.hpp"
#include "nsprobe/fnspec.hpp"
#include "nsprobe/lowerbounds.hpp"
#include "nsprobe/nscore.hpp"
#include "nsprobe/oracle.hpp"
#include "nsprobe/version.hpp"

namespace {

using nlohmann::json;
using namespace nsprobe;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitCapExceeded = 3;
constexpr int kExitInfeasibleDimension = 4;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag)
        return *flag;
    if (const char* env = std::getenv("NSPROBE_SEED"))
        return std::strtoull(env, nullptr, 10);
    return 0;
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open output file: " + path);
    out << content;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

SpecPtr load_function(const std::string& file, const std::string& inline_text) {
    if (!inline_text.empty())
        return deserialize(inline_text);
    if (!file.empty())
        return load_spec_file(file);
    throw std::invalid_argument("provide a function with --fn FILE or --fn-inline JSON");
}

json params_to_json(const NsParams& p) {
    json j;
    j["n"] = p.n;
    j["delta"] = p.delta;
    j["epsilon"] = p.epsilon;
    j["C"] = p.C;
    j["mode"] = to_string(p.mode);
    j["log_base"] = to_string(p.log_base);
    j["eta1"] = p.eta1;
    j["eta2"] = p.eta2;
    j["t1"] = p.t1;
    j["t2"] = p.t2;
    j["w"] = p.w;
    j["kappa"] = p.kappa;
    j["influence_accuracy"] = p.influence_accuracy;
    j["influence_kappa"] = p.influence_kappa;
    j["influence_trial_cap"] = p.influence_trial_cap;
    j["edge_attempt_cap"] = p.edge_attempt_cap;
    j["w_loop_cap"] = p.w_loop_cap;
    j["iteration_cap"] = p.iteration_cap;
    return j;
}

json report_to_json(const EstimateReport& r) { return json::parse(r.to_json_string()); }

struct EstimateArgs {
    std::string kind;
    std::string fn_file, fn_inline;
    double delta = 0.05;
    double eps = 0.25;
    double C = 2.0;
    std::string mode = "practical";
    std::string log_base = "natural";
    std::optional<std::uint64_t> seed;
    int workers = 1;
    long long kappa = -1;
    long long trial_cap = -1;
    long long fixed_trials = 0;
    bool trust_monotone = false;
    std::string out;
};

int run_estimate(const EstimateArgs& a) {
    SpecPtr spec = load_function(a.fn_file, a.fn_inline);
    std::uint64_t seed = resolve_seed(a.seed);
    Mode mode = a.mode == "paper" ? Mode::paper : Mode::practical;
    LogBase lb = a.log_base == "base2" ? LogBase::base2 : LogBase::natural;

    OracleSession session(spec);
    json out;
    out["tool"] = "nsprobe";
    out["version"] = kVersion;
    out["command"] = "estimate";
    out["kind"] = a.kind;
    out["seed"] = seed;
    out["workers"] = a.workers;
    out["function"] = json::parse(serialize(*spec));

    SamplingOptions opts;
    opts.seed = seed;
    opts.workers = a.workers;
    opts.kappa = a.kappa;
    opts.trial_cap = a.trial_cap;
    opts.fixed_trials = a.fixed_trials > 0;
    opts.fixed_n = a.fixed_trials;
    opts.trust_monotone = a.trust_monotone;

    int exit_code = kExitOk;
    if (a.kind == "ns") {
        NsParams params = NsParams::make(spec->n, a.delta, a.eps, a.C, mode, lb);
        params.trust_monotone = a.trust_monotone;
        out["config"] = params_to_json(params);
        NsReport r = estimate_ns(session, params, seed, a.workers);
        out["report"] = json::parse(r.to_json_string());
        if (r.status != NsStatus::ok)
            exit_code = kExitCapExceeded;
    } else if (a.kind == "ns-std") {
        out["config"] = {{"delta", a.delta}, {"epsilon", a.eps}};
        EstimateReport r = std_ns_estimate(session, a.delta, a.eps, opts);
        out["report"] = report_to_json(r);
        if (r.capped)
            exit_code = kExitCapExceeded;
    } else if (a.kind == "influence") {
        NsParams params = NsParams::make(spec->n, std::min(0.5, 1.0 / spec->n), a.eps, a.C, mode, lb);
        params.trust_monotone = a.trust_monotone;
        out["config"] = params_to_json(params);
        EstimateReport r = influence_estimate(session, a.eps, params, opts);
        out["report"] = report_to_json(r);
        if (r.capped)
            exit_code = kExitCapExceeded;
    } else if (a.kind == "bias") {
        out["config"] = {{"epsilon", a.eps}};
        EstimateReport r = std_bias_estimate(session, a.eps, opts);
        out["report"] = report_to_json(r);
        if (r.capped)
            exit_code = kExitCapExceeded;
    } else {
        throw std::invalid_argument("unknown estimate kind: " + a.kind);
    }
    out["session_queries"] = session.query_count();
    write_output(a.out, out.dump(2) + "\n");
    return exit_code;
}

struct ExactArgs {
    std::string fn_file, fn_inline;
    std::vector<double> deltas;
    std::vector<double> rhos;
    std::string out;
};

int run_exact(const ExactArgs& a) {
    SpecPtr spec = load_function(a.fn_file, a.fn_inline);
    if (spec->n > 26)
        throw DimensionError("exact: spectrum computations require n <= 26");
    std::vector<double> deltas = a.deltas;
    if (deltas.empty())
        for (int i = 1; i <= 10; ++i)
            deltas.push_back(0.05 * i);

    exact::TruthTable table = exact::truth_table(*spec);
    exact::FourierSpectrum fs = exact::fourier_spectrum(table);

    json out;
    out["tool"] = "nsprobe";
    out["version"] = kVersion;
    out["command"] = "exact";
    out["function"] = json::parse(serialize(*spec));
    out["n"] = spec->n;
    out["bias"] = exact::exact_bias(table);
    out["influence"] = {{"edge_scan", exact::influence_edge_scan(table)}, {"fourier", fs.influence()}};
    out["parseval"] = fs.parseval();
    json ns = json::array();
    for (double d : deltas) {
        json row;
        row["delta"] = d;
        row["fourier"] = fs.ns(d);
        if (spec->n <= 10)
            row["direct"] = exact::exact_ns_direct(table, d);
        row["stability_identity"] = 0.5 * (1.0 - fs.stability(1.0 - 2.0 * d));
        ns.push_back(row);
    }
    out["ns"] = ns;
    json st = json::array();
    std::vector<double> rhos = a.rhos;
    if (rhos.empty())
        for (double d : deltas)
            rhos.push_back(1.0 - 2.0 * d);
    for (double r : rhos)
        st.push_back({{"rho", r}, {"stability", fs.stability(r)}});
    out["stability"] = st;
    write_output(a.out, out.dump(2) + "\n");
    return kExitOk;
}

struct BenchArgs {
    std::vector<int> n_list;
    std::string delta_rule = "1/n";
    double eps = 0.25;
    double C = 2.0;
    int runs = 30;
    std::optional<std::uint64_t> seed;
    int workers = 1;
    std::string mode = "practical";
    std::vector<std::string> methods{"main", "std"};
    std::string subject = "majority";
    std::string out;
};

double delta_for(const std::string& rule, int n) {
    if (rule == "1/n")
        return 1.0 / n;
    if (rule == "1/sqrt-n")
        return 1.0 / std::sqrt(static_cast<double>(n));
    if (rule.rfind("const:", 0) == 0)
        return std::stod(rule.substr(6));
    throw std::invalid_argument("unknown delta rule: " + rule + " (use 1/n, 1/sqrt-n, const:<x>)");
}

SpecPtr bench_subject(const std::string& subject, int n) {
    if (subject == "majority")
        return fn::majority(n);
    if (subject == "dictator")
        return fn::dictator(n, 0);
    throw std::invalid_argument("unknown bench subject: " + subject);
}

int run_bench(const BenchArgs& a) {
    std::uint64_t seed = resolve_seed(a.seed);
    std::ostringstream csv;
    csv << "n,delta,method,run,estimate,queries,wall_ms\n";
    for (int n : a.n_list) {
        double delta = delta_for(a.delta_rule, n);
        SpecPtr spec = bench_subject(a.subject, n);
        Mode mode = a.mode == "paper" ? Mode::paper : Mode::practical;
        for (const std::string& method : a.methods) {
            for (int run = 0; run < a.runs; ++run) {
                OracleSession session(spec);
                std::uint64_t run_seed = Rng::derive(seed, (static_cast<std::uint64_t>(n) << 20) ^
                                                               static_cast<std::uint64_t>(run))
                                             .u64();
                auto start = std::chrono::steady_clock::now();
                double estimate = 0.0;
                std::uint64_t queries = 0;
                if (method == "main") {
                    NsParams params = NsParams::make(n, delta, a.eps, a.C, mode);
                    params.trust_monotone = true;
                    NsReport r = estimate_ns(session, params, run_seed, a.workers);
                    estimate = r.estimate;
                    queries = r.queries;
                } else if (method == "std") {
                    SamplingOptions opts;
                    opts.seed = run_seed;
                    opts.workers = a.workers;
                    EstimateReport r = std_ns_estimate(session, delta, a.eps, opts);
                    estimate = r.value;
                    queries = r.queries;
                } else {
                    throw std::invalid_argument("unknown bench method: " + method);
                }
                auto stop = std::chrono::steady_clock::now();
                double ms = std::chrono::duration<double, std::milli>(stop - start).count();
                csv << n << ',' << fmt_double(delta) << ',' << method << ',' << run << ','
                    << fmt_double(estimate) << ',' << queries << ',' << fmt_double(ms) << '\n';
            }
        }
    }
    write_output(a.out, csv.str());
    return kExitOk;
}

struct LowerboundArgs {
    std::string kind;  // thinness | distinguish | halpha | family
    std::string family_kind = "D2_bias";
    int n = 16;
    double C1 = 2.0;
    double C2 = 0.0;
    int clauses = 0;
    int width = 0;
    double delta = 0.0;
    double alpha = 1.0 / 64;
    int draws = 200;
    long long samples = 100000;
    long long trials = 2000;
    long long budget = 100000;
    std::vector<long long> q_list{1, 2, 4, 8};
    std::vector<double> deltas;
    int level = -1;
    std::optional<std::uint64_t> seed;
    std::string out;
};

int run_lowerbound(const LowerboundArgs& a) {
    std::uint64_t seed = resolve_seed(a.seed);
    Rng rng(seed);
    lb::FamilySpec family;
    family.kind = lb::family_kind_from_string(a.family_kind);
    family.n = a.n;
    family.C1 = a.C1;
    family.C2 = a.C2;
    family.num_clauses = a.clauses;
    family.clause_width = a.width;
    family.delta = a.delta;

    if (a.kind == "thinness") {
        int level = a.level >= 0 ? a.level : lb::family_threshold(family);
        SpecPtr f = lb::draw_family(family, rng);
        lb::ThinnessReport rep = lb::measure_thinness(*f, level, a.samples, rng);
        json out;
        out["tool"] = "nsprobe";
        out["version"] = kVersion;
        out["command"] = "lowerbound thinness";
        out["seed"] = seed;
        out["family"] = json::parse(lb::serialize_family(family.resolved()))["family"];
        out["level"] = rep.level;
        out["estimate"] = rep.estimate;
        out["samples"] = rep.samples;
        out["std_error"] = rep.std_error;
        out["exact"] = rep.exact;
        write_output(a.out, out.dump(2) + "\n");
        return kExitOk;
    }
    if (a.kind == "distinguish") {
        std::ostringstream csv;
        csv << "q,trials,success_rate,bound,thinness,std_error,vacuous\n";
        for (long long q : a.q_list) {
            lb::DistinguishPoint p = lb::distinguisher_experiment(family, q, a.trials, rng);
            csv << p.q << ',' << p.trials << ',' << fmt_double(p.success_rate) << ','
                << fmt_double(p.bound) << ',' << fmt_double(p.thinness) << ','
                << fmt_double(p.std_error) << ',' << (p.vacuous ? 1 : 0) << '\n';
        }
        write_output(a.out, csv.str());
        return kExitOk;
    }
    if (a.kind == "halpha") {
        std::vector<double> deltas = a.deltas;
        if (deltas.empty())
            deltas = {1.0 / a.n, 0.25};
        std::ostringstream csv;
        csv << "draw,alpha,delta,ns,in_band\n";
        for (int d = 0; d < a.draws; ++d) {
            SpecPtr f = lb::draw_h_alpha(a.n, a.alpha, rng);
            exact::TruthTable table = exact::truth_table(*f);
            exact::FourierSpectrum fs = exact::fourier_spectrum(table);
            for (double delta : deltas) {
                double ns = fs.ns(delta);
                bool in_band = ns >= 0.1 * a.alpha && ns <= 3.0 * a.alpha;
                csv << d << ',' << fmt_double(a.alpha) << ',' << fmt_double(delta) << ','
                    << fmt_double(ns) << ',' << (in_band ? 1 : 0) << '\n';
            }
        }
        write_output(a.out, csv.str());
        return kExitOk;
    }
    if (a.kind == "family") {
        lb::FamilyProperties p = lb::verify_family_properties(family, a.budget, rng);
        json out;
        out["tool"] = "nsprobe";
        out["version"] = kVersion;
        out["command"] = "lowerbound family";
        out["seed"] = seed;
        out["family"] = json::parse(lb::serialize_family(family.resolved()))["family"];
        out["bias"] = p.bias;
        out["influence"] = p.influence;
        out["ns"] = p.ns;
        out["delta"] = p.delta;
        out["target_bias"] = p.target_bias;
        out["target_influence"] = p.target_influence;
        out["target_ns"] = p.target_ns;
        out["exact"] = p.exact;
        write_output(a.out, out.dump(2) + "\n");
        return kExitOk;
    }
    throw std::invalid_argument("unknown lowerbound kind: " + a.kind);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nsprobe: noise-sensitivity estimators and oracles for Boolean functions"};
    app.set_version_flag("--version", nsprobe::kVersion);
    app.require_subcommand(1);

    EstimateArgs ea;
    auto* est = app.add_subcommand("estimate", "Run an estimator on a DSL-specified function");
    est->add_option("kind", ea.kind, "ns | ns-std | influence | bias")->required();
    est->add_option("--fn", ea.fn_file, "function DSL file");
    est->add_option("--fn-inline", ea.fn_inline, "function DSL as an inline JSON string");
    est->add_option("--delta", ea.delta, "noise parameter in (0, 1/2]")
        ->check(CLI::Range(1e-12, 0.5));
    est->add_option("--eps", ea.eps, "relative accuracy in (0, 1)")
        ->check(CLI::Range(1e-6, 0.999999));
    est->add_option("--C", ea.C, "lower-bound exponent");
    est->add_option("--mode", ea.mode)->check(CLI::IsMember({"paper", "practical"}));
    est->add_option("--log-base", ea.log_base)->check(CLI::IsMember({"natural", "base2"}));
    est->add_option("--seed", ea.seed, "master seed (falls back to NSPROBE_SEED, then 0)");
    est->add_option("--workers", ea.workers)->check(CLI::Range(1, 256));
    est->add_option("--kappa", ea.kappa, "success target override");
    est->add_option("--trial-cap", ea.trial_cap, "trial cap override");
    est->add_option("--fixed-trials", ea.fixed_trials, "fixed trial count instead of sequential");
    est->add_flag("--trust-monotone", ea.trust_monotone, "skip the small-n monotonicity check");
    est->add_option("--out", ea.out, "output path (default stdout)");

    ExactArgs xa;
    auto* exc = app.add_subcommand("exact", "Exact bias/influence/NS/stability via truth table");
    exc->add_option("--fn", xa.fn_file, "function DSL file");
    exc->add_option("--fn-inline", xa.fn_inline, "function DSL as an inline JSON string");
    exc->add_option("--deltas", xa.deltas, "NS grid (default 0.05..0.5)")->delimiter(',');
    exc->add_option("--rhos", xa.rhos, "stability grid (default 1-2*delta)")->delimiter(',');
    exc->add_option("--out", xa.out);

    BenchArgs ba;
    auto* ben = app.add_subcommand("bench", "Query-complexity sweep, CSV output");
    ben->add_option("--n-list", ba.n_list, "dimensions to sweep")->required()->delimiter(',');
    ben->add_option("--delta-rule", ba.delta_rule, "1/n | 1/sqrt-n | const:<x>");
    ben->add_option("--eps", ba.eps)->check(CLI::Range(1e-6, 0.999999));
    ben->add_option("--C", ba.C);
    ben->add_option("--runs", ba.runs)->check(CLI::Range(0, 100000));
    ben->add_option("--seed", ba.seed);
    ben->add_option("--workers", ba.workers)->check(CLI::Range(1, 256));
    ben->add_option("--mode", ba.mode)->check(CLI::IsMember({"paper", "practical"}));
    ben->add_option("--methods", ba.methods, "subset of {main, std}")->delimiter(',');
    ben->add_option("--subject", ba.subject, "majority | dictator");
    ben->add_option("--out", ba.out);

    LowerboundArgs la;
    auto* low = app.add_subcommand("lowerbound", "Hard-instance family experiments");
    low->add_option("kind", la.kind, "thinness | distinguish | halpha | family")->required();
    low->add_option("--family-kind", la.family_kind)
        ->check(CLI::IsMember({"D1", "D2_bias", "D2_influence", "D2_ns"}));
    low->add_option("--n", la.n)->check(CLI::Range(2, 64));
    low->add_option("--C1", la.C1);
    low->add_option("--C2", la.C2);
    low->add_option("--clauses", la.clauses, "0 = paper shape");
    low->add_option("--width", la.width, "0 = paper shape");
    low->add_option("--delta", la.delta);
    low->add_option("--alpha", la.alpha);
    low->add_option("--draws", la.draws);
    low->add_option("--samples", la.samples);
    low->add_option("--trials", la.trials);
    low->add_option("--budget", la.budget);
    low->add_option("--q", la.q_list, "query budgets for distinguish")->delimiter(',');
    low->add_option("--deltas", la.deltas)->delimiter(',');
    low->add_option("--level", la.level, "thinness level (default: family threshold)");
    low->add_option("--seed", la.seed);
    low->add_option("--out", la.out);

    try {
        app.parse(argc, argv);
        if (*est)
            return run_estimate(ea);
        if (*exc)
            return run_exact(xa);
        if (*ben)
            return run_bench(ba);
        if (*low)
            return run_lowerbound(la);
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    } catch (const DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasibleDimension;
    } catch (const CapExceededError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCapExceeded;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

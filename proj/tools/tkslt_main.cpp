#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "tkslt/simkit.hpp"

using nlohmann::json;
using namespace tkslt;

namespace {

constexpr int kSchemaVersion = 1;

enum ExitCode {
    exit_ok = 0,
    exit_fail = 1,        // a verification verdict of FAIL
    exit_validation = 2,  // bad flags or domain errors
    exit_io = 3,          // unreadable config / unwritable output
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

const char* mode_name(Mode m) { return m == Mode::dsd ? "dsd" : "standalone"; }

json finite_or_null(double v) {
    if (!std::isfinite(v)) {
        return nullptr;
    }
    return v;
}

// Resolve an output path: "-" or empty means stdout; relative paths are
// placed under TKSLT_OUT_DIR when that is set.
std::string resolve_out(const std::string& path) {
    if (path.empty() || path == "-") {
        return {};
    }
    const char* dir = std::getenv("TKSLT_OUT_DIR");
    if (dir && *dir && path.front() != '/') {
        return std::string(dir) + "/" + path;
    }
    return path;
}

void write_text(const std::string& path, const std::string& body) {
    const std::string target = resolve_out(path);
    if (target.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream f(target, std::ios::binary);
    if (!f) {
        throw std::ios_base::failure("cannot open for writing: " + target);
    }
    f << body;
    if (!f) {
        throw std::ios_base::failure("write failed: " + target);
    }
}

// Flags override config-file values: inject "--key value" tokens for any
// config key not already present on the command line.
void merge_config_file(std::vector<std::string>& args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        }
    }
    if (path.empty()) {
        return;
    }
    std::ifstream f(path);
    if (!f) {
        throw std::ios_base::failure("cannot read config: " + path);
    }
    json cfg = json::parse(f);  // parse errors propagate
    if (!cfg.is_object()) {
        throw std::invalid_argument("config must be a JSON object");
    }
    for (const auto& [key, value] : cfg.items()) {
        const std::string flag = "--" + key;
        bool present = false;
        for (const auto& a : args) {
            if (a == flag || a.rfind(flag + "=", 0) == 0) {
                present = true;
                break;
            }
        }
        if (present) {
            continue;
        }
        if (value.is_boolean()) {
            if (value.get<bool>()) {
                args.push_back(flag);
            }
            continue;
        }
        args.push_back(flag);
        if (value.is_string()) {
            args.push_back(value.get<std::string>());
        } else if (value.is_array()) {
            std::string joined;
            for (const auto& v : value) {
                if (!joined.empty()) {
                    joined += ",";
                }
                joined += v.is_string() ? v.get<std::string>() : v.dump();
            }
            args.push_back(joined);
        } else {
            args.push_back(value.dump());
        }
    }
}

struct SpecFlags {
    std::uint32_t vocab = 16;
    std::string kind = "static";
    double lambda = 0.5;
    double temp = 1.0;
    std::uint64_t pair_seed = 1;

    void attach(CLI::App* app) {
        app->add_option("--vocab", vocab, "vocabulary size")->check(CLI::Range(2u, 1u << 20));
        app->add_option("--kind", kind, "pair kind: static or markov")
            ->check(CLI::IsMember({"static", "markov"}));
        app->add_option("--lambda", lambda, "drafter/target logit overlap in [0,1]")
            ->check(CLI::Range(0.0, 1.0));
        app->add_option("--temp", temp, "target-side softmax temperature")
            ->check(CLI::Range(0.0, 100.0));
        app->add_option("--pair-seed", pair_seed, "seed the model pair is derived from");
    }

    SyntheticPairSpec build() const {
        SyntheticPairSpec s;
        s.vocab_size = vocab;
        s.kind = kind == "static" ? PairKind::static_pair : PairKind::markov;
        s.overlap_lambda = lambda;
        s.target_temp = temp;
        s.seed = pair_seed;
        return s;
    }

    json echo() const {
        return {{"vocab", vocab}, {"kind", kind},      {"lambda", lambda},
                {"temp", temp},   {"pair_seed", pair_seed}};
    }
};

struct ChannelFlags {
    double uplink_rate = 50e6;
    double downlink_rate = 50e6;
    std::uint32_t prob_bits = 16;
    double t_llm = 0.04452173913043478;  // full-vocab transfer at b=0.23
    double t_slm = 0.0031165217391304346;
    bool include_index_bits = false;
    bool include_downlink = false;

    void attach(CLI::App* app) {
        app->add_option("--uplink-rate", uplink_rate, "uplink rate, bit/s")
            ->check(CLI::PositiveNumber);
        app->add_option("--downlink-rate", downlink_rate, "downlink rate, bit/s")
            ->check(CLI::PositiveNumber);
        app->add_option("--prob-bits", prob_bits, "bits per probability (16 or 32)")
            ->check(CLI::IsMember({16, 32}));
        app->add_option("--t-llm", t_llm, "verifier step time, s")->check(CLI::PositiveNumber);
        app->add_option("--t-slm", t_slm, "drafter step time, s")->check(CLI::PositiveNumber);
        app->add_flag("--include-index-bits", include_index_bits,
                      "count token-index bits in the payload");
        app->add_flag("--include-downlink", include_downlink,
                      "charge the verdict's return trip");
    }

    ChannelConfig build(std::uint32_t vocab) const {
        ChannelConfig c;
        c.uplink_rate = uplink_rate;
        c.downlink_rate = downlink_rate;
        c.prob_bits = prob_bits;
        c.vocab_size = vocab;
        c.t_llm = t_llm;
        c.t_slm = t_slm;
        c.include_index_bits = include_index_bits;
        c.include_downlink = include_downlink;
        return c;
    }

    json echo() const {
        return {{"uplink_rate", uplink_rate},
                {"downlink_rate", downlink_rate},
                {"prob_bits", prob_bits},
                {"t_llm", t_llm},
                {"t_slm", t_slm},
                {"include_index_bits", include_index_bits},
                {"include_downlink", include_downlink}};
    }
};

std::string csv_preamble(const json& config) {
    std::string s = "# schema_version: " + std::to_string(kSchemaVersion) + "\n";
    s += "# config: " + config.dump() + "\n";
    return s;
}

// ---- plan ----

struct PlanArgs {
    double alpha = 0.0;
    double b = 0.0;
    double c = 0.0;
    std::string format = "text";
    std::string config_path;
};

int cmd_plan(const PlanArgs& a) {
    const Plan p = as2(a.alpha, a.b, a.c);
    const json config = {{"alpha", a.alpha}, {"b", a.b}, {"c", a.c}};
    if (a.format == "json") {
        json out = {{"schema_version", kSchemaVersion},
                    {"config", config},
                    {"mode", mode_name(p.mode)},
                    {"gamma_star", p.gamma_star},
                    {"gamma_zero", finite_or_null(p.gamma_zero)},
                    {"s_star", p.s_star}};
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "mode=" << mode_name(p.mode) << "\n"
                  << "gamma_star=" << p.gamma_star << "\n"
                  << "gamma_zero="
                  << (std::isfinite(p.gamma_zero) ? fmt(p.gamma_zero) : "nan") << "\n"
                  << "s_star=" << fmt(p.s_star) << "\n";
    }
    return exit_ok;
}

// ---- sweep-gamma ----

struct SweepGammaArgs {
    std::vector<double> alphas;
    std::vector<double> ls;
    std::uint32_t gamma_max = 20;
    std::string out;
    std::string curves;
    std::string config_path;
};

int cmd_sweep_gamma(const SweepGammaArgs& a) {
    const json config = {{"alphas", a.alphas}, {"ls", a.ls}, {"gamma_max", a.gamma_max}};
    const auto rows = sweep_table(a.alphas, a.ls);

    std::string table = csv_preamble(config);
    table += "alpha,L,gamma_zero,gamma_star,s_star,mode\n";
    for (const auto& r : rows) {
        table += fmt(r.alpha) + "," + fmt(r.l) + ",";
        table += std::isfinite(r.plan.gamma_zero) ? fmt(r.plan.gamma_zero) : "nan";
        table += "," + std::to_string(r.plan.gamma_star) + "," + fmt(r.plan.s_star) +
                 "," + mode_name(r.plan.mode) + "\n";
    }
    write_text(a.out, table);

    if (!a.curves.empty()) {
        std::string curve = csv_preamble(config);
        curve += "alpha,L,gamma,s_inf\n";
        for (const auto& r : rows) {
            for (std::uint32_t g = 1; g <= a.gamma_max; ++g) {
                curve += fmt(r.alpha) + "," + fmt(r.l) + "," + std::to_string(g) +
                         "," + fmt(speedup(r.alpha, g, r.l)) + "\n";
            }
        }
        write_text(a.curves, curve);
    }
    return exit_ok;
}

// ---- sweep-k ----

struct SweepKArgs {
    double c = 0.07;
    double b_full = 0.23;
    std::vector<std::uint32_t> ks;
    double alpha = -1.0;  // analytic mode when set
    bool simulate = false;
    SpecFlags spec;
    std::uint32_t rounds = 20000;
    std::string out;
    std::string config_path;
};

int cmd_sweep_k(const SweepKArgs& a) {
    // channel with t_llm = 1 so b(K) = b_full * K / vocab exactly
    const std::uint32_t vocab = a.spec.vocab;
    ChannelConfig cfg;
    cfg.uplink_rate = static_cast<double>(vocab) * 16.0 / a.b_full;
    cfg.downlink_rate = cfg.uplink_rate;
    cfg.prob_bits = 16;
    cfg.vocab_size = vocab;
    cfg.t_llm = 1.0;
    cfg.t_slm = a.c;

    json config = {{"vocab", vocab}, {"c", a.c}, {"b_full", a.b_full}, {"ks", a.ks}};

    std::string body;
    if (!a.simulate) {
        if (!(a.alpha > 0.0 && a.alpha < 1.0)) {
            throw invalid_input("sweep-k: --alpha in (0,1) required unless --simulate");
        }
        config["alpha"] = a.alpha;
        body = csv_preamble(config);
        body += "k,L,alpha,gamma_star,mode,s_star\n";
        for (std::uint32_t k : a.ks) {
            const LatencyParams lp = latency_params(cfg, k);
            const Plan p = as2(a.alpha, lp.b, lp.c);
            body += std::to_string(k) + "," + fmt(lp.l) + "," + fmt(a.alpha) + "," +
                    std::to_string(p.gamma_star) + "," + mode_name(p.mode) + "," +
                    fmt(p.s_star) + "\n";
        }
    } else {
        config["spec"] = a.spec.echo();
        config["rounds"] = a.rounds;
        const auto rows = k_sweep(a.spec.build(), {}, a.ks, cfg, a.rounds);
        body = csv_preamble(config);
        body += "k,L,alpha,gamma_star,mode,predicted_s,measured_s\n";
        for (const auto& r : rows) {
            body += std::to_string(r.k) + "," + fmt(r.lat.l) + "," + fmt(r.alpha) +
                    "," + std::to_string(r.gamma) + "," + mode_name(r.mode) + "," +
                    fmt(r.predicted_s) + "," + fmt(r.measured_s) + "\n";
        }
    }
    write_text(a.out, body);
    return exit_ok;
}

// ---- simulate ----

struct SimulateArgs {
    SpecFlags spec;
    ChannelFlags chan;
    std::uint32_t gamma = 4;
    std::uint32_t k = 16;
    std::uint32_t rounds = 10000;
    std::uint64_t seed = 1;
    std::string out;
    std::string config_path;
};

int cmd_simulate(const SimulateArgs& a) {
    const SyntheticPairSpec spec = a.spec.build();
    const ChannelConfig cfg = a.chan.build(spec.vocab_size);
    const Metrics m = monte_carlo(spec, a.gamma, a.k, cfg, a.rounds, a.seed);

    json config = {{"spec", a.spec.echo()},
                   {"channel", a.chan.echo()},
                   {"gamma", a.gamma},
                   {"k", a.k},
                   {"rounds", a.rounds},
                   {"seed", a.seed}};
    json out = {{"schema_version", kSchemaVersion},
                {"config", config},
                {"rounds", m.rounds},
                {"total_tokens", m.total_tokens},
                {"alpha_by_position", m.alpha_by_position},
                {"empirical_alpha", m.empirical_alpha},
                {"mean_tokens_per_round", m.mean_tokens_per_round},
                {"simulated_wall_time", m.simulated_wall_time},
                {"throughput", m.throughput},
                {"measured_speedup", m.measured_speedup},
                {"tv_next_token", finite_or_null(m.tv_next_token)}};
    write_text(a.out, out.dump(2) + "\n");
    return exit_ok;
}

// ---- verify-equivalence ----

struct VerifyArgs {
    SpecFlags spec;
    std::uint32_t gamma = 2;
    std::uint32_t k = 2;
    std::uint64_t samples = 200000;
    std::uint64_t seed = 1;
    bool break_verifier = false;
    std::string config_path;
};

int cmd_verify_equivalence(const VerifyArgs& a) {
    const EquivalenceReport rep = equivalence_report(
        a.spec.build(), a.gamma, a.k, a.samples, a.seed,
        a.break_verifier ? VerifyPolicy::accept_always : VerifyPolicy::exact);

    json config = {{"spec", a.spec.echo()},
                   {"gamma", a.gamma},
                   {"k", a.k},
                   {"samples", a.samples},
                   {"seed", a.seed},
                   {"break_verifier", a.break_verifier}};
    json out = {{"schema_version", kSchemaVersion},
                {"config", config},
                {"tv", rep.tv},
                {"threshold", rep.threshold},
                {"argmax_mismatches", rep.argmax_mismatches},
                {"verdict", rep.pass ? "PASS" : "FAIL"}};
    std::cout << out.dump(2) << "\n";
    return rep.pass ? exit_ok : exit_fail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"planner and simulator for device-drafted, edge-verified decoding"};
    app.require_subcommand(1);

    PlanArgs plan_args;
    auto* plan = app.add_subcommand("plan", "pick mode and draft length for one operating point");
    plan->add_option("--alpha", plan_args.alpha, "acceptance rate in (0,1)")->required();
    plan->add_option("--b", plan_args.b, "transmission cost per drafted token, relative to a verifier step")->required();
    plan->add_option("--c", plan_args.c, "drafter compute cost, relative to a verifier step")->required();
    plan->add_option("--format", plan_args.format, "text or json")
        ->check(CLI::IsMember({"text", "json"}));
    plan->add_option("--config", plan_args.config_path, "JSON file with defaults for these flags");

    SweepGammaArgs sg_args;
    auto* sg = app.add_subcommand("sweep-gamma", "plan across an (alpha, L) grid");
    sg->add_option("--alphas", sg_args.alphas, "comma-separated acceptance rates")
        ->required()->delimiter(',');
    sg->add_option("--ls", sg_args.ls, "comma-separated L = b + c values")
        ->required()->delimiter(',');
    sg->add_option("--gamma-max", sg_args.gamma_max, "curve export range")
        ->check(CLI::Range(1u, 100000u));
    sg->add_option("--out", sg_args.out, "table CSV path ('-' = stdout)");
    sg->add_option("--curves", sg_args.curves, "also write per-gamma speedup curves here");
    sg->add_option("--config", sg_args.config_path, "JSON file with defaults for these flags");

    SweepKArgs sk_args;
    auto* sk = app.add_subcommand("sweep-k", "plan or simulate across sparsity levels");
    sk->add_option("--c", sk_args.c, "drafter compute cost")->check(CLI::PositiveNumber);
    sk->add_option("--b-full", sk_args.b_full, "transmission cost at k = vocab")
        ->check(CLI::PositiveNumber);
    sk->add_option("--ks", sk_args.ks, "comma-separated k values")->required()->delimiter(',');
    sk->add_option("--alpha", sk_args.alpha, "fixed acceptance rate (analytic mode)");
    sk->add_flag("--simulate", sk_args.simulate, "measure alpha and speedup from a synthetic pair");
    sk_args.spec.attach(sk);
    sk->add_option("--rounds", sk_args.rounds, "simulated rounds per k")
        ->check(CLI::Range(1u, 10000000u));
    sk->add_option("--out", sk_args.out, "CSV path ('-' = stdout)");
    sk->add_option("--config", sk_args.config_path, "JSON file with defaults for these flags");

    SimulateArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "run one monte carlo experiment");
    sim_args.spec.attach(sim);
    sim_args.chan.attach(sim);
    sim->add_option("--gamma", sim_args.gamma, "draft length")->check(CLI::Range(1u, 65535u));
    sim->add_option("--k", sim_args.k, "sparsity level")->check(CLI::Range(1u, 1u << 20));
    sim->add_option("--rounds", sim_args.rounds, "rounds to simulate")
        ->check(CLI::Range(1u, 10000000u));
    sim->add_option("--seed", sim_args.seed, "simulation seed");
    sim->add_option("--out", sim_args.out, "JSON path ('-' = stdout)");
    sim->add_option("--config", sim_args.config_path, "JSON file with defaults for these flags");

    VerifyArgs ver_args;
    auto* ver = app.add_subcommand("verify-equivalence",
                                   "check the emitted-token law against the target model");
    ver_args.spec.attach(ver);
    ver->add_option("--gamma", ver_args.gamma, "draft length")->check(CLI::Range(1u, 65535u));
    ver->add_option("--k", ver_args.k, "sparsity level")->check(CLI::Range(1u, 1u << 20));
    ver->add_option("--samples", ver_args.samples, "independent one-round samples")
        ->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 32));
    ver->add_option("--seed", ver_args.seed, "sampling seed");
    ver->add_flag("--break-verifier", ver_args.break_verifier,
                  "accept every draft (negative control; must FAIL)");
    ver->add_option("--config", ver_args.config_path, "JSON file with defaults for these flags");

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        merge_config_file(args);
    } catch (const std::ios_base::failure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_validation;
    }

    // CLI11 consumes reversed argument vectors
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? exit_ok : exit_validation;
    }

    try {
        if (plan->parsed()) {
            return cmd_plan(plan_args);
        }
        if (sg->parsed()) {
            return cmd_sweep_gamma(sg_args);
        }
        if (sk->parsed()) {
            return cmd_sweep_k(sk_args);
        }
        if (sim->parsed()) {
            return cmd_simulate(sim_args);
        }
        if (ver->parsed()) {
            return cmd_verify_equivalence(ver_args);
        }
    } catch (const std::ios_base::failure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    } catch (const tkslt::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_validation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_validation;
    }
    return exit_validation;
}

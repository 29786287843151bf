/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "versa/catalogue.hpp"
#include "versa/config.hpp"
#include "versa/experiments.hpp"
#include "versa/harness.hpp"
#include "versa/model_check.hpp"
#include "versa/samples.hpp"
#include "versa/simulator.hpp"

using namespace versa;
using json = nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

struct Globals {
    std::optional<std::string> layout;
    unsigned jobs = 1;
    bool no_ekr = false;
    std::string mutate = "none";

    MemoryLayout resolved_layout() const { return resolve_layout(layout); }
    MonitorConfig monitor() const {
        auto m = mutant_from_name(mutate);
        if (!m) throw ConfigError("unknown mutant '" + mutate + "' (see `versa mutants`)");
        return {!no_ekr, *m};
    }
};

Address default_er_min(const MemoryLayout& l) { return static_cast<Address>(l.pmem.lo + 0x200); }
Address default_outbox(const MemoryLayout& l) { return static_cast<Address>(l.pmem.lo + 0x100); }

std::string hex_window(const ErWindow& w) { return detail::hex16(w.er_min) + ":" + detail::hex16(w.er_max); }

// ---------------------------------------------------------------- keygen

struct KeygenOpts {
    std::string out;
    std::optional<std::uint64_t> seed;
};

int cmd_keygen(const KeygenOpts& o) {
    Key k;
    if (o.seed) {
        std::mt19937_64 rng(*o.seed);
        for (auto& b : k) b = static_cast<std::uint8_t>(rng());
    } else {
        std::random_device rd;
        for (auto& b : k) b = static_cast<std::uint8_t>(rd());
    }
    write_file(o.out, k);
    return kOk;
}

// ---------------------------------------------------------------- sample

struct SampleOpts {
    std::string kind = "sensing";
    std::optional<std::string> er_min;
    std::optional<std::string> outbox;
    std::string out;
};

int cmd_sample(const Globals& g, const SampleOpts& o) {
    const MemoryLayout l = g.resolved_layout();
    const Address er_min = o.er_min ? static_cast<Address>(parse_number(*o.er_min, "er_min")) : default_er_min(l);
    const Address outbox = o.outbox ? static_cast<Address>(parse_number(*o.outbox, "outbox")) : default_outbox(l);
    samples::SampleBinary s;
    if (o.kind == "sensing") s = samples::sensing_app(l, er_min, outbox);
    else if (o.kind == "single") s = samples::single_read_app(l, er_min);
    else if (o.kind == "quiet") s = samples::quiet_app(er_min);
    else throw ConfigError("unknown sample kind '" + o.kind + "' (sensing, single, quiet)");
    validate_window(l, s.window);
    write_file(o.out, s.bytes);
    std::cout << "er=" << hex_window(s.window) << " bytes=" << s.bytes.size() << "\n";
    return kOk;
}

// ---------------------------------------------------------------- authorize

struct AuthorizeOpts {
    std::string key, binary, counter, out;
    std::optional<std::string> er;
    std::optional<std::size_t> window_bytes;
};

int cmd_authorize(const AuthorizeOpts& o) {
    const Key key = read_key(o.key);
    const Bytes binary = read_file(o.binary);
    const std::uint64_t counter = read_counter_file(o.counter);
    std::size_t window = binary.size() + (binary.size() & 1);
    if (o.er && o.window_bytes) throw ConfigError("give either --er or --window-bytes");
    if (o.er) window = parse_window(*o.er).size_bytes();
    if (o.window_bytes) window = *o.window_bytes;
    const Authorization a = authorize_ctrl(key, counter, binary, window);
    write_file(o.out, serialize(a.message));
    write_text(o.counter, std::to_string(a.counter) + "\n");
    std::cout << "chal=" << a.message.chal << " token=" << to_hex(a.message.token) << "\n";
    return kOk;
}

// ---------------------------------------------------------------- run

struct RunOpts {
    std::string key, message, er;
    std::optional<std::string> image, schedule, sensor, trace, result, outbox, expect;
    std::size_t outbox_bytes = samples::kSenseBytes;
    std::uint64_t max_records = 4000;
    bool skip_verify = false;
};

SensorFn make_sensor(const MemoryLayout& l, const std::optional<std::string>& spec) {
    if (!spec || *spec == "marker") return samples::marker_sensor(l);
    if (!spec->empty() && (*spec)[0] == '@') {
        const Bytes data = read_file(spec->substr(1));
        if (data.empty()) throw ConfigError("sensor file is empty");
        const Address base = l.gpio.lo;
        return [data, base](Address a, std::uint64_t) {
            const std::size_t i = (static_cast<std::size_t>(a - base)) % data.size();
            return static_cast<Word>(data[i] | (data[(i + 1) % data.size()] << 8));
        };
    }
    const auto v = parse_number(*spec, "sensor value");
    if (v > 0xFFFF) throw ConfigError("sensor value out of range");
    return [v](Address, std::uint64_t) { return static_cast<Word>(v); };
}

int cmd_run(const Globals& g, const RunOpts& o) {
    const MemoryLayout l = g.resolved_layout();
    const Key key = read_key(o.key);
    const AuthorizationMessage msg = parse_message(read_file(o.message));
    const ErWindow er = parse_window(o.er);
    std::optional<bool> expect;
    if (o.expect) {
        if (*o.expect == "top") expect = true;
        else if (*o.expect == "bottom") expect = false;
        else throw ConfigError("--expect takes top or bottom");
    }
    const auto events = o.schedule ? parse_schedule(read_text(*o.schedule)) : std::vector<ScheduleEvent>{};

    MachineState init;
    if (o.image) init = load_image(l, read_file(*o.image), er);
    else {
        validate_window(l, er);
        init.write_word(l.boot_entry, encode({Opcode::HALT})[0]);
    }
    init.pc = l.boot_entry;
    Simulator sim(SimConfig{l, g.monitor(), true, 1}, key, init);
    sim.sensor = make_sensor(l, o.sensor);

    sim.install(msg, er);
    std::string verify = "skipped";
    if (!o.skip_verify) verify = sim.verify() ? "accepted" : "rejected";
    const std::uint64_t chal = sim.stored_counter();
    apply_schedule(sim, events, sim.machine.cycle);
    const SensingOutcome out = sim.xsensing(o.max_records);

    if (o.trace) write_text(*o.trace, dump_trace(sim.trace(out.run.terminal)));
    if (o.result) {
        const Address box = o.outbox ? static_cast<Address>(parse_number(*o.outbox, "outbox")) : default_outbox(l);
        if (box + o.outbox_bytes > kMemorySize) throw ConfigError("outbox runs past the address space");
        SensingResult r{chal, Bytes(sim.machine.memory.begin() + box, sim.machine.memory.begin() + box + o.outbox_bytes)};
        write_file(*o.result, serialize(r));
    }
    std::cout << "verify: " << verify << "\n";
    std::cout << "xsensing: " << (out.result ? "⊤" : "⊥") << "\n";
    std::cout << "resets: " << sim.resets() << "\n";
    std::cout << "records: " << sim.records.size() << " (" << terminal_name(out.run.terminal) << ")\n";
    if (expect) return out.result == *expect ? kOk : kViolation;
    return out.result ? kOk : kViolation;
}

// ---------------------------------------------------------------- decrypt

struct DecryptOpts {
    std::string key, result;
    std::optional<std::string> out;
};

int cmd_decrypt(const DecryptOpts& o) {
    const Key key = read_key(o.key);
    const SensingResult r = parse_result(read_file(o.result));
    const Bytes plain = decrypt_ctrl(key, r.chal, r.ciphertext);
    if (o.out) write_file(*o.out, plain);
    std::cout << "chal=" << r.chal << " plaintext=" << to_hex(plain) << "\n";
    return kOk;
}

// ---------------------------------------------------------------- check

struct CheckOpts {
    std::vector<std::string> names;
    bool all = false;
    std::optional<std::string> file, formula, cex;
    unsigned width = 6;
    std::uint64_t budget = 5'000'000;
    bool brute = false;
};

std::string dump_counterexample(const std::string& name, const mc::Counterexample& c) {
    std::ostringstream os;
    os << "# counterexample for " << name << "\n# inputs " << c.inputs.size() << "\n";
    for (const auto& r : c.lasso.prefix) os << dump_record(r) << "\n";
    os << "# loop\n";
    for (const auto& r : c.lasso.loop) os << dump_record(r) << "\n";
    return os.str();
}

int cmd_check(const Globals& g, const CheckOpts& o) {
    struct Item {
        std::string name;
        ltl::FormulaPtr f;
    };
    std::vector<Item> items;
    if (o.all)
        for (const auto& e : builtin_formulas())
            if (!e.optional_ekr || !g.no_ekr) items.push_back({e.name, e.formula});
    for (const auto& n : o.names) {
        auto e = find_formula(n);
        if (!e) throw ConfigError("unknown formula '" + n + "' (see `versa formulas`)");
        items.push_back({e->name, e->formula});
    }
    if (o.file) items.push_back({*o.file, ltl::parse(read_text(*o.file))});
    if (o.formula) items.push_back({"<formula>", ltl::parse(*o.formula)});
    if (items.empty()) throw ConfigError("nothing to check: name a formula, or use --all, --file or --formula");

    const MemoryLayout l = scale_layout(g.resolved_layout(), o.width);
    const MonitorConfig mon = g.monitor();
    struct Verdict {
        std::string line;
        int status = kOk;
        std::string cex;
    };
    auto verdicts = parallel_map(items.size(), g.jobs, [&](std::size_t i) {
        Verdict v;
        const auto& it = items[i];
        mc::ExhaustiveChecker checker(l, mon);
        const auto t0 = std::chrono::steady_clock::now();
        try {
            auto r = checker.check(*it.f, o.budget);
            const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            char timing[64];
            std::snprintf(timing, sizeof timing, "%.2fs", s);
            if (r.holds) {
                v.line = it.name + ": holds (states " + std::to_string(r.explored_states) + ", letters " +
                         std::to_string(r.alphabet_size) + ", " + timing + ")";
            } else {
                v.status = kViolation;
                v.line = it.name + ": VIOLATED, counterexample of " + std::to_string(r.counterexample->inputs.size()) +
                         " inputs (" + timing + ")";
                v.cex = dump_counterexample(it.name, *r.counterexample);
            }
            if (o.brute) {
                const auto b = mc::brute_force(*it.f, l, mon, checker.alphabet_for(mc::monitor_mask() | mc::formula_mask(*it.f)));
                v.line += "; brute force " + std::string(b.violated ? "found a violation" : "found nothing") + " in " +
                          std::to_string(b.sequences) + " sequences";
                if (b.violated && r.holds) {
                    v.status = kViolation;
                    v.line += " (DISAGREES)";
                }
            }
        } catch (const mc::UnsupportedFormula& e) {
            v.line = it.name + ": unsupported by the exhaustive check (" + e.what() + ")";
            if (!o.all) v.status = kUsage;
        }
        return v;
    });
    bool violated = false, unsupported = false;
    std::string cex;
    for (const auto& v : verdicts) {
        std::cout << v.line << "\n";
        violated |= v.status == kViolation;
        unsupported |= v.status == kUsage;
        cex += v.cex;
    }
    const int status = violated ? kViolation : unsupported ? kUsage : kOk;
    if (o.cex && !cex.empty()) write_text(*o.cex, cex);
    return status;
}

// ---------------------------------------------------------------- attack

struct AttackOpts {
    std::vector<std::string> names;
    bool all = false;
    bool list = false;
    std::uint64_t random = 0;
    std::uint64_t seed = 1;
    std::optional<std::string> report, trace;
};

json outcome_json(const harness::GameOutcome& o) {
    json j;
    j["name"] = o.name;
    j["xsensing"] = o.xsensing_result ? "top" : "bottom";
    j["atomic_exec"] = o.atomic_exec;
    j["adversary_wins"] = o.adversary_wins;
    j["gpio_reads"] = o.gpio_reads;
    j["unauthorized_reads"] = o.unauthorized_reads;
    j["resets"] = o.resets;
    j["dirty_resets"] = o.dirty_resets;
    j["leaks"] = o.leaks;
    j["expected_ok"] = o.expected_ok ? json(*o.expected_ok) : json(nullptr);
    j["records"] = o.records;
    j["trace_digest"] = o.trace_digest;
    j["ok"] = harness::outcome_ok(o);
    return j;
}

int cmd_attack(const Globals& g, const AttackOpts& o) {
    const auto catalogue = harness::scenario_catalogue();
    if (o.list) {
        for (const auto& s : catalogue) std::cout << s.name << "\t" << s.description << "\n";
        return kOk;
    }
    std::vector<harness::Scenario> run;
    if (o.all) run = catalogue;
    for (const auto& n : o.names) {
        auto s = harness::find_scenario(n);
        if (!s) throw ConfigError("unknown scenario '" + n + "' (see `versa attack --list`)");
        run.push_back(*s);
    }
    for (std::uint64_t i = 0; i < o.random; ++i) run.push_back(harness::random_scenario(o.seed + i));
    if (run.empty()) throw ConfigError("nothing to play: name a scenario, or use --all or --random N");

    harness::GameConfig cfg;
    cfg.layout = g.resolved_layout();
    cfg.monitor = g.monitor();
    struct Played {
        harness::GameOutcome outcome;
        std::string trace;
    };
    const bool want_trace = o.trace.has_value();
    auto played = parallel_map(run.size(), g.jobs, [&](std::size_t i) {
        Played p;
        p.outcome = harness::run_scenario(run[i], cfg, want_trace && i == 0 ? &p.trace : nullptr);
        return p;
    });

    std::uint64_t wins = 0, unauthorized = 0, failures = 0;
    std::string report;
    const bool table = run.size() <= 64;
    if (table) std::printf("%-34s %-6s %-6s %6s %5s %5s %6s %-4s %s\n", "scenario", "result", "atomic", "resets", "reads",
                           "wins", "unauth", "ok", "digest");
    for (const auto& p : played) {
        const auto& oc = p.outcome;
        wins += oc.wins;
        unauthorized += oc.unauthorized_reads;
        failures += !harness::outcome_ok(oc);
        if (table)
            std::printf("%-34s %-6s %-6s %6llu %5zu %5zu %6zu %-4s %s\n", oc.name.c_str(), oc.xsensing_result ? "top" : "bottom",
                        oc.atomic_exec ? "top" : "bottom", static_cast<unsigned long long>(oc.resets), oc.gpio_reads,
                        oc.wins, oc.unauthorized_reads, harness::outcome_ok(oc) ? "yes" : "NO",
                        oc.trace_digest.substr(0, 16).c_str());
        else if (!harness::outcome_ok(oc))
            std::printf("FAILED %s (wins %zu, unauthorized reads %zu, dirty resets %llu, leaks %zu)\n", oc.name.c_str(),
                        oc.wins, oc.unauthorized_reads, static_cast<unsigned long long>(oc.dirty_resets), oc.leaks);
        if (o.report) report += outcome_json(oc).dump() + "\n";
    }
    std::printf("scenarios %zu, adversary wins %llu, unauthorized reads %llu, failed %llu\n", run.size(),
                static_cast<unsigned long long>(wins), static_cast<unsigned long long>(unauthorized),
                static_cast<unsigned long long>(failures));
    if (o.report) write_text(*o.report, report);
    if (o.trace) write_text(*o.trace, played.front().trace);
    return failures ? kViolation : kOk;
}

// ---------------------------------------------------------------- listings

int cmd_formulas(const std::vector<std::string>& names, bool text) {
    for (const auto& e : builtin_formulas()) {
        if (!names.empty() && std::find(names.begin(), names.end(), e.name) == names.end()) continue;
        std::cout << e.name << "\t" << group_name(e.group) << (e.optional_ekr ? " (optional eKR)" : "") << "\n";
        if (text || !names.empty()) std::cout << "  " << ltl::to_string(e.formula) << "\n";
    }
    return kOk;
}

int cmd_mutants() {
    for (const auto& m : kMutants) std::cout << m.name << "\t" << m.description << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Authorized-sensing simulator, monitor checker and attack harness"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--layout", g.layout, "Layout file (default: $VERSA_LAYOUT, then the built-in layout)");
    app.add_option("-j,--jobs", g.jobs, "Worker threads")->check(CLI::Range(1u, 256u));
    app.add_flag("--no-ekr", g.no_ekr, "Disable the optional encryption-key properties");
    app.add_option("--mutate", g.mutate, "Run with a mutated monitor (see `versa mutants`)");

    KeygenOpts kg;
    auto* keygen = app.add_subcommand("keygen", "Write a 32-byte device key");
    keygen->add_option("-o,--out", kg.out, "Key file")->required();
    keygen->add_option("--seed", kg.seed, "Derive the key deterministically from a seed");

    SampleOpts so;
    auto* sample = app.add_subcommand("sample", "Emit a sample ER binary");
    sample->add_option("--kind", so.kind, "sensing, single or quiet");
    sample->add_option("--er-min", so.er_min, "First ER address");
    sample->add_option("--outbox", so.outbox, "Where the sensing app leaves its ciphertext");
    sample->add_option("-o,--out", so.out, "Binary file")->required();

    AuthorizeOpts ao;
    auto* authorize = app.add_subcommand("authorize", "Produce an authorization message for a binary");
    authorize->add_option("--key", ao.key, "Key file")->required();
    authorize->add_option("--binary", ao.binary, "Binary to authorize")->required();
    authorize->add_option("--counter", ao.counter, "Controller counter file (created if missing)")->required();
    authorize->add_option("--er", ao.er, "ER window ER_MIN:ER_MAX the binary will occupy");
    authorize->add_option("--window-bytes", ao.window_bytes, "ER window size in bytes");
    authorize->add_option("-o,--out", ao.out, "Message file")->required();

    RunOpts ro;
    auto* run = app.add_subcommand("run", "Install, verify and execute an authorized binary");
    run->add_option("--key", ro.key, "Device key file")->required();
    run->add_option("--message", ro.message, "Authorization message file")->required();
    run->add_option("--er", ro.er, "ER window ER_MIN:ER_MAX")->required();
    run->add_option("--image", ro.image, "Initial memory image (loaded at address 0)");
    run->add_option("--schedule", ro.schedule, "IRQ/DMA schedule, cycles counted from the start of XSensing");
    run->add_option("--sensor", ro.sensor, "marker, a constant word, or @file");
    run->add_option("--max-records", ro.max_records, "Record budget for XSensing");
    run->add_option("--trace", ro.trace, "Write the trace here");
    run->add_option("--result", ro.result, "Write chal || ciphertext here");
    run->add_option("--outbox", ro.outbox, "Ciphertext address for --result");
    run->add_option("--outbox-bytes", ro.outbox_bytes, "Ciphertext length for --result");
    run->add_flag("--skip-verify", ro.skip_verify, "Execute without calling Verify");
    run->add_option("--expect", ro.expect, "top or bottom; exit 0 only on a match");

    DecryptOpts dopts;
    auto* decrypt = app.add_subcommand("decrypt", "Decrypt a sensing result on the controller side");
    decrypt->add_option("--key", dopts.key, "Key file")->required();
    decrypt->add_option("--result", dopts.result, "Result file")->required();
    decrypt->add_option("-o,--out", dopts.out, "Plaintext file");

    CheckOpts co;
    auto* check = app.add_subcommand("check", "Exhaustively check formulas against the monitor");
    check->add_option("names", co.names, "Catalogue formula names");
    check->add_flag("--all", co.all, "Every catalogue formula");
    check->add_option("--file", co.file, "Formula file");
    check->add_option("--formula", co.formula, "Formula text");
    check->add_option("-w,--width", co.width, "Address width")->check(CLI::Range(4u, 16u));
    check->add_option("--budget", co.budget, "Product-state budget");
    check->add_option("--cex", co.cex, "Write counterexamples here");
    check->add_flag("--brute", co.brute, "Cross-check with bounded brute force");

    AttackOpts at;
    auto* attack = app.add_subcommand("attack", "Play attack scenarios against the referee");
    attack->add_option("names", at.names, "Scenario names");
    attack->add_flag("--all", at.all, "The whole scenario catalogue");
    attack->add_flag("--list", at.list, "List catalogue scenarios");
    attack->add_option("--random", at.random, "Number of randomized scenarios");
    attack->add_option("--seed", at.seed, "First random seed");
    attack->add_option("--report", at.report, "JSON-lines report file");
    attack->add_option("--trace", at.trace, "Write the first scenario's trace here");

    std::vector<std::string> fnames;
    bool ftext = false;
    auto* formulas = app.add_subcommand("formulas", "List catalogue formulas");
    formulas->add_option("names", fnames, "Only these");
    formulas->add_flag("--text", ftext, "Print formula text");

    auto* mutants = app.add_subcommand("mutants", "List monitor mutants");
    auto* layout = app.add_subcommand("layout", "Print the resolved layout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*keygen) return cmd_keygen(kg);
        if (*sample) return cmd_sample(g, so);
        if (*authorize) return cmd_authorize(ao);
        if (*run) return cmd_run(g, ro);
        if (*decrypt) return cmd_decrypt(dopts);
        if (*check) return cmd_check(g, co);
        if (*attack) return cmd_attack(g, at);
        if (*formulas) return cmd_formulas(fnames, ftext);
        if (*mutants) return cmd_mutants();
        if (*layout) {
            std::cout << format_layout(g.resolved_layout());
            return kOk;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}

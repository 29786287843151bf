/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "versa/experiments.hpp"

using namespace versa;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void verdict(int id, bool ok, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    failures += !ok;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

using ull = unsigned long long;

constexpr unsigned kWidth = 6;
constexpr double kTimeLimit = 600.0;
constexpr std::size_t kMinKilled = 9;
constexpr std::uint64_t kCorpus = 10000;
constexpr std::uint64_t kFuzz = 10000;
constexpr double kMinR2 = 0.99;
constexpr std::uint64_t kRoundTrips = 1000;

void criterion1(unsigned jobs) {
    const auto t0 = Clock::now();
    std::vector<CatalogueEntry> supported;
    std::size_t skipped = 0;
    for (const auto& e : monitor_formulas(true)) supported.push_back(e);
    for (const auto& e : builtin_formulas())
        if (e.group == FormulaGroup::EndToEnd || e.group == FormulaGroup::Machine) {
            if (mc::supported(*e.formula)) supported.push_back(e);
            else ++skipped;
        }
    std::size_t cex = 0;
    for (const auto& v : experiments::check_formulas(supported, kWidth, {}, jobs))
        if (!v.result.holds) {
            ++cex;
            std::printf("  counterexample: %s\n", v.name.c_str());
        }
    const auto mutants = experiments::mutation_suite(kWidth, jobs);
    std::size_t killed = 0;
    for (const auto& m : mutants) {
        killed += m.killed();
        if (!m.killed()) std::printf("  survived: %s\n", std::string(mutant_name(m.id)).c_str());
    }
    const double s = seconds_since(t0);
    verdict(1, cex == 0 && killed >= kMinKilled && s < kTimeLimit,
            fmt("%zu formulas at w=%u, %zu counterexamples, %zu left to trace checks; %zu/%zu mutants killed with replayed "
                "counterexamples; %.1fs (limit %.0fs)",
                supported.size(), kWidth, cex, skipped, killed, mutants.size(), s, kTimeLimit));
}

void criterion2(unsigned jobs) {
    const auto s = experiments::theorem_corpus(kCorpus, 1, jobs);
    verdict(2, s.traces >= kCorpus && s.exceptions == 0,
            fmt("%llu traces, monitor formulas hold on %llu, atomic sensing on %llu, mandatory authorization on %llu, "
                "%llu exceptions",
                (ull)s.traces, (ull)s.ltl_hold, (ull)s.def5_hold, (ull)s.def6_hold, (ull)s.exceptions));
}

void criterion3(unsigned jobs) {
    const auto cat = experiments::play_catalogue(jobs);
    const auto rnd = experiments::play_random(kCorpus, 1, jobs);
    const ull wins = cat.wins + rnd.wins, unauth = cat.unauthorized_reads + rnd.unauthorized_reads;
    const ull failed = cat.failures + rnd.failures;
    for (const auto& o : cat.outcomes)
        if (!harness::outcome_ok(o)) std::printf("  failed scenario: %s\n", o.name.c_str());
    verdict(3, wins == 0 && unauth == 0 && failed == 0 && rnd.outcomes.size() >= kCorpus,
            fmt("%zu catalogue + %zu random scenarios, %llu wins, %llu unauthorized GPIO reads, %llu failed referee checks",
                cat.outcomes.size(), rnd.outcomes.size(), wins, unauth, failed));
}

void criterion4(unsigned jobs) {
    const auto s = experiments::oracle_agreement(jobs);
    verdict(4, s.disagreements == 0 && s.runs > 0,
            fmt("%llu programs, %llu runs, %llu reach ER, oracle true on %llu, %llu disagreements", (ull)s.programs,
                (ull)s.runs, (ull)s.with_segment, (ull)s.oracle_true, (ull)s.disagreements));
}

void criterion5(unsigned jobs) {
    const auto s = experiments::token_fuzz(kFuzz, 1, jobs);
    verdict(5, s.negatives >= kFuzz && s.false_accepts == 0 && s.false_rejects == 0,
            fmt("%llu bad messages (%llu caught by the parser), %llu good, %llu false accepts, %llu false rejects",
                (ull)s.negatives, (ull)s.parse_rejects, (ull)s.positives, (ull)s.false_accepts, (ull)s.false_rejects));
}

void criterion6() {
    const auto pts = experiments::verify_cost({64, 128, 256, 512, 1024});
    std::vector<double> x, y;
    std::string detail;
    for (const auto& p : pts) {
        x.push_back(static_cast<double>(p.er_bytes));
        y.push_back(static_cast<double>(p.records));
        detail += fmt("%zu->%zu ", p.er_bytes, p.records);
    }
    const auto f = experiments::fit_affine(x, y);
    verdict(6, pts.size() == 5 && f.r2 >= kMinR2,
            detail + fmt("records = %.4f*n + %.2f, R^2 = %.6f (min %.2f)", f.slope, f.intercept, f.r2, kMinR2));
}

void criterion7(unsigned jobs) {
    const auto s = experiments::erasure_check(1000, 1, jobs);
    verdict(7, s.reset_scenarios > 0 && s.dirty_resets == 0 && s.happy_decrypts && s.happy_dmem_clean,
            fmt("%llu runs with resets, %llu resets left DMEM non-zero; happy path decrypts: %s, no marker byte in DMEM: %s",
                (ull)s.reset_scenarios, (ull)s.dirty_resets, s.happy_decrypts ? "yes" : "no",
                s.happy_dmem_clean ? "yes" : "no"));
}

void criterion8() {
    const auto s = experiments::crypto_roundtrips(kRoundTrips, 1);
    verdict(8, s.otp_total >= kRoundTrips && s.otp_ok == s.otp_total && s.kat_total > 0 && s.kat_ok == s.kat_total &&
                   s.wire_total >= kRoundTrips && s.wire_ok == s.wire_total,
            fmt("OTP %llu/%llu, HMAC KATs %llu/%llu, wire %llu/%llu", (ull)s.otp_ok, (ull)s.otp_total, (ull)s.kat_ok,
                (ull)s.kat_total, (ull)s.wire_ok, (ull)s.wire_total));
}

}  // namespace

int main(int argc, char** argv) {
    unsigned jobs = default_jobs();
    if (argc > 1) jobs = static_cast<unsigned>(std::max(1, std::atoi(argv[1])));
    criterion1(jobs);
    criterion2(jobs);
    criterion3(jobs);
    criterion4(jobs);
    criterion5(jobs);
    criterion6();
    criterion7(jobs);
    criterion8();
    return failures ? 1 : 0;
}

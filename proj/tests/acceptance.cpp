// Acceptance gate: one PASS/FAIL line per criterion; exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "support/oracles.hpp"
#include "tsl/cli.hpp"
#include "tsl/montecarlo.hpp"
#include "tsl/solver.hpp"

using namespace tsl;

namespace {

const std::string kSource = TSL_SOURCE_DIR;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

Problem three_state(const Rational& p) {
    return build_problem(parse_spec("space 3\n"
                                    "gen s1 = 2 1 2\n"
                                    "gen s2 = 3 3 1\n"
                                    "noise iid s1:" +
                                    to_string(p) + " s2:" + to_string(1 - p) + "\n"));
}

const std::vector<Rational> kLaws{Rational(1, 2), Rational(1, 3), Rational(1, 5)};

ProbMeasure closed_form(const Rational& p) {
    const Rational q = 1 - p, pq = p * q, z = 2 + pq;
    return ProbMeasure(state_carrier(3), {(1 - pq) / z, (p + pq) / z, (q + pq) / z});
}

Outcome closure_facts() {
    Outcome o;
    const auto pb = three_state(Rational(1, 2));
    const auto& sg = pb.ctx.sg();
    o.require(sg.size() == 7, "closure size " + std::to_string(sg.size()));
    o.require(power_core(sg).core.size() == sg.size(), "core differs from the closure");
    const auto cls = classify_elements(sg);
    o.require(cls.synchronizing.size() == 3, "synchronizing count");
    for (auto s : cls.synchronizing)
        o.require(sg.element(s).is_constant(), "non-constant synchronizing element");
    o.require(cls.cancellative.empty(), "cancellative elements present");
    o.require(!is_left_cancellative(sg), "closure reported left-cancellative");
    if (o.pass)
        o.detail = "7 elements, core = closure, 3 constants, no cancellative, not left-cancellative";
    return o;
}

Outcome stationary() {
    Outcome o;
    for (const auto& p : kLaws) {
        const auto pb = three_state(p);
        const auto u = stationary_law(pb.noise.tail(), pb.ctx);
        o.require(u == closed_form(p), "closed form differs at p = " + to_string(p));
        const auto pi = state_transition_matrix(pb.noise.tail(), pb.ctx);
        RationalVector pu(3, Rational(0));
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t i = 0; i < 3; ++i)
                pu[j] += pi(j, i) * u[i];
        o.require(pu == u.weights(), "Pi u != u at p = " + to_string(p));
    }
    if (o.pass)
        o.detail = "(1-pq, p+pq, q+pq)/(2+pq) and Pi u = u for p in {1/2, 1/3, 1/5}";
    return o;
}

Outcome limits() {
    Outcome o;
    for (const auto& p : kLaws) {
        const auto pb = three_state(p);
        const auto lim = limit_analysis(pb.noise, pb.ctx);
        o.require(lim.as_convergence, "P1' fails at p = " + to_string(p));
        if (p == Rational(1, 2)) {
            o.require(lim.p2 && lim.p2->subgroup.size() == 3, "no order-3 subgroup");
            const auto& sg = pb.ctx.sg();
            const auto cls = classify_elements(sg);
            o.require(lim.nu && *lim.nu == ProbMeasure::uniform_on(pb.ctx.elements(),
                                                                   cls.synchronizing),
                      "nu is not uniform on the constants");
        }
    }
    if (o.pass)
        o.detail = "P1' for every p; p = 1/2: H of order 3, nu uniform on the constants";
    return o;
}

Outcome classification() {
    Outcome o;
    for (const auto& p : kLaws) {
        const auto pb = three_state(p);
        const auto rep = classify(pb.noise, pb.ctx);
        const auto tag = " at p = " + to_string(p);
        o.require(rep.pathwise_unique == true, "pathwise_unique" + tag);
        o.require(rep.unique_in_law, "unique_in_law" + tag);
        o.require(rep.all_solutions_strong == true, "all_solutions_strong" + tag);
        std::string notes;
        for (const auto& n : rep.notes)
            notes += n + "\n";
        o.require(notes.find("Thm 4.6") != std::string::npos, "missing Thm 4.6" + tag);
        o.require(notes.find("Thm 5.1(ii),(iv)") != std::string::npos,
                  "missing Thm 5.1(ii),(iv)" + tag);
    }
    if (o.pass)
        o.detail = "pathwise unique, unique in law, all strong; notes cite Thm 4.6 and "
                   "Thm 5.1(ii),(iv)";
    return o;
}

Outcome fourier() {
    Outcome o;
    struct Case {
        std::string spec;
        std::size_t n;
        std::vector<std::size_t> support;
        std::size_t p_mu;
        Trichotomy t;
    };
    const std::vector<Case> cases{{"group Z 2\nnoise iid 0:1/2 1:1/2\n", 2, {0, 1}, 0, Trichotomy::C1},
                                  {"group Z 3\nnoise iid 1:1\n", 3, {1}, 1, Trichotomy::C2},
                                  {"group Z 4\nnoise iid 0:1/2 2:1/2\n", 4, {0, 2}, 2, Trichotomy::C3}};
    for (const auto& c : cases) {
        const auto pb = build_problem(parse_spec(c.spec));
        const auto rep = fourier_trichotomy(pb.ctx, pb.noise);
        const std::vector<double> w(c.support.size(), 1.0 / double(c.support.size()));
        const auto pi = oracles::character_oracle(c.n, c.support, w);
        const auto tag = " on Z/" + std::to_string(c.n);
        o.require(rep.pi == pi, "character table disagrees with the oracle" + tag);
        o.require(rep.p_mu == oracles::generator_oracle(pi) && rep.p_mu == c.p_mu, "p_mu" + tag);
        o.require(rep.h_mu == oracles::annihilator_oracle(pi), "H_mu" + tag);
        o.require(rep.trichotomy == c.t, "trichotomy" + tag);
    }
    if (o.pass)
        o.detail = "Z/2 p=0 C1, Z/3 p=1 C2, Z/4 p=2 C3 with H = {0,2}; oracle agrees";
    return o;
}

Outcome independence() {
    Outcome o;
    const auto pb = build_problem(parse_spec("group Z 2\nnoise iid 0:1/2 1:1/2\n"));
    const auto joint =
        window_joint_law(pb.noise, pb.ctx, uniform_solution(pb.ctx, pb.noise), 2, 8);
    std::map<std::size_t, Rational> mx, m0, m1;
    Rational total = 0;
    for (const auto& [key, p] : joint) {
        mx[key[0]] += p;
        m0[key[1]] += p;
        m1[key[2]] += p;
        total += p;
    }
    o.require(total == 1, "joint law does not sum to 1");
    for (std::size_t x = 0; x < 2; ++x)
        for (std::size_t a = 0; a < 2; ++a)
            for (std::size_t b = 0; b < 2; ++b) {
                const auto it = joint.find({x, a, b});
                const Rational p = it == joint.end() ? Rational(0) : it->second;
                o.require(p == mx[x] * m0[a] * m1[b], "joint law does not factorize");
            }
    if (o.pass)
        o.detail = "law of (X0, N0, N-1) at depth 8 equals the product of its marginals";
    return o;
}

Outcome monte_carlo() {
    Outcome o;
    SimConfig cfg;
    cfg.depth = 64;
    cfg.trials = 100'000;
    cfg.seed = 42;

    double worst = 0, zt = 0;
    for (const auto& p : kLaws) {
        const auto pb = three_state(p);
        const auto exact = closed_form(p);
        const auto emp =
            estimate_state_law(pb.noise, pb.ctx, cfg, ProbMeasure::uniform(pb.ctx.states()));
        for (std::size_t i = 0; i < 3; ++i) {
            const double z =
                std::abs(emp.frequency(i) - to_double(exact[i])) / emp.standard_error(i);
            o.require(z <= 3, "state " + std::to_string(i + 1) + " off by " + format_float(z) +
                                  " sigma at p = " + to_string(p));
            worst = std::max(worst, z);
        }
        const auto st = stopping_time_stats(pb.noise, pb.ctx, cfg);
        o.require(st.exact_mean.has_value(), "no exact stopping-time mean at p = " + to_string(p));
        if (st.exact_mean) {
            const double z = std::abs(st.mean - to_double(*st.exact_mean)) / st.standard_error;
            o.require(z <= 3, "stopping time off by " + format_float(z) + " sigma at p = " +
                                  to_string(p));
            zt = std::max(zt, z);
        }
    }

    const auto z2 = build_problem(parse_spec("group Z 2\nnoise iid 0:1/2 1:1/2\n"));
    const auto uni = uniform_solution(z2.ctx, z2.noise);
    const auto coup = ci_coupling(z2.noise, z2.ctx, uni, uni, cfg);
    const double zc = std::abs(coup.frequency - 0.5) / std::sqrt(0.25 / double(cfg.trials));
    o.require(zc <= 3, "coupling off by " + format_float(zc) + " sigma");

    if (o.pass)
        o.detail = "p in {1/2, 1/3, 1/5}, max |z|: state law " + format_float(worst) +
                   ", stopping-time mean " + format_float(zt) + "; Z/2 coupling " +
                   format_float(zc);
    return o;
}

Outcome properties() {
    Outcome o;
    const std::string cmd = std::string(TSL_PROPERTY_TEST) + " --gtest_brief=1 > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    o.require(rc == 0, "property suites failed (exit " + std::to_string(rc) + ")");
    if (o.pass)
        o.detail = "property_test: 8 suites of at least 100 cases each passed";
    return o;
}

Outcome determinism() {
    Outcome o;
    const auto spec = [](const std::string& f) { return kSource + "/data/specs/" + f; };
    const auto tmp = [](const std::string& f) {
        return (std::filesystem::temp_directory_path() / f).string();
    };
    auto once = [&](std::vector<std::string> args, const std::string& csv) {
        if (!csv.empty()) {
            args.push_back("--csv");
            args.push_back(csv);
        }
        std::ostringstream out, err;
        const int rc = run_cli(args, out, err);
        std::string text = std::to_string(rc) + "\n" + out.str();
        if (!csv.empty()) {
            std::ifstream in(csv, std::ios::binary);
            std::ostringstream ss;
            ss << in.rdbuf();
            text += ss.str();
            std::filesystem::remove(csv);
        }
        return text;
    };
    const std::vector<std::vector<std::string>> commands{
        {"analyze", spec("three_state_pq.tsl"), "--json"},
        {"analyze", spec("s3_transposition.tsl"), "--json", "--window", "4"},
        {"analyze", spec("prefix_override.tsl")},
        {"fourier", spec("z4_half.tsl"), "--json"},
        {"simulate", spec("three_state_pq.tsl"), "--depth", "32", "--trials", "5000", "--seed",
         "9", "--json"},
        {"simulate", spec("z2_uniform.tsl"), "--depth", "8", "--trials", "5000", "--seed", "1"},
    };
    for (const auto& c : commands) {
        const bool sim = c[0] == "simulate";
        const auto a = once(c, sim ? tmp("tsl_accept_a.csv") : "");
        const auto b = once(c, sim ? tmp("tsl_accept_b.csv") : "");
        o.require(a == b, "output differs for " + c[0] + " " + c[1]);
        o.require(a.rfind("0\n", 0) == 0, c[0] + " " + c[1] + " did not exit 0");
    }
    if (o.pass)
        o.detail = "6 commands repeated with byte-identical JSON, text and CSV";
    return o;
}

} // namespace

int main() {
    struct Criterion {
        int id;
        double limit_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, 1, closure_facts}, {2, 1, stationary},    {3, 5, limits},
        {4, 0, classification}, {5, 0, fourier},      {6, 0, independence},
        {7, 30, monte_carlo},  {8, 0, properties},   {9, 0, determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.limit_s > 0 && secs >= c.limit_s)
            o.require(false, "took " + format_float(secs) + " s, limit " +
                                 format_float(c.limit_s) + " s");
        if (!o.pass)
            ++failures;
        char timing[32];
        std::snprintf(timing, sizeof timing, "%.3f s", secs);
        std::cout << "criterion " << c.id << ": " << (o.pass ? "PASS" : "FAIL") << " ["
                  << timing << "] " << o.detail << "\n";
    }
    return failures == 0 ? 0 : 1;
}

#include "tsl/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "tsl/errors.hpp"

namespace tsl {

void SimConfig::validate() const {
    if (depth == 0)
        throw ValidationError("depth must be positive");
    if (trials == 0)
        throw ValidationError("trials must be positive");
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
    std::uint64_t z = seed + (trial + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Sampler::Sampler(const ProbMeasure& mu) {
    Rational cum;
    for (auto a : mu.support()) {
        cum += mu[a];
        mpz_class scaled = cum.get_num();
        scaled <<= 64;
        mpz_class den = cum.get_den();
        mpz_class ceil = (scaled + den - 1) / den;
        const mpz_class mask = (mpz_class(1) << 64) - 1;
        const mpz_class lo = ceil & mask;
        const mpz_class hi = ceil >> 64;
        unsigned __int128 t = (static_cast<unsigned __int128>(hi.get_ui()) << 64) | lo.get_ui();
        atoms_.push_back(a);
        thresholds_.push_back(t);
    }
}

std::size_t Sampler::operator()(std::mt19937_64& rng) const {
    const unsigned __int128 u = rng();
    for (std::size_t i = 0; i < atoms_.size(); ++i)
        if (u < thresholds_[i])
            return atoms_[i];
    return atoms_.back();
}

PathSimulator::PathSimulator(const NoiseSpec& noise, const ActionContext& ctx, SimConfig cfg)
    : noise_(&noise), ctx_(&ctx), cfg_(cfg), tail_(noise.tail()) {
    cfg_.validate();
    for (const auto& p : noise.prefix())
        samplers_.emplace_back(p);

    const auto& sg = ctx.sg();
    const std::size_t m = noise.prefix_length();
    std::vector<bool> deep(sg.size(), false);
    for (auto t : noise.tail().support())
        deep[t] = true;
    absorbing_.assign(m + 1, std::vector<bool>(sg.size(), false));
    for (std::size_t level = m + 1; level-- > 0;) {
        if (level < m)
            for (auto t : noise.prefix()[level].support())
                deep[t] = true;
        for (ElementId s = 0; s < sg.size(); ++s) {
            bool absorbs = true;
            for (ElementId t = 0; absorbs && t < sg.size(); ++t)
                if (deep[t] && sg.product(s, t) != s)
                    absorbs = false;
            absorbing_[level][s] = absorbs;
        }
    }
}

std::mt19937_64 PathSimulator::draw_noise(std::uint64_t t, PathSample& out) const {
    const auto& sg = ctx_->sg();
    const std::size_t depth = cfg_.depth;
    std::mt19937_64 rng(trial_seed(cfg_.seed, t));
    out = PathSample{};
    out.noise.reserve(depth);
    out.products.reserve(depth);
    for (std::size_t i = 0; i < depth; ++i) {
        const auto n = i < samplers_.size() ? samplers_[i](rng) : tail_(rng);
        out.noise.push_back(n);
        out.products.push_back(i == 0 ? n : sg.product(out.products.back(), n));
    }
    const std::size_t cap = absorbing_.size() - 1;
    for (std::size_t m = 1; m <= depth; ++m)
        if (absorbing_[std::min(m, cap)][out.products[m - 1]]) {
            out.absorbed_at = m;
            break;
        }
    return rng;
}

PathSample PathSimulator::trial(std::uint64_t t, const ProbMeasure* entry) const {
    const auto& sg = ctx_->sg();
    const std::size_t depth = cfg_.depth;
    PathSample out;
    auto rng = draw_noise(t, out);
    if (entry) {
        std::vector<StateIndex> path(depth + 1);
        path[depth] = Sampler(*entry)(rng);
        for (std::size_t i = depth; i-- > 0;)
            path[i] = sg.act(out.noise[i], path[i + 1]);
        out.x_path = std::move(path);
    }
    return out;
}

void simulate_paths(const NoiseSpec& noise, const ActionContext& ctx, const SimConfig& cfg,
                    const std::function<void(std::uint64_t, const PathSample&)>& sink,
                    const ProbMeasure* entry) {
    PathSimulator sim(noise, ctx, cfg);
    for (std::uint64_t t = 0; t < cfg.trials; ++t)
        sink(t, sim.trial(t, entry));
}

double EmpiricalLaw::frequency(std::size_t atom) const {
    return static_cast<double>(counts[atom]) / static_cast<double>(trials);
}

double EmpiricalLaw::standard_error(std::size_t atom) const {
    const double f = frequency(atom);
    return std::sqrt(f * (1 - f) / static_cast<double>(trials));
}

EmpiricalLaw estimate_product_law(const NoiseSpec& noise, const ActionContext& ctx,
                                  const SimConfig& cfg) {
    EmpiricalLaw law;
    law.counts.assign(ctx.sg().size(), 0);
    law.trials = cfg.trials;
    simulate_paths(noise, ctx, cfg,
                   [&](std::uint64_t, const PathSample& s) { ++law.counts[s.products.back()]; });
    return law;
}

EmpiricalLaw estimate_state_law(const NoiseSpec& noise, const ActionContext& ctx,
                                const SimConfig& cfg, const ProbMeasure& entry) {
    if (!(entry.carrier() == ctx.states()))
        throw CarrierMismatch("entry law must live on the state space");
    EmpiricalLaw law;
    law.counts.assign(ctx.space.size(), 0);
    law.trials = cfg.trials;
    simulate_paths(
        noise, ctx, cfg,
        [&](std::uint64_t, const PathSample& s) { ++law.counts[s.x_path->front()]; }, &entry);
    return law;
}

ProbMeasure exact_state_law(const NoiseSpec& noise, const ActionContext& ctx, std::size_t depth,
                            const ProbMeasure& entry) {
    ProbMeasure law = entry;
    for (std::size_t i = depth; i-- > 0;)
        law = act(ctx.sg(), noise.at(-static_cast<long>(i)), law);
    return law;
}

ExactStoppingTime exact_stopping_time(const NoiseSpec& noise, const ActionContext& ctx) {
    if (!noise.is_iid())
        throw UnsupportedCase("exact stopping-time laws need i.i.d. noise");
    const auto chain = build_product_chain(ctx.sg(), noise);
    const auto absorb = chain.structure.absorb_from(chain.initial);
    ExactStoppingTime out;
    for (std::size_t c = 0; c < chain.structure.classes.size(); ++c) {
        const auto& cls = chain.structure.classes[c];
        const bool point = cls.states.size() == 1 &&
                           chain.transitions(cls.states[0], cls.states[0]) == 1;
        if (!point)
            out.infinite += absorb[c];
    }
    if (out.infinite == 0) {
        Rational mean = 1;
        for (std::size_t i = 0; i < chain.states.size(); ++i)
            mean += chain.initial[i] * chain.structure.hitting_time[i];
        out.mean = mean;
    }
    return out;
}

Rational exact_stopping_tail(const NoiseSpec& noise, const ActionContext& ctx, std::size_t depth) {
    if (!noise.is_iid())
        throw UnsupportedCase("exact stopping-time laws need i.i.d. noise");
    const auto chain = build_product_chain(ctx.sg(), noise);
    std::vector<bool> absorbing(chain.states.size(), false);
    for (auto a : chain.absorbing)
        absorbing[a] = true;
    // Mass still outside the absorbing states after each step.
    RationalVector law = chain.initial;
    for (std::size_t step = 1; step <= depth; ++step) {
        for (std::size_t i = 0; i < law.size(); ++i)
            if (absorbing[i])
                law[i] = 0;
        if (step < depth)
            law = left_multiply(law, chain.transitions);
    }
    Rational tail;
    for (const auto& w : law)
        tail += w;
    return tail;
}

StoppingTimeStats stopping_time_stats(const NoiseSpec& noise, const ActionContext& ctx,
                                      const SimConfig& cfg) {
    StoppingTimeStats st;
    st.trials = cfg.trials;
    std::vector<std::size_t> times;
    simulate_paths(noise, ctx, cfg, [&](std::uint64_t, const PathSample& s) {
        if (s.absorbed_at)
            times.push_back(*s.absorbed_at);
    });
    st.absorbed = times.size();
    st.unabsorbed_fraction =
        static_cast<double>(st.trials - st.absorbed) / static_cast<double>(st.trials);
    if (!times.empty()) {
        double sum = 0, sq = 0;
        for (auto t : times) {
            sum += static_cast<double>(t);
            sq += static_cast<double>(t) * static_cast<double>(t);
        }
        const double k = static_cast<double>(times.size());
        st.mean = sum / k;
        const double var = times.size() > 1 ? (sq - k * st.mean * st.mean) / (k - 1) : 0.0;
        st.standard_error = std::sqrt(std::max(var, 0.0) / k);
        std::sort(times.begin(), times.end());
        auto rank = [&](double q) {
            auto idx = static_cast<std::size_t>(std::ceil(q * k)) - 1;
            return times[std::min(idx, times.size() - 1)];
        };
        st.median = rank(0.5);
        st.q90 = rank(0.9);
    }
    if (noise.is_iid()) {
        const auto exact = exact_stopping_time(noise, ctx);
        st.exact_infinite = exact.infinite;
        st.exact_mean = exact.mean;
        st.exact_tail = exact_stopping_tail(noise, ctx, cfg.depth);
    }
    return st;
}

CouplingResult ci_coupling(const NoiseSpec& noise, const ActionContext& ctx,
                           const SolutionLawFamily& first, const SolutionLawFamily& second,
                           const SimConfig& cfg) {
    cfg.validate();
    if (!satisfies_convolution_equation(noise, ctx, first) ||
        !satisfies_convolution_equation(noise, ctx, second))
        throw ValidationError("coupled families must solve the convolution equation");
    const auto& sg = ctx.sg();
    const long entry_index = -static_cast<long>(cfg.depth);
    const Sampler entry1(first.at(entry_index));
    const Sampler entry2(second.at(entry_index));
    PathSimulator sim(noise, ctx, cfg);

    CouplingResult out;
    out.trials = cfg.trials;
    out.collided.reserve(cfg.trials);
    for (std::uint64_t t = 0; t < cfg.trials; ++t) {
        PathSample path;
        auto rng = sim.draw_noise(t, path);
        StateIndex x1 = entry1(rng);
        StateIndex x2 = entry2(rng);
        for (std::size_t i = cfg.depth; i-- > 0;) {
            x1 = sg.act(path.noise[i], x1);
            x2 = sg.act(path.noise[i], x2);
        }
        const bool hit = x1 == x2;
        out.collided.push_back(hit ? 1 : 0);
        out.collisions += hit ? 1 : 0;
    }
    out.frequency = static_cast<double>(out.collisions) / static_cast<double>(out.trials);
    out.standard_error =
        std::sqrt(out.frequency * (1 - out.frequency) / static_cast<double>(out.trials));
    return out;
}

std::string format_float(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace

void write_csv(std::ostream& out, const std::vector<CsvRow>& rows) {
    out << "atom,exact,empirical,stderr\n";
    for (const auto& r : rows)
        out << csv_field(r.atom) << ',' << (r.exact ? to_string(*r.exact) : std::string()) << ','
            << format_float(r.empirical) << ',' << format_float(r.standard_error) << '\n';
}

} // namespace tsl

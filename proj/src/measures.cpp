#include "tsl/measures.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <tuple>

#include "tsl/errors.hpp"

namespace tsl {

namespace {

void require_same(const Carrier& a, const Carrier& b, const char* op) {
    if (!(a == b))
        throw CarrierMismatch(std::string(op) + ": measures live on different carriers");
}

void require_elements(const FiniteSemigroup& sg, const ProbMeasure& mu, const char* op) {
    require_same(mu.carrier(), element_carrier(sg), op);
}

std::size_t residue(long k, std::size_t d) {
    const long m = static_cast<long>(d);
    return static_cast<std::size_t>(((k % m) + m) % m);
}

} // namespace

Carrier element_carrier(const FiniteSemigroup& sg) {
    return {CarrierKind::Elements, sg.size(), sg.fingerprint()};
}

Carrier state_carrier(std::size_t n) { return {CarrierKind::States, n, 0}; }

ProbMeasure::ProbMeasure(Carrier carrier, RationalVector weights)
    : carrier_(carrier), weights_(std::move(weights)) {
    if (weights_.size() != carrier_.size)
        throw DimensionError("measure length does not match its carrier");
    Rational total;
    for (const auto& w : weights_) {
        if (sgn(w) < 0)
            throw ValidationError("negative probability weight");
        total += w;
    }
    if (total != 1)
        throw ValidationError("weights sum to " + to_string(total) + ", not 1");
}

ProbMeasure ProbMeasure::point_mass(Carrier carrier, std::size_t atom) {
    if (atom >= carrier.size)
        throw DimensionError("point mass outside carrier");
    RationalVector w(carrier.size);
    w[atom] = 1;
    return ProbMeasure(carrier, std::move(w));
}

ProbMeasure ProbMeasure::uniform(Carrier carrier) {
    std::vector<std::size_t> all(carrier.size);
    for (std::size_t i = 0; i < all.size(); ++i)
        all[i] = i;
    return uniform_on(carrier, all);
}

ProbMeasure ProbMeasure::uniform_on(Carrier carrier, const std::vector<std::size_t>& atoms) {
    if (atoms.empty())
        throw ValidationError("uniform law on an empty set");
    RationalVector w(carrier.size);
    const Rational each(1, static_cast<unsigned long>(atoms.size()));
    for (auto a : atoms) {
        if (a >= carrier.size)
            throw DimensionError("atom outside carrier");
        w[a] += each;
    }
    return ProbMeasure(carrier, std::move(w));
}

std::vector<std::size_t> ProbMeasure::support() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < weights_.size(); ++i)
        if (sgn(weights_[i]) > 0)
            out.push_back(i);
    return out;
}

ProbMeasure convolve(const FiniteSemigroup& sg, const ProbMeasure& mu1, const ProbMeasure& mu2) {
    require_elements(sg, mu1, "convolve");
    require_elements(sg, mu2, "convolve");
    RationalVector w(sg.size());
    const auto s2 = mu2.support();
    for (auto a : mu1.support())
        for (auto b : s2)
            w[sg.product(a, b)] += mu1[a] * mu2[b];
    return ProbMeasure(mu1.carrier(), std::move(w));
}

ProbMeasure act(const FiniteSemigroup& sg, const ProbMeasure& mu, const ProbMeasure& lambda) {
    require_elements(sg, mu, "act");
    if (!sg.has_action())
        throw UnsupportedCase("act: semigroup has no action on a state space");
    require_same(lambda.carrier(), state_carrier(sg.degree()), "act");
    RationalVector w(lambda.size());
    const auto sx = lambda.support();
    for (auto s : mu.support())
        for (auto x : sx)
            w[sg.act(s, x)] += mu[s] * lambda[x];
    return ProbMeasure(lambda.carrier(), std::move(w));
}

ProbMeasure right_translate(const FiniteSemigroup& sg, const ProbMeasure& nu, ElementId g) {
    require_elements(sg, nu, "right_translate");
    RationalVector w(sg.size());
    for (auto s : nu.support())
        w[sg.product(s, g)] += nu[s];
    return ProbMeasure(nu.carrier(), std::move(w));
}

bool is_right_invariant(const FiniteSemigroup& sg, const ProbMeasure& nu,
                        const SubgroupDescriptor& h) {
    for (auto g : h.members)
        if (!(right_translate(sg, nu, g) == nu))
            return false;
    return true;
}

Rational tv_distance(const ProbMeasure& a, const ProbMeasure& b) {
    require_same(a.carrier(), b.carrier(), "tv_distance");
    Rational sum;
    for (std::size_t i = 0; i < a.size(); ++i)
        sum += abs(a[i] - b[i]);
    return sum / 2;
}

ProbMeasure embed_measure(const ProbMeasure& nu, const std::vector<ElementId>& embed,
                          const FiniteSemigroup& target) {
    if (embed.size() != nu.size())
        throw DimensionError("embedding length does not match the measure");
    RationalVector w(target.size());
    for (auto s : nu.support())
        w[embed[s]] += nu[s];
    return ProbMeasure(element_carrier(target), std::move(w));
}

NoiseSpec::NoiseSpec(std::vector<ProbMeasure> prefix, ProbMeasure tail)
    : prefix_(std::move(prefix)), tail_(std::move(tail)) {
    if (tail_.carrier().kind != CarrierKind::Elements)
        throw CarrierMismatch("noise laws must live on semigroup elements");
    for (const auto& p : prefix_)
        require_same(p.carrier(), tail_.carrier(), "noise");
}

const ProbMeasure& NoiseSpec::at(long k) const {
    if (k > 0)
        throw ValidationError("noise index must be <= 0");
    const auto i = static_cast<std::size_t>(-k);
    return i < prefix_.size() ? prefix_[i] : tail_;
}

ActionContext ActionContext::semigroup_action(FiniteSemigroup sg, StateSpace space) {
    if (!sg.has_action() || sg.degree() != space.size())
        throw DimensionError("semigroup does not act on a space of this size");
    return {std::make_shared<const FiniteSemigroup>(std::move(sg)), std::move(space),
            std::nullopt};
}

ActionContext ActionContext::group_on_itself(GroupAction g) {
    auto sg = std::make_shared<const FiniteSemigroup>(g.group);
    auto space = g.space;
    return {std::move(sg), std::move(space), std::move(g)};
}

ProbMeasure product_law(const FiniteSemigroup& sg, const NoiseSpec& noise, std::size_t depth) {
    if (depth == 0)
        throw ValidationError("depth must be at least 1");
    ProbMeasure law = noise.at(0);
    for (std::size_t i = 1; i < depth; ++i)
        law = convolve(sg, law, noise.at(-static_cast<long>(i)));
    return law;
}

ProbMeasure ProductChain::to_measure(const RationalVector& v, const FiniteSemigroup& sg) const {
    RationalVector w(sg.size());
    for (std::size_t i = 0; i < states.size(); ++i)
        w[states[i]] = v[i];
    return ProbMeasure(element_carrier(sg), std::move(w));
}

ProductChain build_product_chain(const FiniteSemigroup& sg, const NoiseSpec& noise) {
    require_elements(sg, noise.tail(), "build_product_chain");
    const auto supp = noise.tail().support();

    std::vector<bool> seen(sg.size(), false);
    std::deque<ElementId> frontier;
    for (auto t : supp) {
        seen[t] = true;
        frontier.push_back(t);
    }
    while (!frontier.empty()) {
        auto s = frontier.front();
        frontier.pop_front();
        for (auto t : supp) {
            auto st = sg.product(s, t);
            if (!seen[st]) {
                seen[st] = true;
                frontier.push_back(st);
            }
        }
    }

    ProductChain chain;
    chain.position.assign(sg.size(), SIZE_MAX);
    for (ElementId s = 0; s < sg.size(); ++s)
        if (seen[s]) {
            chain.position[s] = chain.states.size();
            chain.states.push_back(s);
        }
    const std::size_t n = chain.states.size();
    chain.transitions = RationalMatrix(n, n);
    chain.initial.assign(n, Rational(0));
    for (std::size_t i = 0; i < n; ++i)
        for (auto t : supp)
            chain.transitions(i, chain.position[sg.product(chain.states[i], t)]) +=
                noise.tail()[t];
    for (auto t : supp)
        chain.initial[chain.position[t]] = noise.tail()[t];
    chain.structure = analyze_chain(chain.transitions);
    for (std::size_t i = 0; i < n; ++i)
        if (chain.transitions(i, i) == 1)
            chain.absorbing.push_back(i);
    return chain;
}

const ProbMeasure& LimitLawReport::limit_at(long k) const {
    const auto i = static_cast<std::size_t>(-k);
    if (k > 0)
        throw ValidationError("index must be <= 0");
    return i < prefix_limits.size() ? prefix_limits[i] : residue_limits[residue(k, period)];
}

const ProbMeasure& LimitLawReport::cesaro_at(long k) const {
    const auto i = static_cast<std::size_t>(-k);
    if (k > 0)
        throw ValidationError("index must be <= 0");
    return i < prefix_cesaro.size() ? prefix_cesaro[i] : cesaro_tail;
}

namespace {

// Every class of `structure` consists of a single state.
bool all_points(const ChainStructure& structure) {
    return std::all_of(structure.classes.begin(), structure.classes.end(),
                       [](const RecurrentClass& c) { return c.states.size() == 1; });
}

bool coset_constant(const ChainStructure& structure, const ProductChain& chain,
                    const CosetStructure& cs, const std::vector<ElementId>& embed) {
    for (const auto& c : structure.classes) {
        const auto first = cs.coset_of(embed[chain.states[c.states.front()]]);
        for (auto s : c.states)
            if (cs.coset_of(embed[chain.states[s]]) != first)
                return false;
    }
    return true;
}

void search_p2(LimitLawReport& rep, const ActionContext& ctx, const ChainStructure& phase,
               const LimitOptions& options) {
    const auto& sg = ctx.sg();
    rep.subgroup_search_cap = options.subgroup_cap;
    if (ctx.group) {
        rep.ambient = ctx.semigroup;
        rep.embed.resize(sg.size());
        for (ElementId i = 0; i < sg.size(); ++i)
            rep.embed[i] = i;
    } else {
        const std::size_t n = ctx.space.size();
        double count = std::pow(static_cast<double>(n), static_cast<double>(n));
        if (count > static_cast<double>(options.subgroup_cap)) {
            rep.subgroup_search_error =
                "subgroup search needs all " + std::to_string(n) + "^" + std::to_string(n) +
                " maps of the state space, above the cap of " +
                std::to_string(options.subgroup_cap) + "; raise --subgroup-cap";
            return;
        }
        rep.ambient = std::make_shared<const FiniteSemigroup>(full_transformation_monoid(n));
        rep.embed.resize(sg.size());
        for (ElementId i = 0; i < sg.size(); ++i)
            rep.embed[i] = *rep.ambient->find(sg.element(i));
    }
    const auto& amb = *rep.ambient;

    std::vector<SubgroupDescriptor> subs;
    try {
        subs = find_subgroups(amb, {options.max_generators, options.subgroup_cap});
    } catch (const CapacityError& e) {
        rep.subgroup_search_error = e.what();
        return;
    }

    std::vector<ProbMeasure> tail_laws, prefix_laws;
    for (const auto& r : rep.residue_limits)
        tail_laws.push_back(embed_measure(r, rep.embed, amb));
    for (const auto& p : rep.prefix_limits)
        prefix_laws.push_back(embed_measure(p, rep.embed, amb));

    for (const auto& h : subs) {
        if (h.trivial())
            continue;
        auto invariant = [&](const std::vector<ProbMeasure>& laws) {
            return std::all_of(laws.begin(), laws.end(), [&](const ProbMeasure& nu) {
                return is_right_invariant(amb, nu, h);
            });
        };
        // The same H has to serve every k, prefix included.
        if (!invariant(tail_laws) || !invariant(prefix_laws))
            continue;
        CosetStructure cs(amb, h);
        const bool literal = rep.converges_in_law &&
                             coset_constant(rep.chain.structure, rep.chain, cs, rep.embed);
        const bool phased = literal || coset_constant(phase, rep.chain, cs, rep.embed);
        if (!phased)
            continue;
        P2Certificate cert;
        cert.subgroup = h;
        for (auto m : h.members)
            cert.member_labels.push_back(amb.label(m));
        cert.transitive = amb.has_action()
                              ? subgroup_orbit(amb, h, 0).size() == amb.degree()
                              : false;
        cert.phase_only = !literal;
        rep.p2_candidates.push_back(std::move(cert));
    }
    std::stable_sort(rep.p2_candidates.begin(), rep.p2_candidates.end(),
                     [](const P2Certificate& a, const P2Certificate& b) {
                         return std::make_tuple(a.phase_only, !a.transitive, a.subgroup.size(),
                                                std::cref(a.subgroup.members)) <
                                std::make_tuple(b.phase_only, !b.transitive, b.subgroup.size(),
                                                std::cref(b.subgroup.members));
                     });
    if (!rep.p2_candidates.empty())
        rep.p2 = rep.p2_candidates.front();
}

} // namespace

LimitLawReport limit_analysis(const NoiseSpec& noise, const ActionContext& ctx,
                              const LimitOptions& options) {
    const auto& sg = ctx.sg();
    require_elements(sg, noise.tail(), "limit_analysis");

    LimitLawReport rep;
    rep.chain = build_product_chain(sg, noise);
    const auto& chain = rep.chain;
    const std::size_t d = chain.period();
    rep.period = d;
    rep.prefix_length = noise.prefix_length();

    // The D-step chain is aperiodic on each of its classes, so every residue
    // class of depths has a limit.
    ChainStructure phase =
        d == 1 ? chain.structure : analyze_chain(power(chain.transitions, d));
    rep.residue_limits.assign(d, ProbMeasure());
    RationalVector law = chain.initial; // law of the depth-j product
    for (std::size_t j = 1; j <= d; ++j) {
        rep.residue_limits[j % d] = chain.to_measure(phase.limit_mixture(law), sg);
        law = left_multiply(law, chain.transitions);
    }
    rep.converges_in_law =
        std::all_of(rep.residue_limits.begin(), rep.residue_limits.end(),
                    [&](const ProbMeasure& r) { return r == rep.residue_limits.front(); });

    RationalVector avg(sg.size());
    for (const auto& r : rep.residue_limits)
        for (std::size_t i = 0; i < avg.size(); ++i)
            avg[i] += r[i];
    for (auto& a : avg)
        a /= static_cast<unsigned long>(d);
    rep.cesaro_tail = ProbMeasure(element_carrier(sg), std::move(avg));
    if (!(rep.cesaro_tail == chain.to_measure(chain.structure.limit_mixture(chain.initial), sg)))
        throw InternalInconsistency("Cesaro limit disagrees with the class mixture");

    const std::size_t m = noise.prefix_length();
    rep.prefix_limits.assign(m, ProbMeasure());
    rep.prefix_cesaro.assign(m, ProbMeasure());
    for (std::size_t i = m; i-- > 0;) {
        const long k = -static_cast<long>(i);
        const auto& below = i + 1 < m ? rep.prefix_limits[i + 1]
                                      : rep.residue_limits[residue(k - 1, d)];
        const auto& below_c = i + 1 < m ? rep.prefix_cesaro[i + 1] : rep.cesaro_tail;
        rep.prefix_limits[i] = convolve(sg, noise.at(k), below);
        rep.prefix_cesaro[i] = convolve(sg, noise.at(k), below_c);
    }
    if (rep.converges_in_law)
        rep.nu = rep.limit_at(0);
    rep.cesaro = rep.cesaro_at(0);
    if (rep.converges_in_law && !(*rep.nu == rep.cesaro))
        throw InternalInconsistency("limit law differs from its Cesaro average");

    rep.as_convergence = all_points(chain.structure);
    rep.phase_as_convergence = all_points(phase);

    search_p2(rep, ctx, phase, options);
    return rep;
}

} // namespace tsl

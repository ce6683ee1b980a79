#include "tsl/solver.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "tsl/errors.hpp"

namespace tsl {

namespace {

std::size_t residue(long k, std::size_t d) {
    const long m = static_cast<long>(d);
    return static_cast<std::size_t>(((k % m) + m) % m);
}

ProbMeasure push_states(const FiniteSemigroup& sg, ElementId sigma, const ProbMeasure& lambda) {
    RationalVector w(lambda.size());
    for (auto x : lambda.support())
        w[sg.act(sigma, x)] += lambda[x];
    return ProbMeasure(lambda.carrier(), std::move(w));
}

// Rebuilds a family layout (prefix length m, period d) from a law function.
template <typename F>
SolutionLawFamily build_family(std::size_t m, std::size_t d, F law_at,
                               SolutionLawFamily::Origin origin, bool certified) {
    std::vector<ProbMeasure> prefix, cycle(d);
    for (std::size_t i = 0; i < m; ++i)
        prefix.push_back(law_at(-static_cast<long>(i)));
    for (std::size_t r = 0; r < d; ++r) {
        const long k = -static_cast<long>(m + r);
        cycle[residue(k, d)] = law_at(k);
    }
    return SolutionLawFamily(std::move(prefix), std::move(cycle), origin, certified);
}

RationalVector flatten(const SolutionLawFamily& f) {
    RationalVector out;
    for (const auto& p : f.prefix())
        out.insert(out.end(), p.weights().begin(), p.weights().end());
    for (const auto& c : f.cycle())
        out.insert(out.end(), c.weights().begin(), c.weights().end());
    return out;
}

void require_group(const ActionContext& ctx, const char* op) {
    if (!ctx.group)
        throw UnsupportedCase(std::string(op) + " needs a group acting on itself");
}

} // namespace

SolutionLawFamily::SolutionLawFamily(std::vector<ProbMeasure> prefix,
                                     std::vector<ProbMeasure> cycle, Origin origin,
                                     bool certified_extremal)
    : prefix_(std::move(prefix)), cycle_(std::move(cycle)), origin_(origin),
      certified_(certified_extremal) {
    if (cycle_.empty())
        throw ValidationError("a solution family needs at least one tail law");
}

const ProbMeasure& SolutionLawFamily::at(long k) const {
    if (k > 0)
        throw ValidationError("index must be <= 0");
    const auto i = static_cast<std::size_t>(-k);
    return i < prefix_.size() ? prefix_[i] : cycle_[residue(k, cycle_.size())];
}

std::vector<ProbMeasure> SolutionLawFamily::window(std::size_t depth) const {
    std::vector<ProbMeasure> out;
    for (std::size_t i = 0; i <= depth; ++i)
        out.push_back(at(-static_cast<long>(i)));
    return out;
}

bool SolutionLawFamily::same_laws(const SolutionLawFamily& other) const {
    const std::size_t reach = std::max(prefix_.size(), other.prefix_.size()) +
                              std::lcm(cycle_.size(), other.cycle_.size());
    for (std::size_t i = 0; i < reach; ++i)
        if (!(at(-static_cast<long>(i)) == other.at(-static_cast<long>(i))))
            return false;
    return true;
}

std::string to_string(SolutionLawFamily::Origin origin) {
    switch (origin) {
    case SolutionLawFamily::Origin::Extremal: return "extremal";
    case SolutionLawFamily::Origin::Cesaro: return "cesaro";
    case SolutionLawFamily::Origin::Mixture: return "mixture";
    case SolutionLawFamily::Origin::UniformGroup: return "uniform-group";
    }
    return "unknown";
}

std::string to_string(Trichotomy t) {
    switch (t) {
    case Trichotomy::C0: return "C0";
    case Trichotomy::C1: return "C1";
    case Trichotomy::C2: return "C2";
    case Trichotomy::C3: return "C3";
    }
    return "unknown";
}

bool satisfies_convolution_equation(const NoiseSpec& noise, const ActionContext& ctx,
                                    const SolutionLawFamily& family) {
    const std::size_t reach = std::max(noise.prefix_length(), family.prefix().size()) +
                              family.period() + 1;
    for (std::size_t i = 0; i < reach; ++i) {
        const long k = -static_cast<long>(i);
        if (!(family.at(k) == act(ctx.sg(), noise.at(k), family.at(k - 1))))
            return false;
    }
    return true;
}

std::vector<ExtremalFamily> phase_locked_solutions(const NoiseSpec& noise,
                                                   const ActionContext& ctx,
                                                   const LimitLawReport& limits) {
    const auto& sg = ctx.sg();
    std::vector<ExtremalFamily> candidates;
    for (StateIndex x = 0; x < ctx.space.size(); ++x) {
        const auto dx = ProbMeasure::point_mass(ctx.states(), x);
        auto fam = build_family(
            limits.prefix_length, limits.period,
            [&](long k) { return act(sg, limits.limit_at(k), dx); },
            SolutionLawFamily::Origin::Extremal, true);
        auto same = std::find_if(candidates.begin(), candidates.end(), [&](const auto& c) {
            return c.family.same_laws(fam);
        });
        if (same != candidates.end())
            same->base_points.push_back(x);
        else
            candidates.push_back({{x}, std::move(fam)});
    }
    if (candidates.size() <= 1)
        return candidates;

    // Every solution is nu * lambda for some lambda on S, so the solution set
    // is the hull of the candidates; keep its extreme points.
    std::vector<RationalVector> flat;
    for (const auto& c : candidates)
        flat.push_back(flatten(c.family));
    std::vector<ExtremalFamily> out;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        std::vector<RationalVector> others;
        for (std::size_t j = 0; j < candidates.size(); ++j)
            if (j != i)
                others.push_back(flat[j]);
        if (!convex_combination(flat[i], others))
            out.push_back(candidates[i]);
    }
    for (const auto& e : out)
        if (!satisfies_convolution_equation(noise, ctx, e.family))
            throw InternalInconsistency("extremal family violates the convolution equation");
    return out;
}

std::vector<ExtremalFamily> extremal_solutions(const NoiseSpec& noise, const ActionContext& ctx,
                                               const LimitLawReport& limits) {
    if (!limits.converges_in_law)
        throw UnsupportedCase("backward products do not converge in law; use the "
                              "phase-locked or Cesaro families, or simulate");
    return phase_locked_solutions(noise, ctx, limits);
}

SolutionLawFamily cesaro_family(const NoiseSpec& noise, const ActionContext& ctx,
                                const LimitLawReport& limits, StateIndex x) {
    const auto dx = ProbMeasure::point_mass(ctx.states(), x);
    auto fam = build_family(
        limits.prefix_length, 1, [&](long k) { return act(ctx.sg(), limits.cesaro_at(k), dx); },
        SolutionLawFamily::Origin::Cesaro, limits.as_convergence);
    if (!satisfies_convolution_equation(noise, ctx, fam))
        throw InternalInconsistency("Cesaro family violates the convolution equation");
    return fam;
}

SolutionLawFamily mixture(const std::vector<SolutionLawFamily>& families,
                          const RationalVector& weights) {
    if (families.empty() || families.size() != weights.size())
        throw DimensionError("mixture needs one weight per family");
    Rational total;
    for (const auto& w : weights) {
        if (sgn(w) < 0)
            throw ValidationError("negative mixture weight");
        total += w;
    }
    if (total != 1)
        throw ValidationError("mixture weights must sum to 1");
    std::size_t m = 0, d = 1;
    for (const auto& f : families) {
        m = std::max(m, f.prefix().size());
        d = std::lcm(d, f.period());
    }
    return build_family(
        m, d,
        [&](long k) {
            const auto& first = families.front().at(k);
            RationalVector w(first.size());
            for (std::size_t i = 0; i < families.size(); ++i)
                for (std::size_t a = 0; a < w.size(); ++a)
                    w[a] += weights[i] * families[i].at(k)[a];
            return ProbMeasure(first.carrier(), std::move(w));
        },
        SolutionLawFamily::Origin::Mixture, false);
}

RationalMatrix state_transition_matrix(const ProbMeasure& mu, const ActionContext& ctx) {
    if (!(mu.carrier() == ctx.elements()))
        throw CarrierMismatch("noise law does not live on this semigroup");
    const std::size_t n = ctx.space.size();
    RationalMatrix pi(n, n);
    for (auto s : mu.support())
        for (StateIndex i = 0; i < n; ++i)
            pi(ctx.sg().act(s, i), i) += mu[s];
    return pi;
}

ProbMeasure stationary_law(const ProbMeasure& mu, const ActionContext& ctx) {
    const auto pi = state_transition_matrix(mu, ctx);
    const std::size_t n = pi.rows();
    RationalMatrix rows(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            rows(i, j) = pi(j, i);
    const auto chain = analyze_chain(rows);
    if (chain.classes.size() != 1) {
        std::string msg = "stationary law is not unique; closed state classes:";
        for (const auto& c : chain.classes) {
            msg += " {";
            for (std::size_t i = 0; i < c.states.size(); ++i)
                msg += (i ? "," : "") + ctx.space.label(c.states[i]);
            msg += "}";
        }
        throw MultiplicityError(msg);
    }
    ProbMeasure u(ctx.states(), chain.classes.front().stationary);
    for (std::size_t j = 0; j < n; ++j) {
        Rational row;
        for (std::size_t i = 0; i < n; ++i)
            row += pi(j, i) * u[i];
        if (row != u[j])
            throw InternalInconsistency("stationary vector fails Pi u = u");
    }
    return u;
}

ClassificationReport classify(const NoiseSpec& noise, const ActionContext& ctx,
                              const ClassifyOptions& options) {
    const auto& sg = ctx.sg();
    ClassificationReport rep;
    rep.limits = limit_analysis(noise, ctx, options.limits);
    const auto& lim = rep.limits;
    rep.p1 = lim.as_convergence;
    rep.p1_phase = lim.phase_as_convergence;
    rep.p2 = lim.p2;

    for (auto& e : phase_locked_solutions(noise, ctx, lim))
        rep.extremals.push_back({std::move(e), std::nullopt});
    rep.unique_in_law = rep.extremals.size() == 1;
    if (lim.period > 1)
        rep.notes.push_back("product chain has period " + std::to_string(lim.period) +
                            "; limits are taken along depths divisible by it (residue-class "
                            "form of Lemma 4.1)");

    // Y_k ranges over the supports of the limit laws at every k.
    std::set<ElementId> ysupp;
    for (const auto& r : lim.residue_limits)
        for (auto s : r.support())
            ysupp.insert(s);
    for (const auto& p : lim.prefix_limits)
        for (auto s : p.support())
            ysupp.insert(s);
    const auto classes = classify_elements(sg);
    auto within = [&](const ElementSet& set) {
        return std::all_of(ysupp.begin(), ysupp.end(), [&](ElementId s) {
            return std::binary_search(set.begin(), set.end(), s);
        });
    };
    rep.limits_synchronizing = within(classes.synchronizing);
    rep.limits_cancellative = within(classes.cancellative);

    if (rep.p1 || rep.p1_phase) {
        rep.all_extremal_strong = true;
        for (auto& e : rep.extremals)
            e.strong = true;
        rep.notes.push_back(rep.p1 ? "Thm 4.2 applied: (P1') holds, every extremal solution is strong"
                                   : "Thm 4.2 applied along each residue class: (P1') holds for the "
                                     "phase-locked products, every extremal solution is strong");
        if (rep.limits_synchronizing) {
            rep.pathwise_unique = true;
            rep.notes.push_back("Thm 4.6 applied: limit products are synchronizing, pathwise "
                                "uniqueness holds with X_k = psi(Y_k)");
            rep.notes.push_back("Thm 2.14(ii) applied: pathwise uniqueness gives uniqueness in law "
                                "and every solution is strong (cf. Thm 5.1(ii),(iv))");
        } else if (rep.limits_cancellative) {
            const bool trivial = orbit_image(sg, classes.cancellative).size() <= 1;
            rep.notes.push_back(std::string("Thm 4.4 applied: limit products act cancellatively, ") +
                                (trivial ? "the cancellative image is a single point"
                                         : "uniqueness in law fails"));
            if (!trivial && rep.unique_in_law)
                throw InternalInconsistency("cancellative limits with a unique law");
        }
    } else if (rep.p2) {
        const auto& amb = *lim.ambient;
        ElementSet seeds(lim.embed.begin(), lim.embed.end());
        seeds.insert(seeds.end(), rep.p2->subgroup.members.begin(), rep.p2->subgroup.members.end());
        const auto generated = closure_of(amb, seeds);
        std::vector<Transformation> elems;
        for (auto g : generated)
            elems.push_back(amb.element(g));
        const auto ext = FiniteSemigroup::from_elements(std::move(elems));
        const bool lc = is_left_cancellative(ext);
        const bool ca = acts_cancellatively(ext);
        if (rep.p2->phase_only)
            rep.notes.push_back("(P2') holds along each residue class of depths");

        bool any_unknown = false;
        for (auto& e : rep.extremals) {
            const bool singleton = std::any_of(
                e.extremal.base_points.begin(), e.extremal.base_points.end(),
                [&](StateIndex x) { return subgroup_orbit(amb, rep.p2->subgroup, x).size() == 1; });
            if (singleton)
                e.strong = true;
            else if (lc && ca)
                e.strong = false;
            else
                any_unknown = true;
        }
        const bool any_false = std::any_of(rep.extremals.begin(), rep.extremals.end(),
                                           [](const auto& e) { return e.strong == false; });
        if (any_false)
            rep.all_extremal_strong = false;
        else if (!any_unknown)
            rep.all_extremal_strong = true;

        if (std::any_of(rep.extremals.begin(), rep.extremals.end(),
                        [](const auto& e) { return e.strong == true; }))
            rep.notes.push_back("Prop 4.7 applied: Hx is a singleton at the base point, the "
                                "extremal solution is strong");
        if (any_false)
            rep.notes.push_back("Prop 4.8 applied: left-cancellative semigroup acting "
                                "cancellatively with Hx not a singleton, the extremal solution is "
                                "non-strong");
        if (lc && ca)
            rep.notes.push_back("Thm 4.10 applied: extremal solutions are strong exactly when H "
                                "acts trivially on their base points");
        if (any_unknown)
            rep.notes.push_back("Prop 4.8 needs a left-cancellative semigroup with cancellative "
                                "action; some extremals are outside the theorems' sufficient "
                                "conditions");
    } else {
        rep.notes.push_back("neither (P1') nor (P2') was established; strongness is outside the "
                            "theorems' sufficient conditions");
        if (lim.subgroup_search_error)
            rep.notes.push_back("subgroup search incomplete: " + *lim.subgroup_search_error);
    }

    if (!rep.pathwise_unique) {
        if (!rep.unique_in_law) {
            rep.pathwise_unique = false;
            rep.notes.push_back("Thm 2.14(ii) applied: uniqueness in law fails, so pathwise "
                                "uniqueness fails");
        } else if (rep.all_extremal_strong == false) {
            rep.pathwise_unique = false;
            rep.notes.push_back("Thm 2.14(ii) applied: a non-strong solution rules out pathwise "
                                "uniqueness");
        } else if (rep.all_extremal_strong == true) {
            rep.pathwise_unique = true;
            rep.notes.push_back("Thm 2.14(i) applied: uniqueness in law with a strong solution "
                                "gives pathwise uniqueness");
        }
    }

    if (rep.pathwise_unique == true)
        rep.all_solutions_strong = true;
    else if (!rep.unique_in_law || rep.all_extremal_strong == false)
        rep.all_solutions_strong = false;

    if (rep.pathwise_unique == true &&
        !(rep.unique_in_law && rep.all_extremal_strong == true))
        throw InternalInconsistency("pathwise uniqueness without uniqueness in law and strongness");

    if (ctx.group) {
        const bool some_strong = std::any_of(rep.extremals.begin(), rep.extremals.end(),
                                             [](const auto& e) { return e.strong == true; });
        const bool all_known = std::all_of(rep.extremals.begin(), rep.extremals.end(),
                                           [](const auto& e) { return e.strong.has_value(); });
        if (some_strong || all_known) {
            if (rep.unique_in_law)
                rep.trichotomy = some_strong ? Trichotomy::C0 : Trichotomy::C1;
            else
                rep.trichotomy = some_strong ? Trichotomy::C2 : Trichotomy::C3;
        }
    }
    (void)options.window;
    return rep;
}

StrongnessWitness strongness_witness(const NoiseSpec& noise, const ActionContext& ctx,
                                     const SolutionLawFamily& family, std::size_t depth,
                                     std::size_t budget) {
    if (depth == 0)
        throw ValidationError("witness depth must be at least 1");
    const auto& sg = ctx.sg();
    StrongnessWitness out;
    ProbMeasure law = noise.at(0);
    std::size_t work = 0;
    for (std::size_t d = 1; d <= depth; ++d) {
        if (d > 1) {
            const auto& mu = noise.at(-static_cast<long>(d - 1));
            work += law.support().size() * mu.support().size();
            if (work > budget)
                throw CapacityError("strongness witness exceeds its enumeration budget; use "
                                    "simulate for deeper windows",
                                    budget);
            law = convolve(sg, law, mu);
        }
        const auto& entry = family.at(-static_cast<long>(d));
        Rational residual;
        for (auto s : law.support()) {
            const auto cond = push_states(sg, s, entry);
            Rational best;
            for (const auto& w : cond.weights())
                best = std::max(best, w);
            residual += law[s] * (1 - best);
        }
        out.by_depth.push_back(residual);
    }
    out.residual = out.by_depth.back();
    const bool monotone = std::is_sorted(out.by_depth.rbegin(), out.by_depth.rend());
    out.verdict_hint = monotone && out.residual < Rational(1, 1024);
    return out;
}

FourierReport fourier_trichotomy(const ActionContext& ctx, const NoiseSpec& noise) {
    const auto& sg = ctx.sg();
    const std::size_t n = sg.size();
    bool cyclic = ctx.group.has_value() && sg.has_action() && sg.degree() == n;
    for (ElementId g = 0; cyclic && g < n; ++g)
        for (StateIndex x = 0; cyclic && x < n; ++x)
            cyclic = sg.act(g, x) == (g + x) % n;
    if (!cyclic)
        throw UnsupportedCase("Fourier analysis is implemented for Z/n only");

    FourierReport rep;
    rep.modulus = n;
    const auto supp = noise.tail().support();
    for (std::size_t p = 0; p < n; ++p) {
        const std::size_t phase = (p * supp.front()) % n;
        const bool unit = std::all_of(supp.begin(), supp.end(),
                                      [&](std::size_t x) { return (p * x) % n == phase; });
        rep.pi.push_back(unit ? 1 : 0);
        if (unit)
            rep.z_mu.push_back(p);
    }
    for (auto a : rep.z_mu)
        for (auto b : rep.z_mu)
            if (!rep.pi[(a + b) % n])
                throw InternalInconsistency("unit-modulus characters are not closed under addition");
    rep.p_mu = rep.z_mu.size() == 1 ? 0 : rep.z_mu[1];
    for (std::size_t g = 0; g < n; ++g)
        if (std::all_of(rep.z_mu.begin(), rep.z_mu.end(),
                        [&](std::size_t p) { return (p * g) % n == 0; }))
            rep.h_mu.push_back(g);
    rep.trichotomy = rep.p_mu == 0   ? Trichotomy::C1
                     : rep.p_mu == 1 ? Trichotomy::C2
                                     : Trichotomy::C3;
    return rep;
}

SolutionLawFamily uniform_solution(const ActionContext& ctx, const NoiseSpec& noise) {
    require_group(ctx, "uniform_solution");
    const auto u = ProbMeasure::uniform(ctx.states());
    SolutionLawFamily fam(std::vector<ProbMeasure>(noise.prefix_length(), u), {u},
                          SolutionLawFamily::Origin::UniformGroup, false);
    if (!satisfies_convolution_equation(noise, ctx, fam))
        throw InternalInconsistency("uniform law is not invariant under the noise");
    return fam;
}

SolutionLawFamily right_translate(const ActionContext& ctx, const SolutionLawFamily& family,
                                  ElementId g) {
    require_group(ctx, "right_translate");
    auto shift = [&](const ProbMeasure& lam) {
        RationalVector w(lam.size());
        for (auto x : lam.support())
            w[ctx.group->right_translate(x, g)] += lam[x];
        return ProbMeasure(lam.carrier(), std::move(w));
    };
    std::vector<ProbMeasure> prefix, cycle;
    for (const auto& p : family.prefix())
        prefix.push_back(shift(p));
    for (const auto& c : family.cycle())
        cycle.push_back(shift(c));
    return SolutionLawFamily(std::move(prefix), std::move(cycle), family.origin(),
                             family.certified_extremal());
}

std::optional<bool> translate_orbit_check(const ActionContext& ctx,
                                          const std::vector<ExtremalFamily>& extremals) {
    if (!ctx.group)
        return std::nullopt;
    for (std::size_t i = 0; i < extremals.size(); ++i)
        for (std::size_t j = i + 1; j < extremals.size(); ++j) {
            bool related = false;
            for (ElementId g = 0; !related && g < ctx.sg().size(); ++g)
                related = right_translate(ctx, extremals[i].family, g)
                              .same_laws(extremals[j].family);
            if (!related)
                return false;
        }
    return true;
}

std::map<std::vector<std::size_t>, Rational> window_joint_law(const NoiseSpec& noise,
                                                              const ActionContext& ctx,
                                                              const SolutionLawFamily& family,
                                                              std::size_t d,
                                                              std::size_t depth) {
    if (d == 0 || depth < d)
        throw ValidationError("window length must be between 1 and the depth");
    const auto& sg = ctx.sg();
    ProbMeasure entry = family.at(-static_cast<long>(depth));
    for (std::size_t i = depth; i-- > d;)
        entry = act(sg, noise.at(-static_cast<long>(i)), entry);

    std::map<std::vector<std::size_t>, Rational> joint;
    std::vector<std::size_t> noise_atoms(d);
    auto recurse = [&](auto&& self, std::size_t level, ElementId prod, Rational weight) -> void {
        if (level == d) {
            for (auto x : entry.support()) {
                std::vector<std::size_t> key{sg.act(prod, x)};
                key.insert(key.end(), noise_atoms.begin(), noise_atoms.end());
                joint[key] += weight * entry[x];
            }
            return;
        }
        const auto& mu = noise.at(-static_cast<long>(level));
        for (auto s : mu.support()) {
            noise_atoms[level] = s;
            self(self, level + 1, level == 0 ? s : sg.product(prod, s), weight * mu[s]);
        }
    };
    recurse(recurse, 0, 0, Rational(1));
    return joint;
}

} // namespace tsl

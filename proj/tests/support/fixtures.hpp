#pragma once

// Shared constructors for the worked examples used across the test suites.

#include <vector>

#include "tsl/algebra.hpp"
#include "tsl/measures.hpp"

namespace fixtures {

inline tsl::Transformation one_based(std::vector<tsl::StateIndex> image) {
    for (auto& v : image)
        --v;
    return tsl::Transformation(std::move(image));
}

/// Closure of s1 = [2,1,2] and s2 = [3,3,1] acting on three states.
inline tsl::ActionContext three_state() {
    std::vector<tsl::Transformation> gens{one_based({2, 1, 2}), one_based({3, 3, 1})};
    auto sg = tsl::FiniteSemigroup::generate(3, gens);
    sg.set_label(0, "s1");
    sg.set_label(1, "s2");
    return tsl::ActionContext::semigroup_action(std::move(sg), tsl::StateSpace(3));
}

/// Noise p on s1 and q = 1 - p on s2.
inline tsl::NoiseSpec three_state_noise(const tsl::ActionContext& ctx, const tsl::Rational& p) {
    tsl::RationalVector w(ctx.sg().size());
    w[0] = p;
    w[1] = 1 - p;
    return tsl::NoiseSpec::iid(tsl::ProbMeasure(ctx.elements(), std::move(w)));
}

inline tsl::ElementId element_of(const tsl::ActionContext& ctx, std::vector<tsl::StateIndex> img) {
    return *ctx.sg().find(one_based(std::move(img)));
}

inline tsl::NoiseSpec group_noise(const tsl::ActionContext& ctx,
                                  std::vector<std::pair<tsl::ElementId, tsl::Rational>> atoms) {
    tsl::RationalVector w(ctx.sg().size());
    for (auto& [g, r] : atoms)
        w[g] += r;
    return tsl::NoiseSpec::iid(tsl::ProbMeasure(ctx.elements(), std::move(w)));
}

inline tsl::ActionContext cyclic(std::size_t n) {
    return tsl::ActionContext::group_on_itself(tsl::cyclic_group(n));
}

inline tsl::ActionContext symmetric(std::size_t n) {
    return tsl::ActionContext::group_on_itself(tsl::symmetric_group(n));
}

} // namespace fixtures

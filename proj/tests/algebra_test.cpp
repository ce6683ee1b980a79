#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "tsl/algebra.hpp"
#include "tsl/errors.hpp"

using namespace tsl;

namespace {

Transformation from_one_based(std::vector<StateIndex> image) {
    for (auto& v : image)
        --v;
    return Transformation(std::move(image));
}

FiniteSemigroup three_state_closure() {
    std::vector<Transformation> gens{from_one_based({2, 1, 2}), from_one_based({3, 3, 1})};
    return FiniteSemigroup::generate(3, gens);
}

} // namespace

TEST(Compose, ProductOfGeneratorsIsConstantTwo) {
    auto s1 = from_one_based({2, 1, 2});
    auto s2 = from_one_based({3, 3, 1});
    EXPECT_EQ(compose(s1, s2), Transformation::constant(3, 1));
    EXPECT_EQ(compose(s2, s1), Transformation::constant(3, 2));
    EXPECT_EQ(compose(s1, s1), from_one_based({1, 2, 1}));
    EXPECT_EQ(compose(s2, s2), from_one_based({1, 1, 3}));
}

TEST(Compose, IdentityIsNeutral) {
    auto a = from_one_based({3, 1, 1});
    EXPECT_EQ(compose(Transformation::identity(3), a), a);
    EXPECT_EQ(compose(a, Transformation::identity(3)), a);
}

TEST(Compose, DegreeMismatchThrows) {
    EXPECT_THROW(compose(Transformation::identity(2), Transformation::identity(3)),
                 DimensionError);
}

TEST(Closure, ThreeStateExampleHasSevenElements) {
    auto sg = three_state_closure();
    ASSERT_EQ(sg.size(), 7u);
    std::vector<std::string> labels;
    for (ElementId i = 0; i < sg.size(); ++i)
        labels.push_back(sg.label(i));
    EXPECT_EQ(labels, (std::vector<std::string>{"[2,1,2]", "[3,3,1]", "[1,1,3]", "[1,2,1]",
                                                 "<2>", "<3>", "<1>"}));
}

TEST(Closure, TrivialAndFullMonoid) {
    std::vector<Transformation> e{Transformation::identity(4)};
    EXPECT_EQ(FiniteSemigroup::generate(4, e).size(), 1u);
    auto t2 = full_transformation_monoid(2);
    std::vector<Transformation> all;
    for (ElementId i = 0; i < t2.size(); ++i)
        all.push_back(t2.element(i));
    EXPECT_EQ(FiniteSemigroup::generate(2, all).size(), 4u);
}

TEST(PowerCore, ThreeStateExampleIsItsOwnCore) {
    auto sg = three_state_closure();
    auto pc = power_core(sg);
    EXPECT_EQ(pc.core.size(), 7u);
    EXPECT_EQ(core_orbit(sg), (StateSet{0, 1, 2}));
    EXPECT_EQ(power_orbit_intersection(sg), core_orbit(sg));
}

TEST(PowerCore, SingleNonPermutationCollapsesToConstant) {
    std::vector<Transformation> gens{from_one_based({2, 3, 3})};
    auto sg = FiniteSemigroup::generate(3, gens);
    auto pc = power_core(sg);
    ASSERT_EQ(pc.core.size(), 1u);
    EXPECT_EQ(sg.element(pc.core[0]), Transformation::constant(3, 2));
    EXPECT_EQ(core_orbit(sg), StateSet{2});
    EXPECT_EQ(power_orbit_intersection(sg), StateSet{2});
}

TEST(PowerCore, MonoidIsItsOwnCore) {
    auto t3 = full_transformation_monoid(3);
    EXPECT_EQ(power_core(t3).core.size(), t3.size());
}

TEST(Classify, ThreeStateExample) {
    auto sg = three_state_closure();
    auto cls = classify_elements(sg);
    EXPECT_TRUE(cls.cancellative.empty());
    ASSERT_EQ(cls.synchronizing.size(), 3u);
    for (auto [id, x] : cls.psi)
        EXPECT_EQ(sg.element(id), Transformation::constant(3, x));
    EXPECT_FALSE(is_left_cancellative(sg));
}

TEST(Classify, FullMonoidOnTwoPoints) {
    auto t2 = full_transformation_monoid(2);
    auto cls = classify_elements(t2);
    EXPECT_EQ(cls.cancellative.size(), 2u);
    EXPECT_EQ(cls.synchronizing.size(), 2u);
}

TEST(LeftCancellative, GroupsAndLeftZero) {
    EXPECT_TRUE(is_left_cancellative(cyclic_group(5).group));
    EXPECT_TRUE(is_left_cancellative(symmetric_group(3).group));
    auto lz = FiniteSemigroup::from_table({{0, 0}, {1, 1}});
    EXPECT_FALSE(is_left_cancellative(lz));
}

TEST(FromTable, RejectsNonAssociative) {
    EXPECT_THROW(FiniteSemigroup::from_table({{1, 0}, {0, 0}}), ValidationError);
}

TEST(Subgroups, FullMonoidOnThreeContainsRotations) {
    auto t3 = full_transformation_monoid(3);
    auto subs = find_subgroups(t3, {.max_generators = 1, .size_cap = 64});
    ElementSet rot;
    for (auto img : {std::vector<StateIndex>{0, 1, 2}, {1, 2, 0}, {2, 0, 1}})
        rot.push_back(*t3.find(Transformation(img)));
    std::sort(rot.begin(), rot.end());
    EXPECT_TRUE(std::any_of(subs.begin(), subs.end(),
                            [&](const auto& s) { return s.members == rot; }));
}

TEST(Subgroups, ThreeStateClosureHasTwoSwapGroups) {
    // s1 = [2,1,2] swaps {1,2} around the idempotent [1,2,1]; likewise s2
    // around [1,1,3]. Everything else is a singleton group.
    auto sg = three_state_closure();
    auto subs = find_subgroups(sg);
    std::vector<std::set<std::string>> nontrivial;
    std::size_t singletons = 0;
    for (const auto& s : subs) {
        if (s.trivial()) {
            ++singletons;
            EXPECT_TRUE(sg.is_idempotent(s.members[0]));
            continue;
        }
        std::set<std::string> names;
        for (auto m : s.members)
            names.insert(sg.label(m));
        nontrivial.push_back(names);
    }
    EXPECT_EQ(singletons, 5u);
    EXPECT_EQ(nontrivial, (std::vector<std::set<std::string>>{{"[2,1,2]", "[1,2,1]"},
                                                               {"[3,3,1]", "[1,1,3]"}}));
}

TEST(Subgroups, CyclicFourLattice) {
    auto z4 = cyclic_group(4);
    auto subs = find_subgroups(z4.group);
    std::vector<ElementSet> members;
    for (const auto& s : subs)
        members.push_back(s.members);
    EXPECT_EQ(members, (std::vector<ElementSet>{{0}, {0, 2}, {0, 1, 2, 3}}));
}

TEST(Subgroups, CapExceededThrows) {
    auto t4 = full_transformation_monoid(4);
    try {
        find_subgroups(t4);
        FAIL();
    } catch (const CapacityError& e) {
        EXPECT_EQ(e.cap(), 64u);
    }
}

TEST(Cosets, CyclicFourModTwo) {
    auto z4 = cyclic_group(4);
    auto h = *as_subgroup(z4.group, {0, 2});
    CosetStructure cs(z4.group, h);
    EXPECT_EQ(cs.cosets(), (std::vector<ElementSet>{{0, 2}, {1, 3}}));
    EXPECT_EQ(cs.kappa(3, 1), 2u);
    EXPECT_EQ(cs.kappa(3, 0), 0u);
}

TEST(Cosets, SymmetricThreeModAlternating) {
    auto s3 = symmetric_group(3);
    ElementSet a3;
    for (ElementId g = 0; g < s3.group.size(); ++g)
        if (s3.group.label(g) == "123" || s3.group.label(g) == "231" ||
            s3.group.label(g) == "312")
            a3.push_back(g);
    auto h = *as_subgroup(s3.group, a3);
    CosetStructure cs(s3.group, h);
    ASSERT_EQ(cs.cosets().size(), 2u);
    for (std::size_t c = 0; c < cs.cosets().size(); ++c) {
        ElementSet back;
        for (std::size_t j = 0; j < h.size(); ++j)
            back.push_back(cs.right_multiple(cs.section(c), j));
        std::sort(back.begin(), back.end());
        EXPECT_EQ(back, cs.cosets()[c]);
    }
}

TEST(Cosets, ConstantsAbsorbRotations) {
    auto t3 = full_transformation_monoid(3);
    ElementSet rot;
    for (auto img : {std::vector<StateIndex>{0, 1, 2}, {1, 2, 0}, {2, 0, 1}})
        rot.push_back(*t3.find(Transformation(img)));
    std::sort(rot.begin(), rot.end());
    CosetStructure cs(t3, *as_subgroup(t3, rot));
    auto c1 = *t3.find(Transformation::constant(3, 0));
    EXPECT_EQ(cs.cosets()[cs.coset_of(c1)], ElementSet{c1});
}

TEST(Cosets, AmbiguousKappaThrows) {
    auto t3 = full_transformation_monoid(3);
    ElementSet rot;
    for (auto img : {std::vector<StateIndex>{0, 1, 2}, {1, 2, 0}, {2, 0, 1}})
        rot.push_back(*t3.find(Transformation(img)));
    std::sort(rot.begin(), rot.end());
    CosetStructure cs(t3, *as_subgroup(t3, rot));
    auto c1 = *t3.find(Transformation::constant(3, 0));
    EXPECT_THROW(cs.kappa(c1, c1), AmbiguityError);
}

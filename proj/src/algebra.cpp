#include "tsl/algebra.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>

#include "tsl/errors.hpp"

namespace tsl {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

void sort_unique(std::vector<std::size_t>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

} // namespace

// --- StateSpace ---------------------------------------------------------------

StateSpace::StateSpace(std::size_t n) {
    if (n == 0)
        throw ValidationError("state space must have at least one state");
    labels_.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        labels_.push_back(std::to_string(i + 1));
}

StateSpace::StateSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty())
        throw ValidationError("state space must have at least one state");
    std::set<std::string> seen(labels_.begin(), labels_.end());
    if (seen.size() != labels_.size())
        throw ValidationError("state labels must be pairwise distinct");
}

std::optional<StateIndex> StateSpace::find(std::string_view label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i)
        if (labels_[i] == label)
            return i;
    return std::nullopt;
}

// --- Transformation -----------------------------------------------------------

Transformation::Transformation(std::vector<StateIndex> image) : image_(std::move(image)) {
    for (auto v : image_)
        if (v >= image_.size())
            throw ValidationError("image entry " + std::to_string(v + 1) +
                                  " is not a state index of a " +
                                  std::to_string(image_.size()) + "-point space");
}

Transformation Transformation::identity(std::size_t n) {
    std::vector<StateIndex> img(n);
    std::iota(img.begin(), img.end(), StateIndex{0});
    return Transformation(std::move(img));
}

Transformation Transformation::constant(std::size_t n, StateIndex value) {
    return Transformation(std::vector<StateIndex>(n, value));
}

bool Transformation::is_injective() const {
    std::vector<bool> hit(image_.size(), false);
    for (auto v : image_) {
        if (hit[v])
            return false;
        hit[v] = true;
    }
    return true;
}

bool Transformation::is_constant() const {
    return std::adjacent_find(image_.begin(), image_.end(), std::not_equal_to<>()) ==
           image_.end();
}

Transformation compose(const Transformation& a, const Transformation& b) {
    if (a.degree() != b.degree())
        throw DimensionError("cannot compose maps on " + std::to_string(a.degree()) +
                             " and " + std::to_string(b.degree()) + " states");
    std::vector<StateIndex> img(b.degree());
    for (std::size_t i = 0; i < img.size(); ++i)
        img[i] = a(b(i));
    return Transformation(std::move(img));
}

std::size_t TransformationHash::operator()(const Transformation& t) const noexcept {
    std::uint64_t h = t.degree();
    for (auto v : t.image())
        h = mix(h, v);
    return static_cast<std::size_t>(h);
}

// --- FiniteSemigroup ----------------------------------------------------------

FiniteSemigroup FiniteSemigroup::generate(std::size_t degree,
                                          std::span<const Transformation> generators) {
    if (generators.empty())
        throw ValidationError("closure needs at least one generator");
    for (const auto& g : generators)
        if (g.degree() != degree)
            throw DimensionError("generator acts on " + std::to_string(g.degree()) +
                                 " states, expected " + std::to_string(degree));

    FiniteSemigroup sg;
    sg.degree_ = degree;
    std::vector<Transformation> level(generators.begin(), generators.end());
    std::sort(level.begin(), level.end());
    level.erase(std::unique(level.begin(), level.end()), level.end());
    const std::vector<Transformation> gens = level;

    while (!level.empty()) {
        for (auto& t : level) {
            sg.index_.emplace(t, sg.elements_.size());
            sg.elements_.push_back(std::move(t));
        }
        const std::size_t begin = sg.elements_.size() - level.size();
        const std::size_t end = sg.elements_.size();
        std::set<Transformation> next;
        for (std::size_t w = begin; w < end; ++w)
            for (const auto& g : gens) {
                auto p = compose(sg.elements_[w], g);
                if (!sg.index_.contains(p))
                    next.insert(std::move(p));
            }
        level.assign(next.begin(), next.end());
    }
    for (const auto& g : gens)
        sg.generators_.push_back(sg.index_.at(g));
    sort_unique(sg.generators_);
    sg.size_ = sg.elements_.size();
    sg.build_table();
    sg.finish();
    return sg;
}

FiniteSemigroup FiniteSemigroup::from_elements(std::vector<Transformation> elements,
                                               ElementSet generators) {
    if (elements.empty())
        throw ValidationError("semigroup must be nonempty");
    FiniteSemigroup sg;
    sg.degree_ = elements.front().degree();
    for (auto& t : elements) {
        if (t.degree() != sg.degree_)
            throw DimensionError("elements act on different state counts");
        if (!sg.index_.emplace(t, sg.elements_.size()).second)
            throw ValidationError("duplicate element in semigroup element list");
        sg.elements_.push_back(std::move(t));
    }
    sg.size_ = sg.elements_.size();
    sg.build_table();
    for (auto g : generators)
        if (g >= sg.size_)
            throw ValidationError("generator index out of range");
    sg.generators_ = std::move(generators);
    sort_unique(sg.generators_);
    sg.finish();
    return sg;
}

FiniteSemigroup FiniteSemigroup::from_table(std::vector<std::vector<ElementId>> table,
                                            ElementSet generators) {
    const std::size_t n = table.size();
    if (n == 0)
        throw ValidationError("semigroup must be nonempty");
    FiniteSemigroup sg;
    sg.size_ = n;
    sg.table_.reserve(n * n);
    for (const auto& row : table) {
        if (row.size() != n)
            throw DimensionError("Cayley table must be square");
        for (auto c : row) {
            if (c >= n)
                throw ValidationError("Cayley table entry out of range");
            sg.table_.push_back(c);
        }
    }
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t c = 0; c < n; ++c)
                if (sg.product(sg.product(a, b), c) != sg.product(a, sg.product(b, c)))
                    throw ValidationError("Cayley table is not associative at (" +
                                          std::to_string(a) + "," + std::to_string(b) +
                                          "," + std::to_string(c) + ")");
    for (auto g : generators)
        if (g >= n)
            throw ValidationError("generator index out of range");
    sg.generators_ = std::move(generators);
    sort_unique(sg.generators_);
    sg.finish();
    return sg;
}

void FiniteSemigroup::build_table() {
    table_.resize(size_ * size_);
    for (std::size_t a = 0; a < size_; ++a)
        for (std::size_t b = 0; b < size_; ++b) {
            auto it = index_.find(compose(elements_[a], elements_[b]));
            if (it == index_.end())
                throw ValidationError("element list is not closed under composition");
            table_[a * size_ + b] = it->second;
        }
}

void FiniteSemigroup::finish() {
    labels_.assign(size_, std::string{});
    std::uint64_t h = mix(size_, degree_);
    for (auto c : table_)
        h = mix(h, c);
    for (const auto& t : elements_)
        for (auto v : t.image())
            h = mix(h, v);
    fingerprint_ = h;
}

const Transformation& FiniteSemigroup::element(ElementId id) const {
    if (!has_action())
        throw UnsupportedCase("abstract semigroup has no transformation form");
    return elements_.at(id);
}

std::optional<ElementId> FiniteSemigroup::find(const Transformation& t) const {
    auto it = index_.find(t);
    if (it == index_.end())
        return std::nullopt;
    return it->second;
}

std::string FiniteSemigroup::label(ElementId id) const {
    if (!labels_.at(id).empty())
        return labels_[id];
    if (!has_action())
        return "#" + std::to_string(id);
    const auto& t = elements_[id];
    if (t == Transformation::identity(degree_))
        return "e";
    if (t.is_constant() && degree_ > 1)
        return "<" + std::to_string(t(0) + 1) + ">";
    std::string s = "[";
    for (std::size_t i = 0; i < t.degree(); ++i) {
        if (i)
            s += ",";
        s += std::to_string(t(i) + 1);
    }
    return s + "]";
}

void FiniteSemigroup::set_label(ElementId id, std::string name) {
    labels_.at(id) = std::move(name);
}

// --- set operations -----------------------------------------------------------

ElementSet closure_of(const FiniteSemigroup& sg, std::span<const ElementId> seeds) {
    std::vector<bool> in(sg.size(), false);
    ElementSet members;
    for (auto s : seeds)
        if (!in[s]) {
            in[s] = true;
            members.push_back(s);
        }
    // Every product of members is a word in the seeds, so multiplying on the
    // right by seeds reaches everything.
    for (std::size_t i = 0; i < members.size(); ++i)
        for (auto s : seeds) {
            const auto p = sg.product(members[i], s);
            if (!in[p]) {
                in[p] = true;
                members.push_back(p);
            }
        }
    sort_unique(members);
    return members;
}

ElementSet set_product(const FiniteSemigroup& sg, const ElementSet& a,
                       const ElementSet& b) {
    std::vector<bool> in(sg.size(), false);
    for (auto x : a)
        for (auto y : b)
            in[sg.product(x, y)] = true;
    ElementSet out;
    for (std::size_t i = 0; i < in.size(); ++i)
        if (in[i])
            out.push_back(i);
    return out;
}

StateSet orbit_image(const FiniteSemigroup& sg, const ElementSet& a) {
    std::vector<bool> in(sg.degree(), false);
    for (auto s : a)
        for (StateIndex x = 0; x < sg.degree(); ++x)
            in[sg.act(s, x)] = true;
    StateSet out;
    for (std::size_t i = 0; i < in.size(); ++i)
        if (in[i])
            out.push_back(i);
    return out;
}

PowerCore power_core(const FiniteSemigroup& sg) {
    ElementSet all(sg.size());
    std::iota(all.begin(), all.end(), ElementId{0});
    PowerCore pc;
    pc.powers.push_back(all);
    // The powers form a decreasing chain, so this stops within |Sigma| steps.
    for (std::size_t guard = 0; guard <= sg.size(); ++guard) {
        auto next = set_product(sg, pc.powers.back(), all);
        if (next == pc.powers.back()) {
            pc.core = std::move(next);
            return pc;
        }
        pc.powers.push_back(std::move(next));
    }
    throw InternalInconsistency("power sets failed to stabilize");
}

StateSet core_orbit(const FiniteSemigroup& sg) { return orbit_image(sg, power_core(sg).core); }

StateSet power_orbit_intersection(const FiniteSemigroup& sg) {
    ElementSet all(sg.size());
    std::iota(all.begin(), all.end(), ElementId{0});
    ElementSet power = all;
    StateSet acc = orbit_image(sg, power);
    for (std::size_t n = 1; n <= sg.size() + 1; ++n) {
        power = set_product(sg, power, all);
        const auto img = orbit_image(sg, power);
        StateSet meet;
        std::set_intersection(acc.begin(), acc.end(), img.begin(), img.end(),
                              std::back_inserter(meet));
        acc = std::move(meet);
    }
    return acc;
}

ElementClasses classify_elements(const FiniteSemigroup& sg) {
    ElementClasses out;
    for (ElementId a = 0; a < sg.size(); ++a) {
        const auto& t = sg.element(a);
        if (t.is_injective())
            out.cancellative.push_back(a);
        if (t.is_constant()) {
            out.synchronizing.push_back(a);
            out.psi.emplace_back(a, t(0));
        }
    }
    return out;
}

bool is_left_cancellative(const FiniteSemigroup& sg) {
    std::vector<bool> seen(sg.size());
    for (ElementId a = 0; a < sg.size(); ++a) {
        std::fill(seen.begin(), seen.end(), false);
        for (ElementId b = 0; b < sg.size(); ++b) {
            const auto p = sg.product(a, b);
            if (seen[p])
                return false;
            seen[p] = true;
        }
    }
    return true;
}

bool acts_cancellatively(const FiniteSemigroup& sg) {
    for (ElementId a = 0; a < sg.size(); ++a)
        if (!sg.element(a).is_injective())
            return false;
    return true;
}

// --- subgroups ----------------------------------------------------------------

bool SubgroupDescriptor::contains(ElementId a) const {
    return std::binary_search(members.begin(), members.end(), a);
}

std::optional<SubgroupDescriptor> as_subgroup(const FiniteSemigroup& sg,
                                              const ElementSet& subset) {
    if (subset.empty())
        return std::nullopt;
    std::vector<bool> in(sg.size(), false);
    for (auto a : subset)
        in[a] = true;
    for (auto a : subset)
        for (auto b : subset)
            if (!in[sg.product(a, b)])
                return std::nullopt;
    std::optional<ElementId> identity;
    for (auto e : subset) {
        if (!sg.is_idempotent(e))
            continue;
        bool neutral = std::all_of(subset.begin(), subset.end(), [&](ElementId x) {
            return sg.product(e, x) == x && sg.product(x, e) == x;
        });
        if (neutral) {
            identity = e;
            break;
        }
    }
    if (!identity)
        return std::nullopt;
    for (auto a : subset) {
        bool has_inverse = std::any_of(subset.begin(), subset.end(), [&](ElementId b) {
            return sg.product(a, b) == *identity && sg.product(b, a) == *identity;
        });
        if (!has_inverse)
            return std::nullopt;
    }
    return SubgroupDescriptor{subset, *identity};
}

std::vector<SubgroupDescriptor> find_subgroups(const FiniteSemigroup& sg,
                                               const SubgroupSearch& search) {
    if (sg.size() > search.size_cap)
        throw CapacityError("subgroup search over " + std::to_string(sg.size()) +
                                " elements exceeds the cap of " +
                                std::to_string(search.size_cap) +
                                "; raise it with --subgroup-cap",
                            search.size_cap);
    std::set<ElementSet> seen;
    std::vector<SubgroupDescriptor> found;
    std::vector<ElementId> gens;
    const auto consider = [&] {
        auto members = closure_of(sg, gens);
        if (!seen.insert(members).second)
            return;
        if (auto g = as_subgroup(sg, members))
            found.push_back(std::move(*g));
    };
    const std::function<void(ElementId)> extend = [&](ElementId start) {
        for (ElementId a = start; a < sg.size(); ++a) {
            gens.push_back(a);
            consider();
            if (gens.size() < search.max_generators)
                extend(a + 1);
            gens.pop_back();
        }
    };
    if (search.max_generators > 0)
        extend(0);
    std::sort(found.begin(), found.end(), [](const auto& x, const auto& y) {
        if (x.size() != y.size())
            return x.size() < y.size();
        return x.members < y.members;
    });
    return found;
}

StateSet subgroup_orbit(const FiniteSemigroup& sg, const SubgroupDescriptor& h,
                        StateIndex x) {
    StateSet out;
    for (auto m : h.members)
        out.push_back(sg.act(m, x));
    sort_unique(out);
    return out;
}

// --- cosets -------------------------------------------------------------------

CosetStructure::CosetStructure(const FiniteSemigroup& sg, SubgroupDescriptor h)
    : subgroup_(std::move(h)), coset_of_(sg.size()),
      right_mult_(sg.size() * subgroup_.size()),
      left_cancellative_(is_left_cancellative(sg)) {
    if (!as_subgroup(sg, subgroup_.members))
        throw ValidationError("coset structure requires a subgroup");
    std::map<ElementSet, std::size_t> ids;
    std::vector<ElementSet> per_element(sg.size());
    for (ElementId s = 0; s < sg.size(); ++s) {
        ElementSet c;
        for (std::size_t j = 0; j < subgroup_.size(); ++j) {
            right_mult_[s * subgroup_.size() + j] = sg.product(s, subgroup_.members[j]);
            c.push_back(right_mult_[s * subgroup_.size() + j]);
        }
        sort_unique(c);
        ids.emplace(c, 0);
        per_element[s] = std::move(c);
    }
    std::size_t next = 0;
    for (auto& [set, id] : ids) {
        id = next++;
        cosets_.push_back(set);
    }
    for (ElementId s = 0; s < sg.size(); ++s)
        coset_of_[s] = ids.at(per_element[s]);
}

ElementId CosetStructure::kappa(ElementId sigma1, ElementId sigma2) const {
    if (coset_of_[sigma1] != coset_of_[sigma2])
        return subgroup_.identity;
    std::optional<ElementId> hit;
    for (std::size_t j = 0; j < subgroup_.size(); ++j) {
        if (right_multiple(sigma2, j) != sigma1)
            continue;
        if (hit)
            throw AmbiguityError("kappa(" + std::to_string(sigma1) + ", " +
                                 std::to_string(sigma2) + ") is not unique: both " +
                                 std::to_string(*hit) + " and " +
                                 std::to_string(subgroup_.members[j]) +
                                 " solve sigma1 = sigma2 h");
        hit = subgroup_.members[j];
    }
    return hit.value_or(subgroup_.identity);
}

CosetStructure coset_structure(const FiniteSemigroup& sg, const SubgroupDescriptor& h) {
    return CosetStructure(sg, h);
}

// --- standard families --------------------------------------------------------

FiniteSemigroup full_transformation_monoid(std::size_t n) {
    std::size_t count = 1;
    for (std::size_t i = 0; i < n; ++i)
        count *= n;
    std::vector<Transformation> all;
    all.reserve(count);
    std::vector<StateIndex> img(n, 0);
    for (std::size_t k = 0; k < count; ++k) {
        all.emplace_back(img);
        for (std::size_t pos = n; pos-- > 0;) {
            if (++img[pos] < n)
                break;
            img[pos] = 0;
        }
    }
    ElementSet gens(count);
    std::iota(gens.begin(), gens.end(), ElementId{0});
    return FiniteSemigroup::from_elements(std::move(all), std::move(gens));
}

StateIndex GroupAction::right_translate(StateIndex x, ElementId g) const {
    return group.product(x, g);
}

ElementId GroupAction::inverse(ElementId g) const {
    for (ElementId h = 0; h < group.size(); ++h)
        if (group.product(g, h) == identity)
            return h;
    throw InternalInconsistency("group element without inverse");
}

GroupAction regular_action(const FiniteSemigroup& g) {
    auto desc = as_subgroup(g, [&] {
        ElementSet all(g.size());
        std::iota(all.begin(), all.end(), ElementId{0});
        return all;
    }());
    if (!desc)
        throw UnsupportedCase("semigroup is not a group");
    std::vector<Transformation> elems;
    std::vector<std::string> labels;
    for (ElementId a = 0; a < g.size(); ++a) {
        std::vector<StateIndex> img(g.size());
        for (ElementId x = 0; x < g.size(); ++x)
            img[x] = g.product(a, x);
        elems.emplace_back(std::move(img));
        labels.push_back(g.label(a));
    }
    ElementSet gens = g.generators();
    if (gens.empty()) {
        gens.resize(g.size());
        std::iota(gens.begin(), gens.end(), ElementId{0});
    }
    auto sg = FiniteSemigroup::from_elements(std::move(elems), std::move(gens));
    for (ElementId a = 0; a < sg.size(); ++a)
        sg.set_label(a, labels[a]);
    return GroupAction{std::move(sg), StateSpace(std::move(labels)), desc->identity};
}

GroupAction cyclic_group(std::size_t n) {
    if (n == 0)
        throw ValidationError("cyclic group order must be positive");
    std::vector<Transformation> elems;
    std::vector<std::string> labels;
    for (std::size_t g = 0; g < n; ++g) {
        std::vector<StateIndex> img(n);
        for (std::size_t x = 0; x < n; ++x)
            img[x] = (g + x) % n;
        elems.emplace_back(std::move(img));
        labels.push_back(std::to_string(g));
    }
    const ElementId generator = n > 1 ? 1 : 0;
    auto sg = FiniteSemigroup::from_elements(std::move(elems), ElementSet{generator});
    for (std::size_t g = 0; g < n; ++g)
        sg.set_label(g, labels[g]);
    return GroupAction{std::move(sg), StateSpace(std::move(labels)), 0};
}

GroupAction symmetric_group(std::size_t n) {
    if (n == 0 || n > 6)
        throw ValidationError("symmetric group degree must be between 1 and 6");
    std::vector<StateIndex> perm(n);
    std::iota(perm.begin(), perm.end(), StateIndex{0});
    std::vector<Transformation> perms;
    do {
        perms.emplace_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    auto sg = FiniteSemigroup::from_elements(perms);
    for (ElementId a = 0; a < sg.size(); ++a) {
        std::string name;
        for (auto v : sg.element(a).image())
            name += std::to_string(v + 1);
        sg.set_label(a, name);
    }
    return regular_action(sg);
}

} // namespace tsl

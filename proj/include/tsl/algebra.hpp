#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tsl {

using StateIndex = std::size_t;
using ElementId = std::size_t;

// Sorted, duplicate-free index lists.
using ElementSet = std::vector<ElementId>;
using StateSet = std::vector<StateIndex>;

class StateSpace {
  public:
    /// States labelled "1".."n".
    explicit StateSpace(std::size_t n);
    explicit StateSpace(std::vector<std::string> labels);

    std::size_t size() const { return labels_.size(); }
    const std::string& label(StateIndex i) const { return labels_.at(i); }
    const std::vector<std::string>& labels() const { return labels_; }
    std::optional<StateIndex> find(std::string_view label) const;

    bool operator==(const StateSpace&) const = default;

  private:
    std::vector<std::string> labels_;
};

/// A total map on {0, ..., n-1}, stored as its image list.
class Transformation {
  public:
    Transformation() = default;
    explicit Transformation(std::vector<StateIndex> image);

    static Transformation identity(std::size_t n);
    static Transformation constant(std::size_t n, StateIndex value);

    std::size_t degree() const { return image_.size(); }
    StateIndex operator()(StateIndex x) const { return image_[x]; }
    const std::vector<StateIndex>& image() const { return image_; }

    bool is_injective() const;
    bool is_constant() const;

    auto operator<=>(const Transformation&) const = default;

  private:
    std::vector<StateIndex> image_;
};

/// (a b)(x) = a(b(x)), so that sigma1 (sigma2 x) = (sigma1 sigma2) x.
Transformation compose(const Transformation& a, const Transformation& b);

struct TransformationHash {
    std::size_t operator()(const Transformation& t) const noexcept;
};

/// A finite semigroup given by its Cayley table, optionally realized by
/// transformations of a finite state space (the action used everywhere else).
class FiniteSemigroup {
  public:
    /// Closure of `generators` under composition. Elements are numbered
    /// breadth-first by word length; each level is sorted by image list.
    static FiniteSemigroup generate(std::size_t degree,
                                    std::span<const Transformation> generators);

    /// Keeps the given order. Throws ValidationError unless the list is
    /// duplicate-free and closed under composition.
    static FiniteSemigroup from_elements(std::vector<Transformation> elements,
                                         ElementSet generators = {});

    /// Abstract semigroup; closure and associativity are verified.
    static FiniteSemigroup from_table(std::vector<std::vector<ElementId>> table,
                                      ElementSet generators = {});

    std::size_t size() const { return size_; }
    ElementId product(ElementId a, ElementId b) const {
        return table_[a * size_ + b];
    }

    bool has_action() const { return !elements_.empty(); }
    /// Number of states acted on; 0 for abstract semigroups.
    std::size_t degree() const { return degree_; }
    const Transformation& element(ElementId id) const;
    StateIndex act(ElementId id, StateIndex x) const { return element(id)(x); }
    std::optional<ElementId> find(const Transformation& t) const;

    const ElementSet& generators() const { return generators_; }
    bool is_idempotent(ElementId a) const { return product(a, a) == a; }

    /// Display name: "e" for the identity map, "<i>" for the constant map
    /// to state i (1-based), otherwise the 1-based image list "[2,1,2]".
    /// Overridden names take precedence.
    std::string label(ElementId id) const;
    void set_label(ElementId id, std::string name);

    /// Hash of the Cayley table and images; identifies measure carriers.
    std::uint64_t fingerprint() const { return fingerprint_; }

  private:
    FiniteSemigroup() = default;
    void build_table();
    void finish();

    std::size_t size_ = 0;
    std::size_t degree_ = 0;
    std::vector<Transformation> elements_;
    std::unordered_map<Transformation, ElementId, TransformationHash> index_;
    std::vector<ElementId> table_;
    ElementSet generators_;
    std::vector<std::string> labels_;
    std::uint64_t fingerprint_ = 0;
};

/// Smallest subset of `sg` closed under products and containing `seeds`.
ElementSet closure_of(const FiniteSemigroup& sg, std::span<const ElementId> seeds);

/// {a b : a in A, b in B}.
ElementSet set_product(const FiniteSemigroup& sg, const ElementSet& a,
                       const ElementSet& b);

/// {sigma x : sigma in A, x in S}.
StateSet orbit_image(const FiniteSemigroup& sg, const ElementSet& a);

struct PowerCore {
    std::vector<ElementSet> powers; // powers[n-1] is the n-th power set
    ElementSet core;
};

/// Iterates Sigma^n = Sigma^{n-1} Sigma until it repeats; the fixed point is
/// the intersection of all powers.
PowerCore power_core(const FiniteSemigroup& sg);

/// Sigma^- S, computed from the core.
StateSet core_orbit(const FiniteSemigroup& sg);

/// Intersection over n of Sigma^n S, computed without the core. Must agree
/// with core_orbit.
StateSet power_orbit_intersection(const FiniteSemigroup& sg);

struct ElementClasses {
    ElementSet cancellative;   // injective maps
    ElementSet synchronizing;  // constant maps
    std::vector<std::pair<ElementId, StateIndex>> psi; // synchronizing -> value
};

ElementClasses classify_elements(const FiniteSemigroup& sg);

bool is_left_cancellative(const FiniteSemigroup& sg);

/// True when every element acts injectively on the state space.
bool acts_cancellatively(const FiniteSemigroup& sg);

struct SubgroupDescriptor {
    ElementSet members;
    ElementId identity = 0;

    std::size_t size() const { return members.size(); }
    bool trivial() const { return members.size() == 1; }
    bool contains(ElementId a) const;

    bool operator==(const SubgroupDescriptor&) const = default;
};

/// The subset as a group under the semigroup product, if it is one.
std::optional<SubgroupDescriptor> as_subgroup(const FiniteSemigroup& sg,
                                              const ElementSet& subset);

struct SubgroupSearch {
    std::size_t max_generators = 2;
    std::size_t size_cap = 64;
};

/// Subgroups generated by at most `max_generators` elements, deduplicated and
/// sorted by (size, member list). Throws CapacityError above `size_cap`.
std::vector<SubgroupDescriptor> find_subgroups(const FiniteSemigroup& sg,
                                               const SubgroupSearch& search = {});

/// {h x : h in H}.
StateSet subgroup_orbit(const FiniteSemigroup& sg, const SubgroupDescriptor& h,
                        StateIndex x);

/// The sets sigma H and the section / cocycle maps built on them. The sets
/// need not cover the semigroup; distinct ones are disjoint.
class CosetStructure {
  public:
    CosetStructure(const FiniteSemigroup& sg, SubgroupDescriptor h);

    const SubgroupDescriptor& subgroup() const { return subgroup_; }
    const std::vector<ElementSet>& cosets() const { return cosets_; }
    std::size_t coset_of(ElementId sigma) const { return coset_of_[sigma]; }
    /// Minimum-index member of the coset.
    ElementId section(std::size_t coset) const { return cosets_[coset].front(); }
    bool left_cancellative() const { return left_cancellative_; }

    /// The h in H with sigma1 = sigma2 h when sigma1 H = sigma2 H, otherwise
    /// the identity of H. Throws AmbiguityError when several h qualify.
    ElementId kappa(ElementId sigma1, ElementId sigma2) const;

    /// sigma h for the j-th member h of the subgroup.
    ElementId right_multiple(ElementId sigma, std::size_t j) const {
        return right_mult_[sigma * subgroup_.size() + j];
    }

  private:
    SubgroupDescriptor subgroup_;
    std::vector<ElementSet> cosets_;
    std::vector<std::size_t> coset_of_;
    std::vector<ElementId> right_mult_;
    bool left_cancellative_ = false;
};

CosetStructure coset_structure(const FiniteSemigroup& sg, const SubgroupDescriptor& h);

/// All n^n maps of {0..n-1} in lexicographic image order.
FiniteSemigroup full_transformation_monoid(std::size_t n);

/// A finite group acting on itself by left multiplication. Element i and
/// state i denote the same group element.
struct GroupAction {
    FiniteSemigroup group;
    StateSpace space;
    ElementId identity;

    /// State index of x g (right translation by the element g).
    StateIndex right_translate(StateIndex x, ElementId g) const;
    ElementId inverse(ElementId g) const;
};

/// Z/n with element g acting as x -> x + g; labels "0".."n-1".
GroupAction cyclic_group(std::size_t n);

/// The symmetric group on n points in lexicographic one-line order; labels are
/// one-line notation ("123", "213", ...).
GroupAction symmetric_group(std::size_t n);

/// Group acting on itself by left multiplication, from any transformation
/// semigroup that is a group; labels are inherited.
GroupAction regular_action(const FiniteSemigroup& group);

} // namespace tsl

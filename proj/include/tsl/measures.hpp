#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tsl/algebra.hpp"
#include "tsl/linalg.hpp"
#include "tsl/markov.hpp"
#include "tsl/rational.hpp"

namespace tsl {

enum class CarrierKind { Elements, States };

/// Identifies the indexed set a measure lives on.
struct Carrier {
    CarrierKind kind = CarrierKind::States;
    std::size_t size = 0;
    std::uint64_t fingerprint = 0;

    bool operator==(const Carrier&) const = default;
};

Carrier element_carrier(const FiniteSemigroup& sg);
Carrier state_carrier(std::size_t n);

/// Exact probability vector over a carrier.
class ProbMeasure {
  public:
    /// Empty placeholder; not a probability measure.
    ProbMeasure() = default;
    /// Throws ValidationError on negative weights or a total other than 1.
    ProbMeasure(Carrier carrier, RationalVector weights);

    static ProbMeasure point_mass(Carrier carrier, std::size_t atom);
    static ProbMeasure uniform(Carrier carrier);
    static ProbMeasure uniform_on(Carrier carrier, const std::vector<std::size_t>& atoms);

    const Carrier& carrier() const { return carrier_; }
    std::size_t size() const { return weights_.size(); }
    const Rational& operator[](std::size_t i) const { return weights_[i]; }
    const RationalVector& weights() const { return weights_; }
    std::vector<std::size_t> support() const;

    bool operator==(const ProbMeasure&) const = default;

  private:
    Carrier carrier_;
    RationalVector weights_;
};

/// (mu1 * mu2)(c) = sum over ab = c of mu1(a) mu2(b).
ProbMeasure convolve(const FiniteSemigroup& sg, const ProbMeasure& mu1, const ProbMeasure& mu2);

/// (mu * lambda)(y) = sum over sigma x = y of mu(sigma) lambda(x).
ProbMeasure act(const FiniteSemigroup& sg, const ProbMeasure& mu, const ProbMeasure& lambda);

/// Law of sigma g for sigma ~ nu.
ProbMeasure right_translate(const FiniteSemigroup& sg, const ProbMeasure& nu, ElementId g);

bool is_right_invariant(const FiniteSemigroup& sg, const ProbMeasure& nu,
                        const SubgroupDescriptor& h);

Rational tv_distance(const ProbMeasure& a, const ProbMeasure& b);

/// Reindexes a measure on a subsemigroup into a containing one.
ProbMeasure embed_measure(const ProbMeasure& nu, const std::vector<ElementId>& embed,
                          const FiniteSemigroup& target);

/// Noise laws mu_0, mu_{-1}, ..., mu_{-(m-1)} followed by a stationary tail.
class NoiseSpec {
  public:
    NoiseSpec(std::vector<ProbMeasure> prefix, ProbMeasure tail);
    static NoiseSpec iid(ProbMeasure tail) { return NoiseSpec({}, std::move(tail)); }

    /// mu_k for k <= 0.
    const ProbMeasure& at(long k) const;
    const std::vector<ProbMeasure>& prefix() const { return prefix_; }
    const ProbMeasure& tail() const { return tail_; }
    std::size_t prefix_length() const { return prefix_.size(); }
    bool is_iid() const { return prefix_.empty(); }
    const Carrier& carrier() const { return tail_.carrier(); }

  private:
    std::vector<ProbMeasure> prefix_;
    ProbMeasure tail_;
};

/// A semigroup acting on a finite state space. Group mode additionally
/// records the group acting on itself (state i is element i).
struct ActionContext {
    std::shared_ptr<const FiniteSemigroup> semigroup;
    StateSpace space;
    std::optional<GroupAction> group;

    static ActionContext semigroup_action(FiniteSemigroup sg, StateSpace space);
    static ActionContext group_on_itself(GroupAction g);

    const FiniteSemigroup& sg() const { return *semigroup; }
    Carrier elements() const { return element_carrier(*semigroup); }
    Carrier states() const { return state_carrier(space.size()); }
};

/// mu_0 * mu_{-1} * ... * mu_{-(depth-1)}.
ProbMeasure product_law(const FiniteSemigroup& sg, const NoiseSpec& noise, std::size_t depth);

/// Running products of the stationary tail, extended on the right.
struct ProductChain {
    ElementSet states;                 // sorted element ids
    std::vector<std::size_t> position; // element id -> chain index, SIZE_MAX if absent
    RationalMatrix transitions;        // P(sigma -> sigma tau) = tail(tau)
    RationalVector initial;            // the tail law, as the one-step product
    ChainStructure structure;
    /// Chain indices of states sigma with sigma tau = sigma for every tau in
    /// the tail support.
    std::vector<std::size_t> absorbing;

    std::size_t period() const { return lcm_of_periods(structure); }
    ProbMeasure to_measure(const RationalVector& v, const FiniteSemigroup& sg) const;
};

ProductChain build_product_chain(const FiniteSemigroup& sg, const NoiseSpec& noise);

struct P2Certificate {
    SubgroupDescriptor subgroup; // ids in the ambient semigroup
    std::vector<std::string> member_labels;
    bool transitive = false;     // H acts transitively on the state space
    bool phase_only = false;     // holds only along residue classes of l
};

struct LimitOptions {
    std::size_t subgroup_cap = 64;
    std::size_t max_generators = 2;
};

/// Limits of mu_k * ... * mu_{l+1} as l -> -infinity. When the product chain
/// is periodic with period D the limits exist along each residue class of l
/// mod D; everything below is computed for l = 0 mod D ("phase-locked").
struct LimitLawReport {
    ProductChain chain;
    std::size_t period = 1;
    std::size_t prefix_length = 0;
    /// Phase-locked limits for k = 0, -1, ..., -(m-1).
    std::vector<ProbMeasure> prefix_limits;
    /// residue_limits[j] = limit law at every tail index k = j mod D.
    std::vector<ProbMeasure> residue_limits;
    std::vector<ProbMeasure> prefix_cesaro;
    ProbMeasure cesaro_tail;

    bool converges_in_law = false;
    std::optional<ProbMeasure> nu;     // nu_0 when it exists
    ProbMeasure cesaro;                // Cesaro limit at k = 0
    bool as_convergence = false;       // (P1'): every reachable class is an absorbing point
    bool phase_as_convergence = false; // same, for the D-step chain

    std::shared_ptr<const FiniteSemigroup> ambient;
    std::vector<ElementId> embed; // semigroup id -> ambient id
    std::optional<P2Certificate> p2;
    std::vector<P2Certificate> p2_candidates;
    std::optional<std::string> subgroup_search_error;
    std::optional<std::size_t> subgroup_search_cap;

    /// Phase-locked limit nu_k for any k <= 0.
    const ProbMeasure& limit_at(long k) const;
    const ProbMeasure& cesaro_at(long k) const;
};

LimitLawReport limit_analysis(const NoiseSpec& noise, const ActionContext& ctx,
                              const LimitOptions& options = {});

} // namespace tsl

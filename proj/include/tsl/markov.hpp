#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "tsl/linalg.hpp"

namespace tsl {

struct RecurrentClass {
    std::vector<std::size_t> states; // sorted
    std::size_t period = 1;
    RationalVector stationary;       // over the full state index range
};

/// Closed communicating classes of a row-stochastic matrix, with exact
/// stationary laws, absorption probabilities and hitting times.
struct ChainStructure {
    std::vector<RecurrentClass> classes; // ordered by smallest member
    /// class_of[i] = index into classes, or nullopt for transient states.
    std::vector<std::optional<std::size_t>> class_of;
    /// absorption(i, c) = P(chain started at i ends in class c).
    RationalMatrix absorption;
    /// Expected number of steps to enter the recurrent set, per start state.
    RationalVector hitting_time;

    /// Absorption distribution over classes for an initial law.
    RationalVector absorb_from(const RationalVector& initial) const;
    /// sum_c absorb(c) * stationary(c).
    RationalVector limit_mixture(const RationalVector& initial) const;
};

/// Throws ValidationError unless every row is nonnegative and sums to 1.
ChainStructure analyze_chain(const RationalMatrix& p);

/// Strongly connected components of the support digraph of p, in Tarjan
/// completion order.
std::vector<std::vector<std::size_t>> strongly_connected_components(const RationalMatrix& p);

std::size_t lcm_of_periods(const ChainStructure& chain);

} // namespace tsl

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsl/measures.hpp"

namespace tsl {

/// Marginal laws lambda_k over the state space: explicit laws for
/// k = 0, ..., -(m-1), then a cycle repeating with period D below -m+1.
class SolutionLawFamily {
  public:
    enum class Origin { Extremal, Cesaro, Mixture, UniformGroup };

    SolutionLawFamily(std::vector<ProbMeasure> prefix, std::vector<ProbMeasure> cycle,
                      Origin origin, bool certified_extremal);

    /// lambda_k for k <= 0; tail entries satisfy lambda_k = cycle[k mod D].
    const ProbMeasure& at(long k) const;
    /// Laws for k = 0, -1, ..., -depth.
    std::vector<ProbMeasure> window(std::size_t depth) const;

    const std::vector<ProbMeasure>& prefix() const { return prefix_; }
    const std::vector<ProbMeasure>& cycle() const { return cycle_; }
    std::size_t period() const { return cycle_.size(); }
    Origin origin() const { return origin_; }
    bool certified_extremal() const { return certified_; }

    /// Number of indices needed to see every distinct relation of the family.
    std::size_t horizon() const { return prefix_.size() + cycle_.size(); }

    /// Equality of all marginals (representations may differ).
    bool same_laws(const SolutionLawFamily& other) const;

  private:
    std::vector<ProbMeasure> prefix_;
    std::vector<ProbMeasure> cycle_;
    Origin origin_;
    bool certified_;
};

std::string to_string(SolutionLawFamily::Origin origin);

/// lambda_k = mu_k * lambda_{k-1} at every k down to past both periods.
bool satisfies_convolution_equation(const NoiseSpec& noise, const ActionContext& ctx,
                                    const SolutionLawFamily& family);

struct ExtremalFamily {
    std::vector<StateIndex> base_points; // every x with lambda = nu * delta_x
    SolutionLawFamily family;
};

/// nu_k * delta_x over x, deduplicated and reduced to the extreme points of
/// their convex hull. Limits are taken along depths = 0 mod D when the
/// product chain has period D.
std::vector<ExtremalFamily> phase_locked_solutions(const NoiseSpec& noise,
                                                   const ActionContext& ctx,
                                                   const LimitLawReport& limits);

/// As above, but requires convergence in law. Throws UnsupportedCase
/// otherwise.
std::vector<ExtremalFamily> extremal_solutions(const NoiseSpec& noise, const ActionContext& ctx,
                                               const LimitLawReport& limits);

/// cesaro_k * delta_x; always a solution, not certified extremal.
SolutionLawFamily cesaro_family(const NoiseSpec& noise, const ActionContext& ctx,
                                const LimitLawReport& limits, StateIndex x);

/// Convex combination of families sharing a layout horizon.
SolutionLawFamily mixture(const std::vector<SolutionLawFamily>& families,
                          const RationalVector& weights);

/// Column-stochastic Pi(j, i) = mu{sigma : sigma(i) = j}.
RationalMatrix state_transition_matrix(const ProbMeasure& mu, const ActionContext& ctx);

/// The unique u with Pi u = u. Throws MultiplicityError when the induced
/// state chain has more than one closed class.
ProbMeasure stationary_law(const ProbMeasure& mu, const ActionContext& ctx);

enum class Trichotomy { C0, C1, C2, C3 };
std::string to_string(Trichotomy t);

struct ClassifiedExtremal {
    ExtremalFamily extremal;
    std::optional<bool> strong;
};

struct ClassifyOptions {
    std::size_t window = 8;
    LimitOptions limits;
};

struct ClassificationReport {
    LimitLawReport limits;
    bool p1 = false;
    bool p1_phase = false;
    std::optional<P2Certificate> p2;
    std::vector<ClassifiedExtremal> extremals;
    bool unique_in_law = false;
    std::optional<bool> pathwise_unique;
    std::optional<bool> all_extremal_strong;
    std::optional<bool> all_solutions_strong;
    bool limits_synchronizing = false; // Y_k in the synchronizing elements a.s.
    bool limits_cancellative = false;  // Y_k in the cancellative elements a.s.
    std::optional<Trichotomy> trichotomy;
    std::vector<std::string> notes;
};

ClassificationReport classify(const NoiseSpec& noise, const ActionContext& ctx,
                              const ClassifyOptions& options = {});

struct StrongnessWitness {
    Rational residual;            // at the requested depth
    std::vector<Rational> by_depth; // depths 1..L
    bool verdict_hint = false;
};

/// Expected distance of the conditional law of X_0 given N_0..N_{-L+1} from
/// the nearest point mass, with X_{-L} drawn from the family. Throws
/// CapacityError when the dynamic program would touch more than `budget`
/// (law atom, noise atom) pairs.
StrongnessWitness strongness_witness(const NoiseSpec& noise, const ActionContext& ctx,
                                     const SolutionLawFamily& family, std::size_t depth,
                                     std::size_t budget = 1'000'000);

struct FourierReport {
    std::size_t modulus = 0;
    std::vector<int> pi;            // pi[p] in {0, 1}
    std::vector<std::size_t> z_mu;  // character indices with pi = 1
    std::size_t p_mu = 0;
    std::vector<std::size_t> h_mu;  // annihilator of z_mu in Z/n
    Trichotomy trichotomy = Trichotomy::C1;
};

/// Characters of Z/n against the stationary tail. Throws UnsupportedCase
/// unless the context is the cyclic group acting on itself.
FourierReport fourier_trichotomy(const ActionContext& ctx, const NoiseSpec& noise);

/// Uniform marginals at every k. Throws UnsupportedCase outside group mode.
SolutionLawFamily uniform_solution(const ActionContext& ctx, const NoiseSpec& noise);

/// Law of x g for x ~ lambda, at every k.
SolutionLawFamily right_translate(const ActionContext& ctx, const SolutionLawFamily& family,
                                  ElementId g);

/// nullopt outside group mode; otherwise whether every pair of families is
/// related by one right translation applied at every k.
std::optional<bool> translate_orbit_check(const ActionContext& ctx,
                                          const std::vector<ExtremalFamily>& extremals);

/// Exact joint law of (X_0, N_0, ..., N_{-d+1}) when X_{-depth} is drawn
/// from the family and evolved through independent noise. Keys are
/// (x_0, n_0, ..., n_{-d+1}).
std::map<std::vector<std::size_t>, Rational> window_joint_law(const NoiseSpec& noise,
                                                              const ActionContext& ctx,
                                                              const SolutionLawFamily& family,
                                                              std::size_t d,
                                                              std::size_t depth);

} // namespace tsl

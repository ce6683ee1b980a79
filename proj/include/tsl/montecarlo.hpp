#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tsl/measures.hpp"
#include "tsl/solver.hpp"

namespace tsl {

/// Trial t draws from std::mt19937_64 seeded with the (t+1)-th SplitMix64
/// output of the stream started at `seed`. Within a trial the noise
/// N_0, ..., N_{-L+1} is drawn first, then any entry states.
struct SimConfig {
    std::size_t depth = 64;
    std::size_t trials = 10'000;
    std::uint64_t seed = 0;

    static constexpr const char* rng_name = "mt19937_64+splitmix64";

    /// Throws ValidationError on zero depth or zero trials.
    void validate() const;
};

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial);

/// Inverse-CDF sampling with thresholds ceil(F(i) * 2^64) against a uniform
/// 64-bit draw; no floating point.
class Sampler {
  public:
    explicit Sampler(const ProbMeasure& mu);
    std::size_t operator()(std::mt19937_64& rng) const;

  private:
    std::vector<std::size_t> atoms_;
    std::vector<unsigned __int128> thresholds_;
};

struct PathSample {
    std::vector<ElementId> noise;    // noise[i] = N_{-i}
    std::vector<ElementId> products; // products[m] = N_0 N_{-1} ... N_{-m}
    /// First depth m >= 1 at which products[m-1] absorbs every deeper noise
    /// element on the right.
    std::optional<std::size_t> absorbed_at;
    /// x_path[i] = X_{-i}, for i = 0..L, when an entry law was given.
    std::optional<std::vector<StateIndex>> x_path;
};

class PathSimulator {
  public:
    PathSimulator(const NoiseSpec& noise, const ActionContext& ctx, SimConfig cfg);

    /// One trial, reproducible in isolation.
    PathSample trial(std::uint64_t t, const ProbMeasure* entry = nullptr) const;

    /// Draws the noise and products of trial t and returns the trial's
    /// generator positioned for the entry draws.
    std::mt19937_64 draw_noise(std::uint64_t t, PathSample& out) const;

    const SimConfig& config() const { return cfg_; }

  private:
    const NoiseSpec* noise_;
    const ActionContext* ctx_;
    SimConfig cfg_;
    std::vector<Sampler> samplers_; // index i samples N_{-i} for i < prefix length
    Sampler tail_;
    // absorbing_[m][sigma]: sigma absorbs supports at depths >= m (m capped
    // at prefix length, beyond which only the tail matters).
    std::vector<std::vector<bool>> absorbing_;
};

/// Runs trials 0..T-1 in order.
void simulate_paths(const NoiseSpec& noise, const ActionContext& ctx, const SimConfig& cfg,
                    const std::function<void(std::uint64_t, const PathSample&)>& sink,
                    const ProbMeasure* entry = nullptr);

struct EmpiricalLaw {
    std::vector<std::uint64_t> counts;
    std::uint64_t trials = 0;

    double frequency(std::size_t atom) const;
    /// Binomial standard error sqrt(f (1 - f) / trials).
    double standard_error(std::size_t atom) const;
};

/// Law of N_0 N_{-1} ... N_{-L+1}.
EmpiricalLaw estimate_product_law(const NoiseSpec& noise, const ActionContext& ctx,
                                  const SimConfig& cfg);

/// Law of X_0 with X_{-L} drawn from `entry`.
EmpiricalLaw estimate_state_law(const NoiseSpec& noise, const ActionContext& ctx,
                                const SimConfig& cfg, const ProbMeasure& entry);

/// mu_0 * ... * mu_{-L+1} * entry, exactly.
ProbMeasure exact_state_law(const NoiseSpec& noise, const ActionContext& ctx, std::size_t depth,
                            const ProbMeasure& entry);

struct StoppingTimeStats {
    std::uint64_t trials = 0;
    std::uint64_t absorbed = 0;       // trials with T <= depth
    double mean = 0;                  // over absorbed trials
    double standard_error = 0;
    std::size_t median = 0;
    std::size_t q90 = 0;
    double unabsorbed_fraction = 0;   // T > depth
    /// I.i.d. noise only.
    std::optional<Rational> exact_mean;      // when T < infinity a.s.
    std::optional<Rational> exact_tail;      // P(T > depth)
    std::optional<Rational> exact_infinite;  // P(T = infinity)
};

struct ExactStoppingTime {
    Rational infinite;             // P(T = infinity)
    std::optional<Rational> mean;  // when infinite == 0
};

/// From the product chain's absorbing states. Throws UnsupportedCase for
/// noise with a non-stationary prefix.
ExactStoppingTime exact_stopping_time(const NoiseSpec& noise, const ActionContext& ctx);
Rational exact_stopping_tail(const NoiseSpec& noise, const ActionContext& ctx, std::size_t depth);

StoppingTimeStats stopping_time_stats(const NoiseSpec& noise, const ActionContext& ctx,
                                      const SimConfig& cfg);

struct CouplingResult {
    std::uint64_t trials = 0;
    std::uint64_t collisions = 0;
    double frequency = 0;
    double standard_error = 0;
    std::vector<std::uint8_t> collided; // per trial
};

/// Two solutions driven by one noise path, with entries drawn independently
/// from each family's law at -L.
CouplingResult ci_coupling(const NoiseSpec& noise, const ActionContext& ctx,
                           const SolutionLawFamily& first, const SolutionLawFamily& second,
                           const SimConfig& cfg);

struct CsvRow {
    std::string atom;
    std::optional<Rational> exact;
    double empirical = 0;
    double standard_error = 0;
};

/// Header "atom,exact,empirical,stderr"; rationals as p/q, floats with 12
/// significant digits; fields containing commas or quotes are quoted.
void write_csv(std::ostream& out, const std::vector<CsvRow>& rows);

std::string format_float(double v);

} // namespace tsl

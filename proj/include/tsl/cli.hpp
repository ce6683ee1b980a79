#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tsl/measures.hpp"
#include "tsl/rational.hpp"

namespace tsl {

enum class SpecMode { SemigroupAction, Cyclic, Symmetric };

struct NoiseEntry {
    std::string name;
    Rational weight;

    bool operator==(const NoiseEntry&) const = default;
};

struct NamedGenerator {
    std::string name;
    std::vector<std::size_t> image; // 1-based

    bool operator==(const NamedGenerator&) const = default;
};

/// Parsed form of a problem file.
///
///   space N                 states 1..N
///   gen NAME = i1 ... iN    a map, as its 1-based image list
///   group Z N | group S N   cyclic or symmetric group acting on itself
///   noise iid NAME:RAT ...  stationary law
///   noise at K NAME:RAT ... law at index K <= 0
///
/// '#' starts a comment. Rationals are p/q or integers.
struct ProblemSpec {
    SpecMode mode = SpecMode::SemigroupAction;
    std::size_t size = 0;
    std::vector<NamedGenerator> generators;
    std::vector<NoiseEntry> iid;
    std::map<long, std::vector<NoiseEntry>> at;

    bool operator==(const ProblemSpec&) const = default;
};

/// Throws ParseError carrying the offending line.
ProblemSpec parse_spec(std::string_view text);

/// Canonical text form; parse_spec(serialize_spec(s)) == s.
std::string serialize_spec(const ProblemSpec& spec);

struct Problem {
    ActionContext ctx;
    NoiseSpec noise;
};

Problem build_problem(const ProblemSpec& spec);

/// Entry point shared by the executable and the tests. Returns the exit code:
/// 0 success, 1 usage or parse error, 2 capacity or unsupported case,
/// 3 internal inconsistency.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace tsl

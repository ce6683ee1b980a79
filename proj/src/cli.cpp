#include "tsl/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "tsl/errors.hpp"
#include "tsl/montecarlo.hpp"
#include "tsl/solver.hpp"

namespace tsl {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::size_t kMaxSymmetricDegree = 6;

std::vector<std::string> tokenize(std::string_view line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])))
            ++j;
        if (j > i)
            out.emplace_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

template <typename T>
std::optional<T> parse_int(std::string_view s) {
    T v{};
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || p != end)
        return std::nullopt;
    return v;
}

bool valid_name(std::string_view s) {
    return !s.empty() && s.find_first_of(":=#") == std::string_view::npos;
}

// Element labels of the group modes, in the order the group constructors use.
std::vector<std::string> group_labels(SpecMode mode, std::size_t n) {
    std::vector<std::string> out;
    if (mode == SpecMode::Cyclic) {
        for (std::size_t g = 0; g < n; ++g)
            out.push_back(std::to_string(g));
    } else {
        std::string perm;
        for (std::size_t i = 1; i <= n; ++i)
            perm += static_cast<char>('0' + i);
        do
            out.push_back(perm);
        while (std::next_permutation(perm.begin(), perm.end()));
    }
    return out;
}

class SpecParser {
  public:
    ProblemSpec run(std::string_view text) {
        std::size_t line_no = 0;
        std::size_t last_statement = 1;
        std::size_t start = 0;
        while (start <= text.size()) {
            auto end = text.find('\n', start);
            if (end == std::string_view::npos)
                end = text.size();
            ++line_no;
            auto line = text.substr(start, end - start);
            if (auto hash = line.find('#'); hash != std::string_view::npos)
                line = line.substr(0, hash);
            const auto tokens = tokenize(line);
            if (!tokens.empty()) {
                statement(line_no, tokens);
                last_statement = line_no;
            }
            start = end + 1;
        }
        const std::size_t last = last_statement;
        if (!declared_)
            throw ParseError(last, "missing 'space N' or 'group' declaration");
        if (spec_.mode == SpecMode::SemigroupAction && spec_.generators.empty())
            throw ParseError(last, "no generators declared");
        if (!have_iid_)
            throw ParseError(last, "missing 'noise iid' declaration");
        return std::move(spec_);
    }

  private:
    void statement(std::size_t ln, const std::vector<std::string>& t) {
        if (t[0] == "space")
            space(ln, t);
        else if (t[0] == "gen")
            gen(ln, t);
        else if (t[0] == "group")
            group(ln, t);
        else if (t[0] == "noise")
            noise(ln, t);
        else
            throw ParseError(ln, "unknown keyword '" + t[0] + "'");
    }

    std::size_t positive(std::size_t ln, const std::string& s, const char* what) {
        auto v = parse_int<std::size_t>(s);
        if (!v || *v == 0)
            throw ParseError(ln, std::string(what) + " must be a positive integer, got '" + s + "'");
        return *v;
    }

    void space(std::size_t ln, const std::vector<std::string>& t) {
        if (declared_)
            throw ParseError(ln, spec_.mode == SpecMode::SemigroupAction
                                     ? "duplicate 'space' declaration"
                                     : "'space' cannot be combined with 'group'");
        if (t.size() != 2)
            throw ParseError(ln, "expected 'space N'");
        spec_.size = positive(ln, t[1], "state count");
        spec_.mode = SpecMode::SemigroupAction;
        declared_ = true;
    }

    void gen(std::size_t ln, const std::vector<std::string>& t) {
        if (!declared_)
            throw ParseError(ln, "'gen' before 'space'");
        if (spec_.mode != SpecMode::SemigroupAction)
            throw ParseError(ln, "'gen' is not allowed with 'group'");
        if (t.size() < 3 || t[2] != "=")
            throw ParseError(ln, "expected 'gen NAME = i1 ... iN'");
        if (!valid_name(t[1]))
            throw ParseError(ln, "invalid generator name '" + t[1] + "'");
        if (names_.count(t[1]))
            throw ParseError(ln, "duplicate generator '" + t[1] + "'");
        if (t.size() - 3 != spec_.size)
            throw ParseError(ln, "generator '" + t[1] + "' needs " + std::to_string(spec_.size) +
                                     " image indices, got " + std::to_string(t.size() - 3));
        NamedGenerator g{t[1], {}};
        for (std::size_t i = 3; i < t.size(); ++i) {
            auto v = parse_int<std::size_t>(t[i]);
            if (!v || *v == 0 || *v > spec_.size)
                throw ParseError(ln, "image index '" + t[i] + "' outside 1.." +
                                         std::to_string(spec_.size));
            g.image.push_back(*v);
        }
        for (const auto& other : spec_.generators)
            if (other.image == g.image)
                throw ParseError(ln, "generator '" + g.name + "' repeats the map of '" +
                                         other.name + "'");
        names_.insert(g.name);
        spec_.generators.push_back(std::move(g));
    }

    void group(std::size_t ln, const std::vector<std::string>& t) {
        if (declared_)
            throw ParseError(ln, spec_.mode == SpecMode::SemigroupAction
                                     ? "'group' cannot be combined with 'space'"
                                     : "duplicate 'group' declaration");
        if (t.size() != 3 || (t[1] != "Z" && t[1] != "S"))
            throw ParseError(ln, "expected 'group Z N' or 'group S N'");
        spec_.mode = t[1] == "Z" ? SpecMode::Cyclic : SpecMode::Symmetric;
        spec_.size = positive(ln, t[2], "group parameter");
        if (spec_.mode == SpecMode::Symmetric && spec_.size > kMaxSymmetricDegree)
            throw ParseError(ln, "symmetric groups are supported up to degree " +
                                     std::to_string(kMaxSymmetricDegree));
        for (auto& l : group_labels(spec_.mode, spec_.size))
            names_.insert(std::move(l));
        declared_ = true;
    }

    void noise(std::size_t ln, const std::vector<std::string>& t) {
        if (!declared_)
            throw ParseError(ln, "'noise' before 'space' or 'group'");
        std::size_t first;
        std::vector<NoiseEntry>* target;
        if (t.size() >= 2 && t[1] == "iid") {
            if (have_iid_)
                throw ParseError(ln, "duplicate 'noise iid' declaration");
            have_iid_ = true;
            target = &spec_.iid;
            first = 2;
        } else if (t.size() >= 3 && t[1] == "at") {
            auto k = parse_int<long>(t[2]);
            if (!k)
                throw ParseError(ln, "bad index '" + t[2] + "'");
            if (*k > 0)
                throw ParseError(ln, "noise index must be <= 0, got " + t[2]);
            if (spec_.at.count(*k))
                throw ParseError(ln, "duplicate 'noise at " + t[2] + "' declaration");
            target = &spec_.at[*k];
            first = 3;
        } else {
            throw ParseError(ln, "expected 'noise iid ...' or 'noise at K ...'");
        }
        if (first == t.size())
            throw ParseError(ln, "noise law without entries");
        std::set<std::string> seen;
        Rational total = 0;
        for (std::size_t i = first; i < t.size(); ++i) {
            const auto colon = t[i].find(':');
            if (colon == std::string::npos)
                throw ParseError(ln, "expected NAME:WEIGHT, got '" + t[i] + "'");
            std::string name = t[i].substr(0, colon);
            if (!names_.count(name))
                throw ParseError(ln, "undeclared name '" + name + "'");
            if (!seen.insert(name).second)
                throw ParseError(ln, "name '" + name + "' repeated in one noise law");
            Rational w;
            try {
                w = parse_rational(std::string_view(t[i]).substr(colon + 1));
            } catch (const ValidationError& e) {
                throw ParseError(ln, e.what());
            }
            if (w < 0)
                throw ParseError(ln, "negative weight for '" + name + "'");
            total += w;
            target->push_back({std::move(name), std::move(w)});
        }
        if (total != 1)
            throw ParseError(ln, "weights sum to " + to_string(total) + ", expected 1");
    }

    ProblemSpec spec_;
    bool declared_ = false;
    bool have_iid_ = false;
    std::set<std::string> names_;
};

std::string entries_text(const std::vector<NoiseEntry>& entries) {
    std::string out;
    for (const auto& e : entries)
        out += " " + e.name + ":" + to_string(e.weight);
    return out;
}

// ---------------------------------------------------------------- reports

std::vector<std::string> element_labels(const FiniteSemigroup& sg, const ElementSet& ids) {
    std::vector<std::string> out;
    for (auto id : ids)
        out.push_back(sg.label(id));
    return out;
}

std::vector<std::string> state_labels(const StateSpace& space, const StateSet& ids) {
    std::vector<std::string> out;
    for (auto i : ids)
        out.push_back(space.label(i));
    return out;
}

// Measures on elements or states, restricted to their support.
Json measure_json(const ProbMeasure& m, const std::function<std::string(std::size_t)>& label) {
    Json w = Json::object();
    for (auto a : m.support())
        w[label(a)] = to_string(m[a]);
    return Json{{"exactness", "exact-rational"}, {"weights", std::move(w)}};
}

Json tri(std::optional<bool> v) { return v ? Json(*v) : Json(nullptr); }

Json exact_json(const std::optional<Rational>& r) {
    return r ? Json(to_string(*r)) : Json(nullptr);
}

std::string mode_name(SpecMode m) {
    switch (m) {
    case SpecMode::SemigroupAction:
        return "semigroup-action";
    case SpecMode::Cyclic:
        return "cyclic-group";
    case SpecMode::Symmetric:
        return "symmetric-group";
    }
    return "";
}

Json fourier_json(const FourierReport& f) {
    return Json{{"exactness", "exact"},
                {"modulus", f.modulus},
                {"pi", f.pi},
                {"z_mu", f.z_mu},
                {"p_mu", f.p_mu},
                {"h_mu", f.h_mu},
                {"trichotomy", to_string(f.trichotomy)}};
}

struct AnalyzeFlags {
    std::size_t window = 8;
    std::size_t subgroup_cap = 64;
};

// Capacity limits hit along the way are reported in the tree and collected in
// `capacity` so the caller can exit with the capacity code.
Json analyze_json(const ProblemSpec& spec, const Problem& pb, const AnalyzeFlags& flags,
                  std::vector<std::string>& capacity) {
    const auto& ctx = pb.ctx;
    const auto& sg = ctx.sg();
    auto elabel = [&](std::size_t a) { return sg.label(a); };
    auto slabel = [&](std::size_t i) { return ctx.space.label(i); };

    Json out;
    out["command"] = "analyze";
    out["input"] = Json{{"mode", mode_name(spec.mode)},
                        {"states", ctx.space.size()},
                        {"prefix_length", pb.noise.prefix_length()},
                        {"window", flags.window},
                        {"subgroup_cap", flags.subgroup_cap}};

    const auto core = power_core(sg);
    const auto classes = classify_elements(sg);
    out["algebra"] = Json{{"closure_size", sg.size()},
                          {"elements", element_labels(sg, [&] {
                               ElementSet all(sg.size());
                               std::iota(all.begin(), all.end(), ElementId{0});
                               return all;
                           }())},
                          {"core", element_labels(sg, core.core)},
                          {"core_size", core.core.size()},
                          {"cancellative", element_labels(sg, classes.cancellative)},
                          {"synchronizing", element_labels(sg, classes.synchronizing)},
                          {"left_cancellative", is_left_cancellative(sg)},
                          {"acts_cancellatively", acts_cancellatively(sg)},
                          {"core_orbit", state_labels(ctx.space, core_orbit(sg))}};

    ClassifyOptions copt;
    copt.window = flags.window;
    copt.limits.subgroup_cap = flags.subgroup_cap;
    const auto rep = classify(pb.noise, ctx, copt);
    const auto& lim = rep.limits;

    Json limits;
    limits["period"] = lim.period;
    limits["p1"] = lim.as_convergence;
    limits["p1_phase"] = lim.phase_as_convergence;
    limits["converges_in_law"] = lim.converges_in_law;
    limits["nu"] = lim.nu ? measure_json(*lim.nu, elabel) : Json(nullptr);
    limits["cesaro"] = measure_json(lim.cesaro, elabel);
    Json residues = Json::array();
    for (const auto& r : lim.residue_limits)
        residues.push_back(measure_json(r, elabel));
    limits["residue_limits"] = std::move(residues);
    Json prefix = Json::array();
    for (std::size_t i = 0; i < lim.prefix_limits.size(); ++i)
        prefix.push_back(Json{{"k", -static_cast<long>(i)},
                              {"law", measure_json(lim.prefix_limits[i], elabel)}});
    limits["prefix_limits"] = std::move(prefix);
    if (lim.p2) {
        limits["p2"] = Json{{"order", lim.p2->subgroup.size()},
                            {"members", lim.p2->member_labels},
                            {"transitive", lim.p2->transitive},
                            {"phase_only", lim.p2->phase_only},
                            {"ambient_size", lim.ambient ? lim.ambient->size() : sg.size()}};
    } else {
        limits["p2"] = nullptr;
    }
    limits["p2_candidates"] = lim.p2_candidates.size();
    limits["subgroup_search_error"] =
        lim.subgroup_search_error ? Json(*lim.subgroup_search_error) : Json(nullptr);
    if (lim.subgroup_search_error)
        capacity.push_back(*lim.subgroup_search_error);
    out["limits"] = std::move(limits);

    Json sols;
    Json ext = Json::array();
    for (const auto& ce : rep.extremals) {
        const auto& fam = ce.extremal.family;
        Json e;
        e["base_points"] = state_labels(ctx.space, ce.extremal.base_points);
        e["certified_extremal"] = fam.certified_extremal();
        e["period"] = fam.period();
        e["satisfies_equation"] = satisfies_convolution_equation(pb.noise, ctx, fam);
        Json laws = Json::array();
        const auto window = fam.window(flags.window);
        for (std::size_t i = 0; i < window.size(); ++i)
            laws.push_back(Json{{"k", -static_cast<long>(i)},
                                {"law", measure_json(window[i], slabel)}});
        e["laws"] = std::move(laws);
        try {
            const auto w = strongness_witness(pb.noise, ctx, fam, flags.window);
            Json by = Json::array();
            for (const auto& r : w.by_depth)
                by.push_back(to_string(r));
            e["witness"] = Json{{"exactness", "exact-rational"},
                                {"depth", flags.window},
                                {"residual", to_string(w.residual)},
                                {"by_depth", std::move(by)},
                                {"suggests_strong", w.verdict_hint}};
        } catch (const CapacityError& err) {
            e["witness"] = Json{{"error", err.what()}};
            capacity.push_back(err.what());
        }
        ext.push_back(std::move(e));
    }
    sols["extremals"] = std::move(ext);
    try {
        sols["stationary"] = measure_json(stationary_law(pb.noise.tail(), ctx), slabel);
    } catch (const MultiplicityError& err) {
        sols["stationary"] = Json{{"error", err.what()}};
    }
    out["solutions"] = std::move(sols);

    Json strong = Json::array();
    for (const auto& ce : rep.extremals)
        strong.push_back(tri(ce.strong));
    out["classification"] = Json{
        {"p1", rep.p1},
        {"p1_phase", rep.p1_phase},
        {"p2", rep.p2.has_value()},
        {"unique_in_law", rep.unique_in_law},
        {"pathwise_unique", tri(rep.pathwise_unique)},
        {"all_extremal_strong", tri(rep.all_extremal_strong)},
        {"all_solutions_strong", tri(rep.all_solutions_strong)},
        {"extremal_strong", std::move(strong)},
        {"limits_synchronizing", rep.limits_synchronizing},
        {"limits_cancellative", rep.limits_cancellative},
        {"yamada_watanabe", "consistent"},
        {"notes", rep.notes}};
    if (ctx.group)
        out["classification"]["trichotomy"] =
            rep.trichotomy ? Json(to_string(*rep.trichotomy)) : Json(nullptr);

    if (ctx.group) {
        const auto& ga = *ctx.group;
        const auto uni = uniform_solution(ctx, pb.noise);
        bool average_uniform = true;
        if (!rep.extremals.empty()) {
            const auto& fam = rep.extremals.front().extremal.family;
            std::vector<SolutionLawFamily> translates;
            for (ElementId g = 0; g < ga.group.size(); ++g)
                translates.push_back(right_translate(ctx, fam, g));
            const RationalVector weights(ga.group.size(), Rational(1, ga.group.size()));
            average_uniform = mixture(translates, weights).same_laws(uni);
        }
        std::vector<ExtremalFamily> families;
        for (const auto& ce : rep.extremals)
            families.push_back(ce.extremal);
        out["group"] = Json{
            {"order", ga.group.size()},
            {"uniform_solves_equation", satisfies_convolution_equation(pb.noise, ctx, uni)},
            {"extremals_related_by_translation", tri(translate_orbit_check(ctx, families))},
            {"translate_average_uniform", average_uniform}};
    }
    if (spec.mode == SpecMode::Cyclic)
        out["fourier"] = fourier_json(fourier_trichotomy(ctx, pb.noise));
    return out;
}

struct SimulateFlags {
    SimConfig cfg;
    std::string csv;
};

struct SimulationOutput {
    Json report;
    std::vector<CsvRow> rows;
};

SimulationOutput simulate_report(const Problem& pb, const SimulateFlags& flags) {
    const auto& ctx = pb.ctx;
    const auto& sg = ctx.sg();
    const auto& cfg = flags.cfg;
    cfg.validate();

    SimulationOutput res;
    Json& out = res.report;
    out["command"] = "simulate";
    out["config"] = Json{{"depth", cfg.depth},
                         {"trials", cfg.trials},
                         {"seed", cfg.seed},
                         {"rng", SimConfig::rng_name},
                         {"entry_law", "uniform"}};

    auto row_json = [](const CsvRow& r) {
        return Json{{"atom", r.atom},
                    {"exact", exact_json(r.exact)},
                    {"empirical", r.empirical},
                    {"stderr", r.standard_error}};
    };

    const auto entry = ProbMeasure::uniform(ctx.states());
    const auto state_emp = estimate_state_law(pb.noise, ctx, cfg, entry);
    const auto state_exact = exact_state_law(pb.noise, ctx, cfg.depth, entry);
    Json states = Json::array();
    for (std::size_t i = 0; i < ctx.space.size(); ++i) {
        CsvRow r{"state:" + ctx.space.label(i), state_exact[i], state_emp.frequency(i),
                 state_emp.standard_error(i)};
        states.push_back(row_json(r));
        res.rows.push_back(std::move(r));
    }
    out["state_law"] = std::move(states);

    const auto prod_emp = estimate_product_law(pb.noise, ctx, cfg);
    const auto prod_exact = product_law(sg, pb.noise, cfg.depth);
    Json products = Json::array();
    for (ElementId a = 0; a < sg.size(); ++a) {
        if (prod_exact[a] == 0 && prod_emp.counts[a] == 0)
            continue;
        CsvRow r{"product:" + sg.label(a), prod_exact[a], prod_emp.frequency(a),
                 prod_emp.standard_error(a)};
        products.push_back(row_json(r));
        res.rows.push_back(std::move(r));
    }
    out["product_law"] = std::move(products);

    const auto st = stopping_time_stats(pb.noise, ctx, cfg);
    out["stopping_time"] = Json{{"trials", st.trials},
                                {"absorbed", st.absorbed},
                                {"mean", Json{{"empirical", st.mean}, {"stderr", st.standard_error}}},
                                {"median", st.median},
                                {"q90", st.q90},
                                {"unabsorbed_fraction", st.unabsorbed_fraction},
                                {"exact_mean", exact_json(st.exact_mean)},
                                {"exact_tail_beyond_depth", exact_json(st.exact_tail)},
                                {"exact_infinite", exact_json(st.exact_infinite)}};
    if (st.absorbed > 0)
        res.rows.push_back({"stopping_time:mean", st.exact_mean, st.mean, st.standard_error});
    return res;
}

// Keys whose null value means "not decided" rather than "absent".
const std::set<std::string>& tri_state_keys() {
    static const std::set<std::string> keys{"pathwise_unique", "all_extremal_strong",
                                            "all_solutions_strong", "trichotomy",
                                            "extremals_related_by_translation"};
    return keys;
}

// Indented plain-text rendering of a report tree.
void render_text(std::ostream& out, const Json& j, int indent);

std::string scalar_text(const Json& j) {
    if (j.is_null())
        return "unknown";
    if (j.is_string())
        return j.get<std::string>();
    if (j.is_boolean())
        return j.get<bool>() ? "true" : "false";
    if (j.is_number_float())
        return format_float(j.get<double>());
    return j.dump();
}

bool is_scalar_list(const Json& j) {
    return j.is_array() && std::none_of(j.begin(), j.end(), [](const Json& e) {
               return e.is_object() || e.is_array();
           });
}

std::string list_text(const Json& j) {
    std::string s = "[";
    bool first = true;
    for (const auto& e : j) {
        if (!first)
            s += ", ";
        first = false;
        s += scalar_text(e);
    }
    return s + "]";
}

bool is_measure(const Json& j) {
    return j.is_object() && j.size() == 2 && j.contains("exactness") && j.contains("weights");
}

std::string measure_text(const Json& j) {
    std::string s = "{";
    bool first = true;
    for (const auto& [atom, w] : j["weights"].items()) {
        if (!first)
            s += ", ";
        first = false;
        s += atom + ": " + w.get<std::string>();
    }
    return s + "}";
}

void render_value(std::ostream& out, const std::string& prefix, const Json& v, int indent) {
    if (is_measure(v)) {
        out << prefix << " " << measure_text(v) << "\n";
    } else if (v.is_object() && v.size() == 2 && v.contains("k") && is_measure(v["law"])) {
        out << std::string(indent, ' ') << "k = " << v["k"].get<long>() << ": "
            << measure_text(v["law"]) << "\n";
    } else if (v.is_object()) {
        out << prefix << "\n";
        render_text(out, v, indent + 2);
    } else if (is_scalar_list(v)) {
        out << prefix << " " << list_text(v) << "\n";
    } else if (v.is_array()) {
        out << prefix << "\n";
        for (const auto& e : v) {
            if (e.contains("k") && e.size() == 2) {
                render_value(out, "", e, indent + 2);
                continue;
            }
            if (is_measure(e)) {
                out << std::string(indent + 2, ' ') << "- " << measure_text(e) << "\n";
                continue;
            }
            out << std::string(indent + 2, ' ') << "-\n";
            if (e.is_object())
                render_text(out, e, indent + 4);
            else
                render_value(out, std::string(indent + 4, ' '), e, indent + 4);
        }
    } else {
        out << prefix << " " << scalar_text(v) << "\n";
    }
}

void render_text(std::ostream& out, const Json& j, int indent) {
    const std::string pad(indent, ' ');
    for (const auto& [key, value] : j.items()) {
        if (key == "notes" && value.is_array()) {
            out << pad << "notes:\n";
            for (const auto& n : value)
                out << pad << "  * " << n.get<std::string>() << "\n";
            continue;
        }
        if (value.is_null() && !tri_state_keys().count(key))
            out << pad << key << ": none\n";
        else
            render_value(out, pad + key + ":", value, indent);
    }
}

void emit(std::ostream& out, const Json& report, bool json) {
    if (json)
        out << report.dump(2) << "\n";
    else
        render_text(out, report, 0);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

ProblemSpec parse_spec(std::string_view text) { return SpecParser{}.run(text); }

std::string serialize_spec(const ProblemSpec& spec) {
    std::string out;
    switch (spec.mode) {
    case SpecMode::SemigroupAction:
        out += "space " + std::to_string(spec.size) + "\n";
        for (const auto& g : spec.generators) {
            out += "gen " + g.name + " =";
            for (auto i : g.image)
                out += " " + std::to_string(i);
            out += "\n";
        }
        break;
    case SpecMode::Cyclic:
        out += "group Z " + std::to_string(spec.size) + "\n";
        break;
    case SpecMode::Symmetric:
        out += "group S " + std::to_string(spec.size) + "\n";
        break;
    }
    out += "noise iid" + entries_text(spec.iid) + "\n";
    for (const auto& [k, entries] : spec.at)
        out += "noise at " + std::to_string(k) + entries_text(entries) + "\n";
    return out;
}

Problem build_problem(const ProblemSpec& spec) {
    std::optional<ActionContext> ctx;
    std::map<std::string, ElementId> ids;
    if (spec.mode == SpecMode::SemigroupAction) {
        std::vector<Transformation> gens;
        for (const auto& g : spec.generators) {
            std::vector<StateIndex> img;
            for (auto i : g.image)
                img.push_back(i - 1);
            gens.emplace_back(std::move(img));
        }
        auto sg = FiniteSemigroup::generate(spec.size, gens);
        for (std::size_t i = 0; i < gens.size(); ++i) {
            const auto id = *sg.find(gens[i]);
            sg.set_label(id, spec.generators[i].name);
            ids[spec.generators[i].name] = id;
        }
        ctx = ActionContext::semigroup_action(std::move(sg), StateSpace(spec.size));
    } else {
        ctx = ActionContext::group_on_itself(spec.mode == SpecMode::Cyclic
                                                 ? cyclic_group(spec.size)
                                                 : symmetric_group(spec.size));
        for (ElementId a = 0; a < ctx->sg().size(); ++a)
            ids[ctx->sg().label(a)] = a;
    }

    auto law = [&](const std::vector<NoiseEntry>& entries) {
        RationalVector w(ctx->sg().size(), Rational(0));
        for (const auto& e : entries) {
            const auto it = ids.find(e.name);
            if (it == ids.end())
                throw ValidationError("undeclared name '" + e.name + "'");
            w[it->second] += e.weight;
        }
        return ProbMeasure(ctx->elements(), std::move(w));
    };
    auto tail = law(spec.iid);
    std::vector<ProbMeasure> prefix;
    if (!spec.at.empty()) {
        const auto m = static_cast<std::size_t>(-spec.at.begin()->first) + 1;
        for (std::size_t i = 0; i < m; ++i) {
            const auto it = spec.at.find(-static_cast<long>(i));
            prefix.push_back(it == spec.at.end() ? tail : law(it->second));
        }
    }
    return Problem{std::move(*ctx), NoiseSpec(std::move(prefix), std::move(tail))};
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Solutions of stochastic equations driven by finite semigroup actions", "tsl"};
    app.require_subcommand(1);

    std::string file;
    bool json = false;
    AnalyzeFlags aflags;
    SimulateFlags sflags;
    bool simulate_json = false;

    auto* analyze = app.add_subcommand("analyze", "Algebra, limit laws, solutions and classification");
    analyze->add_option("SPECFILE", file)->required();
    analyze->add_option("--window", aflags.window, "Number of indices k reported per family")
        ->check(CLI::PositiveNumber);
    analyze->add_option("--subgroup-cap", aflags.subgroup_cap,
                        "Largest ambient semigroup searched for subgroups")
        ->check(CLI::PositiveNumber);
    analyze->add_flag("--json", json, "Machine-readable report");

    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo estimates against exact laws");
    simulate->add_option("SPECFILE", file)->required();
    simulate->add_option("--depth", sflags.cfg.depth)->required();
    simulate->add_option("--trials", sflags.cfg.trials)->required();
    simulate->add_option("--seed", sflags.cfg.seed)->required();
    simulate->add_option("--csv", sflags.csv, "Write one row per atom to this file");
    simulate->add_flag("--json", simulate_json, "Machine-readable report");

    auto* fourier = app.add_subcommand("fourier", "Character test on Z/n");
    fourier->add_option("SPECFILE", file)->required();
    fourier->add_flag("--json", json, "Machine-readable report");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        const auto spec = parse_spec(read_file(file));
        const auto pb = build_problem(spec);
        if (analyze->parsed()) {
            std::vector<std::string> capacity;
            emit(out, analyze_json(spec, pb, aflags, capacity), json);
            if (!capacity.empty()) {
                for (const auto& c : capacity)
                    err << "capacity exceeded: " << c << "\n";
                return 2;
            }
        } else if (simulate->parsed()) {
            auto sim = simulate_report(pb, sflags);
            if (!sflags.csv.empty()) {
                std::ofstream csv(sflags.csv, std::ios::binary);
                if (!csv)
                    throw ValidationError("cannot write '" + sflags.csv + "'");
                write_csv(csv, sim.rows);
            }
            emit(out, sim.report, simulate_json);
        } else {
            Json rep{{"command", "fourier"}};
            rep.update(fourier_json(fourier_trichotomy(pb.ctx, pb.noise)));
            emit(out, rep, json);
        }
        return 0;
    } catch (const ParseError& e) {
        err << file << ": " << e.what() << "\n";
        return 1;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const DimensionError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const InternalInconsistency& e) {
        err << "internal inconsistency: " << e.what() << "\n";
        return 3;
    } catch (const CapacityError& e) {
        err << "capacity exceeded (limit " << e.cap() << "): " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace tsl

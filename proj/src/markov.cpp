#include "tsl/markov.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>

#include "tsl/errors.hpp"

namespace tsl {

namespace {

std::vector<std::vector<std::size_t>> successors(const RationalMatrix& p) {
    std::vector<std::vector<std::size_t>> adj(p.rows());
    for (std::size_t i = 0; i < p.rows(); ++i)
        for (std::size_t j = 0; j < p.cols(); ++j)
            if (sgn(p(i, j)) > 0)
                adj[i].push_back(j);
    return adj;
}

std::size_t class_period(const std::vector<std::vector<std::size_t>>& adj,
                         const std::vector<std::size_t>& members,
                         const std::vector<std::optional<std::size_t>>& class_of,
                         std::size_t cls) {
    std::vector<long> level(adj.size(), -1);
    std::queue<std::size_t> q;
    level[members.front()] = 0;
    q.push(members.front());
    std::size_t g = 0;
    while (!q.empty()) {
        auto u = q.front();
        q.pop();
        for (auto v : adj[u]) {
            if (class_of[v] != cls)
                continue;
            if (level[v] < 0) {
                level[v] = level[u] + 1;
                q.push(v);
            } else {
                auto diff = static_cast<std::size_t>(std::labs(level[u] + 1 - level[v]));
                g = std::gcd(g, diff);
            }
        }
    }
    return g == 0 ? 1 : g;
}

RationalVector stationary_on(const RationalMatrix& p, const std::vector<std::size_t>& members) {
    const std::size_t k = members.size();
    // Rows 0..k-2: balance equations; last row: normalization.
    RationalMatrix a(k, k);
    RationalMatrix b(k, 1);
    for (std::size_t r = 0; r + 1 < k; ++r)
        for (std::size_t c = 0; c < k; ++c)
            a(r, c) = p(members[c], members[r]) - (r == c ? 1 : 0);
    for (std::size_t c = 0; c < k; ++c)
        a(k - 1, c) = 1;
    b(k - 1, 0) = 1;
    auto x = solve(std::move(a), std::move(b));
    RationalVector out(p.rows());
    for (std::size_t c = 0; c < k; ++c)
        out[members[c]] = x(c, 0);
    return out;
}

} // namespace

std::vector<std::vector<std::size_t>> strongly_connected_components(const RationalMatrix& p) {
    const auto adj = successors(p);
    const std::size_t n = adj.size();
    std::vector<std::size_t> index(n, SIZE_MAX), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::vector<std::vector<std::size_t>> out;
    std::size_t counter = 0;

    // Iterative Tarjan: frames hold (vertex, next successor position).
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != SIZE_MAX)
            continue;
        std::vector<std::pair<std::size_t, std::size_t>> frames{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!frames.empty()) {
            auto& [v, pos] = frames.back();
            if (pos < adj[v].size()) {
                auto w = adj[v][pos++];
                if (index[w] == SIZE_MAX) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    frames.emplace_back(w, 0);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            const auto done = v;
            frames.pop_back();
            if (!frames.empty())
                low[frames.back().first] = std::min(low[frames.back().first], low[done]);
            if (low[done] == index[done]) {
                std::vector<std::size_t> comp;
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp.push_back(w);
                } while (w != done);
                std::sort(comp.begin(), comp.end());
                out.push_back(std::move(comp));
            }
        }
    }
    return out;
}

ChainStructure analyze_chain(const RationalMatrix& p) {
    const std::size_t n = p.rows();
    if (p.cols() != n)
        throw DimensionError("transition matrix must be square");
    for (std::size_t i = 0; i < n; ++i) {
        Rational row;
        for (std::size_t j = 0; j < n; ++j) {
            if (sgn(p(i, j)) < 0)
                throw ValidationError("negative transition probability");
            row += p(i, j);
        }
        if (row != 1)
            throw ValidationError("transition row " + std::to_string(i) + " does not sum to 1");
    }

    const auto adj = successors(p);
    auto comps = strongly_connected_components(p);
    std::vector<std::size_t> comp_of(n);
    for (std::size_t c = 0; c < comps.size(); ++c)
        for (auto v : comps[c])
            comp_of[v] = c;

    std::vector<std::vector<std::size_t>> closed;
    for (const auto& comp : comps) {
        bool is_closed = true;
        for (auto v : comp)
            for (auto w : adj[v])
                if (comp_of[w] != comp_of[v])
                    is_closed = false;
        if (is_closed)
            closed.push_back(comp);
    }
    std::sort(closed.begin(), closed.end());

    ChainStructure out;
    out.class_of.assign(n, std::nullopt);
    for (std::size_t c = 0; c < closed.size(); ++c)
        for (auto v : closed[c])
            out.class_of[v] = c;
    for (std::size_t c = 0; c < closed.size(); ++c) {
        RecurrentClass rc;
        rc.states = closed[c];
        rc.period = class_period(adj, closed[c], out.class_of, c);
        rc.stationary = stationary_on(p, closed[c]);
        out.classes.push_back(std::move(rc));
    }

    std::vector<std::size_t> transient;
    std::vector<std::size_t> pos(n, SIZE_MAX);
    for (std::size_t i = 0; i < n; ++i)
        if (!out.class_of[i]) {
            pos[i] = transient.size();
            transient.push_back(i);
        }

    const std::size_t c_count = closed.size();
    out.absorption = RationalMatrix(n, c_count);
    out.hitting_time.assign(n, Rational(0));
    for (std::size_t i = 0; i < n; ++i)
        if (out.class_of[i])
            out.absorption(i, *out.class_of[i]) = 1;
    if (transient.empty())
        return out;

    // (I - Q) [h | t] = [R | 1] on the transient block.
    const std::size_t t = transient.size();
    RationalMatrix a(t, t);
    RationalMatrix b(t, c_count + 1);
    for (std::size_t r = 0; r < t; ++r) {
        const auto i = transient[r];
        a(r, r) = 1;
        for (std::size_t j = 0; j < n; ++j) {
            if (sgn(p(i, j)) == 0)
                continue;
            if (out.class_of[j])
                b(r, *out.class_of[j]) += p(i, j);
            else
                a(r, pos[j]) -= p(i, j);
        }
        b(r, c_count) = 1;
    }
    auto x = solve(std::move(a), std::move(b));
    for (std::size_t r = 0; r < t; ++r) {
        for (std::size_t c = 0; c < c_count; ++c)
            out.absorption(transient[r], c) = x(r, c);
        out.hitting_time[transient[r]] = x(r, c_count);
    }
    return out;
}

RationalVector ChainStructure::absorb_from(const RationalVector& initial) const {
    return left_multiply(initial, absorption);
}

RationalVector ChainStructure::limit_mixture(const RationalVector& initial) const {
    auto w = absorb_from(initial);
    RationalVector out(class_of.size());
    for (std::size_t c = 0; c < classes.size(); ++c) {
        if (sgn(w[c]) == 0)
            continue;
        for (auto s : classes[c].states)
            out[s] += w[c] * classes[c].stationary[s];
    }
    return out;
}

std::size_t lcm_of_periods(const ChainStructure& chain) {
    std::size_t d = 1;
    for (const auto& c : chain.classes)
        d = std::lcm(d, c.period);
    return d;
}

} // namespace tsl

#include "byrdie/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "byrdie/errors.hpp"

namespace byrdie {

namespace {

std::string count_str(double v) {
    std::ostringstream ss;
    ss.precision(4);
    ss << v;
    return ss.str();
}

} // namespace

DirectedGraph::DirectedGraph(int node_count) : node_count_(node_count) {
    if (node_count < 1) throw ConfigError("graph needs at least one node");
    in_.assign(static_cast<std::size_t>(node_count) + 1, {});
}

void DirectedGraph::add_edge(int from, int to) {
    if (from < 1 || from > node_count_ || to < 1 || to > node_count_)
        throw ConfigError("edge (" + std::to_string(from) + "," + std::to_string(to) +
                          ") out of range for M=" + std::to_string(node_count_));
    if (from == to)
        throw ConfigError("self-loop (" + std::to_string(from) + "," + std::to_string(to) + ") not allowed");
    auto& lst = in_[static_cast<std::size_t>(to)];
    auto it = std::lower_bound(lst.begin(), lst.end(), from);
    if (it == lst.end() || *it != from) lst.insert(it, from);
}

bool DirectedGraph::has_edge(int from, int to) const {
    const auto& lst = in_neighbors(to);
    return std::binary_search(lst.begin(), lst.end(), from);
}

const std::vector<int>& DirectedGraph::in_neighbors(int node) const {
    if (node < 1 || node > node_count_) throw ConfigError("node id out of range");
    return in_[static_cast<std::size_t>(node)];
}

long long DirectedGraph::edge_count() const {
    long long n = 0;
    for (int i = 1; i <= node_count_; ++i) n += in_degree(i);
    return n;
}

std::vector<std::pair<int, int>> DirectedGraph::edges() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(static_cast<std::size_t>(edge_count()));
    for (int i = 1; i <= node_count_; ++i)
        for (int j : in_neighbors(i)) out.emplace_back(j, i);
    std::sort(out.begin(), out.end());
    return out;
}

DirectedGraph complete_graph(int node_count) {
    DirectedGraph g(node_count);
    for (int i = 1; i <= node_count; ++i)
        for (int j = 1; j <= node_count; ++j)
            if (i != j) g.add_edge(j, i);
    return g;
}

DirectedGraph generate_erdos_renyi(int node_count, double p, Rng& rng, bool symmetric) {
    if (node_count < 2) throw ConfigError("Erdos-Renyi generator needs M >= 2");
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("edge probability must satisfy 0 < p <= 1");
    DirectedGraph g(node_count);
    if (symmetric) {
        for (int i = 1; i <= node_count; ++i)
            for (int j = i + 1; j <= node_count; ++j)
                if (rng.uniform01() < p) {
                    g.add_edge(i, j);
                    g.add_edge(j, i);
                }
    } else {
        for (int to = 1; to <= node_count; ++to)
            for (int from = 1; from <= node_count; ++from)
                if (from != to && rng.uniform01() < p) g.add_edge(from, to);
    }
    return g;
}

DirectedGraph read_edge_list(std::istream& in) {
    std::string line;
    long line_no = 0;
    int node_count = -1;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        if (node_count < 0) {
            if (!(ss >> node_count) || node_count < 1)
                throw ParseError("expected node count on first line", line_no);
            continue;
        }
        std::string rest;
        ss >> rest;
        if (rest.empty()) continue; // blank line
        break;
    }
    if (node_count < 0) throw ParseError("empty edge-list file", 1);

    DirectedGraph g(node_count);
    in.clear();
    in.seekg(0);
    line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        if (!saw_header) {
            saw_header = true; // node-count line
            continue;
        }
        int from = 0, to = 0;
        if (!(ss >> from)) continue; // blank
        if (!(ss >> to)) throw ParseError("expected 'j i' pair", line_no);
        try {
            g.add_edge(from, to);
        } catch (const ConfigError& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    return g;
}

DirectedGraph load_edge_list(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open edge-list file: " + path);
    return read_edge_list(f);
}

void write_edge_list(const DirectedGraph& g, std::ostream& out) {
    out << g.node_count() << "\n";
    for (auto [j, i] : g.edges()) out << j << " " << i << "\n";
}

void save_edge_list(const DirectedGraph& g, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write edge-list file: " + path);
    write_edge_list(g, f);
}

DegreeReport validate_degrees(const DirectedGraph& g, int b) {
    if (b < 0) throw ConfigError("b must be non-negative");
    DegreeReport rep;
    rep.required = 2 * b + 1;
    for (int i = 1; i <= g.node_count(); ++i)
        if (g.in_degree(i) < rep.required) rep.violations.emplace_back(i, g.in_degree(i));
    rep.ok = rep.violations.empty();
    return rep;
}

void ByzantineAssignment::validate(int node_count) const {
    if (b_bound < 0) throw ConfigError("b_bound must be non-negative");
    int prev = 0;
    for (int id : byzantine) {
        if (id < 1 || id > node_count) throw ConfigError("byzantine id out of range");
        if (id <= prev) throw ConfigError("byzantine ids must be sorted and distinct");
        prev = id;
    }
    if (static_cast<int>(byzantine.size()) >= node_count)
        throw ConfigError("honest set must be non-empty");
}

Subgraph honest_subgraph(const DirectedGraph& g, const std::vector<int>& byzantine) {
    std::vector<char> is_byz(static_cast<std::size_t>(g.node_count()) + 1, 0);
    for (int id : byzantine) is_byz[static_cast<std::size_t>(id)] = 1;

    Subgraph s;
    std::vector<int> pos(static_cast<std::size_t>(g.node_count()) + 1, -1);
    for (int i = 1; i <= g.node_count(); ++i)
        if (!is_byz[static_cast<std::size_t>(i)]) {
            pos[static_cast<std::size_t>(i)] = static_cast<int>(s.nodes.size());
            s.nodes.push_back(i);
        }
    s.in.resize(s.nodes.size());
    for (std::size_t p = 0; p < s.nodes.size(); ++p)
        for (int j : g.in_neighbors(s.nodes[p]))
            if (!is_byz[static_cast<std::size_t>(j)])
                s.in[p].push_back(pos[static_cast<std::size_t>(j)]);
    return s;
}

namespace {

// All subsets of size 0..b of {0,..,d-1}, as sorted index vectors,
// in (size, lexicographic) order.
std::vector<std::vector<int>> removal_subsets(int d, int b) {
    std::vector<std::vector<int>> out;
    out.push_back({});
    std::vector<int> comb;
    for (int size = 1; size <= std::min(b, d); ++size) {
        comb.assign(static_cast<std::size_t>(size), 0);
        for (int i = 0; i < size; ++i) comb[static_cast<std::size_t>(i)] = i;
        while (true) {
            out.push_back(comb);
            int i = size - 1;
            while (i >= 0 && comb[static_cast<std::size_t>(i)] == d - size + i) --i;
            if (i < 0) break;
            ++comb[static_cast<std::size_t>(i)];
            for (int k = i + 1; k < size; ++k)
                comb[static_cast<std::size_t>(k)] = comb[static_cast<std::size_t>(k - 1)] + 1;
        }
    }
    return out;
}

double subset_count(int d, int b) {
    double total = 0;
    double c = 1; // C(d, i)
    for (int i = 0; i <= std::min(b, d); ++i) {
        total += c;
        c = c * (d - i) / (i + 1);
    }
    return total;
}

} // namespace

double count_reduced_graphs(const DirectedGraph& g, const ByzantineAssignment& byz) {
    byz.validate(g.node_count());
    Subgraph s = honest_subgraph(g, byz.byzantine);
    double total = 1;
    for (const auto& lst : s.in) total *= subset_count(static_cast<int>(lst.size()), byz.b_bound);
    return total;
}

bool for_each_reduced_graph(const DirectedGraph& g, const ByzantineAssignment& byz,
                            double budget,
                            const std::function<bool(const Subgraph&)>& visit) {
    byz.validate(g.node_count());
    double total = count_reduced_graphs(g, byz);
    if (total > budget)
        throw EnumerationBudgetError(
            "too large to enumerate: " + count_str(total) + " reduced graphs exceed budget " +
            count_str(budget) + "; use the sampling certifier");

    Subgraph base = honest_subgraph(g, byz.byzantine);
    const std::size_t n = base.size();
    std::vector<std::vector<std::vector<int>>> choices(n);
    for (std::size_t p = 0; p < n; ++p)
        choices[p] = removal_subsets(static_cast<int>(base.in[p].size()), byz.b_bound);

    std::vector<std::size_t> odo(n, 0);
    Subgraph current;
    current.nodes = base.nodes;
    current.in.resize(n);
    while (true) {
        for (std::size_t p = 0; p < n; ++p) {
            const auto& drop = choices[p][odo[p]];
            auto& lst = current.in[p];
            lst.clear();
            std::size_t di = 0;
            for (std::size_t q = 0; q < base.in[p].size(); ++q) {
                if (di < drop.size() && static_cast<std::size_t>(drop[di]) == q) {
                    ++di;
                    continue;
                }
                lst.push_back(base.in[p][q]);
            }
        }
        if (!visit(current)) return false;
        std::size_t p = 0;
        while (p < n && ++odo[p] == choices[p].size()) {
            odo[p] = 0;
            ++p;
        }
        if (p == n) break;
    }
    return true;
}

namespace {

// Iterative Tarjan SCC; returns component id per position, ids in reverse
// topological order of the condensation.
std::vector<int> tarjan_scc(const Subgraph& g, int& scc_count) {
    const int n = static_cast<int>(g.size());
    std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v)
        for (int u : g.in[static_cast<std::size_t>(v)]) out[static_cast<std::size_t>(u)].push_back(v);

    std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0),
        comp(static_cast<std::size_t>(n), -1);
    std::vector<char> on_stack(static_cast<std::size_t>(n), 0);
    std::vector<int> stack;
    int next_index = 0;
    scc_count = 0;

    struct Frame {
        int v;
        std::size_t child;
    };
    std::vector<Frame> call;
    for (int root = 0; root < n; ++root) {
        if (index[static_cast<std::size_t>(root)] != -1) continue;
        call.push_back({root, 0});
        index[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = next_index++;
        stack.push_back(root);
        on_stack[static_cast<std::size_t>(root)] = 1;
        while (!call.empty()) {
            Frame& f = call.back();
            const auto& adj = out[static_cast<std::size_t>(f.v)];
            if (f.child < adj.size()) {
                int w = adj[f.child++];
                if (index[static_cast<std::size_t>(w)] == -1) {
                    index[static_cast<std::size_t>(w)] = low[static_cast<std::size_t>(w)] = next_index++;
                    stack.push_back(w);
                    on_stack[static_cast<std::size_t>(w)] = 1;
                    call.push_back({w, 0});
                } else if (on_stack[static_cast<std::size_t>(w)]) {
                    low[static_cast<std::size_t>(f.v)] =
                        std::min(low[static_cast<std::size_t>(f.v)], index[static_cast<std::size_t>(w)]);
                }
            } else {
                if (low[static_cast<std::size_t>(f.v)] == index[static_cast<std::size_t>(f.v)]) {
                    while (true) {
                        int w = stack.back();
                        stack.pop_back();
                        on_stack[static_cast<std::size_t>(w)] = 0;
                        comp[static_cast<std::size_t>(w)] = scc_count;
                        if (w == f.v) break;
                    }
                    ++scc_count;
                }
                int v = f.v;
                call.pop_back();
                if (!call.empty())
                    low[static_cast<std::size_t>(call.back().v)] =
                        std::min(low[static_cast<std::size_t>(call.back().v)], low[static_cast<std::size_t>(v)]);
            }
        }
    }
    return comp;
}

} // namespace

bool has_source_component(const Subgraph& g, int min_size) {
    if (g.size() == 0) return false;
    int scc_count = 0;
    std::vector<int> comp = tarjan_scc(g, scc_count);
    std::vector<char> has_incoming(static_cast<std::size_t>(scc_count), 0);
    std::vector<int> size(static_cast<std::size_t>(scc_count), 0);
    for (std::size_t v = 0; v < g.size(); ++v) {
        ++size[static_cast<std::size_t>(comp[v])];
        for (int u : g.in[v])
            if (comp[static_cast<std::size_t>(u)] != comp[v])
                has_incoming[static_cast<std::size_t>(comp[v])] = 1;
    }
    int sources = 0, source_size = 0;
    for (int c = 0; c < scc_count; ++c)
        if (!has_incoming[static_cast<std::size_t>(c)]) {
            ++sources;
            source_size = size[static_cast<std::size_t>(c)];
        }
    return sources == 1 && source_size >= min_size;
}

namespace {

// Enumerates subsets of {1..M} of size 0..b in (size, lexicographic) order.
void for_each_placement(int node_count, int b, const std::function<bool(const std::vector<int>&)>& fn) {
    std::vector<int> ids;
    if (!fn(ids)) return;
    for (int size = 1; size <= std::min(b, node_count); ++size) {
        ids.assign(static_cast<std::size_t>(size), 0);
        for (int i = 0; i < size; ++i) ids[static_cast<std::size_t>(i)] = i + 1;
        while (true) {
            if (!fn(ids)) return;
            int i = size - 1;
            while (i >= 0 && ids[static_cast<std::size_t>(i)] == node_count - size + i + 1) --i;
            if (i < 0) break;
            ++ids[static_cast<std::size_t>(i)];
            for (int k = i + 1; k < size; ++k)
                ids[static_cast<std::size_t>(k)] = ids[static_cast<std::size_t>(k - 1)] + 1;
        }
    }
}

std::vector<std::pair<int, int>> removed_edges_of(const Subgraph& base, const Subgraph& reduced) {
    std::vector<std::pair<int, int>> removed;
    for (std::size_t p = 0; p < base.size(); ++p) {
        std::size_t q = 0;
        for (int j : base.in[p]) {
            if (q < reduced.in[p].size() && reduced.in[p][q] == j) {
                ++q;
            } else {
                removed.emplace_back(base.nodes[static_cast<std::size_t>(j)], base.nodes[p]);
            }
        }
    }
    return removed;
}

} // namespace

CertifyResult certify_assumption3(const DirectedGraph& g, int b, CertifyMode mode,
                                  long long trials, Rng& rng, double budget) {
    if (b < 0) throw ConfigError("b must be non-negative");
    if (b >= g.node_count()) throw ConfigError("b must be smaller than the node count");
    CertifyResult res;

    if (mode == CertifyMode::Exact) {
        // Pre-compute the total enumeration size across all placements.
        double total = 0;
        for_each_placement(g.node_count(), b, [&](const std::vector<int>& ids) {
            ByzantineAssignment a{ids, b};
            total += count_reduced_graphs(g, a);
            return true;
        });
        if (total > budget)
            throw EnumerationBudgetError(
                "too large to enumerate: " + count_str(total) +
                " reduced graphs across placements exceed budget " + count_str(budget) +
                "; use the sampling certifier");

        bool refuted = false;
        for_each_placement(g.node_count(), b, [&](const std::vector<int>& ids) {
            ++res.placements_checked;
            ByzantineAssignment a{ids, b};
            Subgraph base = honest_subgraph(g, ids);
            bool completed = for_each_reduced_graph(g, a, budget, [&](const Subgraph& sub) {
                ++res.graphs_checked;
                if (!has_source_component(sub, b + 1)) {
                    res.witness.byzantine = ids;
                    res.witness.removed_edges = removed_edges_of(base, sub);
                    return false;
                }
                return true;
            });
            if (!completed) {
                refuted = true;
                return false;
            }
            return true;
        });
        res.status = refuted ? CertifyResult::Status::Refuted : CertifyResult::Status::Certified;
        return res;
    }

    if (trials < 1) throw ConfigError("sampled certification needs trials >= 1");
    std::vector<int> all_ids(static_cast<std::size_t>(g.node_count()));
    for (int i = 0; i < g.node_count(); ++i) all_ids[static_cast<std::size_t>(i)] = i + 1;

    for (long long trial = 0; trial < trials; ++trial) {
        int size = static_cast<int>(rng.below(static_cast<std::uint64_t>(b) + 1));
        std::vector<int> pool = all_ids;
        rng.shuffle(pool);
        std::vector<int> ids(pool.begin(), pool.begin() + size);
        std::sort(ids.begin(), ids.end());

        Subgraph base = honest_subgraph(g, ids);
        Subgraph sub = base;
        std::vector<std::pair<int, int>> removed;
        for (std::size_t p = 0; p < sub.size(); ++p) {
            int d = static_cast<int>(base.in[p].size());
            int drop = static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(b, d)) + 1));
            std::vector<int> idx(static_cast<std::size_t>(d));
            for (int i = 0; i < d; ++i) idx[static_cast<std::size_t>(i)] = i;
            rng.shuffle(idx);
            idx.resize(static_cast<std::size_t>(drop));
            std::sort(idx.begin(), idx.end());
            auto& lst = sub.in[p];
            lst.clear();
            std::size_t di = 0;
            for (std::size_t q = 0; q < base.in[p].size(); ++q) {
                if (di < idx.size() && static_cast<std::size_t>(idx[di]) == q) {
                    removed.emplace_back(base.nodes[static_cast<std::size_t>(base.in[p][q])], base.nodes[p]);
                    ++di;
                    continue;
                }
                lst.push_back(base.in[p][q]);
            }
        }
        ++res.placements_checked;
        ++res.graphs_checked;
        if (!has_source_component(sub, b + 1)) {
            res.status = CertifyResult::Status::Refuted;
            res.witness.byzantine = ids;
            res.witness.removed_edges = removed;
            return res;
        }
    }
    // Never certified: a sampled search without counterexample is not a proof.
    res.status = CertifyResult::Status::Inconclusive;
    return res;
}

} // namespace byrdie

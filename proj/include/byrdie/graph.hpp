#ifndef BYRDIE_GRAPH_HPP
#define BYRDIE_GRAPH_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "byrdie/rng.hpp"

namespace byrdie {

// Static directed communication graph. Nodes are labeled 1..M; an edge (j, i)
// means node i receives from node j. No self-loops.
class DirectedGraph {
public:
    explicit DirectedGraph(int node_count);

    int node_count() const { return node_count_; }
    void add_edge(int from, int to);
    bool has_edge(int from, int to) const;
    // In-neighborhood N_i = { j : (j,i) in E }, sorted ascending.
    const std::vector<int>& in_neighbors(int node) const;
    int in_degree(int node) const { return static_cast<int>(in_neighbors(node).size()); }
    long long edge_count() const;
    std::vector<std::pair<int, int>> edges() const;

private:
    int node_count_;
    std::vector<std::vector<int>> in_; // index 0 unused; lists sorted
};

DirectedGraph complete_graph(int node_count);

// Each ordered pair (j,i), j != i, is an edge independently with probability p.
// With symmetric=true one coin decides both directions of a pair.
DirectedGraph generate_erdos_renyi(int node_count, double p, Rng& rng, bool symmetric = false);

// Edge-list text format: first line M, then one "j i" pair per line (1-based).
DirectedGraph read_edge_list(std::istream& in);
DirectedGraph load_edge_list(const std::string& path);
void write_edge_list(const DirectedGraph& g, std::ostream& out);
void save_edge_list(const DirectedGraph& g, const std::string& path);

struct DegreeReport {
    bool ok = true;
    int required = 0;                            // 2b+1
    std::vector<std::pair<int, int>> violations; // (node, in_degree)
};

// ok iff every node satisfies |N_j| >= 2b+1.
DegreeReport validate_degrees(const DirectedGraph& g, int b);

// Byzantine placement plus the bound b. For reduced-graph enumeration b_bound
// acts as the per-node edge-removal budget and may be smaller than the
// placement (a fixed placement with b=0 enumerates the bare honest subgraph).
struct ByzantineAssignment {
    std::vector<int> byzantine; // sorted node ids
    int b_bound = 0;

    // Checks ids are sorted, in range, and leave the honest set non-empty.
    void validate(int node_count) const;
};

// Subgraph over a node subset, nodes keep their original labels. Adjacency is
// stored positionally over `nodes` (sorted ascending).
struct Subgraph {
    std::vector<int> nodes;            // original ids, sorted
    std::vector<std::vector<int>> in;  // in[p] = positions of in-neighbors of nodes[p]

    std::size_t size() const { return nodes.size(); }
};

// Subgraph induced on J \ byzantine.
Subgraph honest_subgraph(const DirectedGraph& g, const std::vector<int>& byzantine);

// Number of reduced graphs for this (graph, assignment): the product over
// honest nodes of the number of <= b-subsets of their honest in-neighborhood.
// Returned as double; may be +inf for very large graphs.
double count_reduced_graphs(const DirectedGraph& g, const ByzantineAssignment& byz);

// Visits every reduced graph per Definition 2: delete all Byzantine nodes and
// their incident edges, then any <= b incoming edges per remaining node.
// Exhaustive and duplicate-free. The visitor returns false to stop early;
// the function returns false iff the visitor stopped the walk.
// Throws EnumerationBudgetError when count_reduced_graphs exceeds budget.
bool for_each_reduced_graph(const DirectedGraph& g, const ByzantineAssignment& byz,
                            double budget,
                            const std::function<bool(const Subgraph&)>& visit);

// True iff a set of >= min_size nodes exists whose members each reach every
// node of the subgraph. Equivalent: the SCC condensation has a unique source
// component and it has >= min_size nodes.
bool has_source_component(const Subgraph& g, int min_size);

enum class CertifyMode { Exact, Sampled };

struct CertifyWitness {
    std::vector<int> byzantine;                      // failing placement
    std::vector<std::pair<int, int>> removed_edges;  // additionally removed (j,i)
};

struct CertifyResult {
    enum class Status { Certified, Refuted, Inconclusive };
    Status status = Status::Inconclusive;
    CertifyWitness witness;       // populated when refuted
    double graphs_checked = 0;    // reduced graphs examined
    long long placements_checked = 0;
};

// Checks Assumption 3: every reduced graph over every Byzantine placement of
// size <= b has a source component of cardinality >= b+1. Exact mode is
// exhaustive (certified/refuted); sampled mode only ever refutes or stays
// inconclusive, since absence of a sampled counterexample proves nothing.
CertifyResult certify_assumption3(const DirectedGraph& g, int b, CertifyMode mode,
                                  long long trials, Rng& rng, double budget = 1e6);

constexpr double kDefaultEnumerationBudget = 1e6;

} // namespace byrdie

#endif

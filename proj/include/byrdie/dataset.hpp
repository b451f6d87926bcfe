#ifndef BYRDIE_DATASET_HPP
#define BYRDIE_DATASET_HPP

#include <string>
#include <vector>

#include "byrdie/rng.hpp"

namespace byrdie {

struct Sample {
    std::vector<double> x;
    double y = 0.0; // -1/+1 binary, class index 0..K-1 multiclass
};

struct Dataset {
    std::vector<Sample> samples;
    double norm_bound = 0.0; // B: max ||x|| over the dataset
    int class_count = 0;     // 0 when labels are not class-valued
    int dim = 0;

    std::size_t size() const { return samples.size(); }
};

// Class index of a label under the two conventions above.
int class_of(double y, int class_count);

// Recomputes norm_bound from the samples.
void update_norm_bound(Dataset& ds);

// Two-class Gaussian-noise dataset around a fixed unit direction u with
// alternating-sign components: y in {-1,+1} balanced up to rounding,
// x = y*margin*u + noise*g, all features then rescaled so max ||x|| = 1.
Dataset synth_two_class(int dim, double margin, double noise, int count, Rng& rng);

// Numeric CSV, one sample per row; label taken from column label_col (0-based),
// remaining columns are features. A non-numeric first line is treated as a
// header. normalize applies per-feature min-max scaling to [0,1]. Distinct
// label values are mapped to contiguous indices 0..K-1 in ascending order.
Dataset load_csv(const std::string& path, int label_col, bool normalize);

// Maps a two-class dataset with labels {0,1} to the -1/+1 convention used by
// the binary losses.
void relabel_binary_pm1(Dataset& ds);

// Appends a constant-1 feature to every sample (bias term) and updates B.
void augment_bias(Dataset& ds);

// Writes header y,x1,...,xP and full-precision rows.
void save_csv(const Dataset& ds, const std::string& path);

// Flat key=value sidecar: dim, count, norm_bound, classes, per-class counts.
void save_metadata(const Dataset& ds, const std::string& path);

struct Shard {
    int owner = 0;
    std::vector<int> sample_ids; // indices into the source dataset
    std::vector<Sample> samples;
};

struct Partition {
    std::vector<Shard> shards;   // one per honest node, in honest_nodes order
    std::vector<int> test_ids;
    std::vector<Sample> test;
};

// Disjoint shards of exactly per_node samples for each honest node; leftovers
// become the test pool. With class_balanced each shard receives
// floor(N/K)..ceil(N/K) samples per class.
Partition partition(const Dataset& ds, const std::vector<int>& honest_nodes, int per_node,
                    bool class_balanced, Rng& rng);

// First per_class samples of each class, preserving order. per_class <= 0
// keeps everything.
std::vector<Sample> take_per_class(const std::vector<Sample>& samples, int class_count,
                                   int per_class);

} // namespace byrdie

#endif

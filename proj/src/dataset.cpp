#include "byrdie/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "byrdie/errors.hpp"
#include "byrdie/textio.hpp"

namespace byrdie {

int class_of(double y, int class_count) {
    if (class_count < 1) throw ConfigError("dataset has no class labels");
    if (class_count == 2 && y < 0) return 0;
    if (class_count == 2 && y > 0 && y <= 1.5) return 1;
    int c = static_cast<int>(std::llround(y));
    if (c < 0 || c >= class_count) throw ConfigError("label out of class range");
    return c;
}

void update_norm_bound(Dataset& ds) {
    double best = 0;
    for (const auto& s : ds.samples) {
        double sq = 0;
        for (double v : s.x) sq += v * v;
        best = std::max(best, sq);
    }
    ds.norm_bound = std::sqrt(best);
}

Dataset synth_two_class(int dim, double margin, double noise, int count, Rng& rng) {
    if (dim < 1) throw ConfigError("synth_two_class needs dim >= 1");
    if (count < 2) throw ConfigError("synth_two_class needs count >= 2");
    if (!(margin > 0)) throw ConfigError("synth_two_class needs margin > 0");
    if (noise < 0) throw ConfigError("synth_two_class needs noise >= 0");

    // Fixed unit direction with alternating signs so that no single coordinate
    // (and no all-ones vector) carries the label by itself.
    std::vector<double> u(static_cast<std::size_t>(dim));
    const double inv = 1.0 / std::sqrt(static_cast<double>(dim));
    for (int k = 0; k < dim; ++k) u[static_cast<std::size_t>(k)] = (k % 2 == 0 ? inv : -inv);

    Dataset ds;
    ds.dim = dim;
    ds.class_count = 2;
    ds.samples.resize(static_cast<std::size_t>(count));
    for (int n = 0; n < count; ++n) {
        auto& s = ds.samples[static_cast<std::size_t>(n)];
        s.y = (n % 2 == 0) ? 1.0 : -1.0; // balanced up to rounding
        s.x.resize(static_cast<std::size_t>(dim));
        for (int k = 0; k < dim; ++k)
            s.x[static_cast<std::size_t>(k)] =
                s.y * margin * u[static_cast<std::size_t>(k)] + noise * rng.normal();
    }
    rng.shuffle(ds.samples);

    double max_norm = 0;
    for (const auto& s : ds.samples) {
        double sq = 0;
        for (double v : s.x) sq += v * v;
        max_norm = std::max(max_norm, std::sqrt(sq));
    }
    if (max_norm > 0)
        for (auto& s : ds.samples)
            for (double& v : s.x) v /= max_norm;
    ds.norm_bound = 1.0;
    return ds;
}

Dataset load_csv(const std::string& path, int label_col, bool normalize) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open CSV file: " + path);

    Dataset ds;
    std::vector<double> raw_labels;
    std::string line;
    long line_no = 0;
    int cols = -1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> fields = split(line, ',');
        bool numeric = true;
        std::vector<double> values;
        values.reserve(fields.size());
        for (const auto& fstr : fields) {
            double v;
            if (!parse_double(trim(fstr), v)) {
                numeric = false;
                break;
            }
            values.push_back(v);
        }
        if (!numeric) {
            if (ds.samples.empty() && raw_labels.empty() && line_no == 1) continue; // header
            throw ParseError("non-numeric field in CSV row", line_no);
        }
        if (cols < 0) {
            cols = static_cast<int>(values.size());
            if (label_col < 0 || label_col >= cols)
                throw ConfigError("label column out of range for CSV with " +
                                  std::to_string(cols) + " columns");
        } else if (static_cast<int>(values.size()) != cols) {
            throw ParseError("malformed row: expected " + std::to_string(cols) + " fields, got " +
                                 std::to_string(values.size()),
                             line_no);
        }
        Sample s;
        s.x.reserve(static_cast<std::size_t>(cols - 1));
        for (int c = 0; c < cols; ++c) {
            if (c == label_col)
                raw_labels.push_back(values[static_cast<std::size_t>(c)]);
            else
                s.x.push_back(values[static_cast<std::size_t>(c)]);
        }
        ds.samples.push_back(std::move(s));
    }
    if (ds.samples.empty()) throw ParseError("CSV contains no data rows", std::max(line_no, 1L));
    ds.dim = static_cast<int>(ds.samples.front().x.size());

    if (normalize) {
        std::vector<double> lo(static_cast<std::size_t>(ds.dim), std::numeric_limits<double>::infinity());
        std::vector<double> hi(static_cast<std::size_t>(ds.dim), -std::numeric_limits<double>::infinity());
        for (const auto& s : ds.samples)
            for (int k = 0; k < ds.dim; ++k) {
                lo[static_cast<std::size_t>(k)] = std::min(lo[static_cast<std::size_t>(k)], s.x[static_cast<std::size_t>(k)]);
                hi[static_cast<std::size_t>(k)] = std::max(hi[static_cast<std::size_t>(k)], s.x[static_cast<std::size_t>(k)]);
            }
        for (auto& s : ds.samples)
            for (int k = 0; k < ds.dim; ++k) {
                double span = hi[static_cast<std::size_t>(k)] - lo[static_cast<std::size_t>(k)];
                s.x[static_cast<std::size_t>(k)] =
                    span > 0 ? (s.x[static_cast<std::size_t>(k)] - lo[static_cast<std::size_t>(k)]) / span : 0.0;
            }
    }

    // Map distinct label values to contiguous indices in ascending order.
    std::map<double, int> label_map;
    for (double y : raw_labels) label_map[y] = 0;
    int next = 0;
    for (auto& [value, index] : label_map) index = next++;
    ds.class_count = next;
    for (std::size_t i = 0; i < ds.samples.size(); ++i)
        ds.samples[i].y = label_map[raw_labels[i]];

    update_norm_bound(ds);
    return ds;
}

void relabel_binary_pm1(Dataset& ds) {
    if (ds.class_count != 2) throw ConfigError("relabel_binary_pm1 needs a two-class dataset");
    for (auto& s : ds.samples) s.y = (s.y > 0.5) ? 1.0 : -1.0;
}

void augment_bias(Dataset& ds) {
    for (auto& s : ds.samples) s.x.push_back(1.0);
    ds.dim += 1;
    update_norm_bound(ds);
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write CSV file: " + path);
    f << "y";
    for (int k = 1; k <= ds.dim; ++k) f << ",x" << k;
    f << "\n";
    for (const auto& s : ds.samples) {
        f << format_double(s.y);
        for (double v : s.x) f << "," << format_double(v);
        f << "\n";
    }
}

void save_metadata(const Dataset& ds, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write metadata file: " + path);
    f << "dim=" << ds.dim << "\n";
    f << "count=" << ds.samples.size() << "\n";
    f << "norm_bound=" << format_double(ds.norm_bound) << "\n";
    f << "classes=" << ds.class_count << "\n";
    if (ds.class_count > 0) {
        std::vector<long> counts(static_cast<std::size_t>(ds.class_count), 0);
        for (const auto& s : ds.samples) ++counts[static_cast<std::size_t>(class_of(s.y, ds.class_count))];
        for (int c = 0; c < ds.class_count; ++c)
            f << "count_class_" << c << "=" << counts[static_cast<std::size_t>(c)] << "\n";
    }
}

Partition partition(const Dataset& ds, const std::vector<int>& honest_nodes, int per_node,
                    bool class_balanced, Rng& rng) {
    if (per_node < 1) throw ConfigError("per-node sample count must be positive");
    const std::size_t need = honest_nodes.size() * static_cast<std::size_t>(per_node);
    if (need > ds.size())
        throw ConfigError("insufficient samples: need " + std::to_string(need) + ", have " +
                          std::to_string(ds.size()));

    Partition part;
    part.shards.resize(honest_nodes.size());
    std::vector<char> used(ds.size(), 0);

    if (class_balanced) {
        if (ds.class_count < 1) throw ConfigError("class-balanced partition needs class labels");
        const int K = ds.class_count;
        std::vector<std::vector<int>> by_class(static_cast<std::size_t>(K));
        for (std::size_t i = 0; i < ds.size(); ++i)
            by_class[static_cast<std::size_t>(class_of(ds.samples[i].y, K))].push_back(static_cast<int>(i));
        for (auto& g : by_class) rng.shuffle(g);

        std::vector<std::size_t> cursor(static_cast<std::size_t>(K), 0);
        const int base = per_node / K;
        const int extra = per_node % K;
        for (std::size_t s = 0; s < honest_nodes.size(); ++s) {
            Shard& shard = part.shards[s];
            shard.owner = honest_nodes[s];
            std::vector<int> want(static_cast<std::size_t>(K), base);
            for (int e = 0; e < extra; ++e)
                ++want[static_cast<std::size_t>((static_cast<int>(s) * extra + e) % K)];
            for (int c = 0; c < K; ++c) {
                auto& pool = by_class[static_cast<std::size_t>(c)];
                auto& cur = cursor[static_cast<std::size_t>(c)];
                if (cur + static_cast<std::size_t>(want[static_cast<std::size_t>(c)]) > pool.size())
                    throw ConfigError("insufficient samples of class " + std::to_string(c) +
                                      " for balanced shards");
                for (int n = 0; n < want[static_cast<std::size_t>(c)]; ++n) {
                    int id = pool[cur++];
                    shard.sample_ids.push_back(id);
                    used[static_cast<std::size_t>(id)] = 1;
                }
            }
        }
    } else {
        std::vector<int> ids(ds.size());
        for (std::size_t i = 0; i < ds.size(); ++i) ids[i] = static_cast<int>(i);
        rng.shuffle(ids);
        std::size_t cur = 0;
        for (std::size_t s = 0; s < honest_nodes.size(); ++s) {
            Shard& shard = part.shards[s];
            shard.owner = honest_nodes[s];
            for (int n = 0; n < per_node; ++n) {
                int id = ids[cur++];
                shard.sample_ids.push_back(id);
                used[static_cast<std::size_t>(id)] = 1;
            }
        }
    }

    for (auto& shard : part.shards) {
        shard.samples.reserve(shard.sample_ids.size());
        for (int id : shard.sample_ids) shard.samples.push_back(ds.samples[static_cast<std::size_t>(id)]);
    }
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (!used[i]) {
            part.test_ids.push_back(static_cast<int>(i));
            part.test.push_back(ds.samples[i]);
        }
    return part;
}

std::vector<Sample> take_per_class(const std::vector<Sample>& samples, int class_count,
                                   int per_class) {
    if (per_class <= 0) return samples;
    std::vector<int> taken(static_cast<std::size_t>(std::max(class_count, 1)), 0);
    std::vector<Sample> out;
    for (const auto& s : samples) {
        int c = class_of(s.y, class_count);
        if (taken[static_cast<std::size_t>(c)] < per_class) {
            ++taken[static_cast<std::size_t>(c)];
            out.push_back(s);
        }
    }
    return out;
}

} // namespace byrdie

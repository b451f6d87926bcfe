#ifndef BYRDIE_METRICS_HPP
#define BYRDIE_METRICS_HPP

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "byrdie/model.hpp"
#include "byrdie/protocol.hpp"

namespace byrdie {

// One diagnostics row. Quiet NaN marks a missing value and serializes as an
// empty CSV field; wall clock time lives in the run manifest, never here, so
// that reruns with the same seeds are byte-identical.
struct MetricsRecord {
    static constexpr double missing = std::numeric_limits<double>::quiet_NaN();

    int trial = 0;
    std::string algo;
    int r = 0, k = 0, t = 0;
    long long t_c = 0;
    double consensus_diameter = missing;
    double mean_pairwise = missing;
    double pooled_train_risk = missing;
    double test_accuracy = missing;
    double excess_risk = missing;
};

extern const char* const kMetricsCsvHeader; // trial,algo,r,k,t,t_c,...

std::string metrics_csv_row(const MetricsRecord& rec);
void write_metrics_csv(const std::string& path, const std::vector<MetricsRecord>& records);

struct ConsensusStats {
    double diameter = 0.0;      // max pairwise l2 distance
    double mean_pairwise = 0.0; // mean over unordered pairs
};

ConsensusStats consensus_stats(const std::vector<std::vector<double>>& states);

// risk(w, pooled) - oracle_risk; slightly negative values are tolerated only
// within 10x the oracle tolerance.
double excess_risk(const std::vector<double>& w, std::span<const Sample> pooled,
                   const LossModel& model, double oracle_risk, double oracle_tol);

double median(std::vector<double> values);
double interquartile_range(std::vector<double> values);

// Per-algorithm medians and IQRs of the final record of every trial.
void write_summary_csv(const std::string& path, const std::vector<MetricsRecord>& records);

// Adapter from engine snapshots to MetricsRecords.
class MetricsCollector {
public:
    MetricsCollector(int trial, std::string algo, const LossModel& model,
                     std::vector<Sample> pooled_train, std::vector<Sample> test,
                     std::optional<double> oracle_risk, double oracle_tol,
                     std::vector<MetricsRecord>* out);

    void operator()(const IterationSnapshot& snap);

private:
    int trial_;
    std::string algo_;
    const LossModel& model_;
    std::vector<Sample> pooled_;
    std::vector<Sample> test_;
    std::optional<double> oracle_risk_;
    double oracle_tol_;
    std::vector<MetricsRecord>* out_;
};

} // namespace byrdie

#endif

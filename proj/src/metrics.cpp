#include "byrdie/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "byrdie/errors.hpp"
#include "byrdie/textio.hpp"

namespace byrdie {

const char* const kMetricsCsvHeader =
    "trial,algo,r,k,t,t_c,consensus_diameter,mean_pairwise,pooled_train_risk,test_accuracy,"
    "excess_risk,wall_ms";

namespace {

std::string field(double v) { return std::isnan(v) ? std::string() : format_double(v); }

} // namespace

std::string metrics_csv_row(const MetricsRecord& rec) {
    std::string row;
    row += std::to_string(rec.trial);
    row += ',';
    row += rec.algo;
    row += ',';
    row += std::to_string(rec.r);
    row += ',';
    row += std::to_string(rec.k);
    row += ',';
    row += std::to_string(rec.t);
    row += ',';
    row += std::to_string(rec.t_c);
    row += ',';
    row += field(rec.consensus_diameter);
    row += ',';
    row += field(rec.mean_pairwise);
    row += ',';
    row += field(rec.pooled_train_risk);
    row += ',';
    row += field(rec.test_accuracy);
    row += ',';
    row += field(rec.excess_risk);
    row += ','; // wall_ms: recorded in the manifest, kept empty here
    return row;
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRecord>& records) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write metrics file: " + path);
    f << kMetricsCsvHeader << "\n";
    for (const auto& rec : records) f << metrics_csv_row(rec) << "\n";
}

ConsensusStats consensus_stats(const std::vector<std::vector<double>>& states) {
    if (states.size() < 2) throw ConfigError("consensus stats need at least 2 honest nodes");
    ConsensusStats out;
    double sum = 0;
    long pairs = 0;
    for (std::size_t i = 0; i < states.size(); ++i)
        for (std::size_t j = i + 1; j < states.size(); ++j) {
            double sq = 0;
            for (std::size_t k = 0; k < states[i].size(); ++k) {
                double d = states[i][k] - states[j][k];
                sq += d * d;
            }
            double dist = std::sqrt(sq);
            out.diameter = std::max(out.diameter, dist);
            sum += dist;
            ++pairs;
        }
    out.mean_pairwise = sum / static_cast<double>(pairs);
    return out;
}

double excess_risk(const std::vector<double>& w, std::span<const Sample> pooled,
                   const LossModel& model, double oracle_risk, double oracle_tol) {
    double ex = risk(model, w, pooled) - oracle_risk;
    if (ex < -10.0 * oracle_tol)
        throw NumericFault("excess risk " + format_double(ex) +
                           " below -10x oracle tolerance; oracle is under-converged");
    return ex;
}

double median(std::vector<double> values) {
    if (values.empty()) return MetricsRecord::missing;
    std::sort(values.begin(), values.end());
    std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

// Linear-interpolated quantile (same convention as numpy's default).
double quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return MetricsRecord::missing;
    double pos = q * static_cast<double>(sorted.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

} // namespace

double interquartile_range(std::vector<double> values) {
    if (values.empty()) return MetricsRecord::missing;
    std::sort(values.begin(), values.end());
    return quantile(values, 0.75) - quantile(values, 0.25);
}

void write_summary_csv(const std::string& path, const std::vector<MetricsRecord>& records) {
    // Final record per (algo, trial), grouped by algo in first-seen order.
    std::vector<std::string> algo_order;
    std::map<std::string, std::map<int, const MetricsRecord*>> finals;
    for (const auto& rec : records) {
        auto& per_trial = finals[rec.algo];
        if (per_trial.empty() && std::find(algo_order.begin(), algo_order.end(), rec.algo) ==
                                     algo_order.end())
            algo_order.push_back(rec.algo);
        auto it = per_trial.find(rec.trial);
        if (it == per_trial.end() || it->second->t_c <= rec.t_c) per_trial[rec.trial] = &rec;
    }

    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write summary file: " + path);
    f << "algo,trials,final_t_c,consensus_diameter_median,consensus_diameter_iqr,"
         "mean_pairwise_median,mean_pairwise_iqr,pooled_train_risk_median,pooled_train_risk_iqr,"
         "test_accuracy_median,test_accuracy_iqr,excess_risk_median,excess_risk_iqr\n";
    for (const auto& algo : algo_order) {
        const auto& per_trial = finals[algo];
        auto collect = [&](double MetricsRecord::*member) {
            std::vector<double> vals;
            for (const auto& [trial, rec] : per_trial)
                if (!std::isnan(rec->*member)) vals.push_back(rec->*member);
            return vals;
        };
        auto med_iqr = [&](double MetricsRecord::*member) {
            std::vector<double> vals = collect(member);
            std::string m = vals.empty() ? std::string() : format_double(median(vals));
            std::string i = vals.empty() ? std::string() : format_double(interquartile_range(vals));
            return "," + m + "," + i;
        };
        long long final_tc = 0;
        for (const auto& [trial, rec] : per_trial) final_tc = std::max(final_tc, rec->t_c);
        f << algo << ',' << per_trial.size() << ',' << final_tc
          << med_iqr(&MetricsRecord::consensus_diameter) << med_iqr(&MetricsRecord::mean_pairwise)
          << med_iqr(&MetricsRecord::pooled_train_risk) << med_iqr(&MetricsRecord::test_accuracy)
          << med_iqr(&MetricsRecord::excess_risk) << "\n";
    }
}

MetricsCollector::MetricsCollector(int trial, std::string algo, const LossModel& model,
                                   std::vector<Sample> pooled_train, std::vector<Sample> test,
                                   std::optional<double> oracle_risk, double oracle_tol,
                                   std::vector<MetricsRecord>* out)
    : trial_(trial),
      algo_(std::move(algo)),
      model_(model),
      pooled_(std::move(pooled_train)),
      test_(std::move(test)),
      oracle_risk_(oracle_risk),
      oracle_tol_(oracle_tol),
      out_(out) {}

void MetricsCollector::operator()(const IterationSnapshot& snap) {
    MetricsRecord rec;
    rec.trial = trial_;
    rec.algo = algo_;
    rec.r = snap.r;
    rec.k = snap.k_pos;
    rec.t = snap.t;
    rec.t_c = snap.t_c;

    const auto& states = *snap.states;
    if (states.size() >= 2) {
        ConsensusStats cs = consensus_stats(states);
        rec.consensus_diameter = cs.diameter;
        rec.mean_pairwise = cs.mean_pairwise;
    }
    if (!pooled_.empty()) {
        double acc = 0;
        for (const auto& w : states) acc += risk(model_, w, pooled_);
        rec.pooled_train_risk = acc / static_cast<double>(states.size());
        if (oracle_risk_) {
            rec.excess_risk = rec.pooled_train_risk - *oracle_risk_;
            if (rec.excess_risk < -10.0 * oracle_tol_)
                throw NumericFault("excess risk below -10x oracle tolerance");
        }
    }
    if (!test_.empty()) {
        double acc = 0;
        for (const auto& w : states) acc += accuracy(model_, w, test_);
        rec.test_accuracy = acc / static_cast<double>(states.size());
    }
    out_->push_back(std::move(rec));
}

} // namespace byrdie

#pragma once

// Comma-separated metric tables plus a plain-text summary. Output depends
// only on the bundle, so equal bundles give byte-identical files.
//
//   completion.csv         task,mechanism,completion_pct,correct_pct,incorrect_pct,unlabeled_pct,hint_rate
//   aggregation_error.csv  task,mechanism,n_workers,mean_error,std_error
//   rescaled_error.csv     task,mechanism,n_workers,mean_error,std_error
//   payments.csv           task,mechanism,group,avg_payment,std_error
//   detection.csv          task,mechanism,rank_correlation
//   gold_sets.csv          repetition,questions
//   transcripts/<mechanism>.csv
//   summary.txt

#include "hintguide/harness/experiment.hpp"
#include "hintguide/harness/sweep.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace hintguide::harness {

class ReportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string completion_table(const MetricsBundle& b);
std::string error_table(const MetricsBundle& b, bool rescaled);
std::string payment_table(const MetricsBundle& b);
std::string detection_table(const MetricsBundle& b);
std::string summary_text(const MetricsBundle& b);
std::string sweep_table(const std::string& task, const std::vector<SweepPoint>& points);

// Returns the written paths. Throws ReportError if the directory cannot be
// created or a file cannot be written.
std::vector<std::filesystem::path> emit_report(const MetricsBundle& b, const std::filesystem::path& dir);
std::filesystem::path emit_sweep(const std::string& task, const std::vector<SweepPoint>& points,
                                 const std::filesystem::path& dir);

}  // namespace hintguide::harness

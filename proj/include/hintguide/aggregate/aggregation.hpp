#pragma once

// Majority voting with tie credit, hint-usage quality ranking and the
// rank-bucket vote reweighting built on it.

#include "hintguide/sim/session.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hintguide::aggregate {

class AggregationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Options whose weighted totals lie this close to the maximum share the tie.
inline constexpr double kTieTolerance = 1e-9;

struct VoteTally {
    std::string question_id;
    std::vector<double> votes;  // weighted count per option
    int truth = -1;             // -1: the truth is none of the listed options
    int tie_count = 1;          // m_i
    bool truth_in_tie = false;

    // 1/m_i when the truth is among the tied maxima, else 0.
    double credit() const { return truth_in_tie ? 1.0 / tie_count : 0.0; }
};

// A question nobody voted on counts as an all-option tie.
VoteTally make_tally(std::string question_id, std::vector<double> votes, int truth);

double majority_error(std::span<const VoteTally> tallies);

// Dense worker x question vote table, the form subsampling works on.
struct VoteMatrix {
    std::vector<std::string> question_ids;
    std::vector<int> option_count;
    std::vector<int> truth;
    std::vector<std::string> options;  // label of each option index
    std::vector<std::string> worker_ids;
    std::vector<std::vector<int>> votes;  // [worker][question], -1 for no vote

    std::size_t worker_count() const { return worker_ids.size(); }
    std::size_t question_count() const { return question_ids.size(); }
};

// Truth taken from the simulated batch.
VoteMatrix build_vote_matrix(std::span<const sim::SessionTranscript> transcripts,
                             std::span<const sim::Question> questions);

// Truth inferred from the correct flags in the transcripts themselves. A
// question with no answer flagged correct has its truth outside the voted
// options. The option alphabet is every label seen in the file, at least two.
VoteMatrix build_vote_matrix(std::span<const sim::SessionTranscript> transcripts);

// Tallies over a subset of workers (row indices); weights are per row and
// default to 1 when empty.
std::vector<VoteTally> tally(const VoteMatrix& matrix, std::span<const std::size_t> workers,
                             std::span<const double> weights = {});

std::vector<VoteTally> tally_all(const VoteMatrix& matrix, std::span<const double> weights = {});

struct QualityRanking {
    std::vector<std::string> order;             // ascending hint usage
    std::map<std::string, double> frequency;
    std::vector<std::string> excluded;          // no answered question
};

// Equal frequencies are ordered by worker id, digit runs numerically.
QualityRanking rank_by_hint_usage(std::span<const sim::SessionTranscript> transcripts);

inline constexpr double kTopWeight = 1.8;
inline constexpr double kBottomWeight = 0.2;

// floor(W / 5) workers (at least one) at each end of the ranking get the top
// and bottom weights; everybody else keeps 1. Needs W >= 5.
std::map<std::string, double> rescale_labels(const QualityRanking& ranking);

// Per-row weights for a matrix; workers missing from the map keep 1.
std::vector<double> weights_for(const VoteMatrix& matrix, const std::map<std::string, double>& weights);

struct SubsampleResult {
    double mean = 0.0;
    double std_error = 0.0;
    int repetitions = 0;
};

// Mean majority error over uniform random worker subsets of size n_workers.
// Repetition r draws from its own stream (seed, r).
SubsampleResult subsample_aggregate(const VoteMatrix& matrix, int n_workers, int repetitions, std::uint64_t seed,
                                    std::span<const double> weights = {});

// Rank correlation with tie-averaged ranks. Zero when either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace hintguide::aggregate

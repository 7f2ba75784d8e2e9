#include "hintguide/aggregate/aggregation.hpp"

#include "hintguide/common/random.hpp"
#include "hintguide/common/text.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

namespace hintguide::aggregate {

VoteTally make_tally(std::string question_id, std::vector<double> votes, int truth)
{
    if (votes.empty()) {
        throw AggregationError("a tally needs at least one option");
    }
    VoteTally t;
    t.question_id = std::move(question_id);
    t.votes = std::move(votes);
    t.truth = truth;
    const double top = *std::max_element(t.votes.begin(), t.votes.end());
    t.tie_count = 0;
    for (std::size_t i = 0; i < t.votes.size(); ++i) {
        if (t.votes[i] >= top - kTieTolerance) {
            ++t.tie_count;
            if (static_cast<int>(i) == truth) {
                t.truth_in_tie = true;
            }
        }
    }
    return t;
}

double majority_error(std::span<const VoteTally> tallies)
{
    if (tallies.empty()) {
        throw AggregationError("majority error over an empty tally set");
    }
    double credit = 0.0;
    for (const auto& t : tallies) {
        credit += t.credit();
    }
    return 1.0 - credit / static_cast<double>(tallies.size());
}

namespace {

struct Layout {
    std::unordered_map<std::string, std::size_t> question_index;
    std::unordered_map<std::string, int> option_index;
};

void fill_votes(VoteMatrix& m, const Layout& layout, std::span<const sim::SessionTranscript> transcripts)
{
    std::set<std::string> seen_workers;
    for (const auto& t : transcripts) {
        if (!seen_workers.insert(t.worker_id).second) {
            throw AggregationError(fmt::format("worker '{}' appears in more than one transcript", t.worker_id));
        }
        std::vector<int> row(m.question_count(), -1);
        for (const auto& a : t.answers) {
            auto q = layout.question_index.find(a.question_id);
            if (q == layout.question_index.end()) {
                throw AggregationError(fmt::format("worker '{}' answered unknown question '{}'", t.worker_id,
                                                   a.question_id));
            }
            if (!a.answered()) {
                continue;
            }
            auto o = layout.option_index.find(a.option);
            if (o == layout.option_index.end() || o->second >= m.option_count[q->second]) {
                throw AggregationError(
                    fmt::format("worker '{}' chose option '{}' not offered by '{}'", t.worker_id, a.option, a.question_id));
            }
            row[q->second] = o->second;
        }
        m.worker_ids.push_back(t.worker_id);
        m.votes.push_back(std::move(row));
    }
}

}  // namespace

VoteMatrix build_vote_matrix(std::span<const sim::SessionTranscript> transcripts,
                             std::span<const sim::Question> questions)
{
    VoteMatrix m;
    Layout layout;
    int widest = 2;
    for (const auto& q : questions) {
        if (!layout.question_index.emplace(q.id, m.question_ids.size()).second) {
            throw AggregationError(fmt::format("duplicate question id '{}'", q.id));
        }
        m.question_ids.push_back(q.id);
        m.option_count.push_back(q.option_count);
        m.truth.push_back(q.truth);
        widest = std::max(widest, q.option_count);
    }
    for (int i = 0; i < widest; ++i) {
        m.options.push_back(sim::option_label(i));
        layout.option_index.emplace(m.options.back(), i);
    }
    fill_votes(m, layout, transcripts);
    return m;
}

VoteMatrix build_vote_matrix(std::span<const sim::SessionTranscript> transcripts)
{
    VoteMatrix m;
    Layout layout;
    std::vector<std::string> labels;
    std::unordered_map<std::string, std::string> truth_label;
    for (const auto& t : transcripts) {
        for (const auto& a : t.answers) {
            if (layout.question_index.emplace(a.question_id, m.question_ids.size()).second) {
                m.question_ids.push_back(a.question_id);
            }
            if (!a.answered()) {
                continue;
            }
            if (std::find(labels.begin(), labels.end(), a.option) == labels.end()) {
                labels.push_back(a.option);
            }
            if (a.correct.value_or(false)) {
                auto [it, inserted] = truth_label.emplace(a.question_id, a.option);
                if (!inserted && it->second != a.option) {
                    throw AggregationError(fmt::format("question '{}' has options '{}' and '{}' both marked correct",
                                                       a.question_id, it->second, a.option));
                }
            }
        }
    }
    // A lone label still implies a binary choice; pad with an unused one.
    for (int i = 0; labels.size() < 2; ++i) {
        auto pad = sim::option_label(i);
        if (std::find(labels.begin(), labels.end(), pad) == labels.end()) {
            labels.push_back(pad);
        }
    }
    std::sort(labels.begin(), labels.end(), [](const std::string& a, const std::string& b) {
        return text::natural_less(a, b);
    });
    for (std::size_t i = 0; i < labels.size(); ++i) {
        layout.option_index.emplace(labels[i], static_cast<int>(i));
    }
    m.options = labels;
    for (const auto& id : m.question_ids) {
        m.option_count.push_back(static_cast<int>(labels.size()));
        auto it = truth_label.find(id);
        m.truth.push_back(it == truth_label.end() ? -1 : layout.option_index.at(it->second));
    }
    fill_votes(m, layout, transcripts);
    return m;
}

std::vector<VoteTally> tally(const VoteMatrix& matrix, std::span<const std::size_t> workers,
                             std::span<const double> weights)
{
    if (!weights.empty() && weights.size() != matrix.worker_count()) {
        throw AggregationError("weight count does not match worker count");
    }
    std::vector<VoteTally> out;
    out.reserve(matrix.question_count());
    for (std::size_t q = 0; q < matrix.question_count(); ++q) {
        std::vector<double> votes(static_cast<std::size_t>(matrix.option_count[q]), 0.0);
        for (std::size_t w : workers) {
            const int v = matrix.votes.at(w)[q];
            if (v >= 0) {
                votes[static_cast<std::size_t>(v)] += weights.empty() ? 1.0 : weights[w];
            }
        }
        out.push_back(make_tally(matrix.question_ids[q], std::move(votes), matrix.truth[q]));
    }
    return out;
}

std::vector<VoteTally> tally_all(const VoteMatrix& matrix, std::span<const double> weights)
{
    std::vector<std::size_t> all(matrix.worker_count());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return tally(matrix, all, weights);
}

QualityRanking rank_by_hint_usage(std::span<const sim::SessionTranscript> transcripts)
{
    QualityRanking r;
    for (const auto& t : transcripts) {
        const std::size_t answered = t.answered_count();
        if (answered == 0) {
            r.excluded.push_back(t.worker_id);
            continue;
        }
        if (!r.frequency.emplace(t.worker_id, static_cast<double>(t.hint_count()) / static_cast<double>(answered))
                 .second) {
            throw AggregationError(fmt::format("worker '{}' appears in more than one transcript", t.worker_id));
        }
        r.order.push_back(t.worker_id);
    }
    std::sort(r.order.begin(), r.order.end(), [&](const std::string& a, const std::string& b) {
        const double fa = r.frequency.at(a);
        const double fb = r.frequency.at(b);
        if (fa != fb) {
            return fa < fb;
        }
        return text::natural_less(a, b);
    });
    return r;
}

std::map<std::string, double> rescale_labels(const QualityRanking& ranking)
{
    const std::size_t w = ranking.order.size();
    if (w < 5) {
        throw AggregationError(fmt::format("rescaling needs at least 5 ranked workers, got {}", w));
    }
    const std::size_t bucket = std::max<std::size_t>(1, w / 5);
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < w; ++i) {
        double weight = 1.0;
        if (i < bucket) {
            weight = kTopWeight;
        } else if (i >= w - bucket) {
            weight = kBottomWeight;
        }
        out.emplace(ranking.order[i], weight);
    }
    return out;
}

std::vector<double> weights_for(const VoteMatrix& matrix, const std::map<std::string, double>& weights)
{
    std::vector<double> out;
    out.reserve(matrix.worker_count());
    for (const auto& id : matrix.worker_ids) {
        auto it = weights.find(id);
        out.push_back(it == weights.end() ? 1.0 : it->second);
    }
    return out;
}

SubsampleResult subsample_aggregate(const VoteMatrix& matrix, int n_workers, int repetitions, std::uint64_t seed,
                                    std::span<const double> weights)
{
    if (repetitions < 1) {
        throw AggregationError("subsampling needs at least one repetition");
    }
    if (n_workers < 1 || static_cast<std::size_t>(n_workers) > matrix.worker_count()) {
        throw AggregationError(
            fmt::format("cannot draw {} workers from a pool of {}", n_workers, matrix.worker_count()));
    }
    std::vector<double> errors;
    errors.reserve(static_cast<std::size_t>(repetitions));
    for (int r = 0; r < repetitions; ++r) {
        auto rng = make_rng(seed, {static_cast<std::uint64_t>(r)});
        auto subset = sample_without_replacement(rng, matrix.worker_count(), static_cast<std::size_t>(n_workers));
        auto tallies = tally(matrix, subset, weights);
        errors.push_back(majority_error(tallies));
    }
    SubsampleResult out;
    out.repetitions = repetitions;
    out.mean = std::accumulate(errors.begin(), errors.end(), 0.0) / repetitions;
    const auto [lo, hi] = std::minmax_element(errors.begin(), errors.end());
    if (repetitions > 1 && *lo != *hi) {
        double ss = 0.0;
        for (double e : errors) {
            ss += (e - out.mean) * (e - out.mean);
        }
        out.std_error = std::sqrt(ss / (repetitions - 1) / repetitions);
    }
    return out;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v)
{
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) {
            ++j;
        }
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[idx[k]] = rank;
        }
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) {
        throw AggregationError("rank correlation over sequences of different length");
    }
    if (x.size() < 2) {
        return 0.0;
    }
    auto rx = average_ranks(x);
    auto ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) {
        return 0.0;
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace hintguide::aggregate

#include "hintguide/harness/experiment.hpp"

#include "hintguide/aggregate/aggregation.hpp"
#include "hintguide/common/random.hpp"
#include "hintguide/sim/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace hintguide::harness {

namespace {

// Stream roots below the master seed.
constexpr std::uint64_t kBatchStream = 1;
constexpr std::uint64_t kIdStream = 2;
constexpr std::uint64_t kSessionStream = 3;
constexpr std::uint64_t kSubsetStream = 4;
constexpr std::uint64_t kGoldStream = 5;

struct Accumulator {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t count = 0;

    void add(double v)
    {
        sum += v;
        sum_sq += v * v;
        ++count;
    }

    PaymentSummary summary() const
    {
        PaymentSummary s;
        if (count == 0) {
            return s;
        }
        const double n = static_cast<double>(count);
        s.mean = sum / n;
        if (count > 1) {
            const double var = std::max(0.0, (sum_sq - n * s.mean * s.mean) / (n - 1.0));
            s.std_error = std::sqrt(var / n);
        }
        return s;
    }
};

std::vector<CurvePoint> error_curve(const aggregate::VoteMatrix& matrix, const ExperimentConfig& config,
                                    std::span<const double> weights)
{
    std::vector<CurvePoint> out;
    for (int n : config.n_workers) {
        auto r = aggregate::subsample_aggregate(matrix, n, config.repetitions,
                                                derive_seed(config.seed, {kSubsetStream, static_cast<std::uint64_t>(n)}),
                                                weights);
        out.push_back(CurvePoint{n, r.mean, r.std_error});
    }
    return out;
}

}  // namespace

const MechanismMetrics* MetricsBundle::find(Mechanism m) const
{
    for (const auto& mm : mechanisms) {
        if (mm.mechanism == m) {
            return &mm;
        }
    }
    return nullptr;
}

MetricsBundle run_experiment(const ExperimentConfig& config, mechanism::Strictness strictness)
{
    validate(config, strictness);
    MetricsBundle b;
    b.task = config.task;
    b.params = config.params;
    b.seed = config.seed;
    b.questions = sim::make_batch(config.questions, config.options, config.subjective,
                                  derive_seed(config.seed, {kBatchStream}));

    // Worker ids are a shuffle of w1..wW so that id order (the ranking
    // tie-break) carries no information about archetypes.
    const int w_count = config.worker_count();
    std::vector<int> ids(static_cast<std::size_t>(w_count));
    std::iota(ids.begin(), ids.end(), 1);
    auto id_rng = make_rng(config.seed, {kIdStream});
    std::shuffle(ids.begin(), ids.end(), id_rng);

    std::vector<const sim::WorkerArchetype*> archetypes;
    for (const auto& entry : config.population) {
        for (int i = 0; i < entry.count; ++i) {
            WorkerInfo info;
            info.id = fmt::format("w{}", ids[archetypes.size()]);
            info.label = entry.label;
            info.planted_quality = entry.archetype.planted_quality(config.options);
            b.workers.push_back(std::move(info));
            archetypes.push_back(&entry.archetype);
        }
    }

    for (int r = 0; r < config.payment_repetitions; ++r) {
        auto rng = make_rng(config.seed, {kGoldStream, static_cast<std::uint64_t>(r)});
        b.gold_sets.push_back(sample_without_replacement(rng, static_cast<std::size_t>(config.questions),
                                                         static_cast<std::size_t>(config.params.gold_count)));
    }

    for (Mechanism mech : config.mechanisms) {
        MechanismMetrics m;
        m.mechanism = mech;
        const auto setting = stage_setting(mech);
        for (std::size_t w = 0; w < archetypes.size(); ++w) {
            m.transcripts.push_back(sim::simulate_session(
                *archetypes[w], b.questions, config.params,
                derive_seed(config.seed, {kSessionStream, static_cast<std::uint64_t>(w)}), setting, b.workers[w].id));
        }
        if (!b.gold_sets.empty()) {
            for (auto& t : m.transcripts) {
                for (std::size_t i : b.gold_sets.front()) {
                    t.answers[i].gold = true;
                }
            }
        }

        std::size_t answered = 0;
        std::size_t correct = 0;
        std::size_t hints = 0;
        for (const auto& t : m.transcripts) {
            answered += t.answered_count();
            correct += t.correct_count();
            hints += t.hint_count();
        }
        const double slots = static_cast<double>(m.transcripts.size()) * static_cast<double>(config.questions);
        m.completion_pct = 100.0 * static_cast<double>(answered) / slots;
        m.correct_pct = 100.0 * static_cast<double>(correct) / slots;
        m.incorrect_pct = 100.0 * static_cast<double>(answered - correct) / slots;
        m.unlabeled_pct = 100.0 - m.completion_pct;
        m.hint_rate = answered == 0 ? 0.0 : static_cast<double>(hints) / static_cast<double>(answered);

        auto matrix = aggregate::build_vote_matrix(m.transcripts, b.questions);
        m.error_curve = error_curve(matrix, config, {});

        auto ranking = aggregate::rank_by_hint_usage(m.transcripts);
        if (ranking.order.size() >= 5) {
            auto weights = aggregate::weights_for(matrix, aggregate::rescale_labels(ranking));
            m.rescaled_curve = error_curve(matrix, config, weights);
        }
        std::vector<double> planted;
        std::vector<double> quality_estimate;
        for (std::size_t w = 0; w < b.workers.size(); ++w) {
            auto f = ranking.frequency.find(b.workers[w].id);
            if (f != ranking.frequency.end()) {
                planted.push_back(b.workers[w].planted_quality);
                quality_estimate.push_back(-f->second);
            }
        }
        m.rank_correlation = aggregate::spearman(planted, quality_estimate);

        Accumulator all;
        std::map<std::string, Accumulator> by_label;
        const auto rule = payment_rule(mech);
        for (std::size_t w = 0; w < m.transcripts.size(); ++w) {
            for (const auto& gold : b.gold_sets) {
                const double pay = sim::payment_for_gold(m.transcripts[w], gold, config.params, rule);
                all.add(pay);
                by_label[b.workers[w].label].add(pay);
                if (pay < config.params.mu_min - 1e-12 || pay > config.params.mu_max + 1e-12) {
                    b.invariant_failures.push_back(
                        fmt::format("{}: payment {} outside [mu_min, mu_max]", to_string(mech), pay));
                }
            }
        }
        m.payment = all.summary();
        for (const auto& [label, acc] : by_label) {
            m.payment_by_label.emplace(label, acc.summary());
        }

        const double total = m.correct_pct + m.incorrect_pct + m.unlabeled_pct;
        if (std::abs(total - 100.0) > 1e-6) {
            b.invariant_failures.push_back(fmt::format("{}: label shares sum to {}", to_string(mech), total));
        }
        for (const auto* curve : {&m.error_curve, &m.rescaled_curve}) {
            for (const auto& p : *curve) {
                if (!(p.mean_error >= 0.0 && p.mean_error <= 1.0)) {
                    b.invariant_failures.push_back(
                        fmt::format("{}: error {} outside [0, 1]", to_string(mech), p.mean_error));
                }
            }
        }
        if (setting == sim::StageSetting::SingleStage && hints != 0) {
            b.invariant_failures.push_back(fmt::format("{}: hint answers without a hint stage", to_string(mech)));
        }
        b.mechanisms.push_back(std::move(m));
    }
    return b;
}

}  // namespace hintguide::harness

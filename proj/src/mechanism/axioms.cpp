#include "hintguide/mechanism/axioms.hpp"

#include "hintguide/common/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace hintguide::mechanism {

PricingReport check_pricing_conditions(const PaymentTable& t, double threshold, double epsilon)
{
    if (!(epsilon > 0.0 && epsilon < 0.5)) {
        throw std::domain_error(fmt::format("pricing conditions need 0 < epsilon < 1/2, got {}", epsilon));
    }
    if (!(threshold > 0.5 && threshold < 1.0)) {
        throw std::domain_error(fmt::format("pricing conditions need 1/2 < T < 1, got {}", threshold));
    }
    PricingReport r;

    const double gap_d = t.d_plus - t.d_minus;
    const double gap_h = t.h_plus - t.h_minus;
    const double gap_dh = t.d_plus - t.h_plus;
    r.a.slack = std::min({gap_d, gap_h, gap_dh});
    r.a.pass = r.a.slack > kStrictSlack;
    if (!r.a.pass) {
        if (gap_d <= kStrictSlack) {
            r.a.witness = fmt::format("d_plus-d_minus={}", gap_d);
        } else if (gap_h <= kStrictSlack) {
            r.a.witness = fmt::format("h_plus-h_minus={}", gap_h);
        } else {
            r.a.witness = fmt::format("d_plus-h_plus={}", gap_dh);
        }
    }

    const double b_lhs = gap_d / (1.0 - 2.0 * epsilon);
    const double b_rhs = gap_h / (2.0 * epsilon);
    r.b.slack = b_lhs - b_rhs;
    r.b.pass = r.b.slack >= -kEqualityTolerance;
    if (!r.b.pass) {
        r.b.witness = fmt::format("epsilon={} lhs={} rhs={}", epsilon, b_lhs, b_rhs);
    }

    const double c_lhs = gap_d;
    const double c_rhs = (2.0 * threshold - 1.0) / (0.5 - epsilon) * gap_h;
    r.c.slack = c_rhs - c_lhs;
    r.c.pass = r.c.slack >= -kEqualityTolerance;
    if (!r.c.pass) {
        r.c.witness = fmt::format("epsilon={} lhs={} rhs={}", epsilon, c_lhs, c_rhs);
    }
    return r;
}

std::string_view to_string(Strategy s)
{
    switch (s) {
    case Strategy::DirectFavored:
        return "direct_favored";
    case Strategy::DirectDisfavored:
        return "direct_disfavored";
    case Strategy::Hint:
        return "hint";
    }
    return "?";
}

StrategyPayoffs strategy_payoffs(const PaymentTable& t, double threshold, double belief)
{
    const double fav = std::max(belief, 1.0 - belief);
    const double dis = 1.0 - fav;
    return StrategyPayoffs{
        fav * t.d_plus + dis * t.d_minus,
        dis * t.d_plus + fav * t.d_minus,
        threshold * t.h_plus + (1.0 - threshold) * t.h_minus,
    };
}

Strategy prescribed_strategy(double belief, double epsilon)
{
    // closed at 1/2 +- epsilon
    return std::abs(belief - 0.5) >= epsilon - kStrictSlack ? Strategy::DirectFavored : Strategy::Hint;
}

IcReport ic_check(const MechanismParams& params, std::span<const double> belief_grid)
{
    const PaymentTable table = hint_guided_table(params.threshold);
    const double eps = params.epsilon;

    IcReport r;
    r.points = belief_grid.size();
    r.worst_direct_slack = std::numeric_limits<double>::infinity();
    bool direct_ok = true;

    for (double p : belief_grid) {
        if (!(p > 0.0 && p < 1.0)) {
            throw std::domain_error(fmt::format("belief {} outside (0, 1)", p));
        }
        const auto pay = strategy_payoffs(table, params.threshold, p);
        const bool boundary = std::min(std::abs(p - (0.5 + eps)), std::abs(p - (0.5 - eps))) <= kBoundaryWindow;
        r.boundary_points += boundary ? 1 : 0;

        if (prescribed_strategy(p, eps) == Strategy::DirectFavored) {
            ++r.direct_points;
            const double slack = pay.direct_favored - std::max(pay.direct_disfavored, pay.hint);
            if (slack < r.worst_direct_slack) {
                r.worst_direct_slack = slack;
                r.worst_direct_belief = p;
            }
            const bool ok = boundary ? slack >= -kEqualityTolerance : slack > kStrictSlack;
            if (!ok && direct_ok) {
                direct_ok = false;
                r.violating_belief = p;
            }
        } else {
            ++r.band_points;
            const double best_direct = std::max(pay.direct_favored, pay.direct_disfavored);
            const double slack = pay.hint - best_direct;
            const bool ok = boundary ? slack >= -kEqualityTolerance : slack > kStrictSlack;
            if (!ok) {
                r.band_gaps.push_back({p, best_direct - pay.hint});
            }
        }
    }
    if (r.direct_points == 0) {
        r.worst_direct_slack = 0.0;
    }

    const double answer_hinted = params.threshold * table.h_plus + (1.0 - params.threshold) * table.h_minus;
    const double answer_other = (1.0 - params.threshold) * table.h_plus + params.threshold * table.h_minus;
    r.hint_stage_margin = answer_hinted - answer_other;

    r.pass = direct_ok && r.hint_stage_margin > kStrictSlack;
    return r;
}

std::vector<double> uniform_belief_grid(int points)
{
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(std::max(points, 0)));
    for (int i = 1; i <= points; ++i) {
        grid.push_back(static_cast<double>(i) / static_cast<double>(points + 1));
    }
    return grid;
}

namespace {

constexpr AnswerState kNoDirectCorrect[3] = {AnswerState::DirectWrong, AnswerState::HintCorrect,
                                             AnswerState::HintWrong};

// Visits {D-, H+, H-}^G, exhaustively or by uniform sampling. Returns the
// number of vectors visited.
template <typename Visit>
std::size_t visit_vectors(const MechanismParams& params, const NflOptions& options, bool& sampled, Visit visit)
{
    const int g = params.gold_count;
    std::vector<AnswerState> states(static_cast<std::size_t>(g), AnswerState::DirectWrong);
    if (g <= options.enumeration_cap) {
        sampled = false;
        std::vector<int> digits(static_cast<std::size_t>(g), 0);
        std::size_t count = 0;
        while (true) {
            for (int i = 0; i < g; ++i) {
                states[static_cast<std::size_t>(i)] = kNoDirectCorrect[digits[static_cast<std::size_t>(i)]];
            }
            ++count;
            if (!visit(states)) {
                return count;
            }
            int pos = 0;
            while (pos < g && ++digits[static_cast<std::size_t>(pos)] == 3) {
                digits[static_cast<std::size_t>(pos)] = 0;
                ++pos;
            }
            if (pos == g) {
                return count;
            }
        }
    }
    if (!options.allow_sampling) {
        throw ParamError(fmt::format("G = {} exceeds the enumeration cap of {}", g, options.enumeration_cap));
    }
    sampled = true;
    Rng rng(options.seed);
    std::vector<AnswerState> all_hint(static_cast<std::size_t>(g), AnswerState::HintCorrect);
    std::size_t count = 1;
    if (!visit(all_hint)) {
        return count;
    }
    for (std::size_t n = 0; n < options.samples; ++n) {
        for (auto& s : states) {
            s = kNoDirectCorrect[rng() % 3];
        }
        ++count;
        if (!visit(states)) {
            return count;
        }
    }
    return count;
}

bool all_hint_correct(const std::vector<AnswerState>& v)
{
    return std::all_of(v.begin(), v.end(), [](AnswerState s) { return s == AnswerState::HintCorrect; });
}

}  // namespace

NflReport check_mild_nfl(const MechanismParams& params, const NflOptions& options)
{
    NflReport r;
    r.pass = true;
    const double h = hint_multiplier(params.threshold);
    const double expected_exempt = params.mu_min + params.budget() * std::pow(h, params.gold_count);
    r.vectors_checked = visit_vectors(params, options, r.sampled, [&](const std::vector<AnswerState>& v) {
        const double pay = payment(v, params);
        bool ok = true;
        if (all_hint_correct(v)) {
            r.exempt_payment = pay;
            ok = pay - params.mu_min > kStrictSlack && std::abs(pay - expected_exempt) <= kEqualityTolerance;
        } else {
            ok = std::abs(pay - params.mu_min) <= kEqualityTolerance;
        }
        if (!ok) {
            r.pass = false;
            r.witness = v;
            r.witness_payment = pay;
            return false;
        }
        return true;
    });
    return r;
}

NflReport check_harsh_nfl(const MechanismParams& params, const NflOptions& options)
{
    NflReport r;
    r.pass = true;
    r.vectors_checked = visit_vectors(params, options, r.sampled, [&](const std::vector<AnswerState>& v) {
        const double pay = payment(v, params);
        if (all_hint_correct(v)) {
            r.exempt_payment = pay;
        }
        if (std::abs(pay - params.mu_min) > kEqualityTolerance) {
            r.pass = false;
            r.witness = v;
            r.witness_payment = pay;
            return false;
        }
        return true;
    });
    return r;
}

bool AxiomReport::intended_checks_pass() const
{
    bool ok = true;
    if (epsilon_range) {
        ok = ok && epsilon_range->pass;
    }
    if (pricing) {
        ok = ok && pricing->all_pass();
    }
    if (ic) {
        ok = ok && ic->pass;
    }
    if (mild_nfl) {
        ok = ok && mild_nfl->pass;
    }
    return ok;
}

AxiomReport verify_mechanism(const MechanismParams& params, int belief_points, const NflOptions& options)
{
    validate(params, Strictness::AllowAnyEpsilon);
    AxiomReport report;

    ConditionCheck range;
    const double lo = epsilon_min(params.threshold);
    range.slack = params.epsilon - lo;
    range.pass = range.slack >= -kEqualityTolerance && params.epsilon < 0.5;
    if (!range.pass) {
        range.witness = fmt::format("epsilon={} epsilon_min={}", params.epsilon, lo);
    }
    report.epsilon_range = range;
    report.mu_min = params.mu_min;

    report.pricing = check_pricing_conditions(hint_guided_table(params.threshold), params.threshold, params.epsilon);
    const auto grid = uniform_belief_grid(belief_points);
    report.ic = ic_check(params, grid);
    report.mild_nfl = check_mild_nfl(params, options);
    report.harsh_nfl = check_harsh_nfl(params, options);
    return report;
}

namespace {

std::string line(std::string_view condition, std::string_view verdict, double slack, std::string_view witness)
{
    return fmt::format("condition={}\tverdict={}\tslack={:.12g}\twitness={}\n", condition, verdict, slack,
                       witness.empty() ? "-" : witness);
}

std::string_view verdict(bool pass)
{
    return pass ? "pass" : "fail";
}

std::string nfl_witness(const NflReport& r)
{
    if (r.witness.empty()) {
        return {};
    }
    return fmt::format("[{}] payment={}", join_states(r.witness), format_money(r.witness_payment));
}

}  // namespace

std::string serialize(const AxiomReport& report)
{
    std::string out;
    const double report_mu_min = report.mu_min;
    if (report.epsilon_range) {
        const auto& c = *report.epsilon_range;
        out += line("epsilon_range", verdict(c.pass), c.slack, c.witness);
    }
    if (report.pricing) {
        const auto& p = *report.pricing;
        out += line("A", verdict(p.a.pass), p.a.slack, p.a.witness);
        out += line("B", verdict(p.b.pass), p.b.slack, p.b.witness);
        out += line("C", verdict(p.c.pass), p.c.slack, p.c.witness);
    }
    if (report.ic) {
        const auto& ic = *report.ic;
        std::string witness;
        if (ic.violating_belief) {
            witness = fmt::format("belief={}", *ic.violating_belief);
        }
        out += line("incentive_compatibility", verdict(ic.pass), ic.worst_direct_slack, witness);
        if (!ic.band_gaps.empty()) {
            auto worst = std::max_element(ic.band_gaps.begin(), ic.band_gaps.end(),
                                          [](const BandGap& a, const BandGap& b) { return a.gap < b.gap; });
            out += line("ic_hint_band", "report", -worst->gap,
                        fmt::format("points={}/{} worst_belief={} smallest_gap={}", ic.band_gaps.size(),
                                    ic.band_points, worst->belief,
                                    std::min_element(ic.band_gaps.begin(), ic.band_gaps.end(),
                                                     [](const BandGap& a, const BandGap& b) { return a.gap < b.gap; })
                                        ->gap));
        }
    }
    if (report.mild_nfl) {
        const auto& m = *report.mild_nfl;
        out += line("mild_no_free_lunch", verdict(m.pass), m.exempt_payment - report_mu_min, nfl_witness(m));
    }
    if (report.harsh_nfl) {
        const auto& h = *report.harsh_nfl;
        out += line("harsh_no_free_lunch", verdict(h.pass), h.pass ? 0.0 : report_mu_min - h.witness_payment, nfl_witness(h));
    }
    return out;
}

}  // namespace hintguide::mechanism

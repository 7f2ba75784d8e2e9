#include "hintguide/sim/worker.hpp"

#include <cmath>

#include <fmt/format.h>

namespace hintguide::sim {

namespace {
// Closed band ends tolerate representation error in 1/2 +- eps.
constexpr double kEdge = 1e-12;
}  // namespace

MainStageAction decide_main(const BeliefState& belief, double epsilon)
{
    const double p = belief.p_main;
    if (p >= 0.5 + epsilon - kEdge) {
        return MainStageAction::AnswerA;
    }
    if (p <= 0.5 - epsilon + kEdge) {
        return MainStageAction::AnswerB;
    }
    return MainStageAction::EnterHint;
}

BinaryOption decide_hint(const BeliefState& belief, double threshold)
{
    if (belief.p_hint >= threshold - kEdge) {
        return BinaryOption::A;
    }
    if (1.0 - belief.p_hint >= threshold - kEdge) {
        return BinaryOption::B;
    }
    throw IndecisionError(fmt::format("hint belief {} clears T = {} for neither option", belief.p_hint, threshold));
}

std::optional<int> decide_main_top(const double* beliefs, int option_count, double epsilon)
{
    int top = 0;
    for (int i = 1; i < option_count; ++i) {
        if (beliefs[i] > beliefs[top]) {
            top = i;
        }
    }
    if (beliefs[top] >= 0.5 + epsilon - kEdge) {
        return top;
    }
    return std::nullopt;
}

std::string_view to_string(ArchetypeKind kind)
{
    switch (kind) {
    case ArchetypeKind::HighQuality:
        return "high_quality";
    case ArchetypeKind::LowQuality:
        return "low_quality";
    case ArchetypeKind::Spammer:
        return "spammer";
    case ArchetypeKind::HintAbuser:
        return "hint_abuser";
    }
    return "?";
}

std::optional<ArchetypeKind> parse_archetype_kind(std::string_view name)
{
    for (auto k : {ArchetypeKind::HighQuality, ArchetypeKind::LowQuality, ArchetypeKind::Spammer,
                   ArchetypeKind::HintAbuser}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    return std::nullopt;
}

double WorkerArchetype::planted_quality(int option_count) const
{
    if (kind == ArchetypeKind::Spammer) {
        return 1.0 / static_cast<double>(option_count);
    }
    return accuracy;
}

WorkerArchetype WorkerArchetype::high_quality(double accuracy, double spread)
{
    WorkerArchetype a;
    a.kind = ArchetypeKind::HighQuality;
    a.accuracy = accuracy;
    a.confidence_spread = spread;
    return a;
}

WorkerArchetype WorkerArchetype::low_quality(double accuracy, double spread)
{
    WorkerArchetype a;
    a.kind = ArchetypeKind::LowQuality;
    a.accuracy = accuracy;
    a.confidence_spread = spread;
    return a;
}

WorkerArchetype WorkerArchetype::spammer()
{
    WorkerArchetype a;
    a.kind = ArchetypeKind::Spammer;
    a.accuracy = 0.5;
    a.confidence_spread = 0.0;
    return a;
}

WorkerArchetype WorkerArchetype::hint_abuser(double accuracy, double spread)
{
    WorkerArchetype a;
    a.kind = ArchetypeKind::HintAbuser;
    a.accuracy = accuracy;
    a.confidence_spread = spread;
    return a;
}

void validate(const WorkerArchetype& a)
{
    auto open_unit = [](double v) { return std::isfinite(v) && v > 0.0 && v < 1.0; };
    auto closed_unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
    if (!open_unit(a.accuracy)) {
        throw std::invalid_argument(fmt::format("accuracy {} outside (0, 1)", a.accuracy));
    }
    if (!std::isfinite(a.confidence_spread) || a.confidence_spread < 0.0) {
        throw std::invalid_argument(fmt::format("spread {} is negative", a.confidence_spread));
    }
    if (a.hint_reliability && !closed_unit(*a.hint_reliability)) {
        throw std::invalid_argument(fmt::format("hint_reliability {} outside [0, 1]", *a.hint_reliability));
    }
    if (!closed_unit(a.omit_rate) || !closed_unit(a.invalid_rate)) {
        throw std::invalid_argument("omit/invalid rates must lie in [0, 1]");
    }
}

}  // namespace hintguide::sim

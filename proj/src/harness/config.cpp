#include "hintguide/harness/config.hpp"

#include "hintguide/common/text.hpp"
#include "hintguide/mechanism/payment.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

namespace hintguide::harness {

std::string_view to_string(Mechanism m)
{
    switch (m) {
    case Mechanism::SingleAdditive:
        return "single_add";
    case Mechanism::SingleMultiplicative:
        return "single_mul";
    case Mechanism::Hybrid:
        return "hybrid";
    case Mechanism::Skip:
        return "skip";
    case Mechanism::VisibleHints:
        return "visible_hints";
    }
    return "?";
}

std::string_view display_name(Mechanism m)
{
    switch (m) {
    case Mechanism::SingleAdditive:
        return "Single(+)";
    case Mechanism::SingleMultiplicative:
        return "Single(x)";
    case Mechanism::Hybrid:
        return "Hybrid(x)";
    case Mechanism::Skip:
        return "Skip(x)";
    case Mechanism::VisibleHints:
        return "VisibleHints";
    }
    return "?";
}

std::optional<Mechanism> parse_mechanism(std::string_view name)
{
    for (auto m : kAllMechanisms) {
        if (to_string(m) == name) {
            return m;
        }
    }
    return std::nullopt;
}

sim::StageSetting stage_setting(Mechanism m)
{
    switch (m) {
    case Mechanism::SingleAdditive:
    case Mechanism::SingleMultiplicative:
        return sim::StageSetting::SingleStage;
    case Mechanism::Hybrid:
        return sim::StageSetting::Hybrid;
    case Mechanism::Skip:
        return sim::StageSetting::SkipStage;
    case Mechanism::VisibleHints:
        return sim::StageSetting::VisibleHints;
    }
    return sim::StageSetting::Hybrid;
}

sim::PaymentRule payment_rule(Mechanism m)
{
    switch (m) {
    case Mechanism::SingleAdditive:
        return sim::PaymentRule::Baseline;
    case Mechanism::Skip:
        return sim::PaymentRule::Skip;
    case Mechanism::SingleMultiplicative:
    case Mechanism::Hybrid:
    case Mechanism::VisibleHints:
        break;
    }
    return sim::PaymentRule::Hybrid;
}

int ExperimentConfig::worker_count() const
{
    int n = 0;
    for (const auto& p : population) {
        n += p.count;
    }
    return n;
}

namespace {

PopulationEntry parse_worker(const KvConfig& cfg, const KvEntry& e)
{
    auto tokens = text::split_list(e.value, ' ');
    if (tokens.empty()) {
        cfg.fail(e, "worker line needs an archetype");
    }
    auto kind = sim::parse_archetype_kind(tokens[0]);
    if (!kind) {
        cfg.fail(e, fmt::format("unknown archetype '{}'", tokens[0]));
    }
    PopulationEntry p;
    switch (*kind) {
    case sim::ArchetypeKind::HighQuality:
        p.archetype = sim::WorkerArchetype::high_quality();
        break;
    case sim::ArchetypeKind::LowQuality:
        p.archetype = sim::WorkerArchetype::low_quality();
        break;
    case sim::ArchetypeKind::Spammer:
        p.archetype = sim::WorkerArchetype::spammer();
        break;
    case sim::ArchetypeKind::HintAbuser:
        p.archetype = sim::WorkerArchetype::hint_abuser();
        break;
    }
    p.label = std::string(sim::to_string(*kind));

    std::set<std::string> seen;
    for (std::size_t i = 1; i < tokens.size(); ++i) {
        auto eq = tokens[i].find('=');
        if (eq == std::string::npos) {
            cfg.fail(e, fmt::format("expected name=value, got '{}'", tokens[i]));
        }
        std::string name = tokens[i].substr(0, eq);
        std::string value = tokens[i].substr(eq + 1);
        if (!seen.insert(name).second) {
            cfg.fail(e, fmt::format("'{}' given twice", name));
        }
        if (name == "name") {
            if (value.empty() || value.find(',') != std::string::npos) {
                cfg.fail(e, "name must be non-empty and contain no commas");
            }
            p.label = value;
            continue;
        }
        if (name == "count") {
            auto v = text::parse_int(value);
            if (!v || *v < 1) {
                cfg.fail(e, fmt::format("count must be a positive integer, got '{}'", value));
            }
            p.count = static_cast<int>(*v);
            continue;
        }
        auto v = text::parse_double(value);
        if (!v) {
            cfg.fail(e, fmt::format("'{}' is not a number", value));
        }
        if (name == "accuracy") {
            p.archetype.accuracy = *v;
        } else if (name == "spread") {
            p.archetype.confidence_spread = *v;
        } else if (name == "hint_reliability") {
            p.archetype.hint_reliability = *v;
        } else if (name == "omit") {
            p.archetype.omit_rate = *v;
        } else if (name == "invalid") {
            p.archetype.invalid_rate = *v;
        } else {
            cfg.fail(e, fmt::format("unknown worker attribute '{}'", name));
        }
    }
    try {
        sim::validate(p.archetype);
    } catch (const std::invalid_argument& ex) {
        cfg.fail(e, ex.what());
    }
    return p;
}

std::vector<double> parse_double_list(const KvConfig& cfg, std::string_view key)
{
    std::vector<double> out;
    auto entries = cfg.all(key);
    if (entries.size() > 1) {
        cfg.fail(entries[1], fmt::format("duplicate key '{}'", key));
    }
    for (const auto& e : entries) {
        for (const auto& item : text::split_list(e.value)) {
            auto v = text::parse_double(item);
            if (!v) {
                cfg.fail(e, fmt::format("'{}' is not a number", item));
            }
            out.push_back(*v);
        }
    }
    return out;
}

}  // namespace

ExperimentConfig experiment_from_config(const KvConfig& cfg)
{
    cfg.require_known({"task", "questions", "options", "subjective", "gold", "T", "epsilon", "mu_min", "mu_max",
                       "skip_s", "mechanisms", "n_workers", "repetitions", "payment_repetitions", "seed", "worker",
                       "sweep_T", "sweep_epsilon"});
    ExperimentConfig c;
    c.task = cfg.get_string("task", "task");
    c.questions = static_cast<int>(cfg.get_int("questions", 30));
    c.options = static_cast<int>(cfg.get_int("options", 2));
    c.subjective = cfg.get_bool("subjective", false);
    if (c.subjective) {
        c.options = 2;
    }

    auto& p = c.params;
    p.threshold = cfg.get_double("T", mechanism::kDefaultThreshold);
    if (!(p.threshold > 0.625 && p.threshold < 1.0)) {
        throw mechanism::ParamError(fmt::format("{}: T = {} outside (5/8, 1)", cfg.source(), p.threshold));
    }
    p.epsilon = cfg.get_double("epsilon", mechanism::epsilon_min(p.threshold));
    p.mu_min = cfg.get_double("mu_min", mechanism::kDefaultMuMin);
    p.mu_max = cfg.get_double("mu_max", mechanism::kDefaultMuMax);
    p.question_count = c.questions;
    p.gold_count = static_cast<int>(cfg.get_int("gold", std::max(1, c.questions / 10)));
    p.skip_multiplier = cfg.get_double("skip_s", mechanism::hint_multiplier(p.threshold));
    try {
        mechanism::validate(p);
    } catch (const mechanism::ParamError& e) {
        throw mechanism::ParamError(fmt::format("{}: {}", cfg.source(), e.what()));
    }

    if (auto m = cfg.get("mechanisms")) {
        for (const auto& name : text::split_list(*m)) {
            auto mech = parse_mechanism(name);
            if (!mech) {
                cfg.fail(cfg.all("mechanisms").front(), fmt::format("unknown mechanism '{}'", name));
            }
            if (std::find(c.mechanisms.begin(), c.mechanisms.end(), *mech) != c.mechanisms.end()) {
                cfg.fail(cfg.all("mechanisms").front(), fmt::format("mechanism '{}' listed twice", name));
            }
            c.mechanisms.push_back(*mech);
        }
    } else {
        c.mechanisms.assign(std::begin(kAllMechanisms), std::end(kAllMechanisms));
    }

    if (auto n = cfg.get("n_workers")) {
        c.n_workers.clear();
        for (const auto& item : text::split_list(*n)) {
            auto v = text::parse_int(item);
            if (!v) {
                cfg.fail(cfg.all("n_workers").front(), fmt::format("'{}' is not an integer", item));
            }
            c.n_workers.push_back(static_cast<int>(*v));
        }
    }
    c.repetitions = static_cast<int>(cfg.get_int("repetitions", 200));
    c.payment_repetitions = static_cast<int>(cfg.get_int("payment_repetitions", 200));
    if (auto s = cfg.get("seed")) {
        auto v = text::parse_u64(*s);
        if (!v) {
            cfg.fail(cfg.all("seed").front(), fmt::format("'{}' is not an unsigned integer", *s));
        }
        c.seed = *v;
    }
    for (const auto& e : cfg.all("worker")) {
        c.population.push_back(parse_worker(cfg, e));
    }
    c.sweep_threshold = parse_double_list(cfg, "sweep_T");
    c.sweep_epsilon = parse_double_list(cfg, "sweep_epsilon");

    try {
        validate(c);
    } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("{}: {}", cfg.source(), e.what()));
    }
    return c;
}

ExperimentConfig load_experiment(const std::filesystem::path& path)
{
    return experiment_from_config(KvConfig::load(path));
}

void validate(const ExperimentConfig& c, mechanism::Strictness strictness)
{
    if (c.task.empty() || c.task.find(',') != std::string::npos) {
        throw ConfigError("task name must be non-empty and contain no commas");
    }
    if (c.questions < 1) {
        throw ConfigError("questions must be at least 1");
    }
    if (c.options < 2) {
        throw ConfigError("options must be at least 2");
    }
    if (c.mechanisms.empty()) {
        throw ConfigError("mechanism set is empty");
    }
    if (c.population.empty()) {
        throw ConfigError("population has no workers");
    }
    for (const auto& p : c.population) {
        if (p.archetype.kind != sim::ArchetypeKind::Spammer && !(p.archetype.accuracy * c.options > 1.0)) {
            throw ConfigError(fmt::format("worker '{}': accuracy {} does not exceed chance 1/{}", p.label,
                                          p.archetype.accuracy, c.options));
        }
    }
    if (c.n_workers.empty()) {
        throw ConfigError("n_workers grid is empty");
    }
    for (int n : c.n_workers) {
        if (n < 1 || n > c.worker_count()) {
            throw ConfigError(fmt::format("n_workers = {} outside [1, {}]", n, c.worker_count()));
        }
    }
    if (c.repetitions < 1 || c.payment_repetitions < 1) {
        throw ConfigError("repetitions must be at least 1");
    }
    mechanism::validate(c.params, strictness);
    if (c.params.question_count != c.questions) {
        throw ConfigError("params question count differs from questions");
    }
}

}  // namespace hintguide::harness

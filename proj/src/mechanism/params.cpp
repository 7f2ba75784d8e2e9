#include "hintguide/mechanism/params.hpp"

#include "hintguide/common/text.hpp"
#include "hintguide/mechanism/payment.hpp"

#include <cmath>

#include <fmt/format.h>

namespace hintguide::mechanism {

MechanismParams MechanismParams::with_defaults(double threshold, int gold_count, int question_count,
                                               double mu_min, double mu_max)
{
    MechanismParams p;
    p.threshold = threshold;
    p.epsilon = epsilon_min(threshold);
    p.mu_min = mu_min;
    p.mu_max = mu_max;
    p.gold_count = gold_count;
    p.question_count = question_count;
    p.skip_multiplier = hint_multiplier(threshold);
    validate(p);
    return p;
}

void validate(const MechanismParams& p, Strictness strictness)
{
    if (!std::isfinite(p.threshold) || !(p.threshold > 0.625 && p.threshold < 1.0)) {
        throw ParamError(fmt::format("T = {} outside (5/8, 1)", p.threshold));
    }
    if (!std::isfinite(p.epsilon)) {
        throw ParamError("epsilon is not finite");
    }
    if (strictness == Strictness::Full) {
        double lo = epsilon_min(p.threshold);
        if (p.epsilon < lo - kEqualityTolerance || p.epsilon >= 0.5) {
            throw ParamError(fmt::format("epsilon = {} outside [epsilon_min(T) = {:.10f}, 1/2)", p.epsilon, lo));
        }
    } else if (!(p.epsilon > 0.0 && p.epsilon < 0.5)) {
        throw ParamError(fmt::format("epsilon = {} outside (0, 1/2)", p.epsilon));
    }
    if (!std::isfinite(p.mu_min) || !std::isfinite(p.mu_max) || p.mu_min < 0.0 || p.mu_min > p.mu_max) {
        throw ParamError(fmt::format("need 0 <= mu_min <= mu_max, got mu_min = {}, mu_max = {}", p.mu_min, p.mu_max));
    }
    if (p.gold_count < 1 || p.gold_count > p.question_count) {
        throw ParamError(fmt::format("need 1 <= G <= N, got G = {}, N = {}", p.gold_count, p.question_count));
    }
    if (!(p.skip_multiplier > 0.0 && p.skip_multiplier < 1.0)) {
        throw ParamError(fmt::format("skip_s = {} outside (0, 1)", p.skip_multiplier));
    }
}

bool is_valid(const MechanismParams& p, Strictness strictness)
{
    try {
        validate(p, strictness);
        return true;
    } catch (const ParamError&) {
        return false;
    }
}

MechanismParams params_from_config(const KvConfig& cfg, Strictness strictness)
{
    cfg.require_known({"T", "epsilon", "mu_min", "mu_max", "G", "N", "skip_s"});
    MechanismParams p;
    p.threshold = cfg.get_double("T", kDefaultThreshold);
    if (!(p.threshold > 0.625 && p.threshold < 1.0)) {
        throw ParamError(fmt::format("{}: T = {} outside (5/8, 1)", cfg.source(), p.threshold));
    }
    p.epsilon = cfg.get_double("epsilon", epsilon_min(p.threshold));
    p.mu_min = cfg.get_double("mu_min", kDefaultMuMin);
    p.mu_max = cfg.get_double("mu_max", kDefaultMuMax);
    auto g = cfg.get_optional_int("G");
    if (!g) {
        throw ParamError(fmt::format("{}: missing required key G", cfg.source()));
    }
    p.gold_count = static_cast<int>(*g);
    p.question_count = static_cast<int>(cfg.get_int("N", *g));
    p.skip_multiplier = cfg.get_double("skip_s", hint_multiplier(p.threshold));
    try {
        validate(p, strictness);
    } catch (const ParamError& e) {
        throw ParamError(fmt::format("{}: {}", cfg.source(), e.what()));
    }
    return p;
}

MechanismParams load_params(const std::string& path, Strictness strictness)
{
    return params_from_config(KvConfig::load(path), strictness);
}

std::string to_config_text(const MechanismParams& p)
{
    return fmt::format("T = {}\nepsilon = {}\nmu_min = {}\nmu_max = {}\nG = {}\nN = {}\nskip_s = {}\n",
                       text::format_double(p.threshold), text::format_double(p.epsilon),
                       text::format_double(p.mu_min), text::format_double(p.mu_max), p.gold_count,
                       p.question_count, text::format_double(p.skip_multiplier));
}

}  // namespace hintguide::mechanism

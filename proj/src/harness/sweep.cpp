#include "hintguide/harness/sweep.hpp"

#include "hintguide/mechanism/axioms.hpp"
#include "hintguide/mechanism/payment.hpp"

#include <fmt/format.h>

namespace hintguide::harness {

std::vector<SweepPoint> sweep_parameters(const ExperimentConfig& base, std::span<const double> thresholds,
                                         std::span<const double> epsilons)
{
    std::vector<double> ts(thresholds.begin(), thresholds.end());
    if (ts.empty()) {
        ts.push_back(base.params.threshold);
    }
    std::vector<SweepPoint> out;
    for (double t : ts) {
        std::vector<double> es(epsilons.begin(), epsilons.end());
        const bool t_ok = t > 0.625 && t < 1.0;
        if (es.empty()) {
            es.push_back(t_ok ? mechanism::epsilon_min(t) : 0.0);
        }
        for (double e : es) {
            SweepPoint p;
            p.threshold = t;
            p.epsilon = e;
            if (!t_ok) {
                p.reason = fmt::format("T = {} outside (5/8, 1)", t);
                out.push_back(std::move(p));
                continue;
            }
            ExperimentConfig c = base;
            c.params.threshold = t;
            c.params.epsilon = e;
            if (t != base.params.threshold) {
                c.params.skip_multiplier = mechanism::hint_multiplier(t);
            }
            try {
                mechanism::validate(c.params);
                auto pricing = mechanism::check_pricing_conditions(mechanism::hint_guided_table(t), t, e);
                p.valid = pricing.all_pass();
                if (!p.valid) {
                    p.reason = "pricing conditions fail";
                }
            } catch (const mechanism::ParamError& ex) {
                p.reason = ex.what();
            }
            if (mechanism::is_valid(c.params, mechanism::Strictness::AllowAnyEpsilon)) {
                p.metrics = run_experiment(c, mechanism::Strictness::AllowAnyEpsilon);
            }
            out.push_back(std::move(p));
        }
    }
    return out;
}

}  // namespace hintguide::harness

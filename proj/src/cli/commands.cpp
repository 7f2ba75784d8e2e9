#include "hintguide/cli/commands.hpp"

#include "hintguide/aggregate/aggregation.hpp"
#include "hintguide/common/kv_config.hpp"
#include "hintguide/harness/config.hpp"
#include "hintguide/harness/experiment.hpp"
#include "hintguide/harness/report.hpp"
#include "hintguide/harness/sweep.hpp"
#include "hintguide/mechanism/axioms.hpp"
#include "hintguide/mechanism/payment.hpp"
#include "hintguide/service/http_server.hpp"
#include "hintguide/service/task_service.hpp"
#include "hintguide/sim/scoring.hpp"
#include "hintguide/sim/transcript.hpp"

#include <csignal>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <pthread.h>

#ifndef HINTGUIDE_CONFIG_DIR
#define HINTGUIDE_CONFIG_DIR "configs"
#endif

namespace hintguide::cli {

namespace {

namespace fs = std::filesystem;

// Raised for inputs the command cannot use; maps to kExitUsage.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void write_output(const std::string& text, const std::string& path, std::ostream& out)
{
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f || !(f << text) || !f.flush()) {
        throw harness::ReportError(fmt::format("{}: cannot write", path));
    }
}

harness::ExperimentConfig experiment_with_seed(const std::string& config, std::optional<std::uint64_t> seed)
{
    auto c = harness::load_experiment(resolve_config(config));
    if (seed) {
        c.seed = *seed;
    }
    return c;
}

int cmd_validate(const std::string& params_path, std::ostream& out)
{
    // Bands below the minimum are loaded so the checks can show why they fail.
    const auto params = mechanism::load_params(params_path, mechanism::Strictness::AllowAnyEpsilon);
    const auto report = mechanism::verify_mechanism(params);
    out << mechanism::serialize(report);
    const bool ok = report.intended_checks_pass();
    out << fmt::format("result={}\n", ok ? "pass" : "fail");
    return ok ? kExitOk : kExitCheckFailed;
}

std::string comparator_symbols(const sim::SessionTranscript& t, sim::PaymentRule rule)
{
    std::vector<std::string> parts;
    for (const auto& r : t.answers) {
        if (!r.gold) {
            continue;
        }
        if (rule == sim::PaymentRule::Hybrid) {
            parts.emplace_back(mechanism::to_symbol(sim::answer_state(r)));
        } else {
            auto s = sim::comparator_state(r);
            if (rule == sim::PaymentRule::Baseline && s == mechanism::ComparatorState::Skipped) {
                s = mechanism::ComparatorState::Wrong;
            }
            parts.emplace_back(mechanism::to_symbol(s));
        }
    }
    return fmt::format("{}", fmt::join(parts, " "));
}

int cmd_pay(const std::string& transcript_path, const std::string& params_path, const std::string& rule_name,
            const std::string& out_path, std::ostream& out)
{
    const auto rule = sim::parse_payment_rule(rule_name);
    if (!rule) {
        throw UsageError(fmt::format("unknown mechanism '{}' (hybrid, baseline, skip)", rule_name));
    }
    const auto params = mechanism::load_params(params_path);
    const auto transcripts = sim::load_transcripts(transcript_path);
    std::string table = "worker_id,mechanism,gold_states,payment\n";
    for (const auto& t : transcripts) {
        const double pay = sim::transcript_payment(t, params, *rule);
        table += fmt::format("{},{},{},{}\n", t.worker_id, sim::to_string(*rule), comparator_symbols(t, *rule),
                             mechanism::format_money(pay));
    }
    write_output(table, out_path, out);
    return kExitOk;
}

int cmd_simulate(const std::string& config, std::optional<std::uint64_t> seed, const std::string& out_dir,
                 std::ostream& out)
{
    const auto c = experiment_with_seed(config, seed);
    const auto bundle = harness::run_experiment(c);
    if (!out_dir.empty()) {
        for (const auto& p : harness::emit_report(bundle, out_dir)) {
            out << "wrote " << p.string() << '\n';
        }
    }
    out << harness::summary_text(bundle);
    if (!bundle.invariant_failures.empty()) {
        for (const auto& f : bundle.invariant_failures) {
            out << "invariant failed: " << f << '\n';
        }
        return kExitCheckFailed;
    }
    return kExitOk;
}

int cmd_sweep(const std::string& config, std::optional<std::uint64_t> seed, const std::string& out_dir,
              std::ostream& out)
{
    const auto c = experiment_with_seed(config, seed);
    const auto points = harness::sweep_parameters(c, c.sweep_threshold, c.sweep_epsilon);
    if (!out_dir.empty()) {
        out << "wrote " << harness::emit_sweep(c.task, points, out_dir).string() << '\n';
    }
    out << harness::sweep_table(c.task, points);
    return kExitOk;
}

int cmd_aggregate(const std::string& transcript_path, const std::string& out_path, std::ostream& out)
{
    const auto transcripts = sim::load_transcripts(transcript_path);
    const auto matrix = aggregate::build_vote_matrix(transcripts);
    const auto tallies = aggregate::tally_all(matrix);
    std::string table = "question_id,votes,tied_options,truth,credit\n";
    for (const auto& t : tallies) {
        std::vector<std::string> votes;
        std::vector<std::string> tied;
        const double top = *std::max_element(t.votes.begin(), t.votes.end());
        for (std::size_t o = 0; o < t.votes.size(); ++o) {
            votes.push_back(fmt::format("{}:{}", matrix.options[o], t.votes[o]));
            if (t.votes[o] >= top - aggregate::kTieTolerance) {
                tied.push_back(matrix.options[o]);
            }
        }
        const std::string truth = t.truth >= 0 ? matrix.options[static_cast<std::size_t>(t.truth)] : "-";
        const std::string credit =
            t.tie_count > 1 && t.truth_in_tie ? fmt::format("1/{}", t.tie_count) : fmt::format("{}", t.credit());
        table += fmt::format("{},{},{},{},{}\n", t.question_id, fmt::join(votes, " "), fmt::join(tied, " "), truth,
                             credit);
    }
    table += fmt::format("majority_error,{:.6f}\n", aggregate::majority_error(tallies));
    write_output(table, out_path, out);
    return kExitOk;
}

int cmd_serve(const std::string& config, const std::string& state_dir, const std::string& host,
              std::optional<int> port, std::optional<std::uint64_t> seed, std::ostream& out)
{
    service::ServeConfig sc;
    if (!config.empty()) {
        sc = service::load_serve_config(config);
    }
    if (!state_dir.empty()) {
        sc.service.state_dir = state_dir;
    }
    if (!host.empty()) {
        sc.host = host;
    }
    if (port) {
        sc.port = *port;
    }
    if (seed) {
        sc.service.seed = *seed;
    }
    if (sc.service.state_dir.empty()) {
        throw UsageError("serve needs a state directory: pass --out or set state_dir in the config");
    }
    if (sc.requester_token.empty()) {
        sc.requester_token = service::generate_token();
        out << "requester token: " << sc.requester_token << '\n';
    }

    // Signals are taken by a dedicated thread so shutdown runs outside a
    // signal handler. The mask is inherited by the server's worker threads.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    sigset_t previous;
    pthread_sigmask(SIG_BLOCK, &signals, &previous);

    service::TaskService svc(sc.service);
    service::HttpServer http(svc, sc.requester_token);
    const int bound = http.bind(sc.host, sc.port);
    out << fmt::format("recovered {} events from {}\n", svc.replayed_events(), sc.service.state_dir.string());
    out << fmt::format("listening on http://{}:{}\n", sc.host, bound) << std::flush;

    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        http.stop();
    });
    http.run();
    waiter.join();
    pthread_sigmask(SIG_SETMASK, &previous, nullptr);
    out << "stopped\n";
    return kExitOk;
}

}  // namespace

std::string resolve_config(const std::string& name_or_path)
{
    if (fs::exists(name_or_path)) {
        return name_or_path;
    }
    for (const auto& candidate : {fs::path(HINTGUIDE_CONFIG_DIR) / name_or_path,
                                  fs::path(HINTGUIDE_CONFIG_DIR) / (name_or_path + ".conf")}) {
        if (fs::exists(candidate)) {
            return candidate.string();
        }
    }
    throw UsageError(fmt::format("no config file or bundled config named '{}'", name_or_path));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Hint-guided crowdsourcing: payment checks, simulation and a task server", "hintguide"};
    app.require_subcommand(1, 1);
    app.set_help_all_flag("--help-all", "Print help for every subcommand");

    std::string params;
    std::string config;
    std::string service_config;
    std::string transcript;
    std::string mechanism = "hybrid";
    std::string out_path;
    std::string host;
    std::optional<int> port;
    std::optional<std::uint64_t> seed;

    auto* validate = app.add_subcommand("validate", "Check the pricing conditions, incentive compatibility and "
                                                    "no-free-lunch axioms for a parameter file");
    validate->add_option("--params", params, "Parameter file (T, epsilon, mu_min, mu_max, G, N, skip_s)")
        ->required();

    auto* pay = app.add_subcommand("pay", "Price every worker of a transcript file");
    pay->add_option("transcript", transcript, "Transcript file")->required();
    pay->add_option("--params", params, "Parameter file")->required();
    pay->add_option("--mechanism", mechanism, "Payment rule: hybrid, baseline or skip")
        ->check(CLI::IsMember({"hybrid", "baseline", "skip"}))
        ->capture_default_str();
    pay->add_option("--out", out_path, "Write the payment table here instead of stdout");

    auto* simulate = app.add_subcommand("simulate", "Run the simulated evaluation protocol");
    simulate->add_option("--config", config, "Experiment config file or bundled name")->default_val("binary30");
    simulate->add_option("--seed", seed, "Master seed, overriding the config");
    simulate->add_option("--out", out_path, "Directory for the metric tables and transcripts");

    auto* sweep = app.add_subcommand("sweep", "Repeat the protocol over the config's sweep_T and sweep_epsilon grid");
    sweep->add_option("--config", config, "Experiment config file or bundled name")->default_val("binary30");
    sweep->add_option("--seed", seed, "Master seed, overriding the config");
    sweep->add_option("--out", out_path, "Directory for sweep.csv");

    auto* aggregate = app.add_subcommand("aggregate", "Majority vote with tie credit over a transcript file");
    aggregate->add_option("transcript", transcript, "Transcript file")->required();
    aggregate->add_option("--out", out_path, "Write the vote table here instead of stdout");

    auto* serve = app.add_subcommand("serve", "Run the task service over HTTP until SIGINT or SIGTERM");
    serve->add_option("--config", service_config, "Service config (host, port, state_dir, requester_token, sync, "
                                          "snapshot_every, seed)");
    serve->add_option("--out", out_path, "State directory for the event log and snapshots");
    serve->add_option("--host", host, "Bind address (default 127.0.0.1)");
    serve->add_option("--port", port, "Bind port, 0 for any free port (default 8080)")->check(CLI::Range(0, 65535));
    serve->add_option("--seed", seed, "Seed for batches created without one");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        if (validate->parsed()) {
            return cmd_validate(params, out);
        }
        if (pay->parsed()) {
            return cmd_pay(transcript, params, mechanism, out_path, out);
        }
        if (simulate->parsed()) {
            return cmd_simulate(config, seed, out_path, out);
        }
        if (sweep->parsed()) {
            return cmd_sweep(config, seed, out_path, out);
        }
        if (aggregate->parsed()) {
            return cmd_aggregate(transcript, out_path, out);
        }
        if (serve->parsed()) {
            return cmd_serve(service_config, out_path, host, port, seed, out);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const sim::TranscriptError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        // parameter, aggregation and archetype errors
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitCheckFailed;
    }
    return kExitUsage;
}

}  // namespace hintguide::cli

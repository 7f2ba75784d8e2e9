#include "hintguide/harness/report.hpp"

#include "hintguide/mechanism/payment.hpp"
#include "hintguide/sim/transcript.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>

namespace hintguide::harness {

using mechanism::format_money;

std::string completion_table(const MetricsBundle& b)
{
    std::string out = "task,mechanism,completion_pct,correct_pct,incorrect_pct,unlabeled_pct,hint_rate\n";
    for (const auto& m : b.mechanisms) {
        out += fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", b.task, to_string(m.mechanism),
                           m.completion_pct, m.correct_pct, m.incorrect_pct, m.unlabeled_pct, m.hint_rate);
    }
    return out;
}

std::string error_table(const MetricsBundle& b, bool rescaled)
{
    std::string out = "task,mechanism,n_workers,mean_error,std_error\n";
    for (const auto& m : b.mechanisms) {
        for (const auto& p : rescaled ? m.rescaled_curve : m.error_curve) {
            out += fmt::format("{},{},{},{:.6f},{:.6f}\n", b.task, to_string(m.mechanism), p.n_workers, p.mean_error,
                               p.std_error);
        }
    }
    return out;
}

std::string payment_table(const MetricsBundle& b)
{
    std::string out = "task,mechanism,group,avg_payment,std_error\n";
    for (const auto& m : b.mechanisms) {
        out += fmt::format("{},{},all,{},{}\n", b.task, to_string(m.mechanism), format_money(m.payment.mean),
                           format_money(m.payment.std_error));
        for (const auto& [label, p] : m.payment_by_label) {
            out += fmt::format("{},{},{},{},{}\n", b.task, to_string(m.mechanism), label, format_money(p.mean),
                               format_money(p.std_error));
        }
    }
    return out;
}

std::string detection_table(const MetricsBundle& b)
{
    std::string out = "task,mechanism,rank_correlation\n";
    for (const auto& m : b.mechanisms) {
        out += fmt::format("{},{},{:.6f}\n", b.task, to_string(m.mechanism), m.rank_correlation);
    }
    return out;
}

std::string summary_text(const MetricsBundle& b)
{
    std::string out;
    out += fmt::format("task {}: N = {}, G = {}, T = {}, epsilon = {:.6f}, seed = {}, workers = {}\n", b.task,
                       b.params.question_count, b.params.gold_count, b.params.threshold, b.params.epsilon, b.seed,
                       b.workers.size());
    out += "\nlabel quantity and quality (% of question slots)\n";
    out += fmt::format("  {:<14}{:>12}{:>10}{:>12}{:>12}{:>8}\n", "mechanism", "completion", "correct", "incorrect",
                       "unlabeled", "hints");
    for (const auto& m : b.mechanisms) {
        out += fmt::format("  {:<14}{:>12.2f}{:>10.2f}{:>12.2f}{:>12.2f}{:>8.3f}\n", display_name(m.mechanism),
                           m.completion_pct, m.correct_pct, m.incorrect_pct, m.unlabeled_pct, m.hint_rate);
    }
    out += "\naggregation error by n_workers\n";
    if (!b.mechanisms.empty()) {
        out += fmt::format("  {:<14}", "mechanism");
        for (const auto& p : b.mechanisms.front().error_curve) {
            out += fmt::format("{:>8}", p.n_workers);
        }
        out += '\n';
    }
    for (const auto& m : b.mechanisms) {
        out += fmt::format("  {:<14}", display_name(m.mechanism));
        for (const auto& p : m.error_curve) {
            out += fmt::format("{:>8.4f}", p.mean_error);
        }
        out += '\n';
        if (!m.rescaled_curve.empty()) {
            out += fmt::format("  {:<14}", "  rescaled");
            for (const auto& p : m.rescaled_curve) {
                out += fmt::format("{:>8.4f}", p.mean_error);
            }
            out += '\n';
        }
    }
    out += "\naverage payment\n";
    for (const auto& m : b.mechanisms) {
        out += fmt::format("  {:<14}{:>10}", display_name(m.mechanism), format_money(m.payment.mean));
        for (const auto& [label, p] : m.payment_by_label) {
            out += fmt::format("  {}={}", label, format_money(p.mean));
        }
        out += '\n';
    }
    out += "\nhint-usage ranking vs planted quality (rank correlation)\n";
    for (const auto& m : b.mechanisms) {
        out += fmt::format("  {:<14}{:>10.4f}\n", display_name(m.mechanism), m.rank_correlation);
    }
    out += "\ninvariants: ";
    if (b.invariant_failures.empty()) {
        out += "ok\n";
    } else {
        out += fmt::format("{} failed\n", b.invariant_failures.size());
        for (const auto& f : b.invariant_failures) {
            out += fmt::format("  {}\n", f);
        }
    }
    return out;
}

std::string sweep_table(const std::string& task, const std::vector<SweepPoint>& points)
{
    std::string out = "task,T,epsilon,valid,mechanism,completion_pct,hint_rate,mean_error,avg_payment,note\n";
    for (const auto& p : points) {
        const std::string head = fmt::format("{},{:.6f},{:.6f},{}", task, p.threshold, p.epsilon, p.valid ? 1 : 0);
        std::string note = p.reason;
        for (auto& ch : note) {
            if (ch == ',') {
                ch = ';';
            }
        }
        if (!p.metrics) {
            out += fmt::format("{},-,-,-,-,-,{}\n", head, note);
            continue;
        }
        for (const auto& m : p.metrics->mechanisms) {
            double err = 0.0;
            for (const auto& c : m.error_curve) {
                err += c.mean_error;
            }
            err /= static_cast<double>(std::max<std::size_t>(1, m.error_curve.size()));
            out += fmt::format("{},{},{:.6f},{:.6f},{:.6f},{},{}\n", head, to_string(m.mechanism), m.completion_pct,
                               m.hint_rate, err, format_money(m.payment.mean), note);
        }
    }
    return out;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ReportError(fmt::format("cannot write '{}'", path.string()));
    }
    out << content;
    out.close();
    if (!out) {
        throw ReportError(fmt::format("error writing '{}'", path.string()));
    }
}

void make_dirs(const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw ReportError(fmt::format("cannot create output directory '{}'", dir.string()));
    }
}

}  // namespace

std::vector<std::filesystem::path> emit_report(const MetricsBundle& b, const std::filesystem::path& dir)
{
    make_dirs(dir);
    make_dirs(dir / "transcripts");
    std::vector<std::filesystem::path> written;
    auto put = [&](const std::filesystem::path& p, const std::string& content) {
        write_file(p, content);
        written.push_back(p);
    };
    put(dir / "completion.csv", completion_table(b));
    put(dir / "aggregation_error.csv", error_table(b, false));
    put(dir / "rescaled_error.csv", error_table(b, true));
    put(dir / "payments.csv", payment_table(b));
    put(dir / "detection.csv", detection_table(b));

    std::string gold = "repetition,questions\n";
    for (std::size_t r = 0; r < b.gold_sets.size(); ++r) {
        std::string ids;
        for (std::size_t i : b.gold_sets[r]) {
            ids += (ids.empty() ? "" : " ") + b.questions.at(i).id;
        }
        gold += fmt::format("{},{}\n", r, ids);
    }
    put(dir / "gold_sets.csv", gold);
    for (const auto& m : b.mechanisms) {
        put(dir / "transcripts" / fmt::format("{}.csv", to_string(m.mechanism)), sim::to_transcript_text(m.transcripts));
    }
    put(dir / "summary.txt", summary_text(b));
    return written;
}

std::filesystem::path emit_sweep(const std::string& task, const std::vector<SweepPoint>& points,
                                 const std::filesystem::path& dir)
{
    make_dirs(dir);
    auto path = dir / "sweep.csv";
    write_file(path, sweep_table(task, points));
    return path;
}

}  // namespace hintguide::harness

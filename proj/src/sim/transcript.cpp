#include "hintguide/sim/transcript.hpp"

#include "hintguide/common/text.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

namespace hintguide::sim {

std::string to_transcript_text(std::span<const SessionTranscript> transcripts)
{
    std::string out(kTranscriptHeader);
    out += '\n';
    for (const auto& t : transcripts) {
        for (const auto& a : t.answers) {
            out += fmt::format("{},{},{},{},{},{}\n", t.worker_id, a.question_id, to_string(a.stage),
                               a.option.empty() ? "-" : a.option,
                               a.correct ? (*a.correct ? "1" : "0") : "-", a.gold ? "1" : "0");
        }
    }
    return out;
}

std::vector<SessionTranscript> parse_transcripts(std::string_view input, std::string_view source)
{
    std::vector<SessionTranscript> out;
    std::unordered_map<std::string, std::size_t> index;
    std::unordered_set<std::string> seen;
    int line_no = 0;
    bool header_seen = false;

    auto fail = [&](const std::string& msg) {
        throw TranscriptError(fmt::format("{}:{}: {}", source, line_no, msg));
    };

    for (auto& raw : text::split(input, '\n')) {
        ++line_no;
        auto line = text::trim(raw);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        if (!header_seen) {
            if (line != kTranscriptHeader) {
                fail(fmt::format("expected header '{}'", kTranscriptHeader));
            }
            header_seen = true;
            continue;
        }
        auto fields = text::split(line, ',');
        if (fields.size() != 6) {
            fail(fmt::format("expected 6 fields, got {}", fields.size()));
        }
        for (auto& f : fields) {
            f = std::string(text::trim(f));
        }
        const std::string& worker = fields[0];
        const std::string& question = fields[1];
        if (worker.empty() || question.empty()) {
            fail("empty worker or question id");
        }
        auto stage = parse_stage(fields[2]);
        if (!stage) {
            fail(fmt::format("unknown stage '{}'", fields[2]));
        }
        AnswerRecord rec;
        rec.question_id = question;
        rec.stage = *stage;
        rec.option = fields[3] == "-" ? std::string{} : fields[3];
        if (rec.answered() == rec.option.empty()) {
            fail(rec.answered() ? "answered record without an option" : "unanswered record with an option");
        }
        if (fields[4] == "1") {
            rec.correct = true;
        } else if (fields[4] == "0") {
            rec.correct = false;
        } else if (fields[4] != "-") {
            fail(fmt::format("correct flag must be 1, 0 or -, got '{}'", fields[4]));
        }
        if (!rec.answered() && rec.correct) {
            fail("correct flag on an unanswered record");
        }
        if (fields[5] != "1" && fields[5] != "0") {
            fail(fmt::format("gold flag must be 1 or 0, got '{}'", fields[5]));
        }
        rec.gold = fields[5] == "1";
        if (!seen.insert(worker + '\n' + question).second) {
            fail(fmt::format("duplicate answer for worker '{}' question '{}'", worker, question));
        }

        auto [it, inserted] = index.try_emplace(worker, out.size());
        if (inserted) {
            out.push_back(SessionTranscript{worker, {}});
        }
        out[it->second].answers.push_back(std::move(rec));
    }
    if (!header_seen) {
        throw TranscriptError(fmt::format("{}: empty transcript", source));
    }
    return out;
}

std::vector<SessionTranscript> load_transcripts(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw TranscriptError(fmt::format("cannot read transcript '{}'", path));
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_transcripts(buf.str(), path);
}

}  // namespace hintguide::sim

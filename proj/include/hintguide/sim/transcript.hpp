#pragma once
// Line-per-answer transcript files shared by the simulator and the task service:
//
//   worker_id,question_id,stage,option,correct,gold
//   w1,q1,main,A,1,1
//   w1,q2,hint,B,0,0
//   w1,q3,skip,-,-,0
//
// stage is main|hint|skip|none, correct is 1|0|- (unknown), gold is 1|0.

#include "hintguide/sim/session.hpp"

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hintguide::sim {

class TranscriptError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kTranscriptHeader = "worker_id,question_id,stage,option,correct,gold";

std::string to_transcript_text(std::span<const SessionTranscript> transcripts);

// Workers appear in order of first occurrence. Malformed lines raise
// TranscriptError naming the source and line number.
std::vector<SessionTranscript> parse_transcripts(std::string_view text, std::string_view source = "<transcript>");
std::vector<SessionTranscript> load_transcripts(const std::string& path);

}  // namespace hintguide::sim

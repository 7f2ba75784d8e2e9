#pragma once
// The hintguide command line:
//
//   hintguide validate --params P
//   hintguide pay TRANSCRIPT --params P [--mechanism hybrid|baseline|skip] [--out F]
//   hintguide simulate [--config C] [--seed S] [--out DIR]
//   hintguide sweep [--config C] [--seed S] [--out DIR]
//   hintguide aggregate TRANSCRIPT [--out F]
//   hintguide serve [--config C] [--out STATE_DIR] [--host H] [--port N] [--seed S]
//
// Exit codes: 0 success, 1 a check failed or the command could not finish,
// 2 bad usage or invalid input.

#include <iosfwd>
#include <string>
#include <vector>

namespace hintguide::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// A bundled config name such as "binary30" or a path.
std::string resolve_config(const std::string& name_or_path);

}  // namespace hintguide::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wlpanel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitEstimation = 3;

/// Entry point shared by the wlpanel binary and the tests. args excludes argv[0].
int run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err);

} // namespace wlpanel::cli

#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "psuq/optproblem.hpp"

namespace psuq::opt {

// Writes `p` as CPLEX-style LP format text. Variable and row names are
// sanitized deterministically (illegal characters become '_', a risky leading
// character gains an "x_"/"c_" prefix, collisions gain "__<id>"). Returns the
// sanitized variable names, index-aligned with the problem's variables, so a
// solution file can be mapped back.
std::vector<std::string> write_lp(const OptProblem& p, std::ostream& os);
std::vector<std::string> write_lp_file(const OptProblem& p, const std::filesystem::path& path);

}  // namespace psuq::opt

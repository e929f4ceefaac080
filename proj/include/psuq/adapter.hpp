#pragma once

#include <string>
#include <vector>

#include "psuq/optproblem.hpp"

namespace psuq::opt {

// External solver process contract. The adapter is invoked as
//   <command> <args...> <problem.lp> <solution.txt>
// in a fresh temporary directory and must write a solution file:
//   status optimal|infeasible|unbounded|limit
//   objective <number>          (required when status is optimal or limit)
//   var <name> <value>          (one line per nonzero/reported variable)
// Unknown variables are an error; unreported ones default to 0.
struct AdapterConfig {
  std::string command;             // executable; PSUQ_ADAPTER env overrides
  std::vector<std::string> args;   // inserted before the positional files
  double timeout_sec = 600.0;
  bool keep_dir = false;           // leave the temp dir behind for debugging
};

// True when a command is configured (config or PSUQ_ADAPTER).
bool adapter_available(const AdapterConfig& cfg);

// Round-trips the problem through the external solver. Throws AdapterError
// on a missing executable, timeout, nonzero exit, or malformed solution.
SolveResult external_solve(const OptProblem& p, const AdapterConfig& cfg);

}  // namespace psuq::opt

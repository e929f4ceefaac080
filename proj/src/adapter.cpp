#include "psuq/adapter.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "psuq/errors.hpp"
#include "psuq/lp_format.hpp"

namespace fs = std::filesystem;

namespace psuq::opt {

namespace {

std::string effective_command(const AdapterConfig& cfg) {
  if (const char* env = std::getenv("PSUQ_ADAPTER"); env && *env) return env;
  return cfg.command;
}

// Single-quote for POSIX sh; embedded quotes become '\''.
std::string sh_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out.push_back(c);
  }
  out += "'";
  return out;
}

struct TempDir {
  fs::path path;
  bool keep = false;
  ~TempDir() {
    if (!keep && !path.empty()) {
      std::error_code ec;
      fs::remove_all(path, ec);  // best effort
    }
  }
};

fs::path make_temp_dir() {
  std::string templ = (fs::temp_directory_path() / "psuq-adapter-XXXXXX").string();
  std::vector<char> buf(templ.begin(), templ.end());
  buf.push_back('\0');
  if (!mkdtemp(buf.data())) throw IoError("cannot create adapter temp directory");
  return fs::path(buf.data());
}

std::string read_tail(const fs::path& p, std::size_t max_bytes = 2000) {
  std::ifstream is(p, std::ios::binary);
  if (!is) return {};
  std::ostringstream ss;
  ss << is.rdbuf();
  std::string s = ss.str();
  if (s.size() > max_bytes) s = "..." + s.substr(s.size() - max_bytes);
  return s;
}

SolveResult parse_solution(const fs::path& file, const OptProblem& p,
                           const std::vector<std::string>& vnames) {
  std::ifstream is(file);
  if (!is) throw AdapterError("adapter wrote no solution file");

  std::unordered_map<std::string, int> byname;
  byname.reserve(vnames.size());
  for (std::size_t j = 0; j < vnames.size(); ++j) byname.emplace(vnames[j], static_cast<int>(j));

  SolveResult res;
  res.x.assign(static_cast<std::size_t>(p.num_vars()), 0.0);
  bool have_status = false, have_obj = false;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;  // blank
    if (key[0] == '#') continue;
    if (key == "status") {
      std::string s;
      if (!(ls >> s)) throw AdapterError("solution line " + std::to_string(lineno) + ": missing status value");
      if (s == "optimal")
        res.status = SolveStatus::Optimal;
      else if (s == "infeasible")
        res.status = SolveStatus::Infeasible;
      else if (s == "unbounded")
        res.status = SolveStatus::Unbounded;
      else if (s == "limit") {
        res.status = SolveStatus::IterationLimit;
        res.proven = false;
      } else
        throw AdapterError("solution line " + std::to_string(lineno) + ": unknown status '" + s + "'");
      have_status = true;
    } else if (key == "objective") {
      if (!(ls >> res.objective)) throw AdapterError("solution line " + std::to_string(lineno) + ": bad objective");
      have_obj = true;
    } else if (key == "var") {
      std::string name;
      double value = 0.0;
      if (!(ls >> name >> value)) throw AdapterError("solution line " + std::to_string(lineno) + ": bad var line");
      auto it = byname.find(name);
      if (it == byname.end())
        throw AdapterError("solution line " + std::to_string(lineno) + ": unknown variable '" + name + "'");
      res.x[static_cast<std::size_t>(it->second)] = value;
    } else {
      throw AdapterError("solution line " + std::to_string(lineno) + ": unknown record '" + key + "'");
    }
  }
  if (!have_status) throw AdapterError("solution file has no status line");
  if (res.status == SolveStatus::Optimal && !have_obj)
    throw AdapterError("optimal solution file has no objective line");
  if (res.status == SolveStatus::Infeasible || res.status == SolveStatus::Unbounded) res.x.clear();
  return res;
}

}  // namespace

bool adapter_available(const AdapterConfig& cfg) { return !effective_command(cfg).empty(); }

SolveResult external_solve(const OptProblem& p, const AdapterConfig& cfg) {
  const std::string cmd = effective_command(cfg);
  if (cmd.empty()) throw AdapterError("no adapter command configured");

  TempDir dir;
  dir.path = make_temp_dir();
  dir.keep = cfg.keep_dir;
  const fs::path lp = dir.path / "problem.lp";
  const fs::path sol = dir.path / "solution.txt";
  const fs::path log = dir.path / "adapter.log";

  const auto vnames = write_lp_file(p, lp);

  std::ostringstream cl;
  cl << "timeout " << std::max(1L, static_cast<long>(cfg.timeout_sec)) << "s " << sh_quote(cmd);
  for (const auto& a : cfg.args) cl << ' ' << sh_quote(a);
  cl << ' ' << sh_quote(lp.string()) << ' ' << sh_quote(sol.string());
  cl << " > " << sh_quote(log.string()) << " 2>&1";

  const int rc = std::system(cl.str().c_str());
  const int exit_code = rc < 0 ? -1 : (rc & 0x7f) ? 128 + (rc & 0x7f) : (rc >> 8) & 0xff;
  if (exit_code == 124) throw AdapterError("adapter timed out after " + std::to_string(cfg.timeout_sec) + "s");
  if (exit_code == 127) throw AdapterError("adapter command not found: '" + cmd + "'");
  if (exit_code != 0)
    throw AdapterError("adapter exited with code " + std::to_string(exit_code) + ": " + read_tail(log));
  return parse_solution(sol, p, vnames);
}

}  // namespace psuq::opt

#include "psuq/lp_format.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <unordered_set>

#include "psuq/errors.hpp"

namespace psuq::opt {

namespace {

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool legal_char(char c) {
  if (std::isalnum(static_cast<unsigned char>(c))) return true;
  switch (c) {
    case '!': case '"': case '#': case '$': case '%': case '&': case '(':
    case ')': case ',': case ';': case '?': case '@': case '_': case '\'':
    case '`': case '{': case '}': case '~': case '.':
      return true;
    default:
      return false;
  }
}

// LP-format names must not start with a digit or '.', and a leading 'e'/'E'
// is rejected by several readers (it parses as a number). The prefix keeps
// sanitization deterministic and reversible via the returned name table.
std::string sanitize(const std::string& raw, const char* prefix) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) out.push_back(legal_char(c) ? c : '_');
  if (out.empty()) out = "_";
  const char c0 = out[0];
  if (std::isdigit(static_cast<unsigned char>(c0)) || c0 == '.' || c0 == 'e' || c0 == 'E')
    out = std::string(prefix) + out;
  if (out.size() > 255) out.resize(255);
  return out;
}

// Sanitizes every name in `raw`, resolving collisions with an "__<i>" suffix.
std::vector<std::string> sanitize_all(const std::vector<std::string>& raw, const char* prefix) {
  std::vector<std::string> out;
  out.reserve(raw.size());
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    std::string s = sanitize(raw[i], prefix);
    if (!seen.insert(s).second) {
      s += "__" + std::to_string(i);
      seen.insert(s);
    }
    out.push_back(std::move(s));
  }
  return out;
}

// Emits "+/- coef name" terms, wrapping lines to keep readers with historic
// line-length limits happy.
class TermWriter {
public:
  explicit TermWriter(std::ostream& os) : os_(os) {}

  void term(double coef, const std::string& name) {
    std::string piece = coef < 0.0 ? "- " : "+ ";
    piece += fmt_num(std::abs(coef));
    piece += ' ';
    piece += name;
    if (col_ > 0 && col_ + piece.size() + 1 > 200) {
      os_ << "\n ";
      col_ = 1;
    }
    os_ << ' ' << piece;
    col_ += piece.size() + 1;
  }

  void constant(double v) {
    os_ << ' ' << (v < 0.0 ? "- " : "+ ") << fmt_num(std::abs(v));
  }

  bool empty() const { return col_ == 0; }

private:
  std::ostream& os_;
  std::size_t col_ = 0;
};

}  // namespace

std::vector<std::string> write_lp(const OptProblem& p, std::ostream& os) {
  p.check();

  std::vector<std::string> raw_vars;
  raw_vars.reserve(static_cast<std::size_t>(p.num_vars()));
  for (const auto& v : p.vars()) raw_vars.push_back(v.name);
  const auto vnames = sanitize_all(raw_vars, "x_");

  std::vector<std::string> raw_rows;
  raw_rows.reserve(static_cast<std::size_t>(p.num_rows()));
  for (const auto& r : p.rows()) raw_rows.push_back(r.name);
  const auto rnames = sanitize_all(raw_rows, "c_");

  os << "\\ generated problem export\n";
  os << "Minimize\n obj:";
  {
    TermWriter tw(os);
    for (int j = 0; j < p.num_vars(); ++j) {
      const double c = p.obj_coef(j);
      if (c != 0.0) tw.term(c, vnames[static_cast<std::size_t>(j)]);
    }
    if (p.obj_constant() != 0.0) tw.constant(p.obj_constant());
    if (tw.empty() && p.obj_constant() == 0.0) os << " 0";
  }
  os << "\nSubject To\n";
  for (int i = 0; i < p.num_rows(); ++i) {
    const auto& row = p.row(i);
    os << ' ' << rnames[static_cast<std::size_t>(i)] << ':';
    TermWriter tw(os);
    for (const auto& e : row.terms) tw.term(e.coef, vnames[static_cast<std::size_t>(e.var)]);
    if (tw.empty()) tw.term(0.0, vnames.empty() ? "x_" : vnames[0]);
    const char* rel = row.rel == Rel::Le ? "<=" : row.rel == Rel::Ge ? ">=" : "=";
    os << ' ' << rel << ' ' << fmt_num(row.rhs) << '\n';
  }

  os << "Bounds\n";
  for (int j = 0; j < p.num_vars(); ++j) {
    const auto& v = p.var(j);
    const auto& name = vnames[static_cast<std::size_t>(j)];
    const bool lb_inf = v.lb == -kInf;
    const bool ub_inf = v.ub == kInf;
    if (v.kind == VarKind::Binary && v.lb == 0.0 && v.ub == 1.0) continue;
    if (v.lb == 0.0 && ub_inf) continue;  // LP-format default
    if (lb_inf && ub_inf) {
      os << ' ' << name << " free\n";
    } else if (v.lb == v.ub) {
      os << ' ' << name << " = " << fmt_num(v.lb) << '\n';
    } else {
      os << ' ' << (lb_inf ? "-infinity" : fmt_num(v.lb)) << " <= " << name << " <= "
         << (ub_inf ? "+infinity" : fmt_num(v.ub)) << '\n';
    }
  }

  bool any_general = false, any_binary = false;
  for (const auto& v : p.vars()) {
    any_general |= v.kind == VarKind::Integer;
    any_binary |= v.kind == VarKind::Binary;
  }
  if (any_general) {
    os << "Generals\n";
    for (int j = 0; j < p.num_vars(); ++j)
      if (p.var(j).kind == VarKind::Integer) os << ' ' << vnames[static_cast<std::size_t>(j)] << '\n';
  }
  if (any_binary) {
    os << "Binaries\n";
    for (int j = 0; j < p.num_vars(); ++j)
      if (p.var(j).kind == VarKind::Binary) os << ' ' << vnames[static_cast<std::size_t>(j)] << '\n';
  }
  os << "End\n";
  return vnames;
}

std::vector<std::string> write_lp_file(const OptProblem& p, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  auto names = write_lp(p, os);
  os.flush();
  if (!os) throw IoError("write failed for '" + path.string() + "'");
  return names;
}

}  // namespace psuq::opt

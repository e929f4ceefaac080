#include "psuq/psm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "psuq/errors.hpp"

namespace psuq::psm {

namespace {

constexpr double kKwPerMw = 1000.0;  // £/kW → £/MW bridge
constexpr double kHoursPerYear = 8760.0;

std::string bus_tag(int r) { return "b" + std::to_string(r); }

std::string link_tag(const LinkSpec& l) { return bus_tag(l.from) + "_" + bus_tag(l.to); }

bool is_unmet(const TechParams& t) { return t.id == "unmet"; }
bool is_wind(const TechParams& t) { return t.id == "wind"; }
bool is_nuclear(const TechParams& t) { return t.id == "nuclear"; }

}  // namespace

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::LpPlan: return "lpplan";
    case Variant::MilpPlan: return "milpplan";
    case Variant::Operate: return "operate";
  }
  return "?";
}

Variant variant_from_name(const std::string& s) {
  if (s == "lpplan") return Variant::LpPlan;
  if (s == "milpplan") return Variant::MilpPlan;
  if (s == "operate") return Variant::Operate;
  throw ConfigError("unknown model variant '" + s + "' (expected lpplan|milpplan|operate)");
}

const TechParams* PsmSpec::tech(const std::string& id) const {
  for (const auto& t : technologies)
    if (t.id == id) return &t;
  return nullptr;
}

void PsmSpec::validate() const {
  if (num_buses < 1) throw SpecError("num_buses must be positive");
  if (static_cast<int>(bus_names.size()) != num_buses)
    throw SpecError("bus_names must list exactly num_buses entries");
  if (demand_buses.empty()) throw SpecError("no demand buses");

  auto check_bus = [&](int r, const std::string& what) {
    if (r < 1 || r > num_buses) throw SpecError(what + ": bus " + std::to_string(r) + " out of range");
  };
  std::set<std::string> ids;
  for (const auto& t : technologies) {
    if (!ids.insert(t.id).second) throw SpecError("duplicate technology '" + t.id + "'");
    if (t.install_cost_kw_yr < 0 || t.gen_cost_kwh < 0 || t.emissions_g_kwh < 0)
      throw SpecError("technology '" + t.id + "' has negative economics");
    if (is_unmet(t) && t.install_cost_kw_yr != 0.0)
      throw SpecError("unmet demand must have zero install cost");
    for (int r : t.buses) check_bus(r, "technology '" + t.id + "'");
  }
  const TechParams* unmet = tech("unmet");
  if (!unmet) throw SpecError("spec must include the 'unmet' technology");
  for (int r : demand_buses) {
    check_bus(r, "demand bus");
    if (std::find(unmet->buses.begin(), unmet->buses.end(), r) == unmet->buses.end())
      throw SpecError("unmet demand must be placeable at every demand bus (missing bus " + std::to_string(r) + ")");
  }
  std::set<std::pair<int, int>> seen_links;
  for (const auto& l : links) {
    check_bus(l.from, "link");
    check_bus(l.to, "link");
    if (l.from >= l.to) throw SpecError("links must satisfy from < to");
    if (!seen_links.insert({l.from, l.to}).second)
      throw SpecError("duplicate link " + std::to_string(l.from) + "-" + std::to_string(l.to));
    if (l.install_cost_kw_yr < 0) throw SpecError("negative link install cost");
  }
  if (nuclear_block_mw <= 0) throw SpecError("nuclear_block_mw must be positive");
  if (nuclear_ramp_frac <= 0 || nuclear_ramp_frac > 1) throw SpecError("nuclear_ramp_frac must lie in (0,1]");
  if (nuclear_min_load_frac < 0 || nuclear_min_load_frac > 1)
    throw SpecError("nuclear_min_load_frac must lie in [0,1]");
  if (variant == Variant::Operate) {
    for (const auto& c : fixed_gen_caps) {
      check_bus(c.bus, "fixed capacity");
      if (c.mw < 0) throw SpecError("negative fixed capacity");
      if (!tech(c.tech)) throw SpecError("fixed capacity for unknown technology '" + c.tech + "'");
    }
    for (const auto& c : fixed_tr_caps) {
      check_bus(c.from, "fixed link capacity");
      check_bus(c.to, "fixed link capacity");
      if (c.mw < 0) throw SpecError("negative fixed link capacity");
    }
  }
}

PsmSpec default_spec(Variant v) {
  PsmSpec s;
  s.variant = v;
  s.num_buses = 6;
  s.bus_names = {"1", "2", "3", "4", "5", "6"};
  s.technologies = {
      {"nuclear", 300.0, 0.005, 200.0, {3}},
      {"ccgt", 100.0, 0.035, 400.0, {1, 3}},
      {"ocgt", 50.0, 0.100, 400.0, {1, 6}},
      {"wind", 100.0, 0.0, 0.0, {2, 5, 6}},
      {"unmet", 0.0, 6.0, 0.0, {2, 4, 5, 6}},
  };
  s.demand_buses = {2, 4, 5, 6};
  s.links = {
      {1, 2, 100.0}, {1, 5, 150.0}, {1, 6, 130.0}, {2, 3, 100.0},
      {3, 4, 100.0}, {4, 5, 100.0}, {5, 6, 100.0},
  };
  return s;
}

nlohmann::json spec_to_json(const PsmSpec& spec) {
  nlohmann::json j;
  j["variant"] = variant_name(spec.variant);
  j["num_buses"] = spec.num_buses;
  j["bus_names"] = spec.bus_names;
  auto& techs = j["technologies"] = nlohmann::json::array();
  for (const auto& t : spec.technologies) {
    techs.push_back({{"id", t.id},
                     {"install_cost_kw_yr", t.install_cost_kw_yr},
                     {"gen_cost_kwh", t.gen_cost_kwh},
                     {"emissions_g_kwh", t.emissions_g_kwh},
                     {"buses", t.buses}});
  }
  j["demand_buses"] = spec.demand_buses;
  auto& links = j["links"] = nlohmann::json::array();
  for (const auto& l : spec.links)
    links.push_back({{"from", l.from}, {"to", l.to}, {"install_cost_kw_yr", l.install_cost_kw_yr}});
  j["nuclear_block_mw"] = spec.nuclear_block_mw;
  j["nuclear_ramp_frac"] = spec.nuclear_ramp_frac;
  j["nuclear_min_load_frac"] = spec.nuclear_min_load_frac;
  auto& gc = j["fixed_gen_caps"] = nlohmann::json::array();
  for (const auto& c : spec.fixed_gen_caps) gc.push_back({{"tech", c.tech}, {"bus", c.bus}, {"mw", c.mw}});
  auto& tc = j["fixed_tr_caps"] = nlohmann::json::array();
  for (const auto& c : spec.fixed_tr_caps) tc.push_back({{"from", c.from}, {"to", c.to}, {"mw", c.mw}});
  return j;
}

PsmSpec spec_from_json(const nlohmann::json& j) {
  PsmSpec s;
  try {
    s.variant = variant_from_name(j.at("variant").get<std::string>());
    s.num_buses = j.at("num_buses").get<int>();
    s.bus_names = j.at("bus_names").get<std::vector<std::string>>();
    for (const auto& tj : j.at("technologies")) {
      TechParams t;
      t.id = tj.at("id").get<std::string>();
      t.install_cost_kw_yr = tj.at("install_cost_kw_yr").get<double>();
      t.gen_cost_kwh = tj.at("gen_cost_kwh").get<double>();
      t.emissions_g_kwh = tj.at("emissions_g_kwh").get<double>();
      t.buses = tj.at("buses").get<std::vector<int>>();
      s.technologies.push_back(std::move(t));
    }
    s.demand_buses = j.at("demand_buses").get<std::vector<int>>();
    for (const auto& lj : j.at("links"))
      s.links.push_back({lj.at("from").get<int>(), lj.at("to").get<int>(),
                         lj.at("install_cost_kw_yr").get<double>()});
    s.nuclear_block_mw = j.value("nuclear_block_mw", s.nuclear_block_mw);
    s.nuclear_ramp_frac = j.value("nuclear_ramp_frac", s.nuclear_ramp_frac);
    s.nuclear_min_load_frac = j.value("nuclear_min_load_frac", s.nuclear_min_load_frac);
    if (j.contains("fixed_gen_caps"))
      for (const auto& cj : j.at("fixed_gen_caps"))
        s.fixed_gen_caps.push_back(
            {cj.at("tech").get<std::string>(), cj.at("bus").get<int>(), cj.at("mw").get<double>()});
    if (j.contains("fixed_tr_caps"))
      for (const auto& cj : j.at("fixed_tr_caps"))
        s.fixed_tr_caps.push_back(
            {cj.at("from").get<int>(), cj.at("to").get<int>(), cj.at("mw").get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad model spec JSON: ") + e.what());
  }
  s.validate();
  return s;
}

PsmSpec load_spec_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open spec file '" + path.string() + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("spec file '" + path.string() + "': " + e.what());
  }
  return spec_from_json(j);
}

void apply_fixed_caps(PsmSpec& spec, const nlohmann::json& j) {
  try {
    spec.fixed_gen_caps.clear();
    spec.fixed_tr_caps.clear();
    for (const auto& cj : j.at("gen"))
      spec.fixed_gen_caps.push_back(
          {cj.at("tech").get<std::string>(), cj.at("bus").get<int>(), cj.at("mw").get<double>()});
    for (const auto& cj : j.at("tr"))
      spec.fixed_tr_caps.push_back(
          {cj.at("from").get<int>(), cj.at("to").get<int>(), cj.at("mw").get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad fixed-capacity JSON: ") + e.what());
  }
}

void load_fixed_caps_file(PsmSpec& spec, const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open capacity file '" + path.string() + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("capacity file '" + path.string() + "': " + e.what());
  }
  apply_fixed_caps(spec, j);
}

void scale_fixed_caps(PsmSpec& spec, double factor) {
  if (!(factor >= 0.0)) throw ConfigError("capacity scale factor must be >= 0");
  for (auto& c : spec.fixed_gen_caps) c.mw *= factor;
  for (auto& c : spec.fixed_tr_caps) c.mw *= factor;
}

const Output* OutputSet::find(const std::string& name) const {
  for (const auto& o : items)
    if (o.name == name) return &o;
  return nullptr;
}

double OutputSet::value_of(const std::string& name) const {
  const Output* o = find(name);
  if (!o) throw ValidationError("no output named '" + name + "'");
  return o->value;
}

nlohmann::json outputs_to_json(const OutputSet& outputs) {
  auto arr = nlohmann::json::array();
  for (const auto& o : outputs.items)
    arr.push_back({{"name", o.name}, {"value", o.value}, {"unit", o.unit}});
  return arr;
}

void write_outputs_csv(const OutputSet& outputs, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << "name,value,unit\n";
  char buf[40];
  for (const auto& o : outputs.items) {
    std::snprintf(buf, sizeof buf, "%.17g", o.value);
    os << o.name << ',' << buf << ',' << o.unit << '\n';
  }
  if (!os.flush()) throw IoError("write failed for '" + path.string() + "'");
}

PsmProblem build_problem(const PsmSpec& spec, const TimeSeriesTable& table) {
  spec.validate();
  validate_table(table);

  const int T = static_cast<int>(table.size());
  const std::size_t nt = static_cast<std::size_t>(T);
  const double horizon_frac = static_cast<double>(T) / kHoursPerYear;
  const bool planning = spec.variant != Variant::Operate;

  PsmProblem out;
  out.spec = spec;
  out.horizon_hours = T;
  auto& p = out.problem;

  // Table columns per bus number; -1 when the table lacks the bus.
  std::vector<int> col(static_cast<std::size_t>(spec.num_buses) + 1, -1);
  for (int r = 1; r <= spec.num_buses; ++r)
    col[static_cast<std::size_t>(r)] = table.bus_index(spec.bus_names[static_cast<std::size_t>(r - 1)]);
  const auto demand_at = [&](int r, std::size_t t) -> double {
    const int c = col[static_cast<std::size_t>(r)];
    return c < 0 ? 0.0 : table.demand_mw[static_cast<std::size_t>(c)][t];
  };
  const auto wind_cf_at = [&](int r, std::size_t t) -> double {
    const int c = col[static_cast<std::size_t>(r)];
    return c < 0 ? 0.0 : table.wind_cf[static_cast<std::size_t>(c)][t];
  };

  const auto is_demand_bus = [&](int r) {
    return std::find(spec.demand_buses.begin(), spec.demand_buses.end(), r) != spec.demand_buses.end();
  };
  for (int r = 1; r <= spec.num_buses; ++r) {
    if (is_demand_bus(r)) {
      if (col[static_cast<std::size_t>(r)] < 0)
        throw SpecError("table lacks demand bus '" + spec.bus_names[static_cast<std::size_t>(r - 1)] + "'");
      continue;
    }
    // Topology contract: load may only exist where the spec serves it.
    const int c = col[static_cast<std::size_t>(r)];
    if (c < 0) continue;
    for (std::size_t t = 0; t < nt; ++t)
      if (table.demand_mw[static_cast<std::size_t>(c)][t] != 0.0)
        throw SpecError("table has demand at non-demand bus " + std::to_string(r));
  }
  for (const auto& tech : spec.technologies)
    if (is_wind(tech))
      for (int r : tech.buses)
        if (col[static_cast<std::size_t>(r)] < 0)
          throw SpecError("table lacks wind bus '" + spec.bus_names[static_cast<std::size_t>(r - 1)] + "'");

  // Operate capacity lookup.
  std::map<std::pair<std::string, int>, double> fixed_gen;
  for (const auto& c : spec.fixed_gen_caps) fixed_gen[{c.tech, c.bus}] += c.mw;
  std::map<std::pair<int, int>, double> fixed_tr;
  for (const auto& c : spec.fixed_tr_caps) {
    const auto key = std::minmax(c.from, c.to);
    fixed_tr[{key.first, key.second}] += c.mw;
  }

  const std::size_t ntech = spec.technologies.size();
  const std::size_t nlink = spec.links.size();

  // --- Capacity variables (planning) / fixed capacities (operate).
  out.cap_var.assign(ntech, {});
  out.nuclear_block_var.clear();
  out.fixed_cap_mw.assign(ntech, {});
  for (std::size_t ti = 0; ti < ntech; ++ti) {
    const auto& tech = spec.technologies[ti];
    if (is_unmet(tech)) continue;
    for (int r : tech.buses) {
      if (planning) {
        const int v = p.add_var("cap_" + tech.id + "_" + bus_tag(r), 0.0, opt::kInf);
        out.cap_var[ti].push_back(v);
        p.add_obj(v, horizon_frac * tech.install_cost_kw_yr * kKwPerMw);
        if (spec.variant == Variant::MilpPlan && is_nuclear(tech)) {
          const int k = p.add_var("nblk_" + bus_tag(r), 0.0, opt::kInf, opt::VarKind::Integer);
          out.nuclear_block_var.push_back(k);
          p.add_row("nuclear_blocks_" + bus_tag(r), opt::Rel::Eq, 0.0,
                    {{v, 1.0}, {k, -spec.nuclear_block_mw}});
        }
      } else {
        auto it = fixed_gen.find({tech.id, r});
        out.fixed_cap_mw[ti].push_back(it == fixed_gen.end() ? 0.0 : it->second);
      }
    }
  }
  out.cap_tr_var.clear();
  out.fixed_tr_mw.clear();
  for (const auto& l : spec.links) {
    if (planning) {
      const int v = p.add_var("cap_tr_" + link_tag(l), 0.0, opt::kInf);
      out.cap_tr_var.push_back(v);
      p.add_obj(v, horizon_frac * l.install_cost_kw_yr * kKwPerMw);
    } else {
      auto it = fixed_tr.find({l.from, l.to});
      out.fixed_tr_mw.push_back(it == fixed_tr.end() ? 0.0 : it->second);
    }
  }

  // --- Hourly variables.
  out.gen_var.assign(ntech, {});
  out.commit_var.assign(ntech, {});
  for (std::size_t ti = 0; ti < ntech; ++ti) {
    const auto& tech = spec.technologies[ti];
    out.gen_var[ti].assign(tech.buses.size(), std::vector<int>(nt, -1));
    if (!planning && is_nuclear(tech) && spec.nuclear_min_load_frac > 0.0)
      out.commit_var[ti].assign(tech.buses.size(), {});
  }
  out.trp_var.assign(nlink, std::vector<int>(nt, -1));
  out.trm_var.assign(nlink, std::vector<int>(nt, -1));

  for (std::size_t t = 0; t < nt; ++t) {
    const std::string ts = "_t" + std::to_string(t);
    for (std::size_t ti = 0; ti < ntech; ++ti) {
      const auto& tech = spec.technologies[ti];
      for (std::size_t k = 0; k < tech.buses.size(); ++k) {
        const int r = tech.buses[k];
        double ub = opt::kInf;
        if (!planning && !is_unmet(tech)) {
          const double cap = out.fixed_cap_mw[ti][k];
          ub = is_wind(tech) ? cap * wind_cf_at(r, t) : cap;
        }
        const int v = p.add_var("gen_" + tech.id + "_" + bus_tag(r) + ts, 0.0, ub);
        out.gen_var[ti][k][t] = v;
        if (tech.gen_cost_kwh != 0.0) p.add_obj(v, tech.gen_cost_kwh * kKwPerMw);
      }
    }
    for (std::size_t li = 0; li < nlink; ++li) {
      const std::string tag = link_tag(spec.links[li]) + ts;
      out.trp_var[li][t] = p.add_var("trp_" + tag, 0.0, opt::kInf);
      out.trm_var[li][t] = p.add_var("trm_" + tag, 0.0, opt::kInf);
    }
    if (!planning) {
      for (std::size_t ti = 0; ti < ntech; ++ti) {
        const auto& tech = spec.technologies[ti];
        if (out.commit_var[ti].empty()) continue;
        for (std::size_t k = 0; k < tech.buses.size(); ++k) {
          if (out.fixed_cap_mw[ti][k] <= 0.0) continue;
          if (out.commit_var[ti][k].size() != nt) out.commit_var[ti][k].assign(nt, -1);
          out.commit_var[ti][k][t] =
              p.add_var("u_" + tech.id + "_" + bus_tag(tech.buses[k]) + ts, 0.0, 1.0, opt::VarKind::Binary);
        }
      }
    }
  }

  // --- Rows. Balance at every bus, then capacity/commitment/ramp coupling.
  for (std::size_t t = 0; t < nt; ++t) {
    const std::string ts = "_t" + std::to_string(t);
    for (int r = 1; r <= spec.num_buses; ++r) {
      std::vector<opt::RowEntry> terms;
      for (std::size_t ti = 0; ti < ntech; ++ti) {
        const auto& tech = spec.technologies[ti];
        for (std::size_t k = 0; k < tech.buses.size(); ++k)
          if (tech.buses[k] == r) terms.push_back({out.gen_var[ti][k][t], 1.0});
      }
      for (std::size_t li = 0; li < nlink; ++li) {
        const auto& l = spec.links[li];
        if (l.to == r) {
          terms.push_back({out.trp_var[li][t], 1.0});
          terms.push_back({out.trm_var[li][t], -1.0});
        } else if (l.from == r) {
          terms.push_back({out.trp_var[li][t], -1.0});
          terms.push_back({out.trm_var[li][t], 1.0});
        }
      }
      const double d = is_demand_bus(r) ? demand_at(r, t) : 0.0;
      p.add_row("bal_" + bus_tag(r) + ts, opt::Rel::Eq, d, std::move(terms));
    }

    for (std::size_t ti = 0; ti < ntech; ++ti) {
      const auto& tech = spec.technologies[ti];
      if (is_unmet(tech)) continue;
      for (std::size_t k = 0; k < tech.buses.size(); ++k) {
        const int r = tech.buses[k];
        const int g = out.gen_var[ti][k][t];
        if (planning) {
          const int cv = out.cap_var[ti][k];
          const double capcoef = is_wind(tech) ? -wind_cf_at(r, t) : -1.0;
          p.add_row("cap_" + tech.id + "_" + bus_tag(r) + ts, opt::Rel::Le, 0.0, {{g, 1.0}, {cv, capcoef}});
        } else if (!out.commit_var[ti].empty() && out.commit_var[ti][k].size() == nt &&
                   out.commit_var[ti][k][t] >= 0) {
          const double cap = out.fixed_cap_mw[ti][k];
          const int u = out.commit_var[ti][k][t];
          p.add_row("commit_hi_" + tech.id + "_" + bus_tag(r) + ts, opt::Rel::Le, 0.0, {{g, 1.0}, {u, -cap}});
          p.add_row("commit_lo_" + tech.id + "_" + bus_tag(r) + ts, opt::Rel::Ge, 0.0,
                    {{g, 1.0}, {u, -spec.nuclear_min_load_frac * cap}});
        }
      }
    }

    for (std::size_t li = 0; li < nlink; ++li) {
      const auto& l = spec.links[li];
      if (planning) {
        p.add_row("tr_cap_" + link_tag(l) + ts, opt::Rel::Le, 0.0,
                  {{out.trp_var[li][t], 1.0}, {out.trm_var[li][t], 1.0}, {out.cap_tr_var[li], -1.0}});
      } else {
        p.add_row("tr_cap_" + link_tag(l) + ts, opt::Rel::Le, out.fixed_tr_mw[li],
                  {{out.trp_var[li][t], 1.0}, {out.trm_var[li][t], 1.0}});
      }
    }
  }

  // Ramp limits couple consecutive hours; resampled tables are treated as
  // contiguous time, so joins between source blocks are constrained too.
  for (std::size_t ti = 0; ti < ntech; ++ti) {
    const auto& tech = spec.technologies[ti];
    if (!is_nuclear(tech)) continue;
    for (std::size_t k = 0; k < tech.buses.size(); ++k) {
      const int r = tech.buses[k];
      const double cap = planning ? 0.0 : out.fixed_cap_mw[ti][k];
      for (std::size_t t = 1; t < nt; ++t) {
        const int g0 = out.gen_var[ti][k][t - 1];
        const int g1 = out.gen_var[ti][k][t];
        const std::string ts = "_" + bus_tag(r) + "_t" + std::to_string(t);
        if (planning) {
          const int cv = out.cap_var[ti][k];
          p.add_row("ramp_up" + ts, opt::Rel::Le, 0.0,
                    {{g1, 1.0}, {g0, -1.0}, {cv, -spec.nuclear_ramp_frac}});
          p.add_row("ramp_dn" + ts, opt::Rel::Le, 0.0,
                    {{g0, 1.0}, {g1, -1.0}, {cv, -spec.nuclear_ramp_frac}});
        } else {
          const double lim = spec.nuclear_ramp_frac * cap;
          p.add_row("ramp_up" + ts, opt::Rel::Le, lim, {{g1, 1.0}, {g0, -1.0}});
          p.add_row("ramp_dn" + ts, opt::Rel::Le, lim, {{g0, 1.0}, {g1, -1.0}});
        }
      }
    }
  }

  p.check();
  return out;
}

OutputSet extract_outputs(const PsmProblem& built, const opt::SolveResult& result) {
  if (result.status != opt::SolveStatus::Optimal && result.status != opt::SolveStatus::NodeLimit &&
      result.status != opt::SolveStatus::IterationLimit)
    throw SolverError(std::string("cannot extract outputs from a solve with status ") +
                      opt::status_name(result.status));
  if (static_cast<int>(result.x.size()) != built.problem.num_vars())
    throw ValidationError("solution size does not match the problem");

  const PsmSpec& spec = built.spec;
  const double T = static_cast<double>(built.horizon_hours);
  const double ann = kHoursPerYear / T;
  const bool planning = spec.variant != Variant::Operate;
  const std::size_t nt = static_cast<std::size_t>(built.horizon_hours);
  const auto x = [&](int v) { return result.x[static_cast<std::size_t>(v)]; };

  OutputSet out;
  auto emit = [&](std::string name, double value, const char* unit) {
    out.items.push_back({std::move(name), value, unit});
  };

  for (std::size_t ti = 0; ti < spec.technologies.size(); ++ti) {
    const auto& tech = spec.technologies[ti];
    if (is_unmet(tech)) continue;
    for (std::size_t k = 0; k < tech.buses.size(); ++k) {
      const double cap = planning ? x(built.cap_var[ti][k]) : built.fixed_cap_mw[ti][k];
      emit("cap_" + tech.id + "_" + bus_tag(tech.buses[k]), cap, "MW");
    }
  }
  for (std::size_t li = 0; li < spec.links.size(); ++li) {
    const double cap = planning ? x(built.cap_tr_var[li]) : built.fixed_tr_mw[li];
    emit("cap_tr_" + link_tag(spec.links[li]), cap, "MW");
  }

  double gen_total = 0.0, unmet_total = 0.0, emissions_g = 0.0;
  for (std::size_t ti = 0; ti < spec.technologies.size(); ++ti) {
    const auto& tech = spec.technologies[ti];
    double tech_total = 0.0;
    for (std::size_t k = 0; k < tech.buses.size(); ++k) {
      double sum = 0.0;
      for (std::size_t t = 0; t < nt; ++t) sum += x(built.gen_var[ti][k][t]);
      emit("gen_" + tech.id + "_" + bus_tag(tech.buses[k]), sum * ann, "MWh/yr");
      tech_total += sum;
    }
    emit("gen_" + tech.id + "_total", tech_total * ann, "MWh/yr");
    emissions_g += tech.emissions_g_kwh * tech_total * kKwPerMw;
    if (is_unmet(tech))
      unmet_total += tech_total;
    else
      gen_total += tech_total;
  }
  emit("gen_total", gen_total * ann, "MWh/yr");

  for (std::size_t li = 0; li < spec.links.size(); ++li) {
    const auto& l = spec.links[li];
    double fwd = 0.0, rev = 0.0;
    for (std::size_t t = 0; t < nt; ++t) {
      const double f = x(built.trp_var[li][t]) - x(built.trm_var[li][t]);
      (f >= 0.0 ? fwd : rev) += std::abs(f);
    }
    emit("tr_" + bus_tag(l.from) + "_" + bus_tag(l.to), fwd * ann, "MWh/yr");
    emit("tr_" + bus_tag(l.to) + "_" + bus_tag(l.from), rev * ann, "MWh/yr");
  }

  emit("unmet_energy_total", unmet_total * ann, "MWh/yr");

  double peak_unmet = 0.0;
  for (std::size_t t = 0; t < nt; ++t) {
    double u = 0.0;
    for (std::size_t ti = 0; ti < spec.technologies.size(); ++ti) {
      const auto& tech = spec.technologies[ti];
      if (!is_unmet(tech)) continue;
      for (std::size_t k = 0; k < tech.buses.size(); ++k) u += x(built.gen_var[ti][k][t]);
    }
    peak_unmet = std::max(peak_unmet, u);
  }
  emit("peak_unmet_systemwide", peak_unmet, "MW");

  // grams = g/kWh · MWh · 1000; tonnes = grams / 1e6.
  emit("emissions_total", emissions_g / 1.0e6 * ann, "tCO2e/yr");
  emit("cost_total", result.objective * ann, "GBP/yr");
  return out;
}

}  // namespace psuq::psm

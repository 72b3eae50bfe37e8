#include "thermoshift/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "thermoshift/counting.hpp"
#include "thermoshift/manhattan.hpp"

namespace thermoshift {

using json = nlohmann::ordered_json;

struct RunConfig {
  json doc;
};

namespace {

constexpr const char* kVersion = "0.1.0";

const json& need(const json& j, const std::string& key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError("missing key '" + key + "' in " + where);
  return *it;
}

double num(const json& j, const std::string& key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_number()) throw ConfigError("key '" + key + "' in " + where + " must be a number");
  return v.get<double>();
}

double num_or(const json& j, const std::string& key, double dflt) {
  auto it = j.find(key);
  if (it == j.end()) return dflt;
  if (!it->is_number()) throw ConfigError("key '" + key + "' must be a number");
  return it->get<double>();
}

std::int64_t int_or(const json& j, const std::string& key, std::int64_t dflt) {
  auto it = j.find(key);
  if (it == j.end()) return dflt;
  if (!it->is_number_integer()) throw ConfigError("key '" + key + "' must be an integer");
  return it->get<std::int64_t>();
}

std::string str_or(const json& j, const std::string& key, const std::string& dflt) {
  auto it = j.find(key);
  if (it == j.end()) return dflt;
  if (!it->is_string()) throw ConfigError("key '" + key + "' must be a string");
  return it->get<std::string>();
}

std::vector<double> grid_from_string(const std::string& s) {
  // "start:step:end", inclusive of both ends where the arithmetic lands.
  double start, step, end;
  char c1, c2;
  std::istringstream is(s);
  if (!(is >> start >> c1 >> step >> c2 >> end) || c1 != ':' || c2 != ':' || step <= 0)
    throw ConfigError("grid must be 'start:step:end' with positive step: " + s);
  std::vector<double> out;
  for (double t = start; t <= end + 1e-12; t += step) out.push_back(t);
  if (out.empty()) throw ConfigError("empty grid: " + s);
  return out;
}

std::optional<TailModel> tail_from(const json& params) {
  auto it = params.find("tail");
  if (it == params.end()) return std::nullopt;
  const json& t = *it;
  TailModel m;
  std::string kind = str_or(t, "kind", "log_letter");
  if (kind == "log_letter")
    m.kind = TailModel::Kind::log_letter;
  else if (kind == "exp_letter")
    m.kind = TailModel::Kind::exp_letter;
  else if (kind == "finite_alphabet")
    m.kind = TailModel::Kind::finite_alphabet;
  else
    throw ConfigError("unknown tail model kind '" + kind + "'");
  m.c = num_or(t, "c", 0.0);
  m.b = num_or(t, "b", 0.0);
  m.loglog_e = num_or(t, "loglog", 0.0);
  return m;
}

}  // namespace

LoadedConfig load_config_text(const std::string& text) {
  LoadedConfig out;
  out.cfg = std::make_shared<RunConfig>();
  try {
    out.cfg->doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!out.cfg->doc.is_object()) throw ConfigError("config root must be an object");
  return out;
}

LoadedConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_config_text(ss.str());
}

ShiftSpec shift_spec_from_config(const LoadedConfig& cfg) {
  const json& doc = cfg.cfg->doc;
  const json& s = need(doc, "shift", "config");
  if (s.is_string()) {
    std::string name = s.get<std::string>();
    if (name == "full_2") return ShiftSpec::full_shift(2);
    if (name == "no_aa") return ShiftSpec::no_aa();
    if (name == "full_countable") return ShiftSpec::full_countable();
    throw ConfigError("unknown named shift '" + name + "'");
  }
  const json& alphabet = need(s, "alphabet", "shift");
  std::string kind = alphabet.is_string() ? alphabet.get<std::string>()
                                          : str_or(alphabet, "kind", "finite");
  if (kind == "countable") return ShiftSpec::full_countable();
  if (kind == "coding") {
    auto pres = group_from_config(cfg);
    return build_coding(pres).shift_spec();
  }
  if (kind != "finite") throw ConfigError("alphabet kind must be finite|countable|coding");
  auto it = s.find("transition");
  if (it == s.end()) {
    std::int64_t k = int_or(alphabet.is_object() ? alphabet : json::object(), "letters", 2);
    return ShiftSpec::full_shift(k);
  }
  if (it->is_string()) {
    std::string rule = it->get<std::string>();
    if (rule == "full")
      return ShiftSpec::full_shift(int_or(alphabet.is_object() ? alphabet : json::object(),
                                          "letters", 2));
    if (rule == "no_aa") return ShiftSpec::no_aa();
    throw ConfigError("unknown transition rule '" + rule + "'");
  }
  if (!it->is_array()) throw ConfigError("shift.transition must be a matrix or named rule");
  std::vector<std::vector<int>> m;
  for (const auto& row : *it) {
    if (!row.is_array()) throw ConfigError("shift.transition rows must be arrays");
    std::vector<int> r;
    for (const auto& v : row) {
      if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1))
        throw ConfigError("shift.transition entries must be 0 or 1");
      r.push_back(v.get<int>());
    }
    m.push_back(std::move(r));
  }
  return ShiftSpec::from_matrix(m);
}

TruncationRule truncation_from_config(const LoadedConfig& cfg) {
  const json& doc = cfg.cfg->doc;
  const json& s = need(doc, "shift", "config");
  if (!s.is_object() || s.find("truncation") == s.end())
    return TruncationRule::first_k(1 << 20);  // finite alphabets keep everything
  const json& t = s["truncation"];
  std::string rule = str_or(t, "rule", "first_k");
  if (rule == "first_k") return TruncationRule::first_k(int_or(t, "k", 100));
  if (rule == "weight_below") return TruncationRule::weight_below(num(t, "w", "truncation"));
  throw ConfigError("unknown truncation rule '" + rule + "'");
}

GroupPresentation group_from_config(const LoadedConfig& cfg, const std::string& section) {
  const json& doc = cfg.cfg->doc;
  const json& g = need(doc, section, "config");
  if (g.is_string()) {
    std::string name = g.get<std::string>();
    if (name == "default") return GroupPresentation::default_group();
    if (name == "second") return GroupPresentation::second_group();
    throw ConfigError("unknown named group '" + name + "'");
  }
  GroupPresentation pres;
  auto parse_matrix = [&](const json& m) {
    if (!m.is_array() || m.size() != 2 || !m[0].is_array() || m[0].size() != 2)
      throw ConfigError("generator matrix must be 2x2, row-major");
    Eigen::Matrix2d mat;
    mat << m[0][0].get<double>(), m[0][1].get<double>(), m[1][0].get<double>(),
        m[1][1].get<double>();
    return MobiusMap(mat);
  };
  auto parse_arc = [&](const json& a) {
    if (!a.is_array() || a.size() != 2) throw ConfigError("arc must be [lo, hi] angles");
    return CircleArc::from_angles(a[0].get<double>(), a[1].get<double>());
  };
  for (const auto& h : need(g, "hyperbolic", section)) {
    SchottkyGenerator gen;
    gen.name = str_or(h, "name", "h");
    gen.g = parse_matrix(need(h, "matrix", "hyperbolic generator"));
    gen.arc_plus = parse_arc(need(h, "arc_plus", gen.name));
    gen.arc_minus = parse_arc(need(h, "arc_minus", gen.name));
    pres.hyperbolic.push_back(gen);
  }
  for (const auto& p : need(g, "parabolic", section)) {
    SchottkyGenerator gen;
    gen.name = str_or(p, "name", "p");
    gen.g = parse_matrix(need(p, "matrix", "parabolic generator"));
    gen.parabolic = true;
    pres.parabolic.push_back(gen);
  }
  return pres;
}

PotentialPtr potential_from_config(const LoadedConfig& cfg, const TruncatedShift& shift,
                                   const std::string& section) {
  const json& doc = cfg.cfg->doc;
  const json& p = need(doc, section, "config");
  std::string kind = str_or(p, "kind", "");
  PotentialPtr out;
  if (kind == "constant") {
    out = std::make_shared<ConstantPotential>(num(p, "c", section));
  } else if (kind == "letter") {
    const json& vals = need(p, "values", section);
    std::unordered_map<Letter, double> m;
    if (vals.is_array()) {
      for (std::size_t i = 0; i < vals.size(); ++i)
        m[static_cast<Letter>(i)] = vals[i].get<double>();
    } else if (vals.is_object()) {
      for (auto it = vals.begin(); it != vals.end(); ++it)
        m[std::stoll(it.key())] = it.value().get<double>();
    } else {
      throw ConfigError("letter potential values must be an array or object");
    }
    out = std::make_shared<LetterPotential>(std::move(m));
  } else if (kind == "pair") {
    const json& vals = need(p, "values", section);
    std::map<std::pair<Letter, Letter>, double> m;
    for (std::size_t i = 0; i < vals.size(); ++i)
      for (std::size_t j = 0; j < vals[i].size(); ++j)
        m[{static_cast<Letter>(i), static_cast<Letter>(j)}] = vals[i][j].get<double>();
    out = std::make_shared<PairPotential>(std::move(m));
  } else if (kind == "log_letter") {
    out = std::make_shared<LogLetterPotential>(num_or(p, "coeff", 2.0), num_or(p, "offset", 1.0));
  } else if (kind == "geometric") {
    out = std::make_shared<GeometricMarkPotential>(int_or(p, "mark", 0),
                                                   num_or(p, "base", 0.5),
                                                   num_or(p, "scale", 1.0));
  } else if (kind == "roof") {
    auto pres = group_from_config(cfg, str_or(p, "group", "group"));
    auto coding = build_coding(pres);
    int d = static_cast<int>(int_or(need(doc, "representation", "config"), "dim", 2));
    auto rep = Representation::sym(coding, d);
    const json& fn = need(doc, "functional", "config");
    Eigen::VectorXd phi;
    if (fn.find("alpha") != fn.end())
      phi = phi_from_alpha(fn["alpha"].get<std::vector<double>>(), d);
    else if (fn.find("omega") != fn.end())
      phi = phi_from_omega(fn["omega"].get<std::vector<double>>(), d);
    else
      throw ConfigError("functional needs 'alpha' or 'omega' coefficients");
    out = std::make_shared<RoofPotential>(coding, rep, phi);
  } else {
    throw ConfigError("unknown potential kind '" + kind + "' in " + section);
  }
  auto reg = p.find("regularize");
  if (reg != p.end()) {
    int N = static_cast<int>(int_or(*reg, "N", 1));
    double B = num_or(*reg, "B", 1.0);
    out = regularize(out, N, B, shift);
  }
  return out;
}

namespace {

json provenance(const LoadedConfig& cfg, const json& effective) {
  json p;
  p["tool"] = "thermoshift";
  p["version"] = kVersion;
  p["seed"] = int_or(cfg.cfg->doc, "seed", 0);
  const char* threads = std::getenv("THERMOSHIFT_THREADS");
  p["threads"] = threads ? std::atoi(threads) : 1;
  p["effective_parameters"] = effective;
  p["config"] = cfg.cfg->doc;
  return p;
}

std::string render(const json& report, const std::string& format,
                   const std::vector<std::string>& csv_header,
                   const std::vector<std::vector<double>>& csv_rows) {
  if (format == "json") return report.dump(2) + "\n";
  // csv: provenance as a commented header line, then the table
  std::ostringstream os;
  os << "# provenance: " << report["provenance"].dump() << "\n";
  if (report.contains("result") && !report["result"].is_null())
    os << "# result: " << report["result"].dump() << "\n";
  for (std::size_t i = 0; i < csv_header.size(); ++i)
    os << (i ? "," : "") << csv_header[i];
  os << "\n";
  os.precision(17);
  for (const auto& row : csv_rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
  return os.str();
}

}  // namespace

RunResult run(const LoadedConfig& cfg, const std::string& output_override,
              const std::string& format_override) {
  RunResult res;
  const json& doc = cfg.cfg->doc;
  try {
    std::string command = need(doc, "command", "config").get<std::string>();
    json out_cfg = doc.contains("output") ? doc["output"] : json::object();
    std::string path = output_override.empty() ? str_or(out_cfg, "path", "") : output_override;
    std::string format =
        format_override.empty() ? str_or(out_cfg, "format", "json") : format_override;
    if (format != "json" && format != "csv")
      throw ConfigError("output format must be 'json' or 'csv'");
    json params = doc.contains("params") ? doc["params"] : json::object();

    json report;
    json effective;
    std::vector<std::string> csv_header;
    std::vector<std::vector<double>> csv_rows;

    auto spec = std::make_shared<ShiftSpec>(shift_spec_from_config(cfg));
    auto trunc = build_truncation(*spec, truncation_from_config(cfg));
    effective["truncation_letters"] = trunc.size();
    effective["cutoff_note"] = trunc.cutoff_note;

    if (command == "pressure") {
      auto f = potential_from_config(cfg, trunc);
      std::size_t n_max = static_cast<std::size_t>(int_or(params, "n_max", 12));
      int depth = static_cast<int>(int_or(params, "depth", 1));
      double tol = num_or(params, "tol", 1e-12);
      effective["n_max"] = n_max;
      effective["depth"] = depth;
      effective["tol"] = tol;
      auto pp = pressure_periodic(trunc, *f, 0, n_max);
      auto op = build_transfer(trunc, f, depth);
      auto eq = spectral_pressure(op, tol);
      report["result"]["periodic_estimate"] = pp.value;
      report["result"]["periodic_last"] = pp.last;
      report["result"]["periodic_cesaro"] = pp.cesaro;
      report["result"]["spectral_pressure"] = eq.pressure;
      report["result"]["gibbs_constant"] = eq.gibbs_constant;
      report["result"]["residual_h"] = eq.residual_h;
      report["result"]["residual_nu"] = eq.residual_nu;
      report["result"]["mean_potential"] = eq.mean_f;
      report["result"]["iterations"] = eq.iterations;
      if (eq.h.size() <= 64) {
        report["result"]["h"] = eq.h;
        report["result"]["nu"] = eq.nu;
        report["result"]["mu"] = eq.mu;
      }
      csv_header = {"n", "p_n", "ratio_estimate"};
      for (std::size_t n = 1; n <= pp.p_n.size(); ++n)
        csv_rows.push_back({static_cast<double>(n), pp.p_n[n - 1], pp.ratio_n[n - 1]});
    } else if (command == "delta" || command == "gap") {
      auto f = potential_from_config(cfg, trunc);
      EntropyGapOptions gopts;
      gopts.delta.depth = static_cast<int>(int_or(params, "depth", 1));
      gopts.delta.tol = num_or(params, "tol", 1e-10);
      gopts.exponent.tail = tail_from(params);
      effective["depth"] = gopts.delta.depth;
      effective["tol"] = gopts.delta.tol;
      auto rep = entropy_gap_report(f, trunc, gopts);
      report["result"]["d_f"] = rep.d_f;
      report["result"]["diverges_at_d"] = rep.diverges_at_d;
      report["result"]["gap"] = to_string(rep.gap);
      report["result"]["tail_model"] = rep.tail_model;
      if (rep.delta) report["result"]["delta"] = *rep.delta;
      if (!rep.notes.empty()) report["result"]["notes"] = rep.notes;
      if (command == "delta" && !rep.delta)
        throw NoSignChange("no Bowen root found: " + rep.notes);
      csv_header = {"d_f", "delta"};
      csv_rows.push_back({rep.d_f, rep.delta ? *rep.delta :
                                   std::numeric_limits<double>::quiet_NaN()});
    } else if (command == "count") {
      auto f = potential_from_config(cfg, trunc);
      double delta = num(params, "delta", "params");
      auto grid = grid_from_string(str_or(params, "t_grid", "4:4:24"));
      effective["delta"] = delta;
      auto records = count_orbits(*f, trunc, grid, delta);
      csv_header = {"t", "M", "R", "predicted", "ratio_M", "ratio_R", "nodes"};
      for (const auto& r : records)
        csv_rows.push_back({r.t, r.M, r.R, r.predicted, r.ratio_M, r.ratio_R,
                            static_cast<double>(r.nodes)});
      report["result"]["rows"] = csv_rows.size();
    } else if (command == "equidist") {
      auto f = potential_from_config(cfg, trunc);
      auto g = potential_from_config(cfg, trunc, "potential_g");
      double delta = num(params, "delta", "params");
      double t = num(params, "t", "params");
      auto r = equidistribution_ratio(f, g, trunc, t, delta);
      report["result"]["lhs"] = r.lhs;
      report["result"]["predicted"] = r.predicted;
      report["result"]["mean_f"] = r.mean_f;
      report["result"]["mean_g"] = r.mean_g;
      csv_header = {"t", "lhs", "predicted"};
      csv_rows.push_back({t, r.lhs, r.predicted});
    } else if (command == "manhattan") {
      auto f = potential_from_config(cfg, trunc);
      auto g = potential_from_config(cfg, trunc, "potential_g");
      TraceOptions topts;
      topts.tol = num_or(params, "tol", 1e-10);
      topts.extended_domain = params.contains("extended_domain") &&
                              params["extended_domain"].get<bool>();
      if (const char* tenv = std::getenv("THERMOSHIFT_THREADS"))
        topts.threads = std::max(1, std::atoi(tenv));
      int rays = static_cast<int>(int_or(params, "rays", 17));
      effective["rays"] = rays;
      auto pts = trace_curve(f, g, trunc, rays, topts);
      csv_header = {"theta", "a", "b", "slope", "residual", "ok"};
      for (const auto& p : pts)
        csv_rows.push_back({p.theta, p.a, p.b, p.slope, p.residual, p.ok ? 1.0 : 0.0});
      report["result"]["points"] = csv_rows.size();
    } else if (command == "intersect") {
      auto f = potential_from_config(cfg, trunc);
      auto g = potential_from_config(cfg, trunc, "potential_g");
      IntersectionOptions iopts;
      iopts.tol = num_or(params, "tol", 1e-6);
      auto rep = intersection(f, g, trunc, iopts);
      report["result"]["I"] = rep.I;
      report["result"]["J"] = rep.J;
      report["result"]["delta_f"] = rep.delta_f;
      report["result"]["delta_g"] = rep.delta_g;
      report["result"]["rigid"] = rep.rigid;
      report["result"]["margin"] = rep.margin;
      csv_header = {"I", "J", "delta_f", "delta_g", "rigid"};
      csv_rows.push_back({rep.I, rep.J, rep.delta_f, rep.delta_g, rep.rigid ? 1.0 : 0.0});
    } else if (command == "roof-table") {
      auto pres = group_from_config(cfg);
      auto coding = build_coding(pres);
      int d = static_cast<int>(int_or(need(doc, "representation", "config"), "dim", 2));
      auto rep = Representation::sym(coding, d);
      const json& fn = need(doc, "functional", "config");
      Eigen::VectorXd phi;
      if (fn.contains("alpha"))
        phi = phi_from_alpha(fn["alpha"].get<std::vector<double>>(), d);
      else
        phi = phi_from_omega(fn["omega"].get<std::vector<double>>(), d);
      RoofPotential roof(coding, rep, phi);
      csv_header = {"letter", "r", "value", "error"};
      for (std::size_t i = 0; i < trunc.size(); ++i) {
        std::int32_t w = static_cast<std::int32_t>(i);
        auto v = roof.eval(trunc, std::span<const std::int32_t>(&w, 1));
        auto l = coding.letter(trunc.letter(i));
        csv_rows.push_back({static_cast<double>(trunc.letter(i)),
                            static_cast<double>(l.r), v.value, v.error});
      }
      report["result"]["letters"] = csv_rows.size();
      report["result"]["multiplicity_bound"] = coding.multiplicity_bound();
    } else {
      throw ConfigError("unknown command '" + command + "'");
    }

    report["provenance"] = provenance(cfg, effective);
    if (format == "json" && !csv_rows.empty()) {
      json rows = json::array();
      for (const auto& r : csv_rows) rows.push_back(r);
      report["table"] = {{"columns", csv_header}, {"rows", rows}};
    }
    res.report = render(report, format, csv_header, csv_rows);
    if (!path.empty()) {
      std::ofstream out(path, std::ios::binary);
      if (!out) throw ConfigError("cannot write output file " + path);
      out << res.report;
      res.output_path = path;
    }
    res.summary = "ok: " + command;
    res.exit_code = 0;
  } catch (const ConfigError& e) {
    res.exit_code = 2;
    res.summary = std::string("config error: ") + e.what();
  } catch (const NoConvergence& e) {
    res.exit_code = 3;
    res.summary = std::string("no convergence: ") + e.what();
  } catch (const NoSignChange& e) {
    res.exit_code = 3;
    res.summary = std::string("no convergence: ") + e.what();
  } catch (const BudgetExplosion& e) {
    res.exit_code = 4;
    res.summary = std::string("budget exceeded: ") + e.what();
  } catch (const TooManyCylinders& e) {
    res.exit_code = 4;
    res.summary = std::string("budget exceeded: ") + e.what();
  } catch (const CutoffTooSmall& e) {
    res.exit_code = 4;
    res.summary = std::string("budget exceeded: ") + e.what();
  } catch (const Error& e) {
    res.exit_code = 1;
    res.summary = std::string("error: ") + e.what();
  }
  return res;
}

}  // namespace thermoshift

#include "reslab/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "json.hpp"

#include "reslab/counting.hpp"
#include "reslab/error.hpp"
#include "reslab/verify.hpp"

namespace reslab {

namespace {

using json = nlohmann::json;

double parse_decimal(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) throw ConfigError(where + ": expected a decimal string");
  const std::string s = v.get<std::string>();
  double out = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(out))
    throw ConfigError(where + ": malformed decimal '" + s + "'");
  return out;
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  return obj.at(key);
}

int get_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return v.get<int>();
}

AngleSpec parse_angle(const json& v, const std::string& where) {
  if (v.is_string()) return AngleSpec::parse_rational(v.get<std::string>());
  if (v.is_object()) {
    const json& val = field(v, "value", where);
    if (!val.is_string()) throw ConfigError(where + ": decimal angle value must be a string");
    return AngleSpec::decimal(val.get<std::string>(), get_int(field(v, "precision_bits", where), where));
  }
  throw ConfigError(where + ": angle must be a \"p/q\" string or {value, precision_bits}");
}

CuspConfig parse_cusp(const json& c, int n, const std::string& where) {
  CuspConfig out;
  if (c.contains("worst_case")) {
    const json& w = c.at("worst_case");
    WorstCaseSpec spec;
    if (w.contains("q")) spec.q = get_int(w.at("q"), where + ".q");
    if (w.contains("depth")) spec.depth = get_int(w.at("depth"), where + ".depth");
    if (w.contains("ell")) spec.ell = parse_decimal(w.at("ell"), where + ".ell");
    if (w.contains("precision_bits")) spec.precision_bits = get_int(w.at("precision_bits"), where + ".precision_bits");
    if (n != 3) throw ConfigError(where + ": worst_case cusps need dimension_n = 3");
    out.group = worst_case_angle(spec).group;
    out.worst_case = spec;
    return out;
  }
  out.group.n = n;
  out.group.rank = get_int(field(c, "rank", where), where + ".rank");
  if (c.contains("signed_m")) out.group.signed_m = c.at("signed_m").get<bool>();
  const json& gens = field(c, "generators", where);
  if (!gens.is_array()) throw ConfigError(where + ".generators: expected a list");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const std::string gw = where + ".generators[" + std::to_string(i) + "]";
    Generator g;
    const json& angles = field(gens[i], "rotation_angles_over_2pi", gw);
    const json& tr = field(gens[i], "translation", gw);
    if (!angles.is_array() || !tr.is_array()) throw ConfigError(gw + ": angles and translation must be lists");
    for (const auto& a : angles) g.rotation_angles.push_back(parse_angle(a, gw));
    for (const auto& t : tr) g.translation.push_back(parse_decimal(t, gw + ".translation"));
    out.group.generators.push_back(std::move(g));
  }
  return out;
}

Cell num(double v) { return v; }
Cell num(long long v) { return v; }

std::string csv_field(const Cell& c) {
  std::string s;
  if (std::holds_alternative<long long>(c)) s = std::to_string(std::get<long long>(c));
  else if (std::holds_alternative<double>(c)) s = format_double(std::get<double>(c));
  else if (std::holds_alternative<std::string>(c)) s = std::get<std::string>(c);
  else if (std::holds_alternative<bool>(c)) s = std::get<bool>(c) ? "true" : "false";
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + '"';
}

// ordered so objects keep the table's column order
nlohmann::ordered_json cell_json(const Cell& c) {
  using oj = nlohmann::ordered_json;
  if (std::holds_alternative<long long>(c)) return std::get<long long>(c);
  if (std::holds_alternative<double>(c)) {
    double v = std::get<double>(c);
    return std::isfinite(v) ? oj(v == 0.0 ? 0.0 : v) : oj(format_double(v));
  }
  if (std::holds_alternative<std::string>(c)) return std::get<std::string>(c);
  if (std::holds_alternative<bool>(c)) return std::get<bool>(c);
  return nullptr;
}

json report_json(const BoundReport& r) {
  json cells = json::array();
  for (const auto& c : r.cells)
    cells.push_back({{"name", c.name},
                     {"fit_slope", c.fit_slope},
                     {"c", c.c},
                     {"log_C", c.log_c},
                     {"c_fine", c.c_fine},
                     {"log_C_fine", c.log_c_fine},
                     {"deficit_coarse", c.deficit_coarse},
                     {"deficit_sup", c.deficit_sup},
                     {"growth", c.growth},
                     {"deficit_argmax", c.deficit_argmax},
                     {"coarse_points", c.coarse_points},
                     {"fine_points", c.fine_points},
                     {"monotone", c.monotone},
                     {"stable", c.stable}});
  return {{"name", r.name},        {"grid_spec", r.grid_spec},           {"seed", r.seed},
          {"deficit_sup", r.deficit_sup}, {"deficit_argmax", r.deficit_argmax}, {"stable", r.stable},
          {"cells", cells},        {"notes", r.notes}};
}

int scaled(int count, double scale, int floor_count) {
  return std::max(floor_count, static_cast<int>(std::lround((count - 1) * scale)) + 1);
}

}  // namespace

std::vector<ValidatedGroup> Config::validated() const {
  std::vector<ValidatedGroup> out;
  for (const auto& c : cusps) out.push_back(validate_group(c.group));
  return out;
}

Config parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Config cfg;
  try {
    const json& ver = field(doc, "schema_version", "config");
    if (!ver.is_string() || ver.get<std::string>() != "1") throw ConfigError("config: schema_version must be \"1\"");
    cfg.dimension_n = get_int(field(doc, "dimension_n", "config"), "config.dimension_n");
    if (cfg.dimension_n < 1) throw ConfigError("config.dimension_n must be >= 1");
    if (doc.contains("defaults")) {
      const json& d = doc.at("defaults");
      if (d.contains("precision_bits")) cfg.defaults.bits = get_int(d.at("precision_bits"), "config.defaults");
      if (d.contains("target_rel_err"))
        cfg.defaults.target_rel_err = parse_decimal(d.at("target_rel_err"), "config.defaults.target_rel_err");
      if (d.contains("mode")) {
        std::string m = d.at("mode").get<std::string>();
        if (m == "arbitrary") cfg.defaults.mode = PrecisionMode::Arbitrary;
        else if (m != "binary64") throw ConfigError("config.defaults.mode must be binary64 or arbitrary");
      }
      try {
        cfg.defaults.validate();
      } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("config.defaults: ") + e.what());
      }
    }
    const json& cusps = field(doc, "cusps", "config");
    if (!cusps.is_array()) throw ConfigError("config.cusps: expected a list");
    if (cusps.empty()) throw EmptyInput("config lists no cusps");
    for (std::size_t i = 0; i < cusps.size(); ++i)
      cfg.cusps.push_back(parse_cusp(cusps[i], cfg.dimension_n, "config.cusps[" + std::to_string(i) + "]"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validated();  // surfaces RankDeficient / PlaneOverflow / DimensionMismatch now
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // no "-0"
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, p);
}

void write_csv(const OutputTable& t, std::ostream& os) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << csv_field(t.columns[i]);
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_field(row[i]);
    os << "\n";
  }
}

void write_json(const OutputTable& t, std::ostream& os) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    auto obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < t.columns.size() && i < row.size(); ++i) obj[t.columns[i]] = cell_json(row[i]);
    arr.push_back(std::move(obj));
  }
  os << arr.dump(2) << "\n";
}

OutputFormat format_for_path(const std::string& path) {
  auto dot = path.rfind('.');
  if (dot != std::string::npos && path.substr(dot) == ".json") return OutputFormat::Json;
  return OutputFormat::Csv;
}

OutputTable cmd_modes(const Config& cfg, int m_max, double b_max) {
  if (m_max < 0 || !(b_max >= 0.0)) throw ConfigError("modes needs m_max >= 0 and b_max >= 0");
  auto groups = cfg.validated();
  int max_rank = 0;
  for (const auto& g : groups) max_rank = std::max(max_rank, g.rank());
  OutputTable t;
  t.columns = {"cusp_id", "m", "p"};
  for (int i = 1; i <= max_rank; ++i) t.columns.push_back("vstar_" + std::to_string(i));
  for (const char* c : {"b", "is_zero", "multiplicity"}) t.columns.push_back(c);
  for (std::size_t cid = 0; cid < groups.size(); ++cid) {
    auto modes = enumerate_modes(groups[cid], m_max, b_max);
    auto key = [](const Mode& md) { return md.is_zero ? -std::numeric_limits<double>::infinity() : md.log_b; };
    std::stable_sort(modes.begin(), modes.end(), [&](const Mode& a, const Mode& b) {
      if (a.m != b.m) return a.m < b.m;
      return key(a) < key(b);
    });
    for (const auto& md : modes) {
      std::vector<Cell> row = {num((long long)cid), num((long long)md.m), num((long long)md.p)};
      for (int i = 0; i < max_rank; ++i)
        row.push_back(i < static_cast<int>(md.vstar.size()) ? num((long long)md.vstar[i]) : Cell{});
      row.push_back(num(md.b));
      row.push_back(md.is_zero);
      row.push_back(num((long long)md.multiplicity));
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

OutputTable cmd_lambda(const Config& cfg, std::vector<double> u_grid) {
  if (u_grid.empty()) throw ConfigError("lambda needs a nonempty u grid");
  for (double u : u_grid)
    if (!(u > 0.0) || !std::isfinite(u)) throw ConfigError("lambda needs a positive u grid");
  std::sort(u_grid.begin(), u_grid.end());
  auto groups = cfg.validated();
  const int top = static_cast<int>(std::floor(u_grid.back()));
  std::vector<BetaTable> tables;
  for (const auto& g : groups) tables.push_back(beta_table(g, top));
  OutputTable t;
  t.columns = {"u", "cusp_id", "lambda", "witness_m", "witness_b", "witness_log_b", "lambda_x", "loglog_slope"};
  std::vector<double> prev_lambda(groups.size(), 0.0);
  for (std::size_t ui = 0; ui < u_grid.size(); ++ui) {
    const double u = u_grid[ui];
    std::vector<GrowthSample> samples;
    double lx = -std::numeric_limits<double>::infinity();
    for (const auto& tab : tables) {
      samples.push_back(lambda_growth(tab, u));
      lx = std::max(lx, samples.back().value);
    }
    for (std::size_t cid = 0; cid < groups.size(); ++cid) {
      const auto& s = samples[cid];
      std::vector<Cell> row = {num(u), num((long long)cid), num(s.value)};
      if (s.witness_m) {
        double lb = tables[cid].log_beta[*s.witness_m - 1];
        row.push_back(num((long long)*s.witness_m));
        row.push_back(num(std::exp(lb)));
        row.push_back(num(lb));
      } else {
        row.insert(row.end(), {Cell{}, Cell{}, Cell{}});
      }
      row.push_back(num(lx));
      if (ui > 0 && u > u_grid[ui - 1])
        row.push_back(num((std::log(s.value) - std::log(prev_lambda[cid])) / (std::log(u) - std::log(u_grid[ui - 1]))));
      else
        row.push_back(Cell{});
      prev_lambda[cid] = s.value;
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

OutputTable cmd_resonances(int n, double R) {
  if (n < 1 || !(R > 0.0)) throw ConfigError("resonances needs n >= 1 and R > 0");
  OutputTable t;
  t.columns = {"location_re", "location_im", "multiplicity", "exactness"};
  for (const auto& p : hyperbolic_resonances(n, R).points)
    t.rows.push_back({num(p.location.real()), num(p.location.imag()), num((long long)p.multiplicity),
                      std::string(p.exact ? "exact" : "upper_bound")});
  return t;
}

OutputTable cmd_resonances(const Config& cfg, double R, double c_bound) {
  if (!(R > 0.0) || !(c_bound > 0.0)) throw ConfigError("resonances needs R > 0 and c_bound > 0");
  // bounds from several cusps at one location add up
  std::map<double, std::uint64_t> merged;
  for (const auto& g : cfg.validated())
    for (const auto& p : cusp_pole_lattice(g, R, c_bound)) merged[p.location.real()] += p.multiplicity;
  OutputTable t;
  t.columns = {"location_re", "location_im", "multiplicity", "exactness"};
  for (auto it = merged.rbegin(); it != merged.rend(); ++it)
    t.rows.push_back({num(it->first), num(0.0), num((long long)it->second), std::string("upper_bound")});
  return t;
}

OutputTable cmd_bound(const Config& cfg, std::vector<double> R_grid, double C, bool diophantine) {
  if (R_grid.empty()) throw ConfigError("bound needs a nonempty R grid");
  for (double R : R_grid)
    if (!(R > 1.0)) throw ConfigError("bound needs every R > 1");
  if (!(C > 0.0)) throw ConfigError("bound needs C > 0");
  std::sort(R_grid.begin(), R_grid.end());
  auto groups = cfg.validated();
  OutputTable t;
  t.columns = {"R", "bound_general", "bound_diophantine"};
  for (double R : R_grid) {
    std::vector<Cell> row = {num(R), num(theorem_bound(groups, cfg.dimension_n, R, C, false))};
    row.push_back(diophantine ? num(theorem_bound(groups, cfg.dimension_n, R, C, true)) : Cell{});
    t.rows.push_back(std::move(row));
  }
  return t;
}

OutputTable cmd_worstcase(const WorstCaseSpec& spec) {
  WorstCaseResult res = worst_case_angle(spec);
  OutputTable t;
  t.columns = {"k", "a_k", "m", "j", "predicted_b", "computed_b", "log_predicted_b", "log_computed_b", "ratio"};
  for (const auto& r : res.table)
    t.rows.push_back({num((long long)r.k), res.a[r.k - 1].get_str(), num((long long)r.m), num((long long)r.j),
                      num(r.predicted_b), num(r.computed_b), num(r.log_predicted_b), num(r.log_computed_b),
                      num(std::exp(r.log_computed_b - r.log_predicted_b))});
  return t;
}

VerifyOutcome cmd_verify(const VerifyOptions& opt) {
  static const std::vector<std::string> suites = {"beta", "bessel", "fkernel", "resolvent", "coefficients", "all"};
  if (std::find(suites.begin(), suites.end(), opt.suite) == suites.end())
    throw ConfigError("unknown verify suite '" + opt.suite + "'");
  if (!(opt.grid_scale > 0.0) || opt.grid_scale > 8.0) throw ConfigError("grid_scale must lie in (0, 8]");
  auto want = [&](const char* s) { return opt.suite == "all" || opt.suite == s; };
  const double sc = opt.grid_scale;
  std::vector<BoundReport> reports;
  if (want("beta")) {
    BetaGrid g;
    g.spacing /= sc;
    reports.push_back(verify_beta_bounds(g));
  }
  if (want("bessel")) {
    BesselGrid g;
    g.radii = scaled(g.radii, sc, 3);
    g.angles = scaled(g.angles, sc, 4);
    g.xs = scaled(g.xs, sc, 5);
    BesselHooks hooks;
    if (opt.inject_bessel_fault)
      hooks.k = [](Complex, double x, bool fine_only, Complex v) { return fine_only && x > 2.0 ? v * 3.0 : v; };
    reports.push_back(verify_bessel_bounds(g, hooks));
  }
  if (want("fkernel")) {
    FGrid g;
    // the F deficit turns sharply in arg lambda where Re lambda < 0; below the
    // default density the sup aliases, so scales < 1 keep the default grid
    g.radii = scaled(g.radii, sc, g.radii);
    g.angles = scaled(g.angles, sc, g.angles);
    g.args = scaled(g.args, sc, g.args);
    reports.push_back(verify_f_bound(g));
  }
  if (want("resolvent"))
    reports.push_back(verify_resolvent_consistency(default_resolvent_cases(opt.seed, 50), {}, opt.seed));

  json exact = json::array();
  if (want("coefficients")) {
    bool rec = true;
    for (int n : {1, 2, 3})
      for (int j = 1; j <= 40; ++j) rec = rec && check_recurrence(build_coefficients(n, j, 60));
    exact.push_back({{"name", "coefficient recurrence n<=3, j<=40, N<=60"}, {"pass", rec}});
    std::mt19937_64 rng(opt.seed);
    bool ok = true;
    std::string failing;
    int done = 0;
    while (done < 20) {
      int n = 1 + int(rng() % 3), j = 1 + int(rng() % 20);
      int N = j + int(rng() % (21 - j));
      mpq_class s(long(rng() % 651) - 250, long(rng() % 50) + 1), xi(long(rng() % 201), long(rng() % 50) + 1);
      s.canonicalize();
      xi.canonicalize();
      try {
        mpq_class r = verify_boundary_identity(n, j, N, s, xi);
        if (r != 0 && ok) {
          ok = false;
          failing = "n=" + std::to_string(n) + " j=" + std::to_string(j) + " N=" + std::to_string(N) +
                    " s=" + s.get_str() + " xi_sq=" + xi.get_str() + " residual=" + r.get_str();
        }
        ++done;
      } catch (const PoleError&) {
      }
    }
    json item = {{"name", "boundary identity exact, 20 random rational cases"}, {"pass", ok}};
    if (!ok) item["failing_case"] = failing;
    exact.push_back(item);
    double r64 = verify_boundary_identity(2, 3, 12, Complex(1.3, 2.1), 0.7);
    exact.push_back({{"name", "boundary identity binary64 s=1.3+2.1i xi_sq=0.7"}, {"residual", r64},
                     {"pass", r64 < 1e-12}});
  }

  VerifyOutcome out;
  out.pass = true;
  json doc = {{"suite", opt.suite}, {"grid_scale", opt.grid_scale}, {"seed", opt.seed}};
  json reps = json::array(), failures = json::array();
  std::ostringstream text;
  for (const auto& r : reports) {
    reps.push_back(report_json(r));
    text << r.text();
    if (!r.stable) {
      out.pass = false;
      failures.push_back({{"report", r.name}, {"deficit_sup", r.deficit_sup}, {"deficit_argmax", r.deficit_argmax}});
    }
  }
  for (const auto& e : exact) {
    text << "exact " << e.at("name").get<std::string>() << ": " << (e.at("pass").get<bool>() ? "pass" : "FAIL") << "\n";
    if (!e.at("pass").get<bool>()) {
      out.pass = false;
      failures.push_back(e);
    }
  }
  doc["reports"] = reps;
  doc["exact_checks"] = exact;
  doc["failures"] = failures;
  doc["pass"] = out.pass;
  out.json = doc.dump(2) + "\n";
  out.text = text.str();
  return out;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ExplosionGuard*>(&e)) return 3;
  if (dynamic_cast<const PrecisionExhausted*>(&e)) return 4;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const AngleParse*>(&e) ||
      dynamic_cast<const RankDeficient*>(&e) || dynamic_cast<const PlaneOverflow*>(&e) ||
      dynamic_cast<const DimensionMismatch*>(&e) || dynamic_cast<const EmptyInput*>(&e) ||
      dynamic_cast<const InvalidArgument*>(&e))
    return 2;
  return 1;
}

}  // namespace reslab

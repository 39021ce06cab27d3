#include "katlas/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "katlas/cache.hpp"
#include "katlas/error.hpp"
#include "katlas/kernels.hpp"
#include "katlas/kirchhoff.hpp"
#include "katlas/rescale.hpp"

namespace katlas::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kDomain = 1;
constexpr int kUsage = 2;

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

std::string line_of(const char* key, double x) { return std::string(key) + "=" + format_double(x); }

}  // namespace

PowerNonlinearity RunConfig::nl() const { return PowerNonlinearity::from_json(nonlinearity); }

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Parse, "config must be a JSON object");
  RunConfig c;
  try {
    if (!j.contains("nonlinearity")) throw Error(ErrorKind::Parse, "config lacks 'nonlinearity'");
    c.nonlinearity = j.at("nonlinearity");
    c.N = j.value("N", c.N);
    c.a = j.value("a", c.a);
    if (j.contains("b")) c.b = j.at("b").get<double>();
    if (j.contains("b_scale")) {
      const json& s = j.at("b_scale");
      c.b_scale = BScale{s.value("reference", std::string("b_star")), s.value("factor", 1.0)};
    }
    if (j.contains("b_sweep")) {
      const json& s = j.at("b_sweep");
      BSweep w;
      w.min = s.at("min").get<double>();
      w.max = s.at("max").get<double>();
      w.count = s.value("count", w.count);
      w.log = s.value("log", w.log);
      w.relative_to = s.value("relative_to", w.relative_to);
      c.b_sweep = w;
    }
    c.k_max = j.value("k_max", c.k_max);
    if (j.contains("solver")) c.solver = ShootingConfig::from_json(j.at("solver"));
    if (j.contains("out")) c.out = j.at("out").get<std::string>();
    if (j.contains("cache")) {
      if (j.at("cache").is_null()) {
        c.use_cache = false;
      } else {
        c.cache = j.at("cache").get<std::string>();
      }
    }
    if (j.contains("lambdas")) c.lambdas = j.at("lambdas").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("config: ") + e.what());
  }
  (void)c.nl();
  return c;
}

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw Error(ErrorKind::Precondition, msg);
  };
  require(N >= 1, "N must be at least 1");
  require(std::isfinite(a) && a >= 0.0, "a must be nonnegative");
  require(!b || (std::isfinite(*b) && *b > 0.0), "b must be positive");
  require(!b_scale || (std::isfinite(b_scale->factor) && b_scale->factor > 0.0),
          "b_scale.factor must be positive");
  if (b_scale) {
    const std::string& r = b_scale->reference;
    require(r == "b_star" || r == "b_dstar" || r == "b_mid" || r == "b_tilde" || r == "inv_D1",
            "unknown b_scale.reference '" + r + "'");
  }
  if (b_sweep) {
    require(b_sweep->min > 0.0 && b_sweep->max >= b_sweep->min, "sweep bounds must be positive and ordered");
    require(b_sweep->count >= 1, "sweep count must be positive");
    const std::string& r = b_sweep->relative_to;
    require(r == "absolute" || r == "b_star" || r == "b_dstar",
            "unknown b_sweep.relative_to '" + r + "'");
  }
  require(k_max >= 1, "k_max must be at least 1");
  for (double l : lambdas) require(std::isfinite(l) && l > 0.0, "lambdas must be positive");
  solver.validate();
}

double resolve_b(const RunConfig& cfg, double D1, double Dmax) {
  if (cfg.b) return *cfg.b;
  if (!cfg.b_scale) return 1.0;
  const std::string& ref = cfg.b_scale->reference;
  double base = 0.0;
  if (ref == "inv_D1") {
    base = 1.0 / D1;
  } else if (ref == "b_tilde") {
    base = b_tilde(cfg.a, cfg.N, Dmax);
  } else {
    const Thresholds th = thresholds_b(cfg.a, cfg.N, D1);
    if (ref == "b_star") {
      base = *th.b_star;
    } else {
      if (!th.b_dstar) throw Error(ErrorKind::NotApplicable, ref + " needs N >= 5 and a > 0");
      base = ref == "b_dstar" ? *th.b_dstar : 0.5 * (*th.b_star + *th.b_dstar);
    }
  }
  return cfg.b_scale->factor * base;
}

std::vector<double> sweep_values(const BSweep& sweep, double D1, double a, int N) {
  std::optional<Thresholds> th;
  try {
    th = thresholds_b(a, N, D1);
  } catch (const Error&) {
  }
  double unit = 1.0;
  if (sweep.relative_to != "absolute") {
    const auto& ref = sweep.relative_to == "b_star" ? (th ? th->b_star : std::nullopt)
                                                    : (th ? th->b_dstar : std::nullopt);
    if (!ref) throw Error(ErrorKind::NotApplicable, "sweep reference " + sweep.relative_to + " is undefined here");
    unit = *ref;
  }
  std::vector<double> bs;
  const double lo = sweep.min * unit, hi = sweep.max * unit;
  for (int i = 0; i < sweep.count; ++i) {
    const double s = sweep.count == 1 ? 0.0 : static_cast<double>(i) / (sweep.count - 1);
    bs.push_back(sweep.log ? lo * std::pow(hi / lo, s) : lo + s * (hi - lo));
  }
  if (th) {
    // Grid points that only differ from a threshold by rounding become it.
    for (const auto& ref : {th->b_star, th->b_dstar}) {
      if (!ref) continue;
      for (double& b : bs) {
        if (std::fabs(b - *ref) <= 1e-12 * *ref) b = *ref;
      }
      bs.push_back(*ref);
    }
  }
  std::sort(bs.begin(), bs.end());
  bs.erase(std::unique(bs.begin(), bs.end()), bs.end());
  return bs;
}

namespace {

struct Common {
  std::string config;
  CLI::Option* a = nullptr;
  CLI::Option* b = nullptr;
  CLI::Option* N = nullptr;
  CLI::Option* k_max = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* cache = nullptr;
  CLI::Option* no_cache = nullptr;
  double a_v = 0.0, b_v = 0.0;
  int N_v = 0, k_v = 0;
  std::string out_v, cache_v;
};

void add_common(CLI::App* sc, Common& c) {
  sc->add_option("-c,--config", c.config, "run configuration (JSON)")->required();
  c.a = sc->add_option("--a", c.a_v, "override a");
  c.b = sc->add_option("--b", c.b_v, "override b (drops b_scale)");
  c.N = sc->add_option("--N", c.N_v, "override the dimension");
  c.k_max = sc->add_option("--k-max", c.k_v, "override the number of bound states");
  c.out = sc->add_option("--out", c.out_v, "output directory");
  c.cache = sc->add_option("--cache", c.cache_v, "cache directory (default $KATLAS_CACHE)");
  c.no_cache = sc->add_flag("--no-cache", "solve without reading or writing the cache");
}

RunConfig load_config(const Common& c) {
  RunConfig cfg = RunConfig::from_json(read_json_file(c.config));
  if (c.a->count()) cfg.a = c.a_v;
  if (c.b->count()) {
    cfg.b = c.b_v;
    cfg.b_scale.reset();
  }
  if (c.N->count()) cfg.N = c.N_v;
  if (c.k_max->count()) cfg.k_max = c.k_v;
  if (c.out->count()) cfg.out = c.out_v;
  if (c.cache->count()) cfg.cache = c.cache_v;
  if (c.no_cache->count()) cfg.use_cache = false;
  cfg.validate();
  return cfg;
}

std::optional<fs::path> cache_dir(const RunConfig& cfg) {
  if (!cfg.use_cache) return std::nullopt;
  return cfg.cache ? *cfg.cache : cache::default_dir();
}

std::string state_stem(int k) { return "states/k" + std::to_string(k); }

void write_state(const fs::path& out, const BoundState& bs) {
  write_profile_csv(out / (state_stem(bs.k) + ".csv"), bs.profile);
  write_file_atomic(out / (state_stem(bs.k) + ".json"), bs.to_json().dump(2) + "\n");
}

std::string state_line(const BoundState& bs) {
  return "k=" + std::to_string(bs.k) + " nodes=" + std::to_string(bs.nodes) + " " +
         line_of("zeta0", bs.zeta0) + " " + line_of("D", bs.D) + " " + line_of("S", bs.S) + " " +
         line_of("pohozaev_residual", bs.pohozaev_residual);
}

// Solved states ordered by D, plus the number that failed.
struct Solved {
  std::vector<StateResult> raw;
  std::vector<const BoundState*> by_D;
};

Solved solve_all(const RunConfig& cfg, const PowerNonlinearity& nl, int k_max, std::ostream& err) {
  Solved s;
  s.raw = solve_states(nl, cfg.N, k_max, cfg.solver, cache_dir(cfg));
  for (const auto& r : s.raw) {
    if (r.state) {
      s.by_D.push_back(&*r.state);
      if (r.from_cache) err << "k=" << r.k << ": loaded from cache\n";
    } else {
      err << "k=" << r.k << ": " << r.error << "\n";
    }
  }
  std::stable_sort(s.by_D.begin(), s.by_D.end(),
                   [](const BoundState* x, const BoundState* y) { return x->D < y->D; });
  return s;
}

int cmd_check_f(const RunConfig& cfg, std::ostream& out) {
  const AssumptionReport report = check_berestycki_lions(cfg.nl(), cfg.N);
  out << report.to_json().dump(2) << "\n";
  return report.all_ok() ? kOk : kDomain;
}

bool assumptions_hold(const RunConfig& cfg, const PowerNonlinearity& nl, std::ostream& err) {
  const AssumptionReport report = check_berestycki_lions(nl, cfg.N);
  if (report.all_ok()) return true;
  err << "assumptions fail:\n" << report.to_json().dump(2) << "\n";
  return false;
}

int cmd_solve_q(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const PowerNonlinearity nl = cfg.nl();
  if (!assumptions_hold(cfg, nl, err)) return kDomain;
  const Solved s = solve_all(cfg, nl, cfg.k_max, err);
  bool all = true;
  for (const auto& r : s.raw) {
    if (!r.state) {
      all = false;
      continue;
    }
    write_state(cfg.out, *r.state);
    out << state_line(*r.state) << "\n";
  }
  return all ? kOk : kDomain;
}

int cmd_thresholds(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.N < 4) {
    err << "no thresholds for N = " << cfg.N << "\n";
    return kDomain;
  }
  const PowerNonlinearity nl = cfg.nl();
  if (!assumptions_hold(cfg, nl, err)) return kDomain;
  const Solved s = solve_all(cfg, nl, 1, err);
  if (s.by_D.empty()) return kDomain;
  const double D1 = s.by_D.front()->D;
  Thresholds th;
  bool any = false;
  if (cfg.N == 4 || cfg.a > 0.0) {
    th = thresholds_b(cfg.a, cfg.N, D1);
    any = true;
  }
  if (cfg.N >= 5) {
    const double b = resolve_b(cfg, D1, D1);
    const Thresholds ta = thresholds_a(b, cfg.N, D1);
    th.a_star = ta.a_star;
    th.a_dstar = ta.a_dstar;
    any = true;
  }
  if (!any) {
    err << "no thresholds for these parameters\n";
    return kDomain;
  }
  const json j = {{"N", cfg.N}, {"a", cfg.a}, {"D1", D1}, {"thresholds", th.to_json()}};
  write_file_atomic(cfg.out / "thresholds.json", j.dump(2) + "\n");
  out << j.dump(2) << "\n";
  return kOk;
}

std::string branch_file(const AtlasEntry& e, std::size_t idx) {
  const KirchhoffSolution& b = e.branches[idx];
  std::string name = "branches/k" + std::to_string(e.k) + "_";
  if (b.label == BranchLabel::ContinuumFree) {
    name += "lambda" + std::to_string(idx);
  } else {
    name += to_string(b.label);
  }
  return name + ".csv";
}

void write_sweep(const fs::path& path, const std::vector<kernels::SweepRow>& rows) {
  std::string text = "b,branch_count,phi_lower,phi_upper\n";
  for (const auto& r : rows) {
    text += format_double(r.b) + "," + std::to_string(r.branch_count) + "," +
            format_double(r.phi_lower) + "," + format_double(r.phi_upper) + "\n";
  }
  write_file_atomic(path, text);
}

int cmd_atlas(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const PowerNonlinearity nl = cfg.nl();
  if (!assumptions_hold(cfg, nl, err)) return kDomain;
  const auto start = std::chrono::steady_clock::now();
  const Solved s = solve_all(cfg, nl, cfg.k_max, err);
  if (s.by_D.empty()) return kDomain;
  const double D1 = s.by_D.front()->D;
  const double Dmax = s.by_D.back()->D;
  const KirchhoffParams params{cfg.a, resolve_b(cfg, D1, Dmax), cfg.N};
  const auto solved = std::chrono::steady_clock::now();
  SolutionAtlas atlas = assemble_atlas(nl, params, s.raw, cfg.solver, cfg.lambdas);
  json hits = json::array();
  for (const auto& r : s.raw) {
    if (r.from_cache) hits.push_back(r.k);
  }
  atlas.timing = {
      {"solve_seconds", std::chrono::duration<double>(solved - start).count()},
      {"assemble_seconds",
       std::chrono::duration<double>(std::chrono::steady_clock::now() - solved).count()},
      {"cache_hits", hits}};

  json report = atlas.to_json();
  std::size_t verified = 0;
  for (std::size_t i = 0; i < atlas.entries.size(); ++i) {
    const AtlasEntry& e = atlas.entries[i];
    write_state(cfg.out, e.state);
    report["entries"][i]["state_csv"] = state_stem(e.k) + ".csv";
    for (std::size_t j = 0; j < e.branches.size(); ++j) {
      const std::string name = branch_file(e, j);
      write_profile_csv(cfg.out / name, e.branches[j].profile_u, "u", false);
      report["entries"][i]["branches"][j]["csv"] = name;
      if (check_gates(e.branches[j], params).pass()) ++verified;
    }
  }
  if (cfg.b_sweep) {
    const std::vector<double> bs = sweep_values(*cfg.b_sweep, D1, cfg.a, cfg.N);
    write_sweep(cfg.out / "sweep.csv", kernels::branch_sweep(bs, D1, cfg.a, cfg.N));
    report["sweep_csv"] = "sweep.csv";
  }
  write_file_atomic(cfg.out / "atlas.json", report.dump(2) + "\n");

  out << "b=" << format_double(params.b) << " entries=" << atlas.entries.size()
      << " branches=" << atlas.branch_count() << " verified=" << verified << "\n";
  for (const auto& e : atlas.entries) {
    for (const auto& b : e.branches) {
      out << "  k=" << e.k << " " << to_string(b.label) << " " << line_of("t", b.t) << " "
          << line_of("phi", b.phi_formula) << "\n";
    }
  }
  if (atlas.ground_state) {
    out << "ground state: k=" << atlas.ground_state->k << " "
        << to_string(atlas.ground_state->label) << "\n";
  }
  return verified > 0 ? kOk : kDomain;
}

bool close(double x, double y, double rel) {
  return std::fabs(x - y) <= rel * std::max(std::fabs(x), std::fabs(y));
}

int cmd_verify(const fs::path& path, std::ostream& out, std::ostream& err) {
  const json report = read_json_file(path);
  const fs::path base = path.parent_path();
  std::vector<std::string> failures;
  KirchhoffParams params;
  std::optional<PowerNonlinearity> nl;
  ShootingConfig solver;
  try {
    params.a = report.at("params").at("a").get<double>();
    params.b = report.at("params").at("b").get<double>();
    params.N = report.at("params").at("N").get<int>();
    nl = PowerNonlinearity::from_json(report.at("nonlinearity"));
    solver = ShootingConfig::from_json(report.at("solver"));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("atlas header: ") + e.what());
  }
  params.validate();

  std::size_t checked = 0;
  try {
    for (const json& ej : report.at("entries")) {
      const int k = ej.at("k").get<int>();
      const std::string tag = "k=" + std::to_string(k);
      BoundState bs;
      bs.k = k;
      bs.profile = read_profile_csv(base / ej.at("state_csv").get<std::string>(), params.N);
      if (bs.profile.dv.size() != bs.profile.size()) {
        throw Error(ErrorKind::Parse, tag + ": state profile lacks the derivative column");
      }
      bs.D = dirichlet_norm_sq(bs.profile);
      if (!close(bs.D, ej.at("D").get<double>(), 1e-12)) {
        failures.push_back(tag + ": stored D disagrees with the profile");
      }
      if (std::fabs(action(bs.profile, *nl) - bs.D / params.N) > 1e-5 * bs.D) {
        failures.push_back(tag + ": Pohozaev identity of the scalar field fails");
      }
      for (const json& bj : ej.at("branches")) {
        const BranchLabel label = branch_label_from_string(bj.at("label").get<std::string>());
        const double t = bj.at("t").get<double>();
        const std::string btag = tag + " " + to_string(label);
        const KirchhoffSolution sol = lift_at(bs, *nl, params, t, label);
        for (const auto& f : check_gates(sol, params).failures) failures.push_back(btag + ": " + f);
        if (!close(sol.phi_formula, bj.at("phi_formula").get<double>(), 1e-12)) {
          failures.push_back(btag + ": stored phi_formula does not match t");
        }
        if (label != BranchLabel::ContinuumFree) {
          const RootSet rs = h_roots(params.b * bs.D, params.a, params.N);
          const bool root = std::any_of(rs.roots.begin(), rs.roots.end(), [&](const BranchRoot& r) {
            return r.label == label && close(r.t, t, 1e-12);
          });
          if (!root) failures.push_back(btag + ": t is not a root of h(t) = b D");
        }
        const RadialProfile u = read_profile_csv(base / bj.at("csv").get<std::string>(), params.N);
        bool same = u.size() == sol.profile_u.size();
        for (std::size_t i = 0; same && i < u.size(); ++i) {
          same = close(u.r[i], sol.profile_u.r[i], 1e-15);
          same = same && u.v[i] == sol.profile_u.v[i];
        }
        if (!same) failures.push_back(btag + ": branch CSV does not match the rescaled state");
        ++checked;
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("atlas entries: ") + e.what());
  }

  for (const auto& f : failures) err << "FAIL " << f << "\n";
  out << "verified " << checked << " branches, " << failures.size() << " failures\n";
  return failures.empty() ? kOk : kDomain;
}

int exit_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Io:
    case ErrorKind::Parse: return kUsage;
    default: return kDomain;
  }
}

}  // namespace

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"katlas: radial bound states and their Kirchhoff lifts"};
  app.require_subcommand(1);
  Common commons[4];
  CLI::App* check = app.add_subcommand("check-f", "check the nonlinearity assumptions");
  CLI::App* solve = app.add_subcommand("solve-q", "solve bound states k = 0 .. k_max-1");
  CLI::App* thresh = app.add_subcommand("thresholds", "b and a thresholds from the ground state");
  CLI::App* atlas = app.add_subcommand("atlas", "lift all states and write the atlas");
  CLI::App* with_config[4] = {check, solve, thresh, atlas};
  for (int i = 0; i < 4; ++i) add_common(with_config[i], commons[i]);
  CLI::App* verify = app.add_subcommand("verify", "re-run every gate on a written atlas");
  std::string atlas_path;
  verify->add_option("atlas", atlas_path, "atlas.json")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  if (verify->parsed()) {
    try {
      return cmd_verify(atlas_path, out, err);
    } catch (const Error& e) {
      err << e.what() << "\n";
      return e.kind() == ErrorKind::Precondition ? kUsage : exit_for(e);
    }
  }

  RunConfig cfg;
  try {
    int chosen = 0;
    while (!with_config[chosen]->parsed()) ++chosen;
    cfg = load_config(commons[chosen]);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kUsage;
  }
  try {
    if (check->parsed()) return cmd_check_f(cfg, out);
    std::error_code ec;
    fs::create_directories(cfg.out, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + cfg.out.string());
    if (solve->parsed()) return cmd_solve_q(cfg, out, err);
    if (thresh->parsed()) return cmd_thresholds(cfg, out, err);
    return cmd_atlas(cfg, out, err);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_for(e);
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return kDomain;
  }
}

}  // namespace katlas::cli

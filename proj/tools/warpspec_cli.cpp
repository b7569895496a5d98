// warpspec: config-driven front end for the warpspec library.
//
//   warpspec geometry --config cfg.json --out dir
//   warpspec verify hardy|uncertainty|identity8 --config cfg.json
//   warpspec witness --config cfg.json
//   warpspec count --config cfg.json [--points-per-decade N]
//   warpspec classify --config cfg.json
//
// Exit codes: 0 ok, 1 a verification failed, 2 config error, 3 domain error,
// 4 refinement cap reached.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "warpspec/warpspec.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;
using namespace warpspec;

namespace {

constexpr const char* kTool = "warpspec";

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

// Reads one JSON object, recording every resolved value and rejecting keys
// that were never asked for.
class Section {
 public:
  Section(const json& j, std::string path) : path_(std::move(path)) {
    if (j.is_null()) return;
    if (!j.is_object()) throw ConfigError(path_ + " must be an object");
    j_ = j;
  }

  template <class T>
  T get(const std::string& key, const T& fallback) {
    seen_.insert(key);
    T v = fallback;
    if (j_.contains(key)) v = convert<T>(key);
    out_[key] = v;
    return v;
  }

  template <class T>
  T need(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(path_ + "." + key + " is required");
    T v = convert<T>(key);
    out_[key] = v;
    return v;
  }

  template <class T>
  std::optional<T> maybe(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    T v = convert<T>(key);
    out_[key] = v;
    return v;
  }

  json raw(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? j_.at(key) : json();
  }

  void put(const std::string& key, ojson v) { out_[key] = std::move(v); }

  ojson finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError("unknown field " + path_ + "." + k);
    return out_;
  }

  [[nodiscard]] bool has(const std::string& key) const { return j_.contains(key); }

 private:
  template <class T>
  T convert(const std::string& key) {
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path_ + "." + key + " has the wrong type");
    }
  }

  json j_ = json::object();
  std::string path_;
  std::set<std::string> seen_;
  ojson out_ = ojson::object();
};

struct Options {
  std::string command;
  std::string suite;
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> points_per_decade;
};

ModelGeometry parse_model(Section& m) {
  const std::string profile = m.need<std::string>("profile");
  const int n = m.need<int>("n");
  const double R = m.get<double>("R", 1.0);
  const std::optional<double> base = m.maybe<double>("base_volume");
  WarpProfile p;
  if (profile == "euclidean") {
    p = Euclidean{};
  } else if (profile == "hyperbolic") {
    p = Hyperbolic{m.get<double>("kappa", 1.0)};
  } else if (profile == "periodic") {
    p = Periodic{};
  } else if (profile == "berger") {
    p = BergerExpShrink{m.get<double>("r0", R)};
  } else if (profile == "ale") {
    p = ALEModel{m.need<double>("tau"), m.get<double>("c", 0.0)};
  } else if (profile == "ah") {
    p = AHModel{m.get<double>("c", 0.0)};
  } else if (profile == "custom") {
    p = CustomSampled{m.need<std::vector<double>>("nodes"), m.need<std::vector<double>>("h_values")};
  } else {
    throw ConfigError("model.profile: unknown profile '" + profile + "'");
  }
  ModelGeometry g = ModelGeometry::make(n, std::move(p), R, base);
  if (!base) m.put("base_volume", g.base_volume);
  return g;
}

RadialPotential parse_potential(Section& v) {
  const std::string kind = v.get<std::string>("kind", "zero");
  RadialPotential V;
  if (kind == "zero") {
    V = ZeroPotential{};
  } else if (kind == "inverse_square") {
    V = InverseSquare{v.need<double>("c")};
  } else if (kind == "shifted_inverse_square") {
    V = ShiftedInverseSquare{v.need<double>("c"), v.get<double>("shift", 0.0)};
  } else if (kind == "hyperbolic_borderline") {
    V = HyperbolicBorderline{v.get<double>("kappa", 1.0), v.need<int>("n")};
  } else if (kind == "sampled") {
    V = SampledPotential{v.need<std::vector<double>>("nodes"), v.need<std::vector<double>>("values")};
  } else {
    throw ConfigError("potential.kind: unknown kind '" + kind + "'");
  }
  validate(V);
  return V;
}

Spacing parse_spacing(const std::string& s) {
  if (s == "uniform") return Spacing::Uniform;
  if (s == "log") return Spacing::Logarithmic;
  throw ConfigError("grid.spacing must be 'uniform' or 'log'");
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + p.string());
  f << text;
}

ojson header(const Options& o, const ojson& config) {
  ojson h;
  h["tool"] = kTool;
  h["version"] = WARPSPEC_VERSION;
  h["command"] = o.command;
  if (!o.suite.empty()) h["suite"] = o.suite;
  h["config"] = config;
  return h;
}

// ---------------------------------------------------------------- geometry

int run_geometry(const Options& o, Section& root, const fs::path& out) {
  Section ms(root.raw("model"), "model");
  const ModelGeometry g = parse_model(ms);
  Section ps(root.raw("potential"), "potential");
  const RadialPotential V = parse_potential(ps);
  Section gs(root.raw("grid"), "grid");
  const double a = gs.get<double>("a", g.R);
  const double b = gs.get<double>("b", 10.0 * a);
  const auto nodes = gs.get<std::size_t>("nodes", 101);
  const Spacing spacing = parse_spacing(gs.get<std::string>("spacing", "uniform"));
  root.put("model", ms.finish());
  root.put("potential", ps.finish());
  root.put("grid", gs.finish());
  const ojson config = root.finish();

  Grid1D grid{a, b, nodes, QuadratureRule::Trapezoid, spacing};
  grid.validate();
  const std::vector<double> rs = grid.points();
  const ReducedOperator Q = liouville_potential(g, V);

  std::ostringstream geo, pot;
  geo << "r,A,B,C,s,W,boundary_coeff\n";
  pot << "t,Q\n";
  for (double r : rs) {
    const RadialInvariants inv = radial_invariants(g, r);
    geo << fmt17(r) << ',' << fmt17(inv.A) << ',' << fmt17(inv.B) << ',' << fmt17(inv.C) << ','
        << fmt17(std::exp(inv.log_density)) << ',' << fmt17(weight_from_invariants(inv, r)) << ','
        << fmt17(inv.A - 1.0 / r) << '\n';
    pot << fmt17(r) << ',' << fmt17(Q(r)) << '\n';
  }
  write_file(out / "geometry.csv", geo.str());
  write_file(out / "potential.csv", pot.str());
  ojson rep = header(o, config);
  rep["files"] = {"geometry.csv", "potential.csv"};
  write_file(out / "geometry_report.json", rep.dump(2) + "\n");
  std::cout << "wrote " << rs.size() << " rows to " << (out / "geometry.csv").string() << "\n";
  return 0;
}

// ------------------------------------------------------------------ verify

int run_verify(const Options& o, Section& root, const fs::path& out, std::uint64_t seed) {
  Section ms(root.raw("model"), "model");
  const bool needs_model = o.suite != "hardy";
  std::optional<ModelGeometry> g;
  if (needs_model || root.has("model")) g = parse_model(ms);
  Section vs(root.raw("verify"), "verify");
  const int trials = vs.get<int>("trials", 100);
  const double R = vs.get<double>("R", g ? g->R : 1.0);
  const double tol = vs.get<double>("tolerance", 1e-8);
  const auto nodes = vs.get<std::size_t>("nodes", o.suite == "identity8" ? 4097 : 1025);
  const double span = vs.get<double>("span", o.suite == "uncertainty" ? 4.0 : 10.0);
  if (g) root.put("model", ms.finish());
  root.put("verify", vs.finish());
  const ojson config = root.finish();
  if (trials < 0) throw ConfigError("verify.trials must be >= 0");
  if (!(span > 1.0)) throw ConfigError("verify.span must exceed 1");

  std::mt19937_64 rng(seed);
  ojson cases = ojson::array();
  double worst = std::numeric_limits<double>::infinity();
  bool passed = true;
  ojson extra = ojson::object();

  if (o.suite == "hardy") {
    for (int i = 0; i < trials; ++i) {
      const PiecewiseCubic f = random_piecewise_cubic(rng, R, span);
      const double s = hardy_slack(f, R, Grid1D{R, span * R, nodes});
      worst = std::min(worst, s);
      passed = passed && s >= -tol;
      cases.push_back({{"support", {f.support().first, f.support().second}}, {"slack", s}});
    }
    ojson trunc = ojson::array();
    for (double ratio : {1e2, 1e3, 1e4, 1e5}) {
      const double S = ratio * R;
      struct Root {
        double R, S;
        double value(double t) const { return t >= S ? 0.0 : std::sqrt(t) * (S - t) / (S - R); }
        double derivative(double t) const {
          return t >= S ? 0.0 : (0.5 / std::sqrt(t) * (S - t) - std::sqrt(t)) / (S - R);
        }
        std::pair<double, double> support() const { return {R, S}; }
      } f{R, S};
      const double s = hardy_slack(f, R, Grid1D{R, S, 8193, QuadratureRule::Simpson, Spacing::Logarithmic});
      trunc.push_back({{"S", S}, {"slack", s}, {"closed_form", (S + R) / (2.0 * (S - R))}});
    }
    extra["truncated_root"] = trunc;
  } else if (o.suite == "uncertainty") {
    const double bc = boundary_coefficient(*g, R);
    extra["boundary_coefficient"] = bc;
    extra["boundary_nonnegative"] = bc >= 0.0;
    for (int i = 0; i < trials; ++i) {
      const PiecewiseCubic u = random_piecewise_cubic(rng, R, span);
      const UncertaintySlack s = uncertainty_slack(*g, u, R, Grid1D{R, span * R, nodes});
      worst = std::min(worst, s.value);
      passed = passed && s.value >= -tol * std::max(1.0, std::abs(s.value));
      cases.push_back({{"support", {u.support().first, u.support().second}}, {"slack", s.value}});
    }
  } else if (o.suite == "identity8") {
    worst = 0.0;
    for (int i = 0; i < trials; ++i) {
      const PolynomialBump u = random_bump(rng, R, span * R, 0.1 * R);
      const Identity8Report r = verify_identity8(*g, u, R, Grid1D{R, span * R, nodes});
      const double rel = r.residual / std::max(1.0, std::abs(r.lhs));
      worst = std::max(worst, rel);
      passed = passed && rel < tol;
      cases.push_back({{"support", {u.lo, u.hi}}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"relative_residual", rel}});
    }
  } else {
    throw ConfigError("verify suite must be hardy, uncertainty or identity8");
  }

  ojson rep = header(o, config);
  rep["seed"] = seed;
  rep["tolerance"] = tol;
  rep[o.suite == "identity8" ? "max_relative_residual" : "min_slack"] = std::isfinite(worst) ? ojson(worst) : ojson();
  rep["passed"] = passed;
  for (auto& [k, v] : extra.items()) rep[k] = v;
  rep["cases"] = cases;
  const fs::path file = out / ("verify_" + o.suite + ".json");
  write_file(file, rep.dump(2) + "\n");
  std::cout << o.suite << ": " << (passed ? "PASS" : "FAIL") << " (" << trials << " cases, seed " << seed
            << ") -> " << file.string() << "\n";
  return passed ? 0 : 1;
}

// ----------------------------------------------------------------- witness

int run_witness(const Options& o, Section& root, const fs::path& out) {
  Section ms(root.raw("model"), "model");
  const ModelGeometry g = parse_model(ms);
  Section ps(root.raw("potential"), "potential");
  const RadialPotential V = parse_potential(ps);
  Section ws(root.raw("witness"), "witness");
  const double delta = ws.need<double>("delta");
  const double R_start = ws.get<double>("R_start", g.R);
  const int m = ws.get<int>("m", 1);
  WitnessOptions wo;
  wo.nodes = ws.get<std::size_t>("nodes", wo.nodes);
  const bool check = ws.get<bool>("minmax_check", false);
  const auto check_nodes = ws.get<std::size_t>("minmax_nodes", 20001);
  const auto check_cap = ws.get<std::size_t>("minmax_max_nodes", std::size_t{1} << 22);
  root.put("model", ms.finish());
  root.put("potential", ps.finish());
  root.put("witness", ws.finish());
  const ojson config = root.finish();

  const auto fam = witness_family(g, V, delta, R_start, m, wo);
  const Lemma21Certificate cert = lemma21_certificate(delta);
  ojson arr = ojson::array();
  for (const auto& w : fam)
    arr.push_back({{"R", w.cutoff.R},
                   {"k", w.cutoff.k},
                   {"support", {w.lo(), w.hi()}},
                   {"form_value", w.form_value},
                   {"weighted_form_value", w.weighted_form_value},
                   {"analytic_bound", w.analytic_bound}});
  ojson rep = header(o, config);
  rep["threshold"] = essential_threshold(g);
  rep["k0"] = cert.k0;
  if (check) {
    const ReducedOperator Q = shifted(liouville_potential(g, V), essential_threshold(g));
    const MinmaxReport mm = minmax_lower_bound(fam, Q, R_start, fam.back().hi(), check_nodes, check_cap);
    rep["minmax"] = {{"lower_bound", mm.lower_bound}, {"sturm_count", mm.sturm_count}, {"nodes", mm.nodes}};
  }
  rep["witnesses"] = arr;
  write_file(out / "witness.json", rep.dump(2) + "\n");
  std::cout << "wrote " << fam.size() << " witnesses to " << (out / "witness.json").string() << "\n";
  return 0;
}

// ------------------------------------------------------------------- count

int run_count(const Options& o, Section& root, const fs::path& out) {
  Section ms(root.raw("model"), "model");
  const ModelGeometry g = parse_model(ms);
  Section ps(root.raw("potential"), "potential");
  const RadialPotential V = parse_potential(ps);
  Section ss(root.raw("sweep"), "sweep");
  const double a = ss.get<double>("a", g.R);
  int ppd = ss.get<int>("points_per_decade", 2000);
  if (o.points_per_decade) {
    ppd = *o.points_per_decade;
    ss.put("points_per_decade", ppd);
  }
  std::vector<double> Ls;
  if (ss.has("L")) {
    Ls = ss.need<std::vector<double>>("L");
  }
  Section ds(ss.raw("dyadic"), "sweep.dyadic");
  if (ss.has("dyadic")) {
    if (!Ls.empty()) throw ConfigError("sweep: give either L or dyadic, not both");
    const double start = ds.need<double>("start");
    const int steps = ds.need<int>("steps");
    if (steps < 1) throw ConfigError("sweep.dyadic.steps must be >= 1");
    for (int i = 0; i < steps; ++i) Ls.push_back(std::ldexp(start, i));
    ss.put("dyadic", ds.finish());
    ss.put("L", Ls);
  }
  root.put("model", ms.finish());
  root.put("potential", ps.finish());
  root.put("sweep", ss.finish());
  const ojson config = root.finish();
  if (Ls.empty()) throw ConfigError("sweep.L is empty");
  if (ppd < 1) throw ConfigError("points per decade must be positive");

  SweepOptions so;
  so.points_per_decade = static_cast<std::size_t>(ppd);
  const CountReport r = truncation_sweep(g, V, a, Ls, so);
  std::ostringstream csv;
  csv << "L,N,count\n";
  for (std::size_t i = 0; i < r.L_values.size(); ++i)
    csv << fmt17(r.L_values[i]) << ',' << r.nodes[i] << ',' << r.counts[i] << '\n';
  write_file(out / "count.csv", csv.str());
  ojson rep = header(o, config);
  rep["threshold"] = r.threshold;
  rep["epsilon_guard"] = r.epsilon_guard;
  rep["classification"] = to_string(r.classification);
  rep["classification_rule"] = r.classification_rule;
  rep["counts"] = r.counts;
  write_file(out / "count_summary.json", rep.dump(2) + "\n");
  std::cout << "classification " << to_string(r.classification) << " -> " << (out / "count.csv").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- classify

int run_classify(const Options& o, Section& root, const fs::path& out) {
  const std::string model = root.need<std::string>("model");
  const int n = root.get<int>("n", model == "berger" ? 4 : 3);
  Verdict v;
  if (model == "pinched") {
    const double kappa = root.get<double>("kappa", 1.0);
    const double d1 = root.get<double>("delta1", 0.0);
    const double d2 = root.get<double>("delta2", 0.0);
    const ojson config = root.finish();
    v = classify_pinched(n, kappa, d1, d2);
    ojson rep = header(o, config);
    rep["margin"] = theorem31_margin(n, d1, d2);
    rep["result"] = to_string(v.result);
    rep["theorem"] = v.theorem;
    rep["threshold"] = v.threshold;
    rep["notes"] = v.notes;
    write_file(out / "classify.json", rep.dump(2) + "\n");
    std::cout << rep.dump(2) << "\n";
    return 0;
  }
  const double kappa = model == "hyperbolic" ? root.get<double>("kappa", 1.0) : 0.0;
  if (model == "ale") root.get<double>("tau", 0.5);
  double border = 1.0;
  if (model == "euclidean" || model == "ale") border = (n - 2.0) * (n - 2.0);
  Section es(root.raw("envelope"), "envelope");
  PotentialEnvelope env;
  const std::string side = es.need<std::string>("side");
  if (side == "lower") env.side = EnvelopeSide::LowerBound;
  else if (side == "upper") env.side = EnvelopeSide::UpperBound;
  else throw ConfigError("envelope.side must be 'lower' or 'upper'");
  env.c = es.get<double>("c", border);
  env.delta = es.get<double>("delta", 0.0);
  env.R0 = es.get<double>("R0", 1.0);
  env.model_correction = es.get<bool>("correction", false);
  root.put("envelope", es.finish());
  std::optional<RadialPotential> V;
  Section ps(root.raw("potential"), "potential");
  if (root.has("potential")) {
    V = parse_potential(ps);
    root.put("potential", ps.finish());
  }
  const ojson config = root.finish();

  if (model == "euclidean") v = V ? classify_euclidean(n, env, *V) : classify_euclidean(n, env);
  else if (model == "hyperbolic") v = V ? classify_hyperbolic(n, kappa, env, *V) : classify_hyperbolic(n, kappa, env);
  else if (model == "ale") v = V ? classify_ale(n, env, *V) : classify_ale(n, env);
  else if (model == "ah") v = V ? classify_ah(n, env, *V) : classify_ah(n, env);
  else if (model == "berger") v = V ? classify_berger(env, *V) : classify_berger(env);
  else throw ConfigError("model must be euclidean, hyperbolic, ale, ah, berger or pinched");

  ojson rep = header(o, config);
  rep["result"] = to_string(v.result);
  rep["theorem"] = v.theorem;
  rep["threshold"] = v.threshold;
  rep["notes"] = v.notes;
  write_file(out / "classify.json", rep.dump(2) + "\n");
  std::cout << rep.dump(2) << "\n";
  return 0;
}

int dispatch(const Options& o) {
  std::ifstream in(o.config_path);
  if (!in) throw ConfigError("cannot open config " + o.config_path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Section root(cfg, "config");
  const std::string cmd = root.get<std::string>("command", o.command);
  if (cmd != o.command) throw ConfigError("config.command '" + cmd + "' does not match subcommand " + o.command);
  std::uint64_t seed = root.get<std::uint64_t>("seed", 1);
  if (o.seed) {
    seed = *o.seed;
    root.put("seed", seed);
  }
  const fs::path out(o.out_dir);
  fs::create_directories(out);

  if (o.command == "geometry") return run_geometry(o, root, out);
  if (o.command == "verify") return run_verify(o, root, out, seed);
  if (o.command == "witness") return run_witness(o, root, out);
  if (o.command == "count") return run_count(o, root, out);
  return run_classify(o, root, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uncertainty-principle spectral tools for model manifolds"};
  app.set_version_flag("--version", WARPSPEC_VERSION);
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed = 0;
  int ppd = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out_dir, "output directory");
    sub->add_option("--seed", seed, "seed for randomized suites");
    sub->add_option("--points-per-decade", ppd, "grid points per decade for sweeps")->check(CLI::PositiveNumber);
  };
  CLI::App* geo = app.add_subcommand("geometry", "tabulate radial invariants and the reduced potential");
  CLI::App* ver = app.add_subcommand("verify", "run a randomized inequality suite");
  ver->add_option("suite", o.suite, "hardy | uncertainty | identity8")
      ->required()
      ->check(CLI::IsMember({"hardy", "uncertainty", "identity8"}));
  CLI::App* wit = app.add_subcommand("witness", "build min-max witness families");
  CLI::App* cnt = app.add_subcommand("count", "Dirichlet eigenvalue counts on truncations");
  CLI::App* cls = app.add_subcommand("classify", "apply a finiteness rule");
  for (CLI::App* s : {geo, ver, wit, cnt, cls}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  for (CLI::App* s : {geo, ver, wit, cnt, cls}) {
    if (!s->parsed()) continue;
    o.command = s->get_name();
    if (s->count("--seed") > 0) o.seed = seed;
    if (s->count("--points-per-decade") > 0) o.points_per_decade = ppd;
  }

  try {
    return dispatch(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const RefinementCapError& e) {
    std::cerr << "refinement cap: " << e.what() << "\n";
    return 4;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

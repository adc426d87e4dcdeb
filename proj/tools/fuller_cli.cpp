// fuller_cli: compute F, verify the structural identities, analyse families.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <utility>
#include <vector>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fuller/families.hpp"
#include "fuller/invariant.hpp"
#include "fuller/io.hpp"

using namespace fuller;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kDegenerate = 2;

struct RunConfig {
  std::string model;   // path, or inline JSON from a config file
  std::string family;
  std::string cls;
  std::string morse;
  std::optional<double> tol;
  std::optional<int> seeds;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  std::string out;
  bool json = false;
};

// Values from --config; command-line flags win.
void merge_config(RunConfig& cfg, const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidInput, "config '" + path + "': " + e.what());
  }
  const std::filesystem::path dir = std::filesystem::path(path).parent_path();
  auto resolve = [&](const json& v) {
    if (v.is_object()) return v.dump();
    return (dir / v.get<std::string>()).string();
  };
  try {
    for (const auto& [k, v] : j.items()) {
      if (k == "model") {
        if (cfg.model.empty()) cfg.model = resolve(v);
      } else if (k == "family") {
        if (cfg.family.empty()) cfg.family = resolve(v);
      } else if (k == "class") {
        if (cfg.cls.empty()) cfg.cls = v.get<std::string>();
      } else if (k == "morse") {
        if (cfg.morse.empty()) cfg.morse = v.get<std::string>();
      } else if (k == "tol") {
        if (!cfg.tol) cfg.tol = v.get<double>();
      } else if (k == "seeds") {
        if (!cfg.seeds) cfg.seeds = v.get<int>();
      } else if (k == "seed") {
        if (!cfg.seed) cfg.seed = v.get<std::uint64_t>();
      } else if (k == "samples") {
        if (!cfg.samples) cfg.samples = v.get<int>();
      } else if (k == "out") {
        if (cfg.out.empty()) cfg.out = v.get<std::string>();
      } else {
        fail(ErrorKind::InvalidInput, "unknown key '" + k + "' in config '" + path + "'");
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidInput, "config '" + path + "': " + e.what());
  }
}

ModelFile model_from(const std::string& spec) {
  if (spec.empty()) fail(ErrorKind::InvalidInput, "--model is required");
  if (!spec.empty() && spec.front() == '{') return parse_model(spec);
  return load_model(spec);
}

FamilySpec family_from(const std::string& spec) {
  if (spec.empty()) fail(ErrorKind::InvalidInput, "--family is required");
  if (spec.front() == '{') return parse_family(spec);
  return load_family(spec);
}

VariationalOptions variational(const RunConfig& cfg) {
  VariationalOptions o;
  if (cfg.tol) o.tol = *cfg.tol;
  if (cfg.seeds) o.n_seeds = *cfg.seeds;
  if (cfg.seed) o.seed = *cfg.seed;
  if (o.n_seeds < 1) fail(ErrorKind::InvalidInput, "--seeds must be positive");
  return o;
}

void write_out(const RunConfig& cfg, const std::string& name, const std::string& text) {
  if (cfg.out.empty()) return;
  std::filesystem::create_directories(cfg.out);
  write_text_file((std::filesystem::path(cfg.out) / name).string(), text.back() == '\n' ? text : text + "\n");
}

std::string fixed(double x, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string sci(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1e", x);
  return buf;
}

int cmd_compute(const RunConfig& cfg) {
  const ModelFile mf = model_from(cfg.model);
  const FreeHomotopyClass cls = parse_class(cfg.cls, mf.model);
  try {
    const InvariantReport r = F_invariant(mf.metric(), mf.model, cls, variational(cfg));
    std::cout << "F = " << to_string(r.F) << "\n";
    const std::string j = report_json(r);
    if (cfg.json) std::cout << j << "\n";
    write_out(cfg, "report.json", j);
    return kOk;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::PerturbationRequired) throw;
    std::cout << "degenerate family: " << e.what() << "\n"
              << "guidance: add a bump to the model, e.g. \"bumps\": [{\"center\": [0.5, 0.5], \"radius\": 0.8, "
                 "\"amplitude\": 0.01}]\n";
    return kDegenerate;
  }
}

int cmd_verify_euler(const RunConfig& cfg) {
  const ModelFile mf = model_from(cfg.model);
  const FreeHomotopyClass cls = parse_class(cfg.cls, mf.model);
  try {
    const PowerDecomposition pd = power_decomposition(cls);
    if (pd.n > 1) euler_characteristic_route(mf.metric(), mf.model, cls);
    const InvariantReport r = F_invariant(mf.metric(), mf.model, cls, variational(cfg));
    std::string line;
    for (const auto& [route, v] : r.consistency) line += (line.empty() ? "" : ", ") + to_string(route) + " = " + to_string(v);
    std::cout << line << (r.consistent() && r.consistency.size() >= 2 ? "; PASS" : "; FAIL") << "\n";
    const std::string j = report_json(r);
    if (cfg.json) std::cout << j << "\n";
    write_out(cfg, "euler.json", j);
    return r.consistent() && r.consistency.size() >= 2 ? kOk : kError;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::PerturbationRequired) throw;
    std::cout << "degenerate family: " << e.what() << "\n";
    return kDegenerate;
  }
}

MorseFunctionSpec morse_from(const RunConfig& cfg, const ModelSpace& model) {
  if (cfg.morse.empty() || cfg.morse == "default") {
    const ModelSpace base = model.kind == ModelKind::Product ? model.factors[1] : ModelSpace::circle();
    return default_morse_data(base);
  }
  if (cfg.morse == "circle_height") return circle_height();
  if (cfg.morse.rfind("surface_height", 0) == 0) {
    const ModelSpace base = model.kind == ModelKind::Product ? model.factors[1] : ModelSpace::circle();
    if (base.kind != ModelKind::FuchsianSurface) fail(ErrorKind::InvalidInput, "surface_height needs a surface base");
    return surface_height(base.group.genus);
  }
  fail(ErrorKind::InvalidInput, "unknown Morse data '" + cfg.morse + "'");
}

int cmd_verify_product(const RunConfig& cfg) {
  const ModelFile mf = model_from(cfg.model);
  const FreeHomotopyClass cls = parse_class(cfg.cls, mf.model);
  const ProductReport r = verify_euler_product(mf.model, cls, morse_from(cfg, mf.model));
  std::cout << "structural " << to_string(r.structural) << " = formula " << to_string(r.formula);
  if (r.full_ode) std::cout << " = full-ODE " << to_string(*r.full_ode);
  if (mf.model.kind == ModelKind::MappingTorus) std::cout << "; card = " << r.card;
  std::cout << (r.pass ? "; PASS" : "; FAIL") << "\n";
  const std::string j = product_json(r);
  if (cfg.json) std::cout << j << "\n";
  write_out(cfg, "product.json", j);
  return r.pass ? kOk : kError;
}

std::vector<double> interior_samples(int k) {
  std::vector<double> t;
  for (int i = 1; i <= k; ++i) t.push_back(static_cast<double>(i) / (k + 1));
  return t;
}

int cmd_verify_invariance(const RunConfig& cfg) {
  const FamilySpec fam = family_from(cfg.family);
  const FreeHomotopyClass cls = fam.parse(cfg.cls);
  const InvarianceReport r = basic_invariance_check(fam, cls, interior_samples(cfg.samples.value_or(0)), variational(cfg));
  std::cout << "F(t=0) = " << to_string(r.F0) << ", F(t=1) = " << to_string(r.F1);
  for (const auto& [t, v] : r.interior) std::cout << ", F(t=" << fixed(t, 3) << ") = " << to_string(v);
  std::cout << (r.equal ? "; PASS" : "; FAIL") << "\n";
  nlohmann::ordered_json j;
  j["F0"] = to_string(r.F0);
  j["F1"] = to_string(r.F1);
  nlohmann::ordered_json in = nlohmann::ordered_json::array();
  for (const auto& [t, v] : r.interior) in.push_back({{"t", t}, {"F", to_string(v)}});
  j["interior"] = in;
  j["equal"] = r.equal;
  j["report0"] = nlohmann::ordered_json::parse(report_json(r.report0));
  j["report1"] = nlohmann::ordered_json::parse(report_json(r.report1));
  if (cfg.json) std::cout << j.dump(2) << "\n";
  write_out(cfg, "invariance.json", j.dump(2));
  return r.equal ? kOk : kError;
}

int cmd_verify_rational(const RunConfig& cfg, long p, long q, const std::string& sign) {
  const int s = sign == "negative" ? -1 : sign == "positive" ? 1 : sign == "zero" ? 0 : 2;
  if (s == 2) fail(ErrorKind::InvalidInput, "--sign must be negative, positive or zero");
  const RationalRealization r = realize_rational(p, q, s);
  std::cout << "construction: " << r.construction << "; F = " << to_string(r.value) << (r.pass ? "; PASS" : "; FAIL")
            << "\n";
  nlohmann::ordered_json j;
  j["construction"] = r.construction;
  j["F"] = to_string(r.value);
  j["expected"] = to_string(r.expected);
  j["fiber_class"] = to_string(r.fiber_class);
  j["fiber_value"] = to_string(r.fiber_value);
  j["stages"] = r.stages;
  j["pass"] = r.pass;
  if (cfg.json) std::cout << j.dump(2) << "\n";
  write_out(cfg, "rational.json", j.dump(2));
  return r.pass ? kOk : kError;
}

FreeHomotopyClass family_class(const FamilySpec& fam, const RunConfig& cfg) {
  if (!cfg.cls.empty()) return fam.parse(cfg.cls);
  if (fam.kind == FamilyKind::Metric) fail(ErrorKind::InvalidInput, "--class is required for metric families");
  FreeHomotopyClass c;
  c.lattice.assign(static_cast<std::size_t>(fam.class_model.dim), 0);
  c.lattice[0] = 1;
  return c;
}

std::string t_text(const FamilySpec& fam, double t) {
  std::string s = "t = " + fixed(t);
  if (fam.describe_t) s += " (" + fam.describe_t(t) + ")";
  return s;
}

int cmd_family_continue(const RunConfig& cfg) {
  const FamilySpec fam = family_from(cfg.family);
  validate_family(fam);
  const FreeHomotopyClass cls = family_class(fam, cfg);
  const std::vector<ClosedOrbitRecord> starts = endpoint_orbits(fam, cls, 0.0, variational(cfg));
  if (starts.empty()) fail(ErrorKind::NoConvergence, "no closed orbit of class " + to_string(cls) + " at t = 0");
  bool stalled = false;
  std::string plot = "branch,t,period\n";
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const FamilyBranch b = continue_branch(fam, starts[k], 0.0);
    std::cout << "branch " << k << ": " << to_string(b.status);
    if (b.status == BranchStatus::Fold) std::cout << " then " << to_string(b.end_reason);
    std::cout << ", " << b.points.size() << " points, " << b.diagnostics << "\n";
    for (const auto& f : b.folds)
      std::cout << "  fold at " << t_text(fam, f.t) << ", period " << fixed(f.period) << ", |lambda - 1| = " << sci(f.unit_multiplier_gap) << "\n";
    stalled = stalled || b.end_reason == BranchStatus::Stalled;
    write_out(cfg, "branch_" + std::to_string(k) + ".csv", branch_csv(b));
    for (const auto& p : b.points) plot += std::to_string(k) + "," + fixed(p.t, 9) + "," + fixed(p.orbit.period, 9) + "\n";
  }
  write_out(cfg, "t_vs_period.csv", plot);
  return stalled ? kError : kOk;
}

int cmd_family_sky(const RunConfig& cfg) {
  const FamilySpec fam = family_from(cfg.family);
  validate_family(fam);
  const FreeHomotopyClass cls = family_class(fam, cfg);
  const SkyReport r = sky_analysis(fam, cls, {}, variational(cfg));
  std::cout << r.verdict << "\n";
  for (std::size_t k = 0; k < r.branches.size(); ++k) {
    const auto& b = r.branches[k];
    std::cout << "  branch from t = " << fixed(b.t_start, 1) << ": " << to_string(b.branch.end_reason) << ", "
              << b.branch.diagnostics << "\n";
    write_out(cfg, "branch_" + std::to_string(k) + ".csv", branch_csv(b.branch));
  }
  const std::string j = sky_json(r);
  if (cfg.json) std::cout << j << "\n";
  write_out(cfg, "classification.json", j);
  bool stalled = false;
  for (const auto& b : r.branches) stalled = stalled || b.branch.end_reason == BranchStatus::Stalled;
  return stalled ? kError : kOk;
}

int cmd_family_spread(const RunConfig& cfg) {
  const FamilySpec fam = family_from(cfg.family);
  const FreeHomotopyClass cls = family_class(fam, cfg);
  const SpreadReport r = length_spread_criterion(fam, cls, cfg.samples.value_or(0), variational(cfg));
  std::cout << r.verdict << "\n";
  std::string plot = "t,spread,strings\n";
  for (std::size_t k = 0; k < r.t.size(); ++k)
    plot += fixed(r.t[k], 6) + "," + fixed(r.spread[k], 12) + "," + std::to_string(r.strings[k]) + "\n";
  write_out(cfg, "t_vs_spread.csv", plot);
  const std::string j = spread_json(r);
  if (cfg.json) std::cout << j << "\n";
  write_out(cfg, "spread.json", j);
  return kOk;
}

int cmd_dump_model(const RunConfig& cfg) {
  const std::string text = dump_model(model_from(cfg.model));
  std::cout << text << "\n";
  write_out(cfg, "model.json", text);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fuller_cli: Fuller-index invariant of closed geodesics"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string config_path;

  auto common = [&](CLI::App* sub, bool model, bool family) {
    if (model) sub->add_option("--model", cfg.model, "model JSON file");
    if (family) sub->add_option("--family", cfg.family, "family JSON file");
    sub->add_option("--class", cfg.cls, "free homotopy class, e.g. \"(1,0)\" or \"ab'\"");
    sub->add_option("--tol", cfg.tol, "gradient residual tolerance of the geodesic search");
    sub->add_option("--seeds", cfg.seeds, "number of variational seeds");
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--out", cfg.out, "output directory for reports");
    sub->add_flag("--json", cfg.json, "also print the JSON report");
    sub->add_option("--config", config_path, "run configuration JSON");
  };

  auto* compute = app.add_subcommand("compute", "compute F(g, beta)");
  common(compute, true, false);

  auto* verify = app.add_subcommand("verify", "verify an identity");
  verify->require_subcommand(1);
  auto* v_euler = verify->add_subcommand("euler", "Fuller sum against the Morse count");
  common(v_euler, true, false);
  auto* v_product = verify->add_subcommand("product", "structural, formula and full-ODE routes");
  common(v_product, true, false);
  v_product->add_option("--morse", cfg.morse, "circle_height | surface_height | default");
  auto* v_inv = verify->add_subcommand("invariance", "F at both ends of a family");
  common(v_inv, false, true);
  v_inv->add_option("--samples", cfg.samples, "interior sample count");
  auto* v_rat = verify->add_subcommand("rational", "realize p/q");
  long p = 1, q = 1;
  std::string sign = "negative";
  v_rat->add_option("p", p)->required()->check(CLI::PositiveNumber);
  v_rat->add_option("q", q)->required()->check(CLI::PositiveNumber);
  v_rat->add_option("--sign", sign, "negative | positive | zero");
  v_rat->add_option("--out", cfg.out, "output directory");
  v_rat->add_flag("--json", cfg.json, "also print the JSON report");

  auto* family = app.add_subcommand("family", "one-parameter families");
  family->require_subcommand(1);
  auto* f_cont = family->add_subcommand("continue", "continue the t = 0 orbits");
  common(f_cont, false, true);
  auto* f_sky = family->add_subcommand("sky", "sky-catastrophe detection");
  common(f_sky, false, true);
  auto* f_spread = family->add_subcommand("spread", "length-spread criterion");
  common(f_spread, false, true);
  f_spread->add_option("--samples", cfg.samples, "number of sampled t (default: family grid)");

  auto* dump = app.add_subcommand("dump-model", "print the canonical model JSON");
  dump->add_option("--model", cfg.model, "model JSON file")->required();
  dump->add_option("--out", cfg.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kError;
  }

  const std::vector<std::pair<CLI::App*, std::string>> ops = {
      {compute, "compute"},          {v_euler, "verify euler"},   {v_product, "verify product"},
      {v_inv, "verify invariance"},  {v_rat, "verify rational"},  {f_cont, "family continue"},
      {f_sky, "family sky"},         {f_spread, "family spread"}, {dump, "dump-model"}};
  std::string op = "fuller_cli";
  for (const auto& [sub, name] : ops)
    if (*sub) op = name;
  try {
    if (!config_path.empty()) merge_config(cfg, config_path);
    if (*compute) return cmd_compute(cfg);
    if (*v_euler) return cmd_verify_euler(cfg);
    if (*v_product) return cmd_verify_product(cfg);
    if (*v_inv) return cmd_verify_invariance(cfg);
    if (*v_rat) return cmd_verify_rational(cfg, p, q, sign);
    if (*f_cont) return cmd_family_continue(cfg);
    if (*f_sky) return cmd_family_sky(cfg);
    if (*f_spread) return cmd_family_spread(cfg);
    if (*dump) return cmd_dump_model(cfg);
  } catch (const Error& e) {
    std::cerr << "error in " << op << ": " << e.what() << "\n";
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "error in " << op << ": " << e.what() << "\n";
    return kError;
  }
  return kError;
}

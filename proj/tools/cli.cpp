#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mhd/ergodicity.hpp"
#include "mhd/hormander.hpp"

namespace mhd::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Keys a run may set, with defaults. Anything else is rejected.
const Settings& defaults() {
  static const Settings d{
      {"N", "1"},
      {"seed", "0"},
      {"threads", "0"},
      {"out", ""},
      {"forced", ""},
      {"forcing.file", ""},
      {"forcing.amplitude", "1"},
      {"forcing.channels", "ub"},
      {"init.energy", "1"},
      {"init.seed", "1"},
      {"init.file", ""},
      {"integrator.scheme", "exponential"},
      {"integrator.dt", "0.001"},
      {"integrator.t_end", "1"},
      {"integrator.record_every", "1"},
      {"integrator.nonlinear", "true"},
      {"ensemble.trajectories", "100"},
      {"closure.method", "span"},
      {"csv.per_mode", "false"},
      {"hitting.C", "2"},
      {"hitting.grid_step", "0.05"},
      {"recurrence.radius", "1"},
      {"recurrence.h", "1"},
      {"recurrence.horizons", ""},
      {"measure.init_energy_b", "50"},
      {"measure.seed_b", ""},
      {"measure.observable", "energy"},
      {"measure.bootstrap", "1000"},
  };
  return d;
}

// Flag name -> config key.
const std::vector<std::pair<std::string, std::string>>& flag_keys() {
  static const std::vector<std::pair<std::string, std::string>> f{
      {"--N", "N"},
      {"--forced", "forced"},
      {"--forcing", "forcing.file"},
      {"--dt", "integrator.dt"},
      {"--t-end", "integrator.t_end"},
      {"--scheme", "integrator.scheme"},
      {"--trajectories", "ensemble.trajectories"},
      {"--seed", "seed"},
      {"--out", "out"},
      {"--threads", "threads"},
  };
  return f;
}

// Output location and worker count do not change results.
Settings reproducible(Settings s) {
  s.erase("out");
  s.erase("threads");
  return s;
}

class Config {
 public:
  explicit Config(Settings s) : s_(std::move(s)) {}

  const Settings& settings() const { return s_; }
  const std::string& str(const std::string& key) const { return s_.at(key); }

  double num(const std::string& key) const {
    const std::string& v = str(key);
    try {
      std::size_t pos = 0;
      double x = std::stod(v, &pos);
      if (trim(v.substr(pos)).empty()) return x;
    } catch (const std::exception&) {
    }
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }

  std::uint64_t uint(const std::string& key) const {
    const std::string& v = str(key);
    try {
      std::size_t pos = 0;
      if (!v.empty() && v[0] != '-') {
        unsigned long long x = std::stoull(v, &pos);
        if (trim(v.substr(pos)).empty()) return x;
      }
    } catch (const std::exception&) {
    }
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  }

  bool flag(const std::string& key) const {
    const std::string& v = str(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
  }

 private:
  Settings s_;
};

std::vector<double> parse_number_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("'" + key + "' has a bad number '" + item + "'");
    }
  }
  return out;
}

struct Context {
  Config cfg;
  std::string command;
  std::string hash;
  std::ostream& out;
  std::ostream& err;

  LatticePtr lattice() const {
    std::uint64_t n = cfg.uint("N");
    if (n < 1 || n > 16) throw ConfigError("N must be in [1, 16]");
    return build_lattice(static_cast<int>(n));
  }

  unsigned threads() const { return static_cast<unsigned>(cfg.uint("threads")); }

  json provenance() const {
    json j;
    j["command"] = command;
    j["config_hash"] = hash;
    j["seed"] = cfg.uint("seed");
    j["settings"] = reproducible(cfg.settings());
    return j;
  }

  fs::path out_dir() const {
    const std::string& d = cfg.str("out");
    if (d.empty()) return {};
    std::error_code ec;
    fs::create_directories(d, ec);
    if (ec || !fs::is_directory(d)) throw ConfigError("output directory '" + d + "' is not writable");
    return d;
  }

  void write(const std::string& name, const std::string& content) const {
    fs::path dir = out_dir();
    if (dir.empty()) return;
    std::ofstream f(dir / name, std::ios::binary);
    f << content;
    if (!f) throw ConfigError("cannot write " + (dir / name).string());
  }

  // Artifact JSON goes to stdout and, with --out, to a file.
  void emit(const std::string& name, json j) const {
    j["provenance"] = provenance();
    std::string text = j.dump(2) + "\n";
    out << text;
    write(name, text);
  }

  noise::ForcingConfig forcing(const ModeLattice& lat) const {
    noise::ForcingConfig f;
    const std::string& file = cfg.str("forcing.file");
    if (!file.empty()) {
      std::ifstream in(file);
      if (!in) throw ConfigError("cannot read forcing file '" + file + "'");
      json j;
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw ConfigError("forcing file '" + file + "': " + e.what());
      }
      f = noise::ForcingConfig::from_json(j);
    } else if (!cfg.str("forced").empty() && command != "hormander") {
      const std::string& ch = cfg.str("forcing.channels");
      if (ch != "u" && ch != "b" && ch != "ub")
        throw ConfigError("forcing.channels must be u, b or ub");
      f = noise::isotropic_forcing(parse_mode_list(cfg.str("forced")), cfg.num("forcing.amplitude"),
                                   ch.find('u') != std::string::npos, ch.find('b') != std::string::npos);
    }
    auto diags = noise::validate_forcing(f, lat);
    if (!diags.empty()) throw ConfigError("invalid forcing: " + diags.front().message);
    return f;
  }

  sde::IntegratorConfig integrator() const {
    sde::IntegratorConfig c;
    c.scheme = sde::parse_scheme(cfg.str("integrator.scheme"));
    c.dt = cfg.num("integrator.dt");
    c.t_end = cfg.num("integrator.t_end");
    c.record_every = cfg.uint("integrator.record_every");
    c.nonlinear = cfg.flag("integrator.nonlinear");
    c.seed = cfg.uint("seed");
    c.validate();
    return c;
  }

  SpectralState init(const LatticePtr& lat, double energy_key_value, std::uint64_t seed) const {
    const std::string& file = cfg.str("init.file");
    if (!file.empty()) {
      std::ifstream in(file);
      if (!in) throw ConfigError("cannot read initial state '" + file + "'");
      json j;
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw ConfigError("initial state '" + file + "': " + e.what());
      }
      SpectralState s = state_from_json(j, lat);
      require_valid(s, *lat, 1e-9);
      return s;
    }
    if (energy_key_value < 0) throw ConfigError("initial energy must be >= 0");
    if (energy_key_value == 0) return SpectralState(lat);
    return random_state(lat, seed, energy_key_value);
  }

  ergodic::EnsembleSpec ensemble() const {
    ergodic::EnsembleSpec spec;
    spec.lattice = lattice();
    spec.n_trajectories = cfg.uint("ensemble.trajectories");
    spec.base_seed = cfg.uint("seed");
    spec.forcing = forcing(*spec.lattice);
    spec.integrator = integrator();
    spec.integrator.store_states = false;
    spec.init = init(spec.lattice, cfg.num("init.energy"), cfg.uint("init.seed"));
    spec.threads = threads();
    spec.validate();
    return spec;
  }
};

int cmd_lattice(const Context& ctx) {
  auto lat = ctx.lattice();
  json j;
  j["N"] = lat->truncation();
  j["D"] = lat->size();
  j["full_size"] = lat->full_size();
  j["triads"] = lat->triad_count();
  json reps = json::array();
  for (const auto& k : lat->representatives()) reps.push_back({k.k1, k.k2, k.k3});
  j["representatives"] = reps;
  ctx.emit("lattice.json", j);
  return kOk;
}

int cmd_hormander(const Context& ctx) {
  auto lat = ctx.lattice();
  auto method = hormander::parse_closure_method(ctx.cfg.str("closure.method"));
  std::vector<WaveVector> forced;
  if (!ctx.cfg.str("forcing.file").empty()) {
    forced = ctx.forcing(*lat).forced_modes();
  } else {
    forced = parse_mode_list(ctx.cfg.str("forced"));
  }
  auto report = hormander::closure(forced, *lat, method);
  ctx.emit("hormander.json", report.to_json());
  return kOk;
}

int cmd_simulate(const Context& ctx) {
  auto lat = ctx.lattice();
  auto forcing = ctx.forcing(*lat);
  auto integ = ctx.integrator();
  bool per_mode = ctx.cfg.flag("csv.per_mode");
  integ.store_states = per_mode;
  auto init = ctx.init(lat, ctx.cfg.num("init.energy"), ctx.cfg.uint("init.seed"));
  sde::Trajectory traj;
  try {
    traj = sde::simulate(init, forcing, integ, *lat);
  } catch (const sde::BlowUpError& e) {
    if (e.partial()) ctx.write("trajectory.csv", sde::trajectory_csv(*e.partial(), false));
    throw;
  }
  std::string csv = sde::trajectory_csv(traj, per_mode);
  ctx.write("trajectory.csv", csv);
  json snap = sde::snapshot_json(traj.final_state, traj.times.back());
  snap["provenance"] = ctx.provenance();
  ctx.write("final_state.json", snap.dump(2) + "\n");
  json summary;
  summary["N"] = lat->truncation();
  summary["integrator"] = integ.to_json();
  summary["forcing"] = forcing.to_json();
  summary["records"] = traj.size();
  summary["initial_energy"] = traj.energies.front();
  summary["final_energy"] = traj.energies.back();
  summary["dissipation_integral"] = traj.dissipation_integral.back();
  if (ctx.cfg.str("out").empty()) {
    ctx.out << csv;
  } else {
    ctx.emit("simulate.json", summary);
  }
  return kOk;
}

int cmd_audit(const Context& ctx) {
  auto spec = ctx.ensemble();
  auto runs = ergodic::run_ensemble(spec);
  auto audit = ergodic::energy_balance_audit(spec, runs);
  auto moment = ergodic::moment_bound_check(spec, runs, audit.times);
  ctx.write("audit.csv", audit.to_csv());
  ctx.write("moment.csv", moment.to_csv());
  json j;
  j["energy_balance"] = audit.to_json();
  j["moment_bound"] = moment.to_json();
  j["pass"] = audit.pass && moment.pass;
  ctx.emit("audit.json", j);
  return kOk;
}

int cmd_hitting(const Context& ctx) {
  auto spec = ctx.ensemble();
  double step = ctx.cfg.num("hitting.grid_step");
  if (!(step > 0)) throw ConfigError("hitting.grid_step must be positive");
  std::vector<double> grid;
  const double horizon = spec.integrator.t_end;
  for (std::size_t i = 0; i * step <= horizon * (1 + 1e-12); ++i) grid.push_back(i * step);
  auto report = ergodic::hitting_times(spec, ctx.cfg.num("hitting.C"), grid);
  ctx.write("hitting.csv", report.to_csv());
  ctx.emit("hitting.json", report.to_json());
  return kOk;
}

int cmd_recurrence(const Context& ctx) {
  auto lat = ctx.lattice();
  auto integ = ctx.integrator();
  integ.store_states = false;
  auto init = ctx.init(lat, ctx.cfg.num("init.energy"), ctx.cfg.uint("init.seed"));
  auto traj = sde::simulate(init, ctx.forcing(*lat), integ, *lat);
  double radius = ctx.cfg.num("recurrence.radius"), h = ctx.cfg.num("recurrence.h");
  if (!(h > 0)) throw ConfigError("recurrence.h must be positive");
  json j;
  j["count"] = ergodic::recurrence_count(traj, radius, h).to_json();
  auto horizons = parse_number_list("recurrence.horizons", ctx.cfg.str("recurrence.horizons"));
  if (!horizons.empty()) j["trend"] = ergodic::recurrence_trend(traj, radius, h, horizons).to_json();
  ctx.emit("recurrence.json", j);
  return kOk;
}

ergodic::Observable parse_observable(const std::string& text) {
  ergodic::Observable ob;
  if (text == "energy") return ob;
  // re_u:(k1,k2,k3):j
  if (text.rfind("re_u:", 0) == 0) {
    auto last = text.rfind(':');
    if (last > 5) {
      ob.kind = ergodic::Observable::Kind::re_u;
      ob.mode = parse_wave_vector(text.substr(5, last - 5));
      try {
        ob.component = std::stoi(text.substr(last + 1));
      } catch (const std::exception&) {
        ob.component = -1;
      }
      if (ob.component >= 0 && ob.component < 3) return ob;
    }
  }
  throw ConfigError("measure.observable must be 'energy' or 're_u:(k1,k2,k3):j' with j in 0..2");
}

int cmd_measure(const Context& ctx) {
  auto a = ctx.ensemble();
  auto b = a;
  b.init = ctx.init(a.lattice, ctx.cfg.num("measure.init_energy_b"), ctx.cfg.uint("init.seed") + 1);
  const std::string& seed_b = ctx.cfg.str("measure.seed_b");
  b.base_seed = seed_b.empty() ? a.base_seed + 1 : ctx.cfg.uint("measure.seed_b");
  auto ob = parse_observable(ctx.cfg.str("measure.observable"));
  auto report = ergodic::empirical_measure_compare(a, b, ob, ctx.cfg.uint("measure.bootstrap"), a.base_seed);
  ctx.emit("measure.json", report.to_json());
  return kOk;
}

}  // namespace

Settings parse_config_text(const std::string& text) {
  Settings s;
  std::stringstream ss(text);
  std::string line;
  int n = 0;
  while (std::getline(ss, line)) {
    ++n;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(n) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(n) + ": empty key");
    s[key] = trim(line.substr(eq + 1));
  }
  return s;
}

Settings load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_hash(const Settings& s) {
  std::uint64_t h = 14695981039346656037ull;
  auto feed = [&](const std::string& x) {
    for (unsigned char c : x) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  for (const auto& [k, v] : s) feed(k + "=" + v + "\n");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Galerkin-truncated stochastic MHD laboratory"};
  app.require_subcommand(1);
  const std::vector<std::pair<std::string, std::string>> commands{
      {"lattice", "List the representative modes of K_N"},
      {"simulate", "Integrate one trajectory; CSV of energies"},
      {"hormander", "Bracket closure of the forced modes"},
      {"audit", "Energy identity and moment bound over an ensemble"},
      {"hitting", "Hitting times of the energy ball of radius C"},
      {"recurrence", "Visits to an energy ball at times n h"},
      {"measure", "KS comparison of two ensembles from different initial states"},
  };
  std::map<std::string, std::string> flag_values;
  std::vector<std::string> sets;
  std::string config_path;
  std::map<std::string, CLI::Option*> flag_opts;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    subs[name] = sub;
    sub->add_option("--config", config_path, "key = value config file");
    sub->add_option("--set", sets, "override: key=value (repeatable)");
    for (const auto& [flag, key] : flag_keys())
      flag_opts[name + flag] = sub->add_option(flag, flag_values[flag], "sets " + key);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  std::string command;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) command = name;

  try {
    Settings resolved = defaults();
    auto apply = [&](const std::string& key, const std::string& value, const std::string& origin) {
      if (!resolved.count(key)) throw ConfigError("unknown key '" + key + "' in " + origin);
      resolved[key] = value;
    };
    if (!config_path.empty())
      for (const auto& [k, v] : load_config_file(config_path)) apply(k, v, config_path);
    for (const auto& s : sets) {
      auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
      apply(trim(s.substr(0, eq)), trim(s.substr(eq + 1)), "--set");
    }
    for (const auto& [flag, key] : flag_keys())
      if (flag_opts[command + flag]->count()) apply(key, flag_values[flag], flag);

    Context ctx{Config(resolved), command, config_hash(reproducible(resolved)), out, err};
    if (command == "lattice") return cmd_lattice(ctx);
    if (command == "simulate") return cmd_simulate(ctx);
    if (command == "hormander") return cmd_hormander(ctx);
    if (command == "audit") return cmd_audit(ctx);
    if (command == "hitting") return cmd_hitting(ctx);
    if (command == "recurrence") return cmd_recurrence(ctx);
    if (command == "measure") return cmd_measure(ctx);
    err << "error: unknown command\n";
    return kConfigError;
  } catch (const sde::BlowUpError& e) {
    err << "blow-up: " << e.what() << "\n";
    return kBlowUp;
  } catch (const ValidationError& e) {
    err << "invalid state: " << e.what() << "\n";
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace mhd::cli

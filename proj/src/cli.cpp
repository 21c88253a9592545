#include "negfspec/cli.hpp"

#include "negfspec/diagram.hpp"
#include "negfspec/ensemble.hpp"
#include "negfspec/io.hpp"
#include "negfspec/kernels.hpp"
#include "negfspec/oracle.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace negf {
namespace {

using ordered_json = nlohmann::ordered_json;

class usage_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

int parse_int(const std::string& text, const std::string& what) {
  try {
    size_t pos = 0;
    const int v = std::stoi(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw usage_error(what + ": '" + text + "' is not an integer");
  }
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw usage_error(what + ": '" + text + "' is not a number");
  }
}

/// "m:x,m:x" -> ordered (index, value) pairs.
std::vector<std::pair<int, double>> parse_indexed(const std::string& text,
                                                  const std::string& what) {
  std::vector<std::pair<int, double>> out;
  for (const std::string& item : split(text, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw usage_error(what + ": expected 'mode:value' items, got '" + item + "'");
    out.emplace_back(parse_int(item.substr(0, colon), what),
                     parse_double(item.substr(colon + 1), what));
  }
  return out;
}

Vec3 parse_vec3(const std::string& text, const std::string& what) {
  const std::vector<std::string> parts = split(text, ',');
  if (parts.size() != 3) throw usage_error(what + ": expected 'x,y,z'");
  return Vec3(parse_double(parts[0], what), parse_double(parts[1], what),
              parse_double(parts[2], what));
}

void check_mode_index(const RunConfig& cfg, int m, const std::string& what) {
  if (m < 0 || m >= static_cast<int>(cfg.modes.size()))
    throw usage_error(what + ": mode index " + std::to_string(m) +
                      " out of range (have " + std::to_string(cfg.modes.size()) +
                      " modes)");
}

std::vector<double> base_omegas(const RunConfig& cfg) {
  std::vector<double> w;
  w.reserve(cfg.modes.size());
  for (const FieldMode& m : cfg.modes) w.push_back(m.omega);
  return w;
}

std::vector<double> linspace(double lo, double hi, int points) {
  if (points < 1) throw usage_error("scan: --points must be >= 1");
  std::vector<double> g(static_cast<size_t>(points));
  if (points == 1) {
    g[0] = lo;
    return g;
  }
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (int i = 0; i < points; ++i) g[static_cast<size_t>(i)] = lo + step * i;
  return g;
}

/// Writes CSV (and a JSON sidecar describing the run) or prints to stdout.
void emit(const std::string& csv, const std::string& output,
          const ordered_json& meta) {
  if (output.empty()) {
    std::cout << csv;
    return;
  }
  write_text_file(output, csv);
  write_text_file(output + ".json", meta.dump(2) + "\n");
}

struct ScanSpec {
  double lo = 0.0, hi = 0.0;
  int points = 0;
  bool given = false;  // any scan flag present: a bad --points must error, not
                       // silently fall back to the single-point path
  bool requested() const { return given; }
};

void add_scan_options(CLI::App* cmd, ScanSpec& scan) {
  auto mark = [&scan](const std::string&) { scan.given = true; };
  cmd->add_option("--scan-min", scan.lo, "scan: lowest frequency")->each(mark);
  cmd->add_option("--scan-max", scan.hi, "scan: highest frequency")->each(mark);
  cmd->add_option("--points", scan.points, "scan: number of grid points")->each(mark);
}

// ---------------------------------------------------------------------------
// subcommand bodies
// ---------------------------------------------------------------------------

struct LineArgs {
  std::string config, output, route = "interleaved";
  int in_mode = 0, sig_mode = 1;
  double omega1 = -1.0, omega2 = -1.0;  // < 0: use the config mode frequency
  ScanSpec scan;
  bool serial = false, time_domain = false, no_vacuum = false;
  double t_end = 200.0, dt = 0.0;
};

TimeRoute parse_route(const std::string& r) {
  if (r == "interleaved") return TimeRoute::interleaved;
  if (r == "factorized") return TimeRoute::factorized;
  throw usage_error("--route: expected interleaved or factorized");
}

int run_line_signal(const LineArgs& a, bool pump_probe) {
  const RunConfig cfg = load_config(a.config);
  check_mode_index(cfg, a.in_mode, pump_probe ? "--pump" : "--in");
  check_mode_index(cfg, a.sig_mode, pump_probe ? "--probe" : "--signal");
  if (a.in_mode == a.sig_mode)
    throw usage_error("the two mode indices must differ");

  const double w1 = (a.omega1 >= 0.0) ? a.omega1
                                      : cfg.modes[static_cast<size_t>(a.in_mode)].omega;
  const double w2 = (a.omega2 >= 0.0) ? a.omega2
                                      : cfg.modes[static_cast<size_t>(a.sig_mode)].omega;
  const bool vacuum = !a.no_vacuum;

  ordered_json meta;
  meta["command"] = pump_probe ? "pump-probe" : "sle";
  meta["config"] = a.config;
  meta["omega1"] = w1;
  meta["vacuum"] = vacuum;
  meta["threads"] = a.serial ? 1 : thread_count();

  if (a.time_domain) {
    TimeGrid grid{a.t_end, a.dt};
    const TimeRoute route = parse_route(a.route);
    const TimeSeries ts =
        pump_probe
            ? pump_probe_time(cfg.scheme, cfg.modes, a.in_mode, a.sig_mode, w1,
                              w2, cfg.constants, grid, route, vacuum)
            : sle_time(cfg.scheme, cfg.modes, a.in_mode, a.sig_mode, w1, w2,
                       cfg.constants, grid, route);
    meta["omega2"] = w2;
    meta["route"] = a.route;
    meta["t_end"] = a.t_end;
    meta["points"] = ts.t.size();
    emit(csv_scan("t", ts.t, "value", ts.value), a.output, meta);
    return 0;
  }

  std::vector<double> grid =
      a.scan.requested() ? linspace(a.scan.lo, a.scan.hi, a.scan.points)
                         : std::vector<double>{w2};
  const Process p = pump_probe ? pump_probe_process(a.in_mode, a.sig_mode)
                               : sle_process(a.in_mode, a.sig_mode);
  const SignalPlan plan = make_plan(cfg.scheme, cfg.modes, p, cfg.constants);
  std::vector<double> base = base_omegas(cfg);
  base[static_cast<size_t>(a.in_mode)] = w1;
  const std::vector<double> values =
      rate_scan(cfg.scheme, cfg.modes, plan, cfg.constants, base, a.sig_mode,
                grid, vacuum, !a.serial);
  meta["points"] = grid.size();
  emit(csv_scan("omega", grid, "value", values), a.output, meta);
  return 0;
}

int run_diagrams(const std::string& config, const std::string& process,
                 int in_mode, int sig_mode, const std::string& json_path,
                 const std::string& dot_path) {
  const RunConfig cfg = load_config(config);
  check_mode_index(cfg, in_mode, "--in");
  check_mode_index(cfg, sig_mode, "--signal");
  Process p;
  if (process == "sle")
    p = sle_process(in_mode, sig_mode);
  else if (process == "pump-probe")
    p = pump_probe_process(in_mode, sig_mode);
  else
    throw usage_error("--process: expected sle or pump-probe");

  const std::vector<LoopDiagram> loops = generate_loops(cfg.scheme, cfg.modes, p);
  long feynman = 0;
  for (const LoopDiagram& l : loops) feynman += l.feynman_count();
  std::cout << "loops: " << loops.size() << "\n"
            << "time-ordered: " << feynman << "\n"
            << render_ascii(loops);
  if (!json_path.empty()) write_text_file(json_path, diagrams_to_json(p, loops));
  if (!dot_path.empty()) write_text_file(dot_path, render_dot(loops));
  return 0;
}

struct MixArgs {
  std::string config, output, detection = "spontaneous";
  std::string incoming, net, omega;
  int sig_mode = -1;
  ScanSpec scan;
  int scan_mode = -1;
  bool serial = false, no_vacuum = false;
};

int run_wave_mixing(const MixArgs& a) {
  const RunConfig cfg = load_config(a.config);
  check_mode_index(cfg, a.sig_mode, "--signal");

  Process p;
  p.signal_mode = a.sig_mode;
  if (a.detection == "spontaneous")
    p.detection = DetectionKind::spontaneous;
  else if (a.detection == "stimulated")
    p.detection = DetectionKind::stimulated;
  else if (a.detection == "amplitude")
    p.detection = DetectionKind::amplitude;
  else
    throw usage_error("--detection: expected spontaneous, stimulated or amplitude");

  if (a.incoming.empty()) throw usage_error("--incoming is required");
  for (const auto& [m, v] : parse_indexed(a.incoming, "--incoming")) {
    check_mode_index(cfg, m, "--incoming");
    const int count = static_cast<int>(v);
    if (static_cast<double>(count) != v || count < 1)
      throw usage_error("--incoming: interaction counts must be positive integers");
    p.incoming.emplace_back(m, count);
  }
  if (p.detection == DetectionKind::amplitude) {
    if (a.net.empty())
      throw usage_error("--net is required for amplitude detection");
    for (const std::string& item : split(a.net, ','))
      p.net.push_back(parse_int(item, "--net"));
    if (p.net.size() != p.incoming.size())
      throw usage_error("--net: need one entry per --incoming entry");
  }

  std::vector<double> omegas = base_omegas(cfg);
  for (const auto& [m, w] : a.omega.empty()
                                ? std::vector<std::pair<int, double>>{}
                                : parse_indexed(a.omega, "--omega")) {
    check_mode_index(cfg, m, "--omega");
    omegas[static_cast<size_t>(m)] = w;
  }

  ordered_json meta;
  meta["command"] = "wave-mixing";
  meta["config"] = a.config;
  meta["detection"] = a.detection;
  meta["incoming"] = a.incoming;
  meta["threads"] = a.serial ? 1 : thread_count();

  const bool vacuum = !a.no_vacuum;
  if (a.scan.requested()) {
    const int sm = (a.scan_mode >= 0) ? a.scan_mode : a.sig_mode;
    check_mode_index(cfg, sm, "--scan-mode");
    const std::vector<double> grid = linspace(a.scan.lo, a.scan.hi, a.scan.points);
    meta["points"] = grid.size();
    meta["scan_mode"] = sm;
    if (p.detection == DetectionKind::amplitude) {
      std::string csv = "omega,re,im\n";
      std::vector<double> w = omegas;
      for (const double x : grid) {
        w[static_cast<size_t>(sm)] = x;
        const cplx v = wave_mixing_amplitude(cfg.scheme, cfg.modes, p, w,
                                             cfg.constants);
        csv += format_number(x) + "," + format_number(v.real()) + "," +
               format_number(v.imag()) + "\n";
      }
      emit(csv, a.output, meta);
      return 0;
    }
    const SignalPlan plan = make_plan(cfg.scheme, cfg.modes, p, cfg.constants);
    const std::vector<double> values =
        rate_scan(cfg.scheme, cfg.modes, plan, cfg.constants, omegas, sm, grid,
                  vacuum, !a.serial);
    emit(csv_scan("omega", grid, "value", values), a.output, meta);
    return 0;
  }

  meta["points"] = 1;
  if (p.detection == DetectionKind::amplitude) {
    const cplx v = wave_mixing_amplitude(cfg.scheme, cfg.modes, p, omegas,
                                         cfg.constants);
    const std::string csv = "omega,re,im\n" +
                            format_number(omegas[static_cast<size_t>(a.sig_mode)]) +
                            "," + format_number(v.real()) + "," +
                            format_number(v.imag()) + "\n";
    emit(csv, a.output, meta);
    return 0;
  }
  const double v = wave_mixing(cfg.scheme, cfg.modes, p, omegas, cfg.constants,
                               vacuum);
  emit(csv_scan("omega", {omegas[static_cast<size_t>(a.sig_mode)]}, "value", {v}),
       a.output, meta);
  return 0;
}

struct EnsembleArgs {
  std::string config, output, dk = "0,0,0";
  int n = 2, in_mode = 0, sig_mode = 1;
  double box = 10.0, omega1 = -1.0, omega2 = -1.0;
  std::uint64_t seed = 1;
};

int run_ensemble(const EnsembleArgs& a) {
  const RunConfig cfg = load_config(a.config);
  check_mode_index(cfg, a.in_mode, "--in");
  check_mode_index(cfg, a.sig_mode, "--signal");
  if (a.n < 1) throw usage_error("--n: need at least one emitter");

  const double w1 = (a.omega1 >= 0.0) ? a.omega1
                                      : cfg.modes[static_cast<size_t>(a.in_mode)].omega;
  const double w2 = (a.omega2 >= 0.0) ? a.omega2
                                      : cfg.modes[static_cast<size_t>(a.sig_mode)].omega;
  const Vec3 dk = parse_vec3(a.dk, "--dk");
  const std::vector<Vec3> positions = random_positions(a.n, a.box, a.seed);

  // the requested frequencies become the working carriers, so the elastic
  // pair channel (detection at the drive frequency) validates consistently
  std::vector<FieldMode> modes = cfg.modes;
  modes[static_cast<size_t>(a.in_mode)].omega = w1;
  modes[static_cast<size_t>(a.sig_mode)].omega = w2;

  const Process balanced = sle_process(a.in_mode, a.sig_mode);
  std::vector<double> omegas = base_omegas(cfg);
  omegas[static_cast<size_t>(a.in_mode)] = w1;
  omegas[static_cast<size_t>(a.sig_mode)] = w2;

  const cplx f = structure_factor(positions, dk);
  const double big_f = phase_matching_sum(positions, dk);
  const double single = wave_mixing(cfg.scheme, modes, balanced, omegas,
                                    cfg.constants);

  // a stationary pair amplitude exists only at the elastic frequency; away
  // from it the emitters add incoherently
  double coherent = 0.0;
  double total = a.n * single;
  if (std::abs(w2 - w1) <= 1e-9) {
    Process amp;
    amp.signal_mode = a.sig_mode;
    amp.detection = DetectionKind::amplitude;
    amp.incoming = {{a.in_mode, 1}};
    amp.net = {1};
    coherent = coherent_term(cfg.scheme, modes, amp, omegas, cfg.constants);
    total = total_spontaneous(cfg.scheme, modes, balanced, amp, omegas,
                              cfg.constants, positions, dk);
  }

  std::string out;
  out += "f_re=" + format_number(f.real()) + "\n";
  out += "f_im=" + format_number(f.imag()) + "\n";
  out += "pair_sum=" + format_number(big_f) + "\n";
  out += "single=" + format_number(single) + "\n";
  out += "coherent=" + format_number(coherent) + "\n";
  out += "total=" + format_number(total) + "\n";
  if (a.output.empty()) {
    std::cout << out;
  } else {
    write_text_file(a.output, out);
  }
  return 0;
}

struct OracleArgs {
  std::string config, output, drive;
  int sig_mode = -1, n_max = 2, points = 0;
  double lo = 0.0, hi = 0.0, t_end = 600.0, dt = 0.0;
  double step_check = OracleOptions{}.step_check;
};

int run_oracle(const OracleArgs& a) {
  const RunConfig cfg = load_config(a.config);
  check_mode_index(cfg, a.sig_mode, "--signal");
  if (a.drive.empty()) throw usage_error("--drive is required (mode:omega,...)");
  std::vector<OracleDrive> drives;
  for (const auto& [m, w] : parse_indexed(a.drive, "--drive")) {
    check_mode_index(cfg, m, "--drive");
    drives.push_back({m, w});
  }
  if (a.points < 1) throw usage_error("--points is required");

  OracleOptions opt;
  opt.n_max = a.n_max;
  opt.t_end = a.t_end;
  opt.dt = a.dt;
  if (!(a.step_check > 0.0))
    throw usage_error("--step-check must be positive");
  opt.step_check = a.step_check;

  const std::vector<double> grid = linspace(a.lo, a.hi, a.points);
  const std::vector<double> values = oracle_spectrum(
      cfg.scheme, cfg.modes, drives, a.sig_mode, grid, cfg.constants, opt);

  ordered_json meta;
  meta["command"] = "oracle";
  meta["config"] = a.config;
  meta["drive"] = a.drive;
  meta["n_max"] = a.n_max;
  meta["t_end"] = a.t_end;
  meta["points"] = grid.size();
  meta["threads"] = thread_count();
  emit(csv_scan("omega", grid, "value", values), a.output, meta);
  return 0;
}

int run_impl(int argc, char** argv) {
  CLI::App app{"nonlinear-signal kernels for few-level emitters"};
  app.require_subcommand(1);

  // validate
  std::string validate_config;
  CLI::App* validate = app.add_subcommand("validate", "check a model config");
  validate->add_option("--config", validate_config, "model JSON")->required();

  // diagrams
  std::string dia_config, dia_process = "sle", dia_json, dia_dot;
  int dia_in = 0, dia_sig = 1;
  CLI::App* diagrams = app.add_subcommand("diagrams", "list the loop diagrams");
  diagrams->add_option("--config", dia_config, "model JSON")->required();
  diagrams->add_option("--process", dia_process, "sle | pump-probe");
  diagrams->add_option("--in", dia_in, "incoming (pump) mode index");
  diagrams->add_option("--signal", dia_sig, "signal (probe) mode index");
  diagrams->add_option("--json", dia_json, "write a JSON listing here");
  diagrams->add_option("--dot", dia_dot, "write a graphviz rendering here");

  // sle / pump-probe
  LineArgs sle_args, pp_args;
  CLI::App* sle = app.add_subcommand("sle", "spontaneous emission line");
  sle->add_option("--config", sle_args.config, "model JSON")->required();
  sle->add_option("--in", sle_args.in_mode, "incoming mode index");
  sle->add_option("--signal", sle_args.sig_mode, "signal mode index");
  sle->add_option("--omega1", sle_args.omega1, "incoming frequency");
  sle->add_option("--omega2", sle_args.omega2, "signal frequency");
  add_scan_options(sle, sle_args.scan);
  sle->add_option("--output", sle_args.output, "CSV file (stdout if absent)");
  sle->add_flag("--serial", sle_args.serial, "single-threaded scan");
  sle->add_flag("--time-domain", sle_args.time_domain, "switch-on transient");
  sle->add_option("--t-end", sle_args.t_end, "transient window");
  sle->add_option("--dt", sle_args.dt, "transient step (0: automatic)");
  sle->add_option("--route", sle_args.route, "interleaved | factorized");

  CLI::App* pp = app.add_subcommand("pump-probe", "probe transmission change");
  pp->add_option("--config", pp_args.config, "model JSON")->required();
  pp->add_option("--pump", pp_args.in_mode, "pump mode index");
  pp->add_option("--probe", pp_args.sig_mode, "probe mode index");
  pp->add_option("--omega1", pp_args.omega1, "pump frequency");
  pp->add_option("--omega2", pp_args.omega2, "probe frequency");
  add_scan_options(pp, pp_args.scan);
  pp->add_option("--output", pp_args.output, "CSV file (stdout if absent)");
  pp->add_flag("--serial", pp_args.serial, "single-threaded scan");
  pp->add_flag("--no-vacuum", pp_args.no_vacuum, "drop quantum-field weights");
  pp->add_flag("--time-domain", pp_args.time_domain, "switch-on transient");
  pp->add_option("--t-end", pp_args.t_end, "transient window");
  pp->add_option("--dt", pp_args.dt, "transient step (0: automatic)");
  pp->add_option("--route", pp_args.route, "interleaved | factorized");

  // wave-mixing
  MixArgs mix;
  CLI::App* wm = app.add_subcommand("wave-mixing", "generic multi-wave process");
  wm->add_option("--config", mix.config, "model JSON")->required();
  wm->add_option("--signal", mix.sig_mode, "signal mode index")->required();
  wm->add_option("--detection", mix.detection,
                 "spontaneous | stimulated | amplitude");
  wm->add_option("--incoming", mix.incoming, "mode:count,...")->required();
  wm->add_option("--net", mix.net, "net raising counts (amplitude only)");
  wm->add_option("--omega", mix.omega, "frequency overrides mode:omega,...");
  wm->add_option("--scan-mode", mix.scan_mode, "mode swept by the scan");
  add_scan_options(wm, mix.scan);
  wm->add_option("--output", mix.output, "CSV file (stdout if absent)");
  wm->add_flag("--serial", mix.serial, "single-threaded scan");
  wm->add_flag("--no-vacuum", mix.no_vacuum, "drop quantum-field weights");

  // ensemble
  EnsembleArgs ens;
  CLI::App* ensemble = app.add_subcommand("ensemble", "N-emitter scaling");
  ensemble->add_option("--config", ens.config, "model JSON")->required();
  ensemble->add_option("--n", ens.n, "number of emitters");
  ensemble->add_option("--box", ens.box, "sample box edge");
  ensemble->add_option("--seed", ens.seed, "position seed");
  ensemble->add_option("--dk", ens.dk, "phase mismatch 'x,y,z'");
  ensemble->add_option("--in", ens.in_mode, "incoming mode index");
  ensemble->add_option("--signal", ens.sig_mode, "signal mode index");
  ensemble->add_option("--omega1", ens.omega1, "incoming frequency");
  ensemble->add_option("--omega2", ens.omega2, "signal frequency");
  ensemble->add_option("--output", ens.output, "write key=value lines here");

  // oracle
  OracleArgs ora;
  CLI::App* oracle = app.add_subcommand("oracle", "brute-force emission scan");
  oracle->add_option("--config", ora.config, "model JSON")->required();
  oracle->add_option("--signal", ora.sig_mode, "signal mode index")->required();
  oracle->add_option("--drive", ora.drive, "classical drives mode:omega,...");
  oracle->add_option("--scan-min", ora.lo, "lowest signal frequency");
  oracle->add_option("--scan-max", ora.hi, "highest signal frequency");
  oracle->add_option("--points", ora.points, "grid points");
  oracle->add_option("--n-max", ora.n_max, "photon ladder cutoff");
  oracle->add_option("--t-end", ora.t_end, "evolution window");
  oracle->add_option("--dt", ora.dt, "integrator step (0: automatic)");
  oracle->add_option("--step-check", ora.step_check,
                     "allowed slope drift of the half-step rerun");
  oracle->add_option("--output", ora.output, "CSV file (stdout if absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return 2;
  }

  if (validate->parsed()) {
    load_config(validate_config);
    std::cout << "ok\n";
    return 0;
  }
  if (diagrams->parsed())
    return run_diagrams(dia_config, dia_process, dia_in, dia_sig, dia_json,
                        dia_dot);
  if (sle->parsed()) return run_line_signal(sle_args, false);
  if (pp->parsed()) return run_line_signal(pp_args, true);
  if (wm->parsed()) return run_wave_mixing(mix);
  if (ensemble->parsed()) return run_ensemble(ens);
  if (oracle->parsed()) return run_oracle(ora);
  return 2;
}

}  // namespace

int run_cli(int argc, char** argv) {
  try {
    return run_impl(argc, argv);
  } catch (const usage_error& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return 2;
  } catch (const config_error& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return 3;
  } catch (const numerical_guard_error& e) {
    std::cerr << "error: numerical-guard: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    // invalid_argument marks rejected user input: inconsistent process
    // specifications (usage) or unusable model structure (config)
    const std::string what = e.what();
    if (what.rfind("process: ", 0) == 0) {
      std::cerr << "error: usage: " << what << "\n";
      return 2;
    }
    std::cerr << "error: config: " << what << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace negf

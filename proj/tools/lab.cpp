// lab: runs the laboratory's canned experiments from declarative JSON
// configs and command-line flags, emitting deterministic results files plus
// a manifest describing the run.
//
// Randomness discipline: one root generator seeded with --seed; child
// streams are opened by fixed purpose (0 trial signals, 1 dataset members,
// 2 filter banks, 3 comparison bases, 4 scalar parameters), so a config and
// seed replay the exact experiment. Results files contain no clocks and are
// byte-identical across re-runs; the manifest carries the wall-clock.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "invlab/cascade.hpp"
#include "invlab/discover.hpp"
#include "invlab/group.hpp"
#include "invlab/io.hpp"
#include "invlab/meter.hpp"
#include "invlab/presets.hpp"
#include "invlab/rng.hpp"
#include "invlab/signal.hpp"
#include "invlab/stone.hpp"

namespace fs = std::filesystem;
using njson = nlohmann::json;
using ojson = nlohmann::ordered_json;
using namespace invlab;

namespace {

constexpr const char* kVersion = "0.1.0";

// Invalid configuration: reported on stderr and mapped to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- config plumbing ----

njson load_config_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  njson j;
  try {
    j = njson::parse(in);
  } catch (const njson::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  return j;
}

void check_keys(const njson& cfg, const std::vector<std::string>& allowed) {
  for (auto it = cfg.begin(); it != cfg.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ConfigError("unknown config key '" + it.key() + "'");
}

std::uint64_t cfg_u64(const njson& c, const char* k, std::uint64_t def) {
  if (!c.contains(k)) return def;
  const njson& v = c.at(k);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0)
    return static_cast<std::uint64_t>(v.get<long long>());
  throw ConfigError(std::string("config key '") + k + "' must be a nonnegative integer");
}

double cfg_double(const njson& c, const char* k, double def) {
  if (!c.contains(k)) return def;
  const njson& v = c.at(k);
  if (!v.is_number()) throw ConfigError(std::string("config key '") + k + "' must be a number");
  return v.get<double>();
}

std::string cfg_string(const njson& c, const char* k, std::string def) {
  if (!c.contains(k)) return def;
  const njson& v = c.at(k);
  if (!v.is_string()) throw ConfigError(std::string("config key '") + k + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> cfg_doubles(const njson& c, const char* k, std::vector<double> def) {
  if (!c.contains(k)) return def;
  const njson& v = c.at(k);
  if (!v.is_array()) throw ConfigError(std::string("config key '") + k + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number())
      throw ConfigError(std::string("config key '") + k + "' must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<int> cfg_ints(const njson& c, const char* k, std::vector<int> def) {
  if (!c.contains(k)) return def;
  const njson& v = c.at(k);
  if (!v.is_array()) throw ConfigError(std::string("config key '") + k + "' must be an array of integers");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer())
      throw ConfigError(std::string("config key '") + k + "' must be an array of integers");
    out.push_back(e.get<int>());
  }
  return out;
}

// ---- shared CLI surface ----

struct CommonCli {
  std::string config;
  std::uint64_t seed = 0;
  std::string out = ".";
  std::string format = "json";
  std::string input;
};

void add_common(CLI::App* sub, CommonCli& c, bool with_input) {
  sub->add_option("--config", c.config, "JSON config file (strict keys)");
  sub->add_option("--seed", c.seed, "seed for every pseudo-random quantity");
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--format", c.format, "results format")->check(CLI::IsMember({"csv", "json"}));
  if (with_input) sub->add_option("--input", c.input, "input CSV overriding the preset");
}

struct Resolved {
  std::uint64_t seed = 0;
  std::string out = ".";
  std::string format = "json";
  std::string input;
  njson cfg = njson::object();
};

Resolved resolve_common(const CLI::App& sub, const CommonCli& c, const char* experiment,
                        std::vector<std::string> extra_keys, bool with_input) {
  Resolved r;
  if (!c.config.empty()) r.cfg = load_config_json(c.config);

  std::vector<std::string> allowed = {"experiment", "seed", "format", "out"};
  if (with_input) allowed.push_back("input");
  allowed.insert(allowed.end(), extra_keys.begin(), extra_keys.end());
  check_keys(r.cfg, allowed);

  const std::string declared = cfg_string(r.cfg, "experiment", experiment);
  if (declared != experiment)
    throw ConfigError("config key 'experiment' says '" + declared + "' but the subcommand is '" +
                      experiment + "'");

  r.seed = cfg_u64(r.cfg, "seed", 0);
  r.out = cfg_string(r.cfg, "out", ".");
  r.format = cfg_string(r.cfg, "format", "json");
  r.input = cfg_string(r.cfg, "input", "");
  if (sub.count("--seed")) r.seed = c.seed;
  if (sub.count("--out")) r.out = c.out;
  if (sub.count("--format")) r.format = c.format;
  if (with_input && sub.count("--input")) r.input = c.input;
  if (r.format != "csv" && r.format != "json")
    throw ConfigError("config key 'format' must be \"csv\" or \"json\"");
  return r;
}

struct ArtifactSet {
  std::vector<std::pair<std::string, std::string>> files;  // name -> body
  ojson echo;                                              // resolved parameters
};

std::string utc_now_iso() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_artifacts(const Resolved& r, const char* experiment, const ArtifactSet& art,
                     double elapsed_seconds) {
  const fs::path dir(r.out);
  fs::create_directories(dir);
  for (const auto& [name, body] : art.files) write_text(dir / name, body);

  ojson m;
  m["tool"] = "lab";
  m["version"] = kVersion;
  m["experiment"] = experiment;
  m["seed"] = r.seed;
  m["format"] = r.format;
  m["wall_clock_utc"] = utc_now_iso();
  m["elapsed_seconds"] = elapsed_seconds;
  m["config"] = art.echo;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

// ---- small numeric helpers shared by the runners ----

Signal padded_shift(const Signal& z, const std::string& axis, long long s) {
  const std::size_t k = z.grid.axis_index(axis);
  Signal out = Signal::zeros(z.grid);
  for_each_line(z.grid, k, [&](std::size_t base, std::size_t stride, std::size_t len) {
    for (std::size_t u = 0; u < len; ++u) {
      const long long dst = static_cast<long long>(u) + s;
      if (dst < 0 || dst >= static_cast<long long>(len)) continue;
      out.values[base + static_cast<std::size_t>(dst) * stride] = z.values[base + u * stride];
    }
  });
  return out;
}

std::vector<cdouble> random_unitary(std::size_t n, Rng rng) {
  std::vector<cdouble> m(n * n);
  for (auto& v : m) v = rng.cgaussian();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      cdouble proj{};
      for (std::size_t k = 0; k < n; ++k) proj += std::conj(m[j * n + k]) * m[i * n + k];
      for (std::size_t k = 0; k < n; ++k) m[i * n + k] -= proj * m[j * n + k];
    }
    double nr = 0;
    for (std::size_t k = 0; k < n; ++k) nr += std::norm(m[i * n + k]);
    nr = std::sqrt(nr);
    for (std::size_t k = 0; k < n; ++k) m[i * n + k] /= nr;
  }
  return m;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---- stone ----

ArtifactSet run_stone(const Resolved& r, const std::string& group, std::size_t n,
                      std::size_t trials, double direction) {
  Rng root(r.seed);
  std::vector<Signal> signals;
  if (!r.input.empty()) {
    Signal x = load_signal_csv(r.input);
    if (x.grid.rank() != 1) throw std::invalid_argument("stone: input signal must have one axis");
    n = x.size();
    signals.push_back(std::move(x));
  } else {
    for (std::size_t i = 0; i < trials; ++i) {
      signals.push_back(presets::random_signal(Grid::line("u", n), root.stream(0, i)));
    }
  }
  const std::string axis = signals.front().grid.axes[0].name;

  GroupDescriptor g;
  if (group == "translation") {
    g = translation_group(axis, direction == 0.0 ? 1.0 : direction);
  } else if (group == "transposition") {
    g = transposition_group(axis, direction == 0.0 ? kTwoPi / static_cast<double>(n) : direction);
  } else {
    throw ConfigError("config key 'group' must be \"translation\" or \"transposition\"");
  }
  const DiagonalizingBasis b = basis_for(g, n);
  const double defect = unitarity_defect(b);

  struct TrialRow {
    double orbit_deviation = 0;
    double diag_residual = 0;
  };
  std::vector<TrialRow> rows;
  double max_dev = 0, max_res = 0;
  for (const auto& x : signals) {
    const Signal inv0 = stone_invariant(x, b);
    const double nx = l2_norm(x);
    TrialRow row;
    for (std::size_t t = 0; t < n; ++t) {
      const double td = static_cast<double>(t);
      const Signal moved = act(g, td, x);
      row.orbit_deviation =
          std::max(row.orbit_deviation, l2_distance(stone_invariant(moved, b), inv0) / nx);
      row.diag_residual = std::max(row.diag_residual, verify_diagonalization(b, td, x));
    }
    max_dev = std::max(max_dev, row.orbit_deviation);
    max_res = std::max(max_res, row.diag_residual);
    rows.push_back(row);
  }

  ArtifactSet art;
  art.echo["experiment"] = "stone";
  art.echo["group"] = group;
  art.echo["n"] = n;
  art.echo["trials"] = rows.size();
  art.echo["direction"] = g.direction;
  if (!r.input.empty()) art.echo["input"] = r.input;

  if (r.format == "json") {
    JsonWriter w;
    w.begin_object();
    w.key("experiment").value(std::string_view("stone"));
    w.key("group").value(std::string_view(group));
    w.key("n").value(static_cast<std::uint64_t>(n));
    w.key("trials").value(static_cast<std::uint64_t>(rows.size()));
    w.key("direction").value(g.direction);
    w.key("unitarity_defect").value(defect);
    w.key("max_orbit_deviation").value(max_dev);
    w.key("max_diag_residual").value(max_res);
    w.key("per_trial").begin_array();
    for (const auto& row : rows) {
      w.begin_object();
      w.key("orbit_deviation").value(row.orbit_deviation);
      w.key("diag_residual").value(row.diag_residual);
      w.end_object();
    }
    w.end_array();
    w.end_object();
    art.files.emplace_back("results.json", w.str() + "\n");
  } else {
    std::string csv = "trial,orbit_deviation,diag_residual\n";
    for (std::size_t i = 0; i < rows.size(); ++i)
      csv += std::to_string(i) + "," + format_double(rows[i].orbit_deviation) + "," +
             format_double(rows[i].diag_residual) + "\n";
    art.files.emplace_back("results.csv", csv);
  }
  return art;
}

// ---- stability ----

ArtifactSet run_stability(const Resolved& r, const std::string& preset, std::size_t n,
                          double sigma, double rate, int j1, int j2,
                          const std::vector<double>& amplitudes, int cycles) {
  Rng root(r.seed);
  Signal x = [&] {
    if (!r.input.empty()) {
      Signal in = load_signal_csv(r.input);
      if (in.grid.rank() != 1)
        throw std::invalid_argument("stability: input signal must have one axis");
      return in;
    }
    if (preset == "impulse") return presets::impulse(n);
    if (preset == "gaussian-bump") return presets::gaussian_bump(n, sigma);
    if (preset == "chirp") return presets::chirp(n, sigma, rate);
    if (preset == "white-noise") return presets::white_noise(n, root.stream(0, 0));
    throw ConfigError("config key 'preset' must be one of impulse, gaussian-bump, chirp, white-noise");
  }();
  n = x.size();
  const std::string axis = x.grid.axes[0].name;

  const CascadeSpec spec = presets::two_layer_modulus_cascade(axis, j1, j2);
  const Representation phi = [&spec](const Signal& s) { return cascade_apply(s, spec).final(); };

  std::vector<DeformationField> family;
  for (double a : amplitudes) {
    DeformationField d;
    d.axis = axis;
    d.tau.resize(n);
    for (std::size_t u = 0; u < n; ++u)
      d.tau[u] = a * std::sin(kTwoPi * static_cast<double>(cycles) * static_cast<double>(u) /
                              static_cast<double>(n));
    family.push_back(std::move(d));
  }

  const StabilityReport rep = stability_curve(phi, x, family, "two_layer_modulus_cascade");
  std::vector<double> raw(family.size()), ratios;
  const double nx = l2_norm(x);
  for (std::size_t i = 0; i < family.size(); ++i)
    raw[i] = l2_distance(warp(x, family[i]), x) / nx;
  for (const auto& s : rep.samples)
    if (s.included) ratios.push_back(s.ratio);
  const double med = median_of(ratios);

  ArtifactSet art;
  art.echo["experiment"] = "stability";
  art.echo["preset"] = r.input.empty() ? preset : "file";
  art.echo["n"] = n;
  art.echo["j1"] = j1;
  art.echo["j2"] = j2;
  art.echo["cycles"] = cycles;
  art.echo["amplitudes"] = amplitudes;
  if (!r.input.empty()) art.echo["input"] = r.input;

  if (r.format == "json") {
    JsonWriter w;
    w.begin_object();
    w.key("experiment").value(std::string_view("stability"));
    w.key("representation_id").value(std::string_view(rep.representation_id));
    w.key("n").value(static_cast<std::uint64_t>(n));
    w.key("estimated_C").value(rep.estimated_C);
    w.key("max_ratio").value(rep.estimated_C);
    w.key("median_ratio").value(med);
    w.key("samples").begin_array();
    for (std::size_t i = 0; i < rep.samples.size(); ++i) {
      const auto& s = rep.samples[i];
      w.begin_object();
      w.key("k_metric").value(s.k_metric);
      w.key("group_norm").value(s.group_norm);
      w.key("error").value(s.error);
      w.key("ratio").value(s.ratio);
      w.key("included").value(s.included);
      w.key("raw_error").value(raw[i]);
      w.end_object();
    }
    w.end_array();
    w.end_object();
    art.files.emplace_back("results.json", w.str() + "\n");
  } else {
    art.files.emplace_back("results.csv", curve_to_csv(rep));
  }
  return art;
}

// ---- commutation ----

ArtifactSet run_commutation(const Resolved& r, std::size_t channels, std::size_t n,
                            std::size_t filters, std::size_t taps, std::size_t banks) {
  Rng root(r.seed);
  const Grid grid({Axis{"u", n, AxisKind::spatial, 0}, Axis{"c", channels, AxisKind::channel, 0}});
  const LayerAction action{1.0, "c", std::nullopt};

  struct Row {
    std::size_t bank = 0, shift = 0;
    double residual = 0;
  };
  std::vector<Row> rows;
  double max_res = 0;
  double control = 0;
  for (std::size_t bi = 0; bi < banks; ++bi) {
    const FilterBank f = presets::random_bank(filters, taps, root.stream(2, bi), "c", "f");
    const Signal z = presets::random_signal(grid, root.stream(0, bi));
    for (std::size_t s = 0; s < channels; ++s) {
      const double res = commutation_residual(z, action, static_cast<double>(s), f);
      rows.push_back({bi, s, res});
      max_res = std::max(max_res, res);
    }
    if (bi == 0) {
      const Signal lhs = filter_bank_apply(padded_shift(z, "c", 1), f);
      const Signal rhs = padded_shift(filter_bank_apply(z, f), "c", 1);
      control = l2_distance(lhs, rhs) / l2_norm(z);
    }
  }

  ArtifactSet art;
  art.echo["experiment"] = "commutation";
  art.echo["channels"] = channels;
  art.echo["spatial_n"] = n;
  art.echo["filters"] = filters;
  art.echo["taps"] = taps;
  art.echo["banks"] = banks;

  if (r.format == "json") {
    JsonWriter w;
    w.begin_object();
    w.key("experiment").value(std::string_view("commutation"));
    w.key("channels").value(static_cast<std::uint64_t>(channels));
    w.key("spatial_n").value(static_cast<std::uint64_t>(n));
    w.key("filters").value(static_cast<std::uint64_t>(filters));
    w.key("taps").value(static_cast<std::uint64_t>(taps));
    w.key("banks").value(static_cast<std::uint64_t>(banks));
    w.key("max_residual").value(max_res);
    w.key("negative_control_residual").value(control);
    w.key("rows").begin_array();
    for (const auto& row : rows) {
      w.begin_object();
      w.key("bank").value(static_cast<std::uint64_t>(row.bank));
      w.key("shift").value(static_cast<std::uint64_t>(row.shift));
      w.key("residual").value(row.residual);
      w.end_object();
    }
    w.end_array();
    w.end_object();
    art.files.emplace_back("results.json", w.str() + "\n");
  } else {
    std::string csv = "bank,shift,residual\n";
    for (const auto& row : rows)
      csv += std::to_string(row.bank) + "," + std::to_string(row.shift) + "," +
             format_double(row.residual) + "\n";
    art.files.emplace_back("results.csv", csv);
  }
  return art;
}

// ---- pooling ----

ArtifactSet run_pooling(const Resolved& r, std::size_t channels, std::size_t n,
                        const std::vector<int>& scales, double alpha, double t) {
  Rng root(r.seed);
  const Grid grid({Axis{"u", n, AxisKind::spatial, 0}, Axis{"c", channels, AxisKind::channel, 0}});
  const Signal z = presets::random_signal(grid, root.stream(0, 0));
  const LayerAction action{1.0, "c", std::nullopt};

  std::vector<AttenuationSample> samples;
  for (int j : scales)
    samples.push_back(pooling_attenuation(z, action, t, presets::average_pool("c", j, alpha)));

  bool monotone = true;
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (samples[i].error > samples[i - 1].error + 1e-12) monotone = false;

  const bool pow2 = channels > 0 && (channels & (channels - 1)) == 0;
  int full_j = 0;
  double full_error = 0;
  if (pow2) {
    full_j = std::bit_width(channels) - 1;
    full_error = pooling_attenuation(z, action, t, presets::average_pool("c", full_j, alpha)).error;
  }

  ArtifactSet art;
  art.echo["experiment"] = "pooling";
  art.echo["channels"] = channels;
  art.echo["spatial_n"] = n;
  art.echo["scales"] = scales;
  art.echo["alpha"] = alpha;
  art.echo["t"] = t;

  if (r.format == "json") {
    JsonWriter w;
    w.begin_object();
    w.key("experiment").value(std::string_view("pooling"));
    w.key("channels").value(static_cast<std::uint64_t>(channels));
    w.key("spatial_n").value(static_cast<std::uint64_t>(n));
    w.key("alpha").value(alpha);
    w.key("t").value(t);
    w.key("monotone").value(monotone);
    if (pow2) {
      w.key("full_axis_scale").value(full_j);
      w.key("full_axis_error").value(full_error);
    }
    w.key("rows").begin_array();
    for (std::size_t i = 0; i < samples.size(); ++i) {
      w.begin_object();
      w.key("scale_log2").value(scales[i]);
      w.key("error").value(samples[i].error);
      w.key("ratio").value(samples[i].ratio);
      w.end_object();
    }
    w.end_array();
    w.end_object();
    art.files.emplace_back("results.json", w.str() + "\n");
  } else {
    std::string csv = "scale_log2,error,ratio\n";
    for (std::size_t i = 0; i < samples.size(); ++i)
      csv += std::to_string(scales[i]) + "," + format_double(samples[i].error) + "," +
             format_double(samples[i].ratio) + "\n";
    art.files.emplace_back("results.csv", csv);
  }
  return art;
}

// ---- discover ----

ArtifactSet run_discover(const Resolved& r, const std::string& preset, std::size_t n,
                         std::size_t m, double pairing_tolerance, std::size_t random_bases) {
  Rng root(r.seed);
  std::vector<Signal> dataset;
  bool fourier_truth = false;
  if (!r.input.empty()) {
    dataset = load_dataset_csv(r.input);
    n = dataset.front().size();
  } else if (preset == "shift-orbit") {
    const Signal x0 = presets::white_noise(n, root.stream(1, 0));
    for (std::size_t t = 0; t < n; ++t)
      dataset.push_back(cyclic_shift(x0, "u", static_cast<long long>(t)));
    fourier_truth = true;
  } else if (preset == "transposition-orbit") {
    const Signal x0 = presets::white_noise(n, root.stream(1, 0), true);
    const GroupDescriptor g = transposition_group("u", kTwoPi / static_cast<double>(n));
    for (std::size_t t = 0; t < n; ++t) dataset.push_back(act(g, static_cast<double>(t), x0));
  } else if (preset == "white-noise") {
    for (std::size_t i = 0; i < m; ++i)
      dataset.push_back(presets::white_noise(n, root.stream(1, i)));
  } else {
    throw ConfigError(
        "config key 'preset' must be one of shift-orbit, transposition-orbit, white-noise");
  }

  DiscoveredBasis b = discover(dataset, pairing_tolerance);

  double energy = 0;
  for (const auto& x : dataset) energy += l2_norm(x) * l2_norm(x);
  energy /= static_cast<double>(dataset.size());

  DiscoveredBasis ident;
  ident.dim = n;
  ident.rows = n;
  ident.u.assign(n * n, cdouble{});
  for (std::size_t i = 0; i < n; ++i) ident.u[i * n + i] = 1.0;
  const double identity_objective = invariance_objective(ident, dataset);

  std::size_t beaten = 0;
  for (std::size_t i = 0; i < random_bases; ++i) {
    DiscoveredBasis cand;
    cand.dim = n;
    cand.rows = n;
    cand.u = random_unitary(n, root.stream(3, i));
    if (b.objective <= invariance_objective(cand, dataset)) ++beaten;
  }

  // against the per-eigenvalue subspaces of the shift group: each discovered
  // row span must sit inside some Fourier-mode span
  double max_angle = 0;
  if (fourier_truth) {
    const DiagonalizingBasis fb = basis_for(translation_group("u"), n);
    auto frow = [&](std::size_t k) {
      return std::vector<cdouble>(fb.transform.begin() + static_cast<long>(k * n),
                                  fb.transform.begin() + static_cast<long>((k + 1) * n));
    };
    auto column = [&](std::size_t j) {
      std::vector<cdouble> v(n);
      for (std::size_t row = 0; row < n; ++row) v[row] = b.pairing.eigenvectors[row * n + j];
      return v;
    };
    for (const auto& pr : b.pairing.pairs) {
      double best = kPi;
      for (std::size_t k = 1; 2 * k < n; ++k)
        best = std::min(best, max_principal_angle({column(pr.a), column(pr.b)},
                                                  {frow(k), frow(n - k)}));
      max_angle = std::max(max_angle, best);
    }
    for (const auto& sg : b.pairing.singletons) {
      double best = max_principal_angle({column(sg.index)}, {frow(0)});
      if (n % 2 == 0) best = std::min(best, max_principal_angle({column(sg.index)}, {frow(n / 2)}));
      max_angle = std::max(max_angle, best);
    }
  }

  ArtifactSet art;
  art.echo["experiment"] = "discover";
  art.echo["preset"] = r.input.empty() ? preset : "file";
  art.echo["n"] = n;
  art.echo["dataset_size"] = dataset.size();
  art.echo["pairing_tolerance"] = pairing_tolerance;
  art.echo["random_bases"] = random_bases;
  if (!r.input.empty()) art.echo["input"] = r.input;

  std::string eig = "row";
  for (std::size_t u = 0; u < n; ++u)
    eig += ",re" + std::to_string(u) + ",im" + std::to_string(u);
  eig += "\n";
  for (std::size_t row = 0; row < b.rows; ++row) {
    eig += std::to_string(row);
    for (std::size_t k = 0; k < n; ++k) {
      const cdouble v = b.u[row * n + k];
      eig += "," + format_double(v.real()) + "," + format_double(v.imag());
    }
    eig += "\n";
  }
  art.files.emplace_back("eigenvectors.csv", eig);

  if (r.format == "json") {
    JsonWriter w;
    w.begin_object();
    w.key("experiment").value(std::string_view("discover"));
    w.key("preset").value(std::string_view(r.input.empty() ? preset : "file"));
    w.key("n").value(static_cast<std::uint64_t>(n));
    w.key("dataset_size").value(static_cast<std::uint64_t>(dataset.size()));
    w.key("rows").value(static_cast<std::uint64_t>(b.rows));
    w.key("pairs").value(static_cast<std::uint64_t>(b.pairing.pairs.size()));
    w.key("singletons").value(static_cast<std::uint64_t>(b.pairing.singletons.size()));
    w.key("objective").value(b.objective);
    w.key("mean_energy").value(energy);
    w.key("normalized_objective").value(energy > 0 ? b.objective / energy : 0.0);
    w.key("identity_objective").value(identity_objective);
    w.key("random_bases").value(static_cast<std::uint64_t>(random_bases));
    w.key("random_bases_beaten").value(static_cast<std::uint64_t>(beaten));
    if (fourier_truth) w.key("max_fourier_angle").value(max_angle);
    w.end_object();
    art.files.emplace_back("results.json", w.str() + "\n");
  } else {
    std::string csv = "key,value\n";
    csv += "rows," + std::to_string(b.rows) + "\n";
    csv += "pairs," + std::to_string(b.pairing.pairs.size()) + "\n";
    csv += "singletons," + std::to_string(b.pairing.singletons.size()) + "\n";
    csv += "objective," + format_double(b.objective) + "\n";
    csv += "mean_energy," + format_double(energy) + "\n";
    csv += "normalized_objective," + format_double(energy > 0 ? b.objective / energy : 0.0) + "\n";
    csv += "identity_objective," + format_double(identity_objective) + "\n";
    csv += "random_bases," + std::to_string(random_bases) + "\n";
    csv += "random_bases_beaten," + std::to_string(beaten) + "\n";
    if (fourier_truth) csv += "max_fourier_angle," + format_double(max_angle) + "\n";
    art.files.emplace_back("results.csv", csv);
  }
  return art;
}

// ---- frame ----

ArtifactSet run_frame(const Resolved& r, const std::string& bank, std::size_t n,
                      std::size_t count, std::size_t taps, std::size_t trials) {
  Rng root(r.seed);
  const FilterBank f = [&] {
    if (bank == "identity") return presets::identity_bank();
    if (bank == "duplicated") {
      FilterBank d;
      d.axes = {"u"};
      d.support = {1};
      d.filters = {{cdouble{1.0, 0.0}}, {cdouble{1.0, 0.0}}};
      d.new_axis_label = "l1";
      return d;
    }
    if (bank == "haar") return presets::haar_pair_bank();
    if (bank == "oriented4") return presets::oriented4_bank();
    if (bank == "half-band") return presets::half_band_pair_bank(n);
    if (bank == "random") return presets::random_bank(count, taps, root);
    throw ConfigError(
        "config key 'bank' must be one of identity, duplicated, haar, oriented4, half-band, random");
  }();

  const auto [a, big_a] = frame_bounds(f, n);

  std::vector<double> ratios(trials);
  for (std::size_t i = 0; i < trials; ++i) {
    const Signal x = presets::random_signal(Grid::line("u", n), root.stream(0, i));
    ratios[i] = l2_norm(filter_bank_apply(x, f)) / l2_norm(x);
  }
  const double lo = *std::min_element(ratios.begin(), ratios.end());
  const double hi = *std::max_element(ratios.begin(), ratios.end());
  const bool within = lo >= a - 1e-9 && hi <= big_a + 1e-9;

  ArtifactSet art;
  art.echo["experiment"] = "frame";
  art.echo["bank"] = bank;
  art.echo["n"] = n;
  art.echo["filters"] = f.filters.size();
  art.echo["taps"] = f.support[0];
  art.echo["trials"] = trials;

  if (r.format == "json") {
    JsonWriter w;
    w.begin_object();
    w.key("experiment").value(std::string_view("frame"));
    w.key("bank").value(std::string_view(bank));
    w.key("n").value(static_cast<std::uint64_t>(n));
    w.key("filters").value(static_cast<std::uint64_t>(f.filters.size()));
    w.key("a").value(a);
    w.key("A").value(big_a);
    w.key("empirical_min").value(lo);
    w.key("empirical_max").value(hi);
    w.key("trials").value(static_cast<std::uint64_t>(trials));
    w.key("within_slack").value(within);
    w.end_object();
    art.files.emplace_back("results.json", w.str() + "\n");
  } else {
    std::string csv = "trial,ratio\n";
    for (std::size_t i = 0; i < trials; ++i)
      csv += std::to_string(i) + "," + format_double(ratios[i]) + "\n";
    art.files.emplace_back("results.csv", csv);
  }
  return art;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"invariance laboratory: deterministic experiments on group-invariant representations"};
  app.require_subcommand(1);
  int rc = 0;

  auto timed = [&rc](const Resolved& r, const char* experiment, auto&& runner) {
    const auto t0 = std::chrono::steady_clock::now();
    const ArtifactSet art = runner();
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_artifacts(r, experiment, art, elapsed);
    rc = 0;
  };

  // stone
  auto* stone = app.add_subcommand("stone", "orbit invariance of the diagonalizing modulus");
  CommonCli stone_c;
  add_common(stone, stone_c, true);
  std::string stone_group = "translation";
  std::uint64_t stone_n = 64, stone_trials = 20;
  double stone_dir = 0.0;
  stone->add_option("--group", stone_group, "translation or transposition")
      ->check(CLI::IsMember({"translation", "transposition"}));
  stone->add_option("--n", stone_n, "signal length");
  stone->add_option("--trials", stone_trials, "number of random signals");
  stone->add_option("--direction", stone_dir, "group rate (defaults per group)");
  stone->callback([&] {
    Resolved r = resolve_common(*stone, stone_c, "stone", {"group", "n", "trials", "direction"}, true);
    std::string group = cfg_string(r.cfg, "group", "translation");
    std::size_t n = cfg_u64(r.cfg, "n", 64);
    std::size_t trials = cfg_u64(r.cfg, "trials", 20);
    double dir = cfg_double(r.cfg, "direction", 0.0);
    if (stone->count("--group")) group = stone_group;
    if (stone->count("--n")) n = stone_n;
    if (stone->count("--trials")) trials = stone_trials;
    if (stone->count("--direction")) dir = stone_dir;
    timed(r, "stone", [&] { return run_stone(r, group, n, trials, dir); });
  });

  // stability
  auto* stab = app.add_subcommand("stability", "deformation stability of the modulus cascade");
  CommonCli stab_c;
  add_common(stab, stab_c, true);
  std::string stab_preset = "chirp";
  std::uint64_t stab_n = 128;
  double stab_sigma = 0.0, stab_rate = 0.5;
  int stab_j1 = 3, stab_j2 = 3, stab_cycles = 1;
  std::vector<double> stab_amps;
  stab->add_option("--preset", stab_preset, "base signal preset")
      ->check(CLI::IsMember({"impulse", "gaussian-bump", "chirp", "white-noise"}));
  stab->add_option("--n", stab_n, "signal length");
  stab->add_option("--sigma", stab_sigma, "preset envelope width (0 = default)");
  stab->add_option("--rate", stab_rate, "chirp rate");
  stab->add_option("--j1", stab_j1, "first layer pooling scale");
  stab->add_option("--j2", stab_j2, "second layer pooling scale");
  stab->add_option("--cycles", stab_cycles, "deformation waves across the axis");
  stab->add_option("--amplitude", stab_amps, "deformation amplitudes (repeatable)");
  stab->callback([&] {
    Resolved r = resolve_common(
        *stab, stab_c, "stability",
        {"preset", "n", "sigma", "rate", "j1", "j2", "cycles", "amplitudes"}, true);
    std::string preset = cfg_string(r.cfg, "preset", "chirp");
    std::size_t n = cfg_u64(r.cfg, "n", 128);
    double sigma = cfg_double(r.cfg, "sigma", 0.0);
    double rate = cfg_double(r.cfg, "rate", 0.5);
    int j1 = static_cast<int>(cfg_u64(r.cfg, "j1", 3));
    int j2 = static_cast<int>(cfg_u64(r.cfg, "j2", 3));
    int cycles = static_cast<int>(cfg_u64(r.cfg, "cycles", 1));
    std::vector<double> amps = cfg_doubles(r.cfg, "amplitudes", {0.25, 0.5, 1.0, 2.0});
    if (stab->count("--preset")) preset = stab_preset;
    if (stab->count("--n")) n = stab_n;
    if (stab->count("--sigma")) sigma = stab_sigma;
    if (stab->count("--rate")) rate = stab_rate;
    if (stab->count("--j1")) j1 = stab_j1;
    if (stab->count("--j2")) j2 = stab_j2;
    if (stab->count("--cycles")) cycles = stab_cycles;
    if (stab->count("--amplitude")) amps = stab_amps;
    timed(r, "stability",
          [&] { return run_stability(r, preset, n, sigma, rate, j1, j2, amps, cycles); });
  });

  // commutation
  auto* comm = app.add_subcommand("commutation", "equivariance of channel convolution");
  CommonCli comm_c;
  add_common(comm, comm_c, false);
  std::uint64_t comm_channels = 8, comm_n = 32, comm_filters = 2, comm_taps = 3, comm_banks = 5;
  comm->add_option("--channels", comm_channels, "channel axis size");
  comm->add_option("--n", comm_n, "spatial axis size");
  comm->add_option("--filters", comm_filters, "filters per bank");
  comm->add_option("--taps", comm_taps, "taps per filter");
  comm->add_option("--banks", comm_banks, "number of random banks");
  comm->callback([&] {
    Resolved r = resolve_common(*comm, comm_c, "commutation",
                                {"channels", "n", "filters", "taps", "banks"}, false);
    std::size_t channels = cfg_u64(r.cfg, "channels", 8);
    std::size_t n = cfg_u64(r.cfg, "n", 32);
    std::size_t filters = cfg_u64(r.cfg, "filters", 2);
    std::size_t taps = cfg_u64(r.cfg, "taps", 3);
    std::size_t banks = cfg_u64(r.cfg, "banks", 5);
    if (comm->count("--channels")) channels = comm_channels;
    if (comm->count("--n")) n = comm_n;
    if (comm->count("--filters")) filters = comm_filters;
    if (comm->count("--taps")) taps = comm_taps;
    if (comm->count("--banks")) banks = comm_banks;
    timed(r, "commutation", [&] { return run_commutation(r, channels, n, filters, taps, banks); });
  });

  // pooling
  auto* pool = app.add_subcommand("pooling", "invariance gained by pooling at growing scales");
  CommonCli pool_c;
  add_common(pool, pool_c, false);
  std::uint64_t pool_channels = 16, pool_n = 32;
  double pool_alpha = 1.0, pool_t = 1.0;
  std::vector<int> pool_scales;
  pool->add_option("--channels", pool_channels, "channel axis size");
  pool->add_option("--n", pool_n, "spatial axis size");
  pool->add_option("--alpha", pool_alpha, "subsampling exponent");
  pool->add_option("--t", pool_t, "channel displacement");
  pool->add_option("--scale", pool_scales, "pooling scales (repeatable)");
  pool->callback([&] {
    Resolved r =
        resolve_common(*pool, pool_c, "pooling", {"channels", "n", "alpha", "t", "scales"}, false);
    std::size_t channels = cfg_u64(r.cfg, "channels", 16);
    std::size_t n = cfg_u64(r.cfg, "n", 32);
    double alpha = cfg_double(r.cfg, "alpha", 1.0);
    double t = cfg_double(r.cfg, "t", 1.0);
    std::vector<int> scales = cfg_ints(r.cfg, "scales", {1, 2, 3, 4});
    if (pool->count("--channels")) channels = pool_channels;
    if (pool->count("--n")) n = pool_n;
    if (pool->count("--alpha")) alpha = pool_alpha;
    if (pool->count("--t")) t = pool_t;
    if (pool->count("--scale")) scales = pool_scales;
    timed(r, "pooling", [&] { return run_pooling(r, channels, n, scales, alpha, t); });
  });

  // discover
  auto* disc = app.add_subcommand("discover", "recover an invariant basis from a dataset");
  CommonCli disc_c;
  add_common(disc, disc_c, true);
  std::string disc_preset = "shift-orbit";
  std::uint64_t disc_n = 8, disc_m = 512, disc_bases = 100;
  double disc_tol = 1e-6;
  disc->add_option("--preset", disc_preset, "dataset preset")
      ->check(CLI::IsMember({"shift-orbit", "transposition-orbit", "white-noise"}));
  disc->add_option("--n", disc_n, "signal length");
  disc->add_option("--m", disc_m, "dataset size (white-noise)");
  disc->add_option("--pairing-tolerance", disc_tol, "relative eigenvalue pairing gate");
  disc->add_option("--random-bases", disc_bases, "random unitary baselines");
  disc->callback([&] {
    Resolved r = resolve_common(*disc, disc_c, "discover",
                                {"preset", "n", "m", "pairing_tolerance", "random_bases"}, true);
    std::string preset = cfg_string(r.cfg, "preset", "shift-orbit");
    std::size_t n = cfg_u64(r.cfg, "n", 8);
    std::size_t m = cfg_u64(r.cfg, "m", 512);
    double tol = cfg_double(r.cfg, "pairing_tolerance", 1e-6);
    std::size_t bases = cfg_u64(r.cfg, "random_bases", 100);
    if (disc->count("--preset")) preset = disc_preset;
    if (disc->count("--n")) n = disc_n;
    if (disc->count("--m")) m = disc_m;
    if (disc->count("--pairing-tolerance")) tol = disc_tol;
    if (disc->count("--random-bases")) bases = disc_bases;
    timed(r, "discover", [&] { return run_discover(r, preset, n, m, tol, bases); });
  });

  // frame
  auto* frame = app.add_subcommand("frame", "frame bounds of a filter bank");
  CommonCli frame_c;
  add_common(frame, frame_c, false);
  std::string frame_bank = "oriented4";
  std::uint64_t frame_n = 64, frame_count = 4, frame_taps = 5, frame_trials = 100;
  frame->add_option("--bank", frame_bank, "bank preset")
      ->check(CLI::IsMember({"identity", "duplicated", "haar", "oriented4", "half-band", "random"}));
  frame->add_option("--n", frame_n, "signal length");
  frame->add_option("--count", frame_count, "filters in a random bank");
  frame->add_option("--taps", frame_taps, "taps in a random bank");
  frame->add_option("--trials", frame_trials, "random signals for the empirical check");
  frame->callback([&] {
    Resolved r =
        resolve_common(*frame, frame_c, "frame", {"bank", "n", "count", "taps", "trials"}, false);
    std::string bank = cfg_string(r.cfg, "bank", "oriented4");
    std::size_t n = cfg_u64(r.cfg, "n", 64);
    std::size_t count = cfg_u64(r.cfg, "count", 4);
    std::size_t taps = cfg_u64(r.cfg, "taps", 5);
    std::size_t trials = cfg_u64(r.cfg, "trials", 100);
    if (frame->count("--bank")) bank = frame_bank;
    if (frame->count("--n")) n = frame_n;
    if (frame->count("--count")) count = frame_count;
    if (frame->count("--taps")) taps = frame_taps;
    if (frame->count("--trials")) trials = frame_trials;
    timed(r, "frame", [&] { return run_frame(r, bank, n, count, taps, trials); });
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "lab: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "lab: " << e.what() << "\n";
    return 1;
  }
  return rc;
}

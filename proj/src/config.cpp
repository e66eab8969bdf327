#include "ota/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace ota {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

double to_double(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError("expected a finite number, got '" + s + "'");
  }
  return v;
}

std::uint64_t to_u64(const std::string& s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("expected a non-negative integer, got '" + s + "'");
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "on" || s == "yes") return true;
  if (s == "false" || s == "off" || s == "no") return false;
  throw ConfigError("expected on/off, got '" + s + "'");
}

std::optional<double> to_auto_double(const std::string& s) {
  if (s == "auto") return std::nullopt;
  return to_double(s);
}

std::vector<std::size_t> to_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_u64(trim(item)));
  if (out.empty()) throw ConfigError("expected a comma-separated list");
  return out;
}

struct Field {
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

using FieldTable = std::map<std::string, std::map<std::string, Field>>;

template <class T>
Field num_field(T& ref) {
  if constexpr (std::is_floating_point_v<T>) {
    return {[&ref](const std::string& v) { ref = to_double(v); }, [&ref] { return fmt_double(ref); }};
  } else {
    return {[&ref](const std::string& v) { ref = static_cast<T>(to_u64(v)); }, [&ref] { return std::to_string(ref); }};
  }
}

Field bool_field(bool& ref) {
  return {[&ref](const std::string& v) { ref = to_bool(v); }, [&ref] { return std::string(ref ? "on" : "off"); }};
}

Field auto_field(std::optional<double>& ref) {
  return {[&ref](const std::string& v) { ref = to_auto_double(v); },
          [&ref] { return ref ? fmt_double(*ref) : std::string("auto"); }};
}

// Keep the order of sections and keys stable: std::map sorts keys, which is
// what render_config relies on for a canonical form.
FieldTable fields_of(ExperimentConfig& c) {
  FieldTable t;
  auto& p = t["problem"];
  p["type"] = {[&c](const std::string& v) {
                 if (v != "quadratic" && v != "logistic") throw ConfigError("expected quadratic or logistic, got '" + v + "'");
                 c.problem.type = v;
               },
               [&c] { return c.problem.type; }};
  p["num_agents"] = num_field(c.problem.num_agents);
  p["dim"] = num_field(c.problem.dim);
  p["seed"] = num_field(c.problem.seed);
  p["center_scale"] = num_field(c.problem.center_scale);
  p["samples_per_agent"] = num_field(c.problem.samples_per_agent);
  p["l2_reg"] = num_field(c.problem.l2_reg);

  auto& ch = t["channel"];
  ch["fading"] = {[&c](const std::string& v) {
                    if (v == "rayleigh") c.channel.fading = FadingModel::rayleigh;
                    else if (v == "truncated_gaussian") c.channel.fading = FadingModel::truncated_gaussian;
                    else throw ConfigError("expected rayleigh or truncated_gaussian, got '" + v + "'");
                  },
                  [&c] { return to_string(c.channel.fading); }};
  ch["fading_mean"] = num_field(c.channel.fading_mean);
  ch["fading_std"] = num_field(c.channel.fading_std);
  ch["interference"] = bool_field(c.channel.interference);
  ch["alpha"] = num_field(c.channel.alpha);
  ch["delta"] = num_field(c.channel.delta);
  ch["mode"] = {[&c](const std::string& v) {
                  if (v == "direct") c.channel.mode = AggregationMode::direct;
                  else if (v == "waveform") c.channel.mode = AggregationMode::waveform;
                  else throw ConfigError("expected direct or waveform, got '" + v + "'");
                },
                [&c] { return to_string(c.channel.mode); }};
  ch["waveform_samples"] = num_field(c.channel.waveform_samples);
  ch["basis_seed"] = num_field(c.channel.basis_seed);

  auto& tr = t["training"];
  tr["schedule"] = {[&c](const std::string& v) {
                      if (v == "theta_over_k") c.training.schedule = Schedule::Kind::theta_over_k;
                      else if (v == "power") c.training.schedule = Schedule::Kind::power;
                      else if (v == "constant") c.training.schedule = Schedule::Kind::constant;
                      else throw ConfigError("expected theta_over_k, power or constant, got '" + v + "'");
                    },
                    [&c] { return to_string(c.training.schedule); }};
  tr["theta"] = num_field(c.training.theta);
  tr["rho"] = num_field(c.training.rho);
  tr["eta"] = num_field(c.training.eta);
  tr["momentum"] = bool_field(c.training.momentum);
  tr["beta"] = num_field(c.training.beta);
  tr["rounds"] = num_field(c.training.rounds);
  tr["trials"] = num_field(c.training.trials);
  tr["init"] = {[&c](const std::string& v) {
                  if (v != "unit_offset" && v != "origin") throw ConfigError("expected unit_offset or origin, got '" + v + "'");
                  c.training.init = v;
                },
                [&c] { return c.training.init; }};
  tr["seed"] = num_field(c.training.seed);

  auto& an = t["analysis"];
  an["fit_k_min"] = num_field(c.analysis.fit_k_min);
  an["fit_k_max"] = num_field(c.analysis.fit_k_max);
  an["fit_points_per_decade"] = num_field(c.analysis.fit_points_per_decade);
  an["L"] = num_field(c.analysis.L);
  an["C"] = auto_field(c.analysis.C);
  an["c_samples"] = num_field(c.analysis.c_samples);
  an["G"] = auto_field(c.analysis.G);
  an["region_radius"] = auto_field(c.analysis.region_radius);
  an["bound_k"] = {[&c](const std::string& v) { c.analysis.bound_k = to_list(v); },
                   [&c] {
                     std::string s;
                     for (std::size_t i = 0; i < c.analysis.bound_k.size(); ++i) {
                       if (i) s += ",";
                       s += std::to_string(c.analysis.bound_k[i]);
                     }
                     return s;
                   }};
  an["B"] = num_field(c.analysis.B);
  an["gen_lambda"] = num_field(c.analysis.gen_lambda);
  an["dataset_size"] = num_field(c.analysis.dataset_size);
  an["p"] = num_field(c.analysis.p);

  auto& out = t["output"];
  out["directory"] = {[&c](const std::string& v) {
                        if (v.empty()) throw ConfigError("output directory must not be empty");
                        c.output.directory = v;
                      },
                      [&c] { return c.output.directory; }};
  out["csv"] = bool_field(c.output.csv);
  out["summary"] = bool_field(c.output.summary);
  return t;
}

void require(bool ok, const std::string& field, const std::string& msg) {
  if (!ok) throw ConfigError(field + ": " + msg);
}

}  // namespace

ChannelModel ExperimentConfig::channel_model() const {
  ChannelModel m;
  m.fading = channel.fading;
  m.fading_mean = channel.fading_mean;
  m.fading_std = channel.fading_std;
  if (channel.interference) {
    m.interference = StableParams(channel.alpha, channel.delta);
  } else {
    m.interference.reset();
  }
  m.num_agents = problem.num_agents;
  m.waveform_samples = channel.waveform_samples;
  m.basis_seed = channel.basis_seed;
  return m;
}

TrainConfig ExperimentConfig::train_config(const FederatedProblem& prob) const {
  TrainConfig t;
  switch (training.schedule) {
    case Schedule::Kind::theta_over_k: t.schedule = Schedule::theta_over_k(training.theta); break;
    case Schedule::Kind::power: t.schedule = Schedule::power(training.rho); break;
    case Schedule::Kind::constant: t.schedule = Schedule::constant(training.eta); break;
  }
  if (training.momentum) t.momentum_beta = training.beta;
  t.rounds = training.rounds;
  t.trials = training.trials;
  t.seed = training.seed;
  t.mode = channel.mode;
  t.initial_point = training.init == "origin" ? Vec(prob.dim(), 0.0) : default_initial_point(prob);
  // The error metric follows the configured tail index even with interference
  // switched off, so runs with and without interference are comparable.
  t.metric_alpha = channel.alpha;
  return t;
}

void ExperimentConfig::validate() const {
  require(problem.num_agents >= 1, "problem.num_agents", "must be at least 1");
  require(problem.dim >= 1, "problem.dim", "must be at least 1");
  if (problem.type == "quadratic") {
    require(problem.center_scale >= 0.0, "problem.center_scale", "must be non-negative");
  } else {
    require(problem.l2_reg > 0.0, "problem.l2_reg", "must be positive (strong convexity)");
    require(problem.samples_per_agent >= 1, "problem.samples_per_agent", "must be at least 1");
  }
  require(channel.fading_mean > 0.0, "channel.fading_mean", "must be positive");
  require(channel.fading_std >= 0.0, "channel.fading_std", "must be non-negative");
  require(channel.alpha > 1.0 && channel.alpha <= 2.0, "channel.alpha", "tail index must lie in (1, 2]");
  require(channel.delta > 0.0, "channel.delta", "scale must be positive");
  require(channel.waveform_samples == 0 || channel.waveform_samples >= problem.dim, "channel.waveform_samples",
          "must be 0 (= dim) or at least problem.dim");
  switch (training.schedule) {
    case Schedule::Kind::theta_over_k: require(training.theta > 0.0, "training.theta", "must be positive"); break;
    case Schedule::Kind::power: require(training.rho > 0.0 && training.rho < 1.0, "training.rho", "must lie in (0, 1)"); break;
    case Schedule::Kind::constant: require(training.eta > 0.0, "training.eta", "must be positive"); break;
  }
  require(training.beta >= 0.0 && training.beta < 1.0, "training.beta", "must lie in [0, 1)");
  require(training.trials >= 1, "training.trials", "must be at least 1");
  const std::size_t k = training.rounds;
  if (analysis.fit_k_min != 0 || analysis.fit_k_max != 0) {
    require(analysis.fit_k_min >= 1, "analysis.fit_k_min", "must be at least 1 when a window is given");
    require(analysis.fit_k_max > analysis.fit_k_min, "analysis.fit_k_max", "must exceed fit_k_min");
    require(analysis.fit_k_max <= k, "analysis.fit_k_max", "must not exceed training.rounds");
  }
  require(analysis.L > 0.0, "analysis.L", "must be positive");
  require(!analysis.C || *analysis.C >= 0.0, "analysis.C", "must be non-negative or auto");
  require(analysis.c_samples >= 1, "analysis.c_samples", "must be at least 1");
  require(!analysis.G || *analysis.G >= 0.0, "analysis.G", "must be non-negative or auto");
  require(!analysis.region_radius || *analysis.region_radius >= 0.0, "analysis.region_radius", "must be non-negative or auto");
  for (auto kk : analysis.bound_k) require(kk >= 1, "analysis.bound_k", "entries must be at least 1");
  require(analysis.B > 0.0, "analysis.B", "must be positive");
  require(analysis.gen_lambda > 0.0, "analysis.gen_lambda", "must be positive");
  require(analysis.dataset_size >= 1, "analysis.dataset_size", "must be at least 1");
  require(analysis.gen_lambda * analysis.gen_lambda * static_cast<double>(analysis.dataset_size) > 1.0,
          "analysis.dataset_size", "needs gen_lambda^2 * dataset_size > 1");
  require(analysis.p > 0.0 && analysis.p < 1.0, "analysis.p", "must lie in (0, 1)");
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  ExperimentConfig cfg;
  auto table = fields_of(cfg);
  std::set<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (!table.contains(section)) fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value', got '" + line + "'");
    if (section.empty()) fail("key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto& fields = table.at(section);
    const auto it = fields.find(key);
    if (it == fields.end()) fail("unknown key '" + key + "' in section [" + section + "]");
    const std::string dotted = section + "." + key;
    if (!seen.insert(dotted).second) fail("duplicate key '" + dotted + "'");
    try {
      it->second.set(value);
    } catch (const ConfigError& e) {
      fail(dotted + ": " + e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::string render_config(const ExperimentConfig& config) {
  ExperimentConfig copy = config;
  const auto table = fields_of(copy);
  std::ostringstream out;
  bool first = true;
  for (const char* section : {"problem", "channel", "training", "analysis", "output"}) {
    if (!first) out << "\n";
    first = false;
    out << "[" << section << "]\n";
    for (const auto& [key, field] : table.at(section)) out << key << " = " << field.get() << "\n";
  }
  return out.str();
}

void set_config_value(ExperimentConfig& config, const std::string& dotted_key, const std::string& value) {
  const auto dot = dotted_key.find('.');
  if (dot == std::string::npos) throw ConfigError("expected section.key, got '" + dotted_key + "'");
  auto table = fields_of(config);
  const auto sec = table.find(dotted_key.substr(0, dot));
  if (sec == table.end()) throw ConfigError("unknown section in '" + dotted_key + "'");
  const auto it = sec->second.find(dotted_key.substr(dot + 1));
  if (it == sec->second.end()) throw ConfigError("unknown key '" + dotted_key + "'");
  try {
    it->second.set(trim(value));
  } catch (const ConfigError& e) {
    throw ConfigError(dotted_key + ": " + e.what());
  }
  config.validate();
}

}  // namespace ota

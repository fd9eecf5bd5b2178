#include "snnlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>

namespace snnlab {
namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
  throw ConfigError("config: key '" + key + "' expects " + expected + ", got '" + value + "'");
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(d)) bad_value(key, v, "a finite real");
    return d;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    bad_value(key, v, "a finite real");
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a nonnegative integer");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "a boolean (true/false)");
}

// Enum lookup; on failure lists the candidates nearest by edit distance.
template <typename T>
T parse_enum(const std::string& key, const std::string& v,
             const std::vector<std::pair<std::string, T>>& table) {
  for (const auto& [name, val] : table) {
    if (name == v) return val;
  }
  std::vector<std::pair<std::size_t, std::string>> ranked;
  for (const auto& [name, val] : table) ranked.emplace_back(edit_distance(v, name), name);
  std::sort(ranked.begin(), ranked.end());
  std::string msg = "config: unknown value '" + v + "' for " + key + "; candidates:";
  const std::size_t shown = std::min<std::size_t>(ranked.size(), 3);
  for (std::size_t i = 0; i < shown; ++i) msg += (i ? ", " : " ") + ranked[i].second;
  throw ConfigError(msg);
}

const std::vector<std::pair<std::string, InitKind>>& init_kind_table() {
  static const std::vector<std::pair<std::string, InitKind>> table = {
      {"lecun", InitKind::kLecun},     {"xavier", InitKind::kXavier}, {"kaiming", InitKind::kKaiming},
      {"normal", InitKind::kNormal},   {"ikun_v1", InitKind::kIkunV1}, {"ikun_v2", InitKind::kIkunV2},
  };
  return table;
}

using Handler = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h = {
      {"data.dir", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.data_dir = v; }},
      {"data.source",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.data_source = parse_enum<DataSource>(
             k, v, {{"idx", DataSource::kIdx}, {"synthetic", DataSource::kSynthetic}});
       }},
      {"data.train_subset",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.train_subset = static_cast<std::size_t>(parse_u64(k, v));
       }},
      {"data.test_subset",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.test_subset = static_cast<std::size_t>(parse_u64(k, v));
       }},
      {"net.t",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.time_steps = static_cast<int>(parse_int(k, v));
       }},
      {"net.encoder",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.encoder = parse_enum<Encoder>(k, v,
                                         {{"constant_current", Encoder::kConstantCurrent},
                                          {"poisson_rate", Encoder::kPoissonRate}});
       }},
      {"neuron.model",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.neuron.model =
             parse_enum<NeuronModel>(k, v, {{"if", NeuronModel::kIF}, {"lif", NeuronModel::kLIF}});
       }},
      {"neuron.tau", [](ExperimentConfig& c, const std::string& k,
                        const std::string& v) { c.neuron.tau = parse_double(k, v); }},
      {"neuron.v_threshold", [](ExperimentConfig& c, const std::string& k,
                                const std::string& v) { c.neuron.v_threshold = parse_double(k, v); }},
      {"neuron.v_reset", [](ExperimentConfig& c, const std::string& k,
                            const std::string& v) { c.neuron.v_reset = parse_double(k, v); }},
      {"neuron.reset",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.neuron.reset_mode =
             parse_enum<ResetMode>(k, v, {{"hard", ResetMode::kHard}, {"soft", ResetMode::kSoft}});
       }},
      {"neuron.dt", [](ExperimentConfig& c, const std::string& k,
                       const std::string& v) { c.neuron.dt = parse_double(k, v); }},
      {"neuron.capacitance", [](ExperimentConfig& c, const std::string& k,
                                const std::string& v) { c.neuron.capacitance = parse_double(k, v); }},
      {"surrogate.kind",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.surrogate.kind = parse_enum<SurrogateKind>(k, v,
                                                      {{"sigmoid", SurrogateKind::kSigmoid},
                                                       {"atan", SurrogateKind::kAtan},
                                                       {"triangular", SurrogateKind::kTriangular},
                                                       {"constant", SurrogateKind::kConstant}});
       }},
      {"surrogate.alpha", [](ExperimentConfig& c, const std::string& k,
                             const std::string& v) { c.surrogate.alpha = parse_double(k, v); }},
      {"init.kind",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.init.kind = parse_enum<InitKind>(k, v, init_kind_table());
       }},
      {"init.alpha", [](ExperimentConfig& c, const std::string& k,
                        const std::string& v) { c.init.alpha = parse_double(k, v); }},
      {"init.fixed_std", [](ExperimentConfig& c, const std::string& k,
                            const std::string& v) { c.init.fixed_std = parse_double(k, v); }},
      {"init.calibrate", [](ExperimentConfig& c, const std::string& k,
                            const std::string& v) { c.calibrate = parse_bool(k, v); }},
      {"init.calib_batch",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.calib_batch = static_cast<std::size_t>(parse_u64(k, v));
       }},
      {"train.optimizer",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.train.optimizer =
             parse_enum<OptimizerKind>(k, v, {{"sgd", OptimizerKind::kSgd}, {"adam", OptimizerKind::kAdam}});
       }},
      {"train.lr", [](ExperimentConfig& c, const std::string& k,
                      const std::string& v) { c.lr_override = parse_double(k, v); }},
      {"train.momentum", [](ExperimentConfig& c, const std::string& k,
                            const std::string& v) { c.train.momentum = parse_double(k, v); }},
      {"train.beta1", [](ExperimentConfig& c, const std::string& k,
                         const std::string& v) { c.train.beta1 = parse_double(k, v); }},
      {"train.beta2", [](ExperimentConfig& c, const std::string& k,
                         const std::string& v) { c.train.beta2 = parse_double(k, v); }},
      {"train.eps", [](ExperimentConfig& c, const std::string& k,
                       const std::string& v) { c.train.eps = parse_double(k, v); }},
      {"train.batch_size",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.train.batch_size = static_cast<std::size_t>(parse_u64(k, v));
       }},
      {"train.epochs",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.train.epochs = static_cast<int>(parse_int(k, v));
       }},
      {"train.train_acc_threshold", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.train.train_acc_threshold = parse_double(k, v);
       }},
      {"train.test_acc_threshold", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.train.test_acc_threshold = parse_double(k, v);
       }},
      {"hessian.k",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.hessian.k = static_cast<std::size_t>(parse_u64(k, v));
       }},
      {"hessian.probes",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.hessian.n_probes = static_cast<std::size_t>(parse_u64(k, v));
       }},
      {"hessian.lanczos_steps",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.hessian.lanczos_steps = static_cast<std::size_t>(parse_u64(k, v));
       }},
      {"hessian.max_iters",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.hessian.max_iters = static_cast<std::size_t>(parse_u64(k, v));
       }},
      {"hessian.tol", [](ExperimentConfig& c, const std::string& k,
                         const std::string& v) { c.hessian.tol = parse_double(k, v); }},
      {"hessian.batch",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.hessian_batch = static_cast<std::size_t>(parse_u64(k, v));
       }},
      {"varprop.depth",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.varprop_depth = static_cast<std::size_t>(parse_u64(k, v));
       }},
      {"varprop.width",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.varprop_width = static_cast<std::size_t>(parse_u64(k, v));
       }},
      {"varprop.batch",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.varprop_batch = static_cast<std::size_t>(parse_u64(k, v));
       }},
      {"varprop.t",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.varprop_time_steps = static_cast<int>(parse_int(k, v));
       }},
      {"varprop.tau", [](ExperimentConfig& c, const std::string& k,
                         const std::string& v) { c.varprop_tau = parse_double(k, v); }},
      {"out", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.out_dir = v; }},
      {"seed",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.seed = parse_u64(k, v); }},
  };
  return h;
}

}  // namespace

void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const auto& h = handlers();
  const auto it = h.find(key);
  if (it == h.end()) {
    std::vector<std::pair<std::size_t, std::string>> ranked;
    for (const auto& [name, fn] : h) ranked.emplace_back(edit_distance(key, name), name);
    std::sort(ranked.begin(), ranked.end());
    throw ConfigError("config: unknown key '" + key + "'; nearest valid key: " + ranked[0].second);
  }
  it->second(cfg, key, value);
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot read " + path);
  ExperimentConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: " + path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    apply_config_entry(cfg, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
  return cfg;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [name, fn] : handlers()) keys.push_back(name);
  return keys;
}

InitKind parse_init_kind(const std::string& v) { return parse_enum<InitKind>("scheme", v, init_kind_table()); }

std::uint64_t parse_u64_value(const std::string& v, const std::string& key) { return parse_u64(key, v); }

}  // namespace snnlab

#include "semeq/config.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

namespace semeq {
namespace {

using nlohmann::json;

// Reads optional keys from one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw FormatError(where_ + ": expected an object");
  }
  ObjectReader(const ObjectReader&) = delete;
  ObjectReader& operator=(const ObjectReader&) = delete;

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      it->get_to(out);
    } catch (const json::exception& e) {
      throw FormatError(where_ + "." + key + ": " + e.what());
    }
  }

  void get_path(const char* key, std::filesystem::path& out) {
    std::string s = out.string();
    get(key, s);
    out = s;
  }

  const json* child(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw FormatError(where_ + ": unknown key '" + key + "'");
    }
  }

  const std::string& where() const noexcept { return where_; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

void read_world(const json& j, const std::string& where, WorldParams& p) {
  ObjectReader r(j, where);
  r.get("tx_dim", p.tx_dim);
  r.get("rx_dim", p.rx_dim);
  r.get("classes", p.classes);
  r.get("samples", p.samples);
  r.get("cluster_spread", p.cluster_spread);
  r.get("noise", p.noise);
  r.get("scale", p.scale);
  r.get("seed", p.seed);
  r.get("validation_fraction", p.validation_fraction);
  r.get("random_rotation", p.random_rotation);
  r.finish();
}

json world_json(const WorldParams& p) {
  return {{"tx_dim", p.tx_dim},
          {"rx_dim", p.rx_dim},
          {"classes", p.classes},
          {"samples", p.samples},
          {"cluster_spread", p.cluster_spread},
          {"noise", p.noise},
          {"scale", p.scale},
          {"seed", p.seed},
          {"validation_fraction", p.validation_fraction},
          {"random_rotation", p.random_rotation}};
}

void read_user(const json& j, const std::string& where, UserConfig& u) {
  ObjectReader r(j, where);
  r.get("accuracy_target", u.accuracy_target);
  r.get("distance_km", u.radio.distance_km);
  r.get("max_power", u.radio.max_power);
  r.get("min_rate", u.radio.min_rate);
  r.get("kappa", u.compute.kappa);
  r.get("f_min", u.compute.f_min);
  r.get("f_max", u.compute.f_max);
  r.get("c0", u.compute.c0);
  r.get("c1", u.compute.c1);
  if (const json* w = r.child("world")) read_world(*w, where + ".world", u.world.params);
  r.get_path("tx_embeddings", u.world.tx_path);
  r.get_path("rx_embeddings", u.world.rx_path);
  r.get_path("labels", u.world.labels_path);
  r.finish();
}

json user_json(const UserConfig& u) {
  json j = {{"accuracy_target", u.accuracy_target},
            {"distance_km", u.radio.distance_km},
            {"max_power", u.radio.max_power},
            {"min_rate", u.radio.min_rate},
            {"kappa", u.compute.kappa},
            {"f_min", u.compute.f_min},
            {"f_max", u.compute.f_max},
            {"c0", u.compute.c0},
            {"c1", u.compute.c1},
            {"world", world_json(u.world.params)}};
  if (u.world.external()) {
    j["tx_embeddings"] = u.world.tx_path.string();
    j["rx_embeddings"] = u.world.rx_path.string();
    j["labels"] = u.world.labels_path.string();
  }
  return j;
}

}  // namespace

RadioConfig ScenarioConfig::radio() const {
  RadioConfig r;
  r.bandwidth = bandwidth;
  r.carrier_ghz = carrier_ghz;
  r.temperature = temperature;
  r.noise_psd = noise_psd;
  for (const UserConfig& u : users) r.users.push_back(u.radio);
  return r;
}

ComputeConfig ScenarioConfig::compute() const {
  ComputeConfig c;
  c.server = server;
  for (const UserConfig& u : users) c.users.push_back(u.compute);
  return c;
}

std::vector<double> ScenarioConfig::accuracy_targets() const {
  std::vector<double> out;
  for (const UserConfig& u : users) out.push_back(u.accuracy_target);
  return out;
}

WorldParams ScenarioConfig::world_params(std::size_t user) const {
  WorldParams p = users.at(user).world.params;
  if (p.seed == 0) p.seed = derive_seed(seed, Stream::world, user);
  return p;
}

void ScenarioConfig::validate() const {
  if (users.empty()) throw InvalidInput("config: at least one user is required");
  if (coeffs.empty() || bits.empty()) throw InvalidInput("config: coeffs and bits must be non-empty");
  if (!std::is_sorted(coeffs.begin(), coeffs.end()) ||
      std::adjacent_find(coeffs.begin(), coeffs.end()) != coeffs.end()) {
    throw InvalidInput("config: coeffs must be strictly ascending");
  }
  if (!std::is_sorted(bits.begin(), bits.end()) ||
      std::adjacent_find(bits.begin(), bits.end()) != bits.end()) {
    throw InvalidInput("config: bits must be strictly ascending");
  }
  if (coeffs.front() < 1) throw InvalidInput("config: coeffs must be >= 1");
  if (bits.front() < 1 || bits.back() > kMaxBits) throw InvalidInput("config: bits must lie in [1, 32]");
  if (slots < 1) throw InvalidInput("config: slots must be >= 1");
  if (power_window < 1) throw InvalidInput("config: power_window must be >= 1");
  if (!(latency_target > 0.0)) throw InvalidInput("config: latency_target must be positive");
  if (!(V >= 0.0) || !(eps_z > 0.0) || !(eps_q > 0.0)) {
    throw InvalidInput("config: V must be >= 0 and step sizes positive");
  }
  for (std::size_t k = 0; k < users.size(); ++k) {
    const UserConfig& u = users[k];
    if (!(u.accuracy_target >= 0.0 && u.accuracy_target <= 1.0)) {
      throw InvalidInput("config: user " + std::to_string(k) + " accuracy_target outside [0,1]");
    }
    const WorldSource& w = u.world;
    if (w.external() && (w.rx_path.empty() || w.labels_path.empty())) {
      throw InvalidInput("config: user " + std::to_string(k) +
                         " needs tx_embeddings, rx_embeddings and labels together");
    }
  }
  radio().validate();
  compute().validate();
}

ScenarioConfig default_scenario() {
  ScenarioConfig c;
  WorldParams base;
  base.rx_dim = 256;
  base.classes = 100;
  base.samples = 5000;
  base.cluster_spread = 0.17;
  base.noise = 0.03;
  base.scale = 1.0;
  const Index tx_dims[] = {128, 192, 256};
  const double c0[] = {1.5e7, 2.0e7, 2.5e7};
  for (std::size_t k = 0; k < 3; ++k) {
    UserConfig u;
    u.world.params = base;
    u.world.params.tx_dim = tx_dims[k];
    u.compute.c0 = c0[k];
    u.compute.c1 = 2e4;
    u.accuracy_target = 0.7;
    c.users.push_back(u);
  }
  c.anchors.strategy = AnchorStrategy::prototypical;
  c.anchors.per_cluster = 8;
  c.anchors.seed = 7;
  c.V = 4e-3;
  c.eps_z = 0.5;
  c.eps_q = 1e-3;
  return c;
}

ScenarioConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  ScenarioConfig c = default_scenario();
  ObjectReader r(doc, "config");

  if (const json* w = r.child("world")) {
    for (UserConfig& u : c.users) read_world(*w, "config.world", u.world.params);
  }
  if (const json* users = r.child("users")) {
    if (!users->is_array() || users->empty()) throw FormatError("config.users: expected a non-empty array");
    // Users beyond the defaults start from the first default user.
    const UserConfig base = c.users.front();
    std::vector<UserConfig> parsed;
    for (std::size_t k = 0; k < users->size(); ++k) {
      UserConfig u = k < c.users.size() ? c.users[k] : base;
      read_user((*users)[k], "config.users[" + std::to_string(k) + "]", u);
      parsed.push_back(std::move(u));
    }
    c.users = std::move(parsed);
  }

  if (const json* radio = r.child("radio")) {
    ObjectReader rr(*radio, "config.radio");
    rr.get("bandwidth", c.bandwidth);
    rr.get("carrier_ghz", c.carrier_ghz);
    rr.get("temperature", c.temperature);
    rr.get("noise_psd", c.noise_psd);
    rr.finish();
  }
  if (const json* server = r.child("server")) {
    ObjectReader sr(*server, "config.server");
    sr.get("kappa", c.server.kappa);
    sr.get("f_min", c.server.f_min);
    sr.get("f_max", c.server.f_max);
    sr.get("r0", c.server.r0);
    sr.get("r1", c.server.r1);
    sr.get("c_pred", c.server.c_pred);
    sr.finish();
  }
  r.get("coeffs", c.coeffs);
  r.get("bits", c.bits);
  std::string method(to_string(c.method));
  r.get("equalizer", method);
  c.method = parse_equalizer_method(method);
  if (const json* anchors = r.child("anchors")) {
    ObjectReader ar(*anchors, "config.anchors");
    std::string strategy(to_string(c.anchors.strategy));
    ar.get("strategy", strategy);
    c.anchors.strategy = parse_anchor_strategy(strategy);
    ar.get("per_cluster", c.anchors.per_cluster);
    ar.get("seed", c.anchors.seed);
    ar.finish();
  }
  if (const json* control = r.child("control")) {
    ObjectReader cr(*control, "config.control");
    cr.get("latency_target", c.latency_target);
    cr.get("V", c.V);
    cr.get("eps_z", c.eps_z);
    cr.get("eps_q", c.eps_q);
    cr.get("alpha", c.alpha);
    cr.get("beta", c.beta);
    cr.get("min_bandwidth", c.min_bandwidth);
    cr.finish();
  }
  r.get("slots", c.slots);
  r.get("seed", c.seed);
  r.get("worst_case_slots", c.worst_case_slots);
  r.get("power_window", c.power_window);
  r.get_path("accuracy_table", c.accuracy_table);
  r.finish();
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string config_to_json(const ScenarioConfig& c) {
  json users = json::array();
  for (const UserConfig& u : c.users) users.push_back(user_json(u));
  json j = {
      {"users", users},
      {"radio",
       {{"bandwidth", c.bandwidth},
        {"carrier_ghz", c.carrier_ghz},
        {"temperature", c.temperature},
        {"noise_psd", c.noise_psd}}},
      {"server",
       {{"kappa", c.server.kappa},
        {"f_min", c.server.f_min},
        {"f_max", c.server.f_max},
        {"r0", c.server.r0},
        {"r1", c.server.r1},
        {"c_pred", c.server.c_pred}}},
      {"coeffs", c.coeffs},
      {"bits", c.bits},
      {"equalizer", std::string(to_string(c.method))},
      {"anchors",
       {{"strategy", std::string(to_string(c.anchors.strategy))},
        {"per_cluster", c.anchors.per_cluster},
        {"seed", c.anchors.seed}}},
      {"control",
       {{"latency_target", c.latency_target},
        {"V", c.V},
        {"eps_z", c.eps_z},
        {"eps_q", c.eps_q},
        {"alpha", c.alpha},
        {"beta", c.beta},
        {"min_bandwidth", c.min_bandwidth}}},
      {"slots", c.slots},
      {"seed", c.seed},
      {"worst_case_slots", c.worst_case_slots},
      {"power_window", c.power_window},
  };
  if (!c.accuracy_table.empty()) j["accuracy_table"] = c.accuracy_table.string();
  return j.dump(2) + "\n";
}

void save_config(const std::filesystem::path& path, const ScenarioConfig& config) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write config '" + path.string() + "'");
  out << config_to_json(config);
}

}  // namespace semeq

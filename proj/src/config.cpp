#include "pccs/config.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pccs {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError("config key '" + key + "': not a number: " + v);
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("config key '" + key + "': not an integer: " + v);
  return out;
}

bool to_switch(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw ConfigError("config key '" + key + "': expected on/off, got " + v);
}

}  // namespace

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (k_clusters < 1) fail("k-clusters must be >= 1");
  if (!(w_h > 0.0)) fail("wh must be > 0");
  if (!(w_f > 0.0)) fail("wf must be > 0");
  if (!(qualify.radius >= 0.0)) fail("radius must be >= 0");
  if (!(qualify.speed_tol >= 0.0 && qualify.speed_tol <= 1.0)) fail("dv must be in [0, 1]");
  if (!(qualify.angle_tol >= 0.0 && qualify.angle_tol <= std::numbers::pi))
    fail("dtheta must be in [0, pi]");
  if (top_k < 1) fail("topk must be >= 1");
  if (top_k > k_clusters) fail("topk must not exceed k-clusters");
  if (epochs_pretrain < 1 || epochs_classifier < 1 || epochs_synthesis < 1)
    fail("epochs per stage must be >= 1");
  if (batch_size < 1) fail("batch-size must be >= 1");
  if (!(learning_rate > 0.0)) fail("lr must be > 0");
  if (patience < 1) fail("patience must be >= 1");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) fail("val-fraction must be in [0, 1)");
  if (kmeans_max_iterations < 1) fail("kmeans-max-iter must be >= 1");
}

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return kv;
}

std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

KeyValues to_key_values(const TrainConfig& c) {
  return {
      {"k-clusters", std::to_string(c.k_clusters)},
      {"wh", fmt_double(c.w_h)},
      {"wf", fmt_double(c.w_f)},
      {"radius", fmt_double(c.qualify.radius)},
      {"dv", fmt_double(c.qualify.speed_tol)},
      {"dtheta", fmt_double(c.qualify.angle_tol)},
      {"topk", std::to_string(c.top_k)},
      {"epochs-stage1", std::to_string(c.epochs_pretrain)},
      {"epochs-stage2", std::to_string(c.epochs_classifier)},
      {"epochs-stage3", std::to_string(c.epochs_synthesis)},
      {"batch-size", std::to_string(c.batch_size)},
      {"lr", fmt_double(c.learning_rate)},
      {"patience", std::to_string(c.patience)},
      {"val-fraction", fmt_double(c.val_fraction)},
      {"kmeans-max-iter", std::to_string(c.kmeans_max_iterations)},
      {"cluster-space", c.cluster_space == ClusterSpace::Deep ? "deep" : "raw"},
      {"synthesis", c.use_synthesis ? "on" : "off"},
      {"seed", std::to_string(c.seed)},
  };
}

TrainConfig apply_key_values(TrainConfig c, const KeyValues& kv) {
  for (const auto& [k, v] : kv) {
    if (k == "k-clusters") c.k_clusters = static_cast<int>(to_int(k, v));
    else if (k == "wh") c.w_h = to_double(k, v);
    else if (k == "wf") c.w_f = to_double(k, v);
    else if (k == "radius") c.qualify.radius = to_double(k, v);
    else if (k == "dv") c.qualify.speed_tol = to_double(k, v);
    else if (k == "dtheta") c.qualify.angle_tol = to_double(k, v);
    else if (k == "topk") c.top_k = static_cast<int>(to_int(k, v));
    else if (k == "epochs-stage1") c.epochs_pretrain = static_cast<int>(to_int(k, v));
    else if (k == "epochs-stage2") c.epochs_classifier = static_cast<int>(to_int(k, v));
    else if (k == "epochs-stage3") c.epochs_synthesis = static_cast<int>(to_int(k, v));
    else if (k == "batch-size") c.batch_size = static_cast<int>(to_int(k, v));
    else if (k == "lr") c.learning_rate = to_double(k, v);
    else if (k == "patience") c.patience = static_cast<int>(to_int(k, v));
    else if (k == "val-fraction") c.val_fraction = to_double(k, v);
    else if (k == "kmeans-max-iter") c.kmeans_max_iterations = static_cast<int>(to_int(k, v));
    else if (k == "cluster-space") {
      if (v == "deep") c.cluster_space = ClusterSpace::Deep;
      else if (v == "raw") c.cluster_space = ClusterSpace::Raw;
      else throw ConfigError("cluster-space must be deep or raw, got " + v);
    } else if (k == "synthesis") c.use_synthesis = to_switch(k, v);
    else if (k == "seed") {
      const long long s = to_int(k, v);
      if (s < 0) throw ConfigError("seed must be non-negative");
      c.seed = static_cast<std::uint64_t>(s);
    } else {
      throw ConfigError("unknown config key: " + k);
    }
  }
  return c;
}

RunConfig apply_run_key_values(RunConfig base, const KeyValues& kv) {
  KeyValues model;
  for (const auto& [k, v] : kv) {
    if (k == "data") base.data_dir = v;
    else if (k == "holdout") base.holdout = v;
    else if (k == "out") base.out_dir = v;
    else model[k] = v;
  }
  base.train = apply_key_values(base.train, model);
  return base;
}

}  // namespace pccs

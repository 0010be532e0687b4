#include "pccs/ablation.hpp"

#include <boost/algorithm/string/classification.hpp>
#include <boost/algorithm/string/split.hpp>
#include <cstdio>
#include <numbers>

namespace pccs {

namespace {

double parse_number(const std::string& s) {
  std::string body = s;
  double factor = 1.0;
  if (body.size() >= 2 && body.ends_with("pi")) {
    body.resize(body.size() - 2);
    factor = std::numbers::pi;
    if (body.empty()) body = "1";
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(body, &used);
  } catch (const std::logic_error&) {
    used = 0;
  }
  if (used == 0 || used != body.size()) throw ConfigError("ablation grid: bad number '" + s + "'");
  return v * factor;
}

std::vector<std::string> split(const std::string& s, const char* sep) {
  std::vector<std::string> out;
  boost::split(out, s, boost::is_any_of(sep));
  return out;
}

}  // namespace

std::vector<AblationPoint> ablation_grid(const std::string& axis, const std::string& grid,
                                         const TrainConfig& base) {
  std::string values_text = grid;
  if (values_text.empty()) {
    if (axis == "deep") values_text = "deep,raw";
    else if (axis == "K") values_text = "100,200,500,1000";
    else if (axis == "weights") values_text = "1:3,1:2,1:1,2:1,3:1";
    else if (axis == "loss") values_text = "0:0:0,1:0.1:0.1pi";
    else if (axis == "synthesis") values_text = "on,off";
  }
  std::vector<AblationPoint> out;
  for (const auto& value : split(values_text, ",")) {
    TrainConfig c = base;
    if (axis == "deep") {
      c = apply_key_values(c, {{"cluster-space", value}});
    } else if (axis == "K") {
      c = apply_key_values(c, {{"k-clusters", value}});
      c.top_k = std::min(c.top_k, c.k_clusters);
    } else if (axis == "weights") {
      const auto parts = split(value, ":");
      if (parts.size() != 2) throw ConfigError("weights grid entries look like 1:3, got " + value);
      const double a = parse_number(parts[0]);
      const double b = parse_number(parts[1]);
      c.w_h = a / (a + b);
      c.w_f = b / (a + b);
    } else if (axis == "loss") {
      const auto parts = split(value, ":");
      if (parts.size() != 3) throw ConfigError("loss grid entries look like r:dv:dtheta, got " + value);
      c.qualify.radius = parse_number(parts[0]);
      c.qualify.speed_tol = parse_number(parts[1]);
      c.qualify.angle_tol = parse_number(parts[2]);
    } else if (axis == "synthesis") {
      c = apply_key_values(c, {{"synthesis", value}});
    } else {
      throw ConfigError("unknown ablation axis: " + axis + " (deep, K, weights, loss, synthesis)");
    }
    c.validate();
    out.push_back({value, c});
  }
  return out;
}

std::vector<AblationResult> run_ablation(const std::string& axis,
                                         const std::vector<AblationPoint>& points,
                                         std::span<const TrackWindow> train,
                                         std::span<const TrackWindow> test,
                                         const SceneIndex& scenes, const ProgressFn& progress) {
  std::vector<AblationResult> results;
  for (const auto& p : points) {
    AblationResult r;
    r.point = p;
    if (progress) progress("ablate " + axis + "=" + p.value);
    try {
      const ModelBundle model = train_full(p.config, train, scenes);
      r.mean = evaluate(model, test, p.config.top_k).mean;
      r.ok = true;
    } catch (const std::exception& e) {
      r.error = e.what();
      if (progress) progress("  failed: " + r.error);
    }
    results.push_back(std::move(r));
  }
  return results;
}

void write_ablation_csv(std::ostream& out, const std::string& axis,
                        const std::vector<AblationResult>& results) {
  out << "axis,value,k_clusters,wh,wf,radius,dv,dtheta,cluster_space,synthesis,topk,"
         "ade,fde,min_ade_k,min_fde_k,cv_ade,cv_fde,status\n";
  char buf[512];
  for (const auto& r : results) {
    const TrainConfig& c = r.point.config;
    std::snprintf(buf, sizeof buf, "%s,%s,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%s,%s,%d,", axis.c_str(),
                  r.point.value.c_str(), c.k_clusters, c.w_h, c.w_f, c.qualify.radius,
                  c.qualify.speed_tol, c.qualify.angle_tol,
                  c.cluster_space == ClusterSpace::Deep ? "deep" : "raw",
                  c.use_synthesis ? "on" : "off", c.top_k);
    out << buf;
    if (r.ok) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,ok\n", r.mean.ade,
                    r.mean.fde, r.mean.min_ade, r.mean.min_fde, r.mean.cv_ade, r.mean.cv_fde);
      out << buf;
    } else {
      std::string msg = r.error;
      for (char& ch : msg)
        if (ch == ',' || ch == '\n') ch = ';';
      out << ",,,,,,failed: " << msg << '\n';
    }
  }
}

}  // namespace pccs

#include "pccs/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <boost/algorithm/string/split.hpp>
#include <boost/algorithm/string/classification.hpp>

namespace pccs {

void write_predictions_csv(std::ostream& out, const std::vector<PredictionRow>& rows) {
  out << "scene,ped_id,obs_end_frame,rank,probability";
  for (int t = 1; t <= kPredLen; ++t) out << ",x" << t << ",y" << t;
  out << '\n';
  char buf[64];
  for (const auto& r : rows) {
    out << r.scene_id << ',' << r.ped_id << ',' << r.obs_end_frame << ',' << r.rank;
    std::snprintf(buf, sizeof buf, ",%.17g", r.probability);
    out << buf;
    for (const auto& p : r.trajectory) {
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g", p.x(), p.y());
      out << buf;
    }
    out << '\n';
  }
}

std::vector<PredictionRow> read_predictions_csv(std::istream& in) {
  std::vector<PredictionRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line_no == 1) continue;
    std::vector<std::string> f;
    boost::split(f, line, boost::is_any_of(","));
    if (f.size() != 5 + 2 * kPredLen)
      throw std::runtime_error("predictions line " + std::to_string(line_no) + ": wrong field count");
    try {
      PredictionRow r;
      r.scene_id = f[0];
      r.ped_id = std::stoll(f[1]);
      r.obs_end_frame = std::stoll(f[2]);
      r.rank = std::stoi(f[3]);
      r.probability = std::stod(f[4]);
      for (int t = 0; t < kPredLen; ++t)
        r.trajectory[t] = Vec2(std::stod(f[5 + 2 * t]), std::stod(f[6 + 2 * t]));
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw std::runtime_error("predictions line " + std::to_string(line_no) + ": bad number");
    }
  }
  return rows;
}

std::string render_svg(const std::vector<Vec2>& observed, const std::vector<Vec2>& truth,
                       const std::vector<PredictionRow>& predictions) {
  std::vector<Vec2> all(observed);
  all.insert(all.end(), truth.begin(), truth.end());
  for (const auto& p : predictions) all.insert(all.end(), p.trajectory.begin(), p.trajectory.end());
  if (all.empty()) all.push_back(Vec2::Zero());
  Vec2 lo = all[0], hi = all[0];
  for (const auto& p : all) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double margin = 0.5;
  lo.array() -= margin;
  hi.array() += margin;
  const double span = std::max(hi.x() - lo.x(), hi.y() - lo.y());
  const double size = 400.0;
  const double scale = size / span;
  // y up in world, down in svg
  auto px = [&](const Vec2& p) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f,%.2f", (p.x() - lo.x()) * scale,
                  size - (p.y() - lo.y()) * scale);
    return std::string(buf);
  };
  auto polyline = [&](const std::vector<Vec2>& pts, const char* color, double width,
                      double opacity, const char* dash) {
    std::string s = "  <polyline fill=\"none\" stroke=\"";
    s += color;
    char buf[96];
    std::snprintf(buf, sizeof buf, "\" stroke-width=\"%.1f\" stroke-opacity=\"%.3f\"", width, opacity);
    s += buf;
    if (dash != nullptr) s += std::string(" stroke-dasharray=\"") + dash + "\"";
    s += " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) s += (i ? " " : "") + px(pts[i]);
    return s + "\"/>\n";
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"400\" viewBox=\"0 0 400 400\">\n";
  out << "  <rect width=\"400\" height=\"400\" fill=\"white\"/>\n";
  double pmax = 0.0;
  for (const auto& p : predictions) pmax = std::max(pmax, p.probability);
  // least likely first so the darkest lines end up on top
  std::vector<const PredictionRow*> order;
  for (const auto& p : predictions) order.push_back(&p);
  std::stable_sort(order.begin(), order.end(),
                   [](const auto* a, const auto* b) { return a->probability < b->probability; });
  for (const auto* p : order) {
    std::vector<Vec2> pts;
    if (!observed.empty()) pts.push_back(observed.back());
    pts.insert(pts.end(), p->trajectory.begin(), p->trajectory.end());
    const double alpha = pmax > 0.0 ? 0.15 + 0.85 * p->probability / pmax : 1.0;
    out << polyline(pts, "#c0392b", 2.0, alpha, nullptr);
  }
  if (!truth.empty()) {
    std::vector<Vec2> pts;
    if (!observed.empty()) pts.push_back(observed.back());
    pts.insert(pts.end(), truth.begin(), truth.end());
    out << polyline(pts, "#27ae60", 2.0, 1.0, "6,3");
  }
  if (!observed.empty()) out << polyline(observed, "#2c3e50", 2.5, 1.0, nullptr);
  out << "</svg>\n";
  return out.str();
}

}  // namespace pccs

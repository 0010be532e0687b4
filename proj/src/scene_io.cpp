#include "pccs/scene_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pccs/binary_io.hpp"

namespace pccs {

ParseError::ParseError(const std::string& source, std::size_t line_no, const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(line_no) + ": " + what), line(line_no) {}

namespace {

bool parse_double(const std::string& token, double& out) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_integral(const std::string& token, std::int64_t& out) {
  double v = 0.0;
  if (!parse_double(token, v) || !std::isfinite(v) || v != std::floor(v)) return false;
  out = static_cast<std::int64_t>(v);
  return true;
}

std::int64_t infer_frame_step(const TrajectoryScene& scene) {
  std::map<std::int64_t, std::size_t> counts;
  for (const auto& [id, track] : scene.tracks) {
    for (std::size_t i = 1; i < track.size(); ++i) ++counts[track[i].frame - track[i - 1].frame];
  }
  std::int64_t best = 1;
  std::size_t best_count = 0;
  for (const auto& [step, count] : counts) {
    if (count > best_count) {
      best = step;
      best_count = count;
    }
  }
  return best;
}

}  // namespace

TrajectoryScene parse_scene(std::istream& in, const std::string& scene_id,
                            const std::string& source) {
  TrajectoryScene scene;
  scene.scene_id = scene_id;
  std::string line;
  std::size_t line_no = 0;
  std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> seen;  // (ped, frame) -> line
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string tok; fields >> tok;) tokens.push_back(tok);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    if (tokens.size() != 4) throw ParseError(source, line_no, "expected 4 fields");

    std::int64_t frame = 0;
    std::int64_t ped = 0;
    double x = 0.0;
    double y = 0.0;
    if (!parse_integral(tokens[0], frame)) throw ParseError(source, line_no, "bad frame id");
    if (!parse_integral(tokens[1], ped)) throw ParseError(source, line_no, "bad pedestrian id");
    if (!parse_double(tokens[2], x) || !parse_double(tokens[3], y))
      throw ParseError(source, line_no, "bad coordinate");
    if (!std::isfinite(x) || !std::isfinite(y))
      throw ParseError(source, line_no, "non-finite coordinate");
    auto [it, fresh] = seen.try_emplace({ped, frame}, line_no);
    if (!fresh)
      throw ParseError(source, line_no,
                       "duplicate frame " + std::to_string(frame) + " for pedestrian " +
                           std::to_string(ped) + " (first at line " + std::to_string(it->second) +
                           ")");
    scene.tracks[ped].push_back({frame, Vec2(x, y)});
  }
  if (scene.tracks.empty()) throw EmptySceneError(source + ": empty scene");

  for (auto& [ped, track] : scene.tracks) {
    std::sort(track.begin(), track.end(),
              [](const TrackPoint& a, const TrackPoint& b) { return a.frame < b.frame; });
  }
  scene.frame_step = infer_frame_step(scene);
  return scene;
}

TrajectoryScene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_scene(in, path.stem().string(), path.string());
}

void write_scene(const TrajectoryScene& scene, std::ostream& out) {
  struct Row {
    std::int64_t frame, ped;
    Vec2 pos;
  };
  std::vector<Row> rows;
  for (const auto& [ped, track] : scene.tracks)
    for (const auto& p : track) rows.push_back({p.frame, ped, p.pos});
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.frame != b.frame ? a.frame < b.frame : a.ped < b.ped;
  });
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%lld\t%lld\t%.6f\t%.6f\n", static_cast<long long>(r.frame),
                  static_cast<long long>(r.ped), r.pos.x(), r.pos.y());
    out << buf;
  }
}

namespace {

std::vector<std::filesystem::path> sorted_entries(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

bool is_scene_file(const std::filesystem::path& p) {
  return std::filesystem::is_regular_file(p) && p.filename().string().front() != '.';
}

}  // namespace

DatasetScenes load_dataset_dir(const std::filesystem::path& root,
                               std::vector<std::string>* errors) {
  if (!std::filesystem::is_directory(root))
    throw std::runtime_error("not a directory: " + root.string());
  DatasetScenes out;
  for (const auto& dir : sorted_entries(root)) {
    if (!std::filesystem::is_directory(dir)) continue;
    for (const auto& file : sorted_entries(dir)) {
      if (!is_scene_file(file)) continue;
      try {
        TrajectoryScene scene = load_scene(file);
        scene.scene_id = dir.filename().string() + "/" + scene.scene_id;
        out[dir.filename().string()].push_back(std::move(scene));
      } catch (const std::exception& e) {
        if (errors == nullptr) throw;
        errors->push_back(e.what());
      }
    }
  }
  return out;
}

DatasetWindows window_datasets(const DatasetScenes& scenes, int stride) {
  DatasetWindows out;
  for (const auto& [name, list] : scenes) {
    auto& dst = out[name];
    for (const auto& scene : list) {
      auto ws = window_tracks(scene, stride);
      dst.insert(dst.end(), std::make_move_iterator(ws.begin()), std::make_move_iterator(ws.end()));
    }
  }
  return out;
}

std::uint64_t dataset_fingerprint(const std::filesystem::path& root) {
  ByteWriter w;
  for (const auto& dir : sorted_entries(root)) {
    if (!std::filesystem::is_directory(dir)) continue;
    for (const auto& file : sorted_entries(dir)) {
      if (!is_scene_file(file)) continue;
      w.put_string(dir.filename().string() + "/" + file.filename().string());
      auto bytes = read_file_bytes(file);
      w.put_u64(bytes.size());
      w.bytes().insert(w.bytes().end(), bytes.begin(), bytes.end());
    }
  }
  return crc64(w.bytes());
}

void save_window_cache(const std::filesystem::path& path, std::uint64_t fingerprint,
                       const DatasetWindows& windows) {
  ByteWriter w;
  w.put_raw("PCWC");
  w.put_u32(kWindowCacheVersion);
  w.put_u64(fingerprint);
  w.put_u32(static_cast<std::uint32_t>(windows.size()));
  for (const auto& [name, list] : windows) {
    w.put_string(name);
    w.put_u64(list.size());
    for (const auto& win : list) {
      w.put_string(win.scene_id);
      w.put_i64(win.ped_id);
      w.put_i64(win.start_frame);
      for (const auto& p : win.obs) {
        w.put_f64(p.x());
        w.put_f64(p.y());
      }
      for (const auto& p : win.fut) {
        w.put_f64(p.x());
        w.put_f64(p.y());
      }
    }
  }
  w.put_u64(crc64(w.bytes()));
  write_file_bytes(path, w.bytes());
}

std::optional<DatasetWindows> load_window_cache(const std::filesystem::path& path,
                                                std::uint64_t fingerprint) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  const auto bytes = read_file_bytes(path);
  if (bytes.size() < 8) throw FormatError("window cache truncated");
  const std::span<const std::uint8_t> body(bytes.data(), bytes.size() - 8);
  ByteReader tail(std::span<const std::uint8_t>(bytes.data() + body.size(), 8));
  if (tail.get_u64() != crc64(body)) throw FormatError("window cache checksum mismatch");

  ByteReader r(body);
  if (r.get_raw(4) != "PCWC") throw FormatError("not a window cache");
  if (r.get_u32() != kWindowCacheVersion) throw FormatError("window cache version mismatch");
  if (r.get_u64() != fingerprint) return std::nullopt;
  DatasetWindows out;
  const std::uint32_t datasets = r.get_u32();
  for (std::uint32_t d = 0; d < datasets; ++d) {
    auto& list = out[r.get_string()];
    const std::uint64_t n = r.get_u64();
    for (std::uint64_t k = 0; k < n; ++k) {
      TrackWindow win;
      win.scene_id = r.get_string();
      win.ped_id = r.get_i64();
      win.start_frame = r.get_i64();
      for (auto& p : win.obs) {
        p.x() = r.get_f64();
        p.y() = r.get_f64();
      }
      for (auto& p : win.fut) {
        p.x() = r.get_f64();
        p.y() = r.get_f64();
      }
      list.push_back(std::move(win));
    }
  }
  if (r.remaining() != 0) throw FormatError("window cache has trailing bytes");
  return out;
}

}  // namespace pccs

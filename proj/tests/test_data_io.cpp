#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "pccs/binary_io.hpp"
#include "pccs/qualified_paths.hpp"
#include "pccs/scene_io.hpp"
#include "pccs/trajectory.hpp"
#include "support.hpp"

using namespace pccs;
namespace fs = std::filesystem;

namespace {

TrajectoryScene parse(const std::string& text) {
  std::istringstream in(text);
  return parse_scene(in, "s");
}

// One track of n contiguous frames (step 10) walking along x at 0.4 m per frame.
TrajectoryScene line_scene(int n, std::int64_t ped = 1) {
  TrajectoryScene s;
  s.scene_id = "s";
  s.frame_step = 10;
  for (int i = 0; i < n; ++i) s.tracks[ped].push_back({10 * i, Vec2(0.4 * i, 0.0)});
  return s;
}

void add_track(TrajectoryScene& s, std::int64_t ped, std::int64_t first_frame, const Vec2& start,
               const Vec2& step, int n) {
  for (int i = 0; i < n; ++i)
    s.tracks[ped].push_back({first_frame + i * s.frame_step, start + i * step});
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

}  // namespace

TEST(LoadScene, MinimalParse) {
  const TrajectoryScene s = parse("10 1 0.0 0.0\n20 1 0.4 0.0\n");
  ASSERT_EQ(s.tracks.size(), 1u);
  const auto& t = s.tracks.at(1);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[1].frame, 20);
  EXPECT_EQ(t[1].pos, Vec2(0.4, 0.0));
  EXPECT_EQ(s.frame_step, 10);
  EXPECT_DOUBLE_EQ(s.dt, 0.4);
}

TEST(LoadScene, UnsortedRowsMatchSorted) {
  const TrajectoryScene a = parse("10 1 0 0\n20 1 1 0\n30 1 2 0\n10 2 5 5\n20 2 6 5\n");
  const TrajectoryScene b = parse("30 1 2 0\n20 2 6 5\n10 1 0 0\n10 2 5 5\n20 1 1 0\n");
  ASSERT_EQ(a.tracks.size(), b.tracks.size());
  for (const auto& [ped, track] : a.tracks) {
    const auto& other = b.tracks.at(ped);
    ASSERT_EQ(track.size(), other.size());
    for (std::size_t i = 0; i < track.size(); ++i) {
      EXPECT_EQ(track[i].frame, other[i].frame);
      EXPECT_EQ(track[i].pos, other[i].pos);
    }
  }
}

TEST(LoadScene, MalformedLineNamesLine) {
  try {
    parse("10 1 0.0 0.0\n10 1 abc 0.0\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 2u);
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
}

TEST(LoadScene, RejectsNonFiniteAndShortRows) {
  EXPECT_THROW(parse("10 1 nan 0.0\n"), ParseError);
  EXPECT_THROW(parse("10 1 inf 0.0\n"), ParseError);
  EXPECT_THROW(parse("10 1 0.0\n"), ParseError);
  EXPECT_THROW(parse("10 1 0.0 0.0 7\n"), ParseError);
}

TEST(LoadScene, DuplicateFrameRejected) {
  try {
    parse("10 1 0 0\n20 1 1 0\n10 1 0 1\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 3u);
  }
}

TEST(LoadScene, EmptyFileIsError) {
  EXPECT_THROW(parse(""), EmptySceneError);
  EXPECT_THROW(parse("# only a comment\n\n"), EmptySceneError);
}

TEST(LoadScene, WriteThenParseRoundTrips) {
  Rng rng(3);
  TrajectoryScene s;
  s.scene_id = "s";
  s.frame_step = 10;
  for (std::int64_t ped = 1; ped <= 4; ++ped)
    for (int i = 0; i < 15; ++i)
      s.tracks[ped].push_back({10 * (i + ped), Vec2(rng.uniform(-20, 20), rng.uniform(-20, 20))});
  std::ostringstream out;
  write_scene(s, out);
  const TrajectoryScene back = parse(out.str());
  ASSERT_EQ(back.tracks.size(), s.tracks.size());
  for (const auto& [ped, track] : s.tracks)
    for (std::size_t i = 0; i < track.size(); ++i) {
      EXPECT_EQ(back.tracks.at(ped)[i].frame, track[i].frame);
      EXPECT_NEAR(back.tracks.at(ped)[i].pos.x(), track[i].pos.x(), 5e-7);
      EXPECT_NEAR(back.tracks.at(ped)[i].pos.y(), track[i].pos.y(), 5e-7);
    }
  std::ostringstream again;
  write_scene(back, again);
  EXPECT_EQ(again.str(), out.str());
}

TEST(WindowTracks, Boundaries) {
  EXPECT_EQ(window_tracks(line_scene(20)).size(), 1u);
  EXPECT_EQ(window_tracks(line_scene(21)).size(), 2u);
  EXPECT_EQ(window_tracks(line_scene(19)).size(), 0u);
}

TEST(WindowTracks, GapSplitsRuns) {
  TrajectoryScene s = line_scene(45);
  s.tracks[1].erase(s.tracks[1].begin() + 22);  // runs of 22 and 22 frames
  EXPECT_EQ(window_tracks(s).size(), 3u + 3u);
}

TEST(WindowTracks, ContentAndContiguity) {
  const auto ws = window_tracks(line_scene(25));
  ASSERT_EQ(ws.size(), 6u);
  const TrackWindow& w = ws[2];
  EXPECT_EQ(w.start_frame, 20);
  EXPECT_EQ(w.obs[0], Vec2(0.8, 0.0));
  EXPECT_EQ(w.fut[11], Vec2(0.4 * 21, 0.0));
}

TEST(WindowTracks, FullStrideNeverReusesFrames) {
  const TrajectoryScene s = line_scene(97);
  const auto ws = window_tracks(s, kWindowLen);
  EXPECT_EQ(ws.size(), 4u);
  for (std::size_t i = 1; i < ws.size(); ++i)
    EXPECT_GE(ws[i].start_frame, ws[i - 1].start_frame + kWindowLen * s.frame_step);
  EXPECT_THROW(window_tracks(s, 0), std::invalid_argument);
}

TEST(Normalize, AlreadyAtOriginIsUnchanged) {
  const TrackWindow w = pccs::testing::straight_window(Vec2::Zero(), Vec2(1, 0), 1.0);
  const auto [n, t] = normalize(w);
  EXPECT_EQ(t.offset, Vec2::Zero());
  for (int i = 0; i < kObsLen; ++i) EXPECT_EQ(n.obs[i], w.obs[i]);
  for (int i = 0; i < kPredLen; ++i) EXPECT_EQ(n.fut[i], w.fut[i]);
}

TEST(Normalize, ShiftsByLastObserved) {
  const TrackWindow w = pccs::testing::straight_window(Vec2(3, 4), Vec2(0, 1), 1.0);
  const auto [n, t] = normalize(w);
  EXPECT_EQ(n.obs[kObsLen - 1], Vec2::Zero());
  for (int i = 0; i < kObsLen; ++i) EXPECT_EQ(n.obs[i], w.obs[i] - Vec2(3, 4));
  for (int i = 0; i < kPredLen; ++i) EXPECT_EQ(n.fut[i], w.fut[i] - Vec2(3, 4));
}

TEST(Normalize, RoundTrip) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    TrackWindow w;
    for (auto& p : w.obs) p = Vec2(rng.uniform(-50, 50), rng.uniform(-50, 50));
    for (auto& p : w.fut) p = Vec2(rng.uniform(-50, 50), rng.uniform(-50, 50));
    const auto [n, t] = normalize(w);
    const TrackWindow back = denormalize(n, t);
    for (int i = 0; i < kObsLen; ++i) EXPECT_LE((back.obs[i] - w.obs[i]).norm(), 1e-12);
    for (int i = 0; i < kPredLen; ++i) EXPECT_LE((back.fut[i] - w.fut[i]).norm(), 1e-12);
  }
}

TEST(LeaveOneOut, FiveDatasets) {
  DatasetWindows all;
  std::size_t total = 0;
  int n = 3;
  for (const char* name : {"eth", "hotel", "univ", "zara1", "zara2"}) {
    all[name] = std::vector<TrackWindow>(static_cast<std::size_t>(n), TrackWindow{});
    total += static_cast<std::size_t>(n);
    ++n;
  }
  const Split split = leave_one_out_split(all, "eth");
  EXPECT_EQ(split.test.size(), 3u);
  EXPECT_EQ(split.train.size(), 4u + 5u + 6u + 7u);
  EXPECT_EQ(split.train.size() + split.test.size(), total);
}

TEST(LeaveOneOut, Errors) {
  DatasetWindows single{{"eth", std::vector<TrackWindow>(3)}};
  EXPECT_ANY_THROW(leave_one_out_split(single, "eth"));
  EXPECT_ANY_THROW(leave_one_out_split(single, "zara1"));
}

TEST(QualifiedPaths, OnlyTargetGivesItsOwnFuture) {
  TrajectoryScene s;
  s.frame_step = 10;
  add_track(s, 1, 0, Vec2(-2.8, 0), Vec2(0.4, 0), 20);
  const TrackWindow target = window_tracks(s).front();
  const auto segs = qualified_paths(s, target);
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_EQ(segs[0].ped_id, 1);
  for (int t = 0; t < kPredLen; ++t) EXPECT_EQ(segs[0].positions[t], target.fut[t]);
  const FuturePath local = local_positions(segs[0]);
  EXPECT_LE((local[0] - Vec2(0.4, 0)).norm(), 1e-12);
}

TEST(QualifiedPaths, ParallelWalkerQualifiesFastWalkerDoesNot) {
  TrajectoryScene s;
  s.frame_step = 10;
  add_track(s, 1, 0, Vec2(-2.8, 0), Vec2(0.4, 0), 20);  // target, obs[7] at the origin
  // same velocity, 0.3 m to the side, much later in time
  add_track(s, 2, 500, Vec2(-4.0, 0.3), Vec2(0.4, 0), 30);
  // double speed through the same circle
  add_track(s, 3, 100, Vec2(-4.0, -0.2), Vec2(0.8, 0), 30);
  // right angle crossing
  add_track(s, 4, 100, Vec2(0.1, -4.0), Vec2(0, 0.4), 30);
  // right velocity but too few frames after the crossing
  add_track(s, 5, 900, Vec2(-4.0, 0.1), Vec2(0.4, 0), 20);

  const TrackWindow target = window_tracks(s).front();
  const auto segs = qualified_paths(s, target);
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_EQ(segs[0].ped_id, 1);
  EXPECT_EQ(segs[1].ped_id, 2);

  // direct geometric check: first frame with |p| < 1 is x = -0.8 (frame 500 + 8*10)
  EXPECT_EQ(segs[1].crossing_frame, 580);
  EXPECT_LE((segs[1].origin - Vec2(-0.8, 0.3)).norm(), 1e-12);
  EXPECT_NEAR(segs[1].speed, 1.0, 1e-12);
  EXPECT_NEAR(segs[1].direction, 0.0, 1e-12);
  EXPECT_LE((segs[1].positions[0] - Vec2(-0.4, 0.3)).norm(), 1e-12);
  // encoded relative to its own crossing point, like the target relative to obs[7]
  const FuturePath local = local_positions(segs[1]);
  EXPECT_LE((local[0] - Vec2(0.4, 0)).norm(), 1e-12);
  EXPECT_LE((local[11] - Vec2(4.8, 0)).norm(), 1e-12);
}

TEST(QualifiedPaths, ReturnedDirectionsWithinTolerance) {
  Rng rng(17);
  TrajectoryScene s;
  s.frame_step = 10;
  add_track(s, 1, 0, Vec2(-2.8, 0), Vec2(0.4, 0), 20);
  for (std::int64_t ped = 2; ped < 200; ++ped) {
    const double a = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const double v = rng.uniform(0.3, 0.5);
    const Vec2 step(v * std::cos(a), v * std::sin(a));
    add_track(s, ped, 0, Vec2(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)) - 6 * step, step, 25);
  }
  const TrackWindow target = window_tracks(s).front();
  QualifyParams q;
  const auto segs = qualified_paths(s, target, q);
  EXPECT_GT(segs.size(), 1u);
  for (const auto& seg : segs) {
    EXPECT_LE(angle_between(seg.direction, 0.0), q.angle_tol + 1e-12);
    EXPECT_LE(std::abs(seg.speed - 1.0), 0.1 + 1e-12);
    EXPECT_GE(seg.speed, 0.0);
    EXPECT_GT(seg.direction, -std::numbers::pi);
    EXPECT_LE(seg.direction, std::numbers::pi);
  }
  QualifyParams none{0.0, 0.0, 0.0};
  EXPECT_EQ(qualified_paths(s, target, none).size(), 1u);
}

TEST(QualifiedPaths, StationaryTargetUsesAbsoluteSpeed) {
  TrajectoryScene s;
  s.frame_step = 10;
  add_track(s, 1, 0, Vec2(0, 0), Vec2(0, 0), 20);  // standing still
  // slow drifter crossing the boundary at 0.01 m per frame
  add_track(s, 2, 0, Vec2(-1.005, 0), Vec2(0.01, 0), 30);
  // ordinary walker
  add_track(s, 3, 0, Vec2(-3.0, 0.2), Vec2(0.4, 0), 30);
  const TrackWindow target = window_tracks(s).front();
  const auto segs = qualified_paths(s, target);
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_EQ(segs[1].ped_id, 2);
}

TEST(Heading, RangeIsHalfOpen) {
  EXPECT_DOUBLE_EQ(heading(Vec2(-1, 0)), std::numbers::pi);
  EXPECT_DOUBLE_EQ(heading(Vec2(-1, -0.0)), std::numbers::pi);
  EXPECT_NEAR(angle_between(3.0, -3.0), 2 * std::numbers::pi - 6.0, 1e-12);
}

TEST(Crc64, CheckValue) {
  const std::string s = "123456789";
  const std::vector<std::uint8_t> bytes(s.begin(), s.end());
  EXPECT_EQ(crc64(bytes), 0x995DC9BBDF1939FAULL);
}

TEST(ByteIo, LittleEndianLayout) {
  ByteWriter w;
  w.put_u32(0x01020304u);
  w.put_f64(1.0);
  const auto& b = w.bytes();
  ASSERT_EQ(b.size(), 12u);
  EXPECT_EQ(b[0], 0x04);
  EXPECT_EQ(b[3], 0x01);
  EXPECT_EQ(b[11], 0x3F);
  EXPECT_EQ(b[10], 0xF0);
  ByteReader r(b);
  EXPECT_EQ(r.get_u32(), 0x01020304u);
  EXPECT_EQ(r.get_f64(), 1.0);
  EXPECT_THROW(r.get_u8(), FormatError);
}

TEST(DatasetDir, LoadsAndReportsBadFiles) {
  TempDir dir("pccs_test_dataset_dir");
  std::ostringstream text;
  write_scene(line_scene(25), text);
  write(dir.path / "a" / "one.txt", text.str());
  write(dir.path / "a" / "two.txt", text.str());
  write(dir.path / "b" / "one.txt", text.str());
  write(dir.path / "b" / "bad.txt", "10 1 x y\n");
  std::vector<std::string> errors;
  const DatasetScenes scenes = load_dataset_dir(dir.path, &errors);
  EXPECT_EQ(errors.size(), 1u);
  EXPECT_EQ(scenes.at("a").size(), 2u);
  EXPECT_EQ(scenes.at("b").size(), 1u);
  EXPECT_EQ(scenes.at("a")[0].scene_id, "a/one");
  EXPECT_THROW(load_dataset_dir(dir.path), ParseError);
}

TEST(WindowCache, RoundTripAndInvalidation) {
  TempDir dir("pccs_test_window_cache");
  std::ostringstream text;
  write_scene(line_scene(25), text);
  write(dir.path / "data" / "a" / "one.txt", text.str());
  const DatasetScenes scenes = load_dataset_dir(dir.path / "data");
  const DatasetWindows windows = window_datasets(scenes);
  const std::uint64_t fp = dataset_fingerprint(dir.path / "data");
  const fs::path cache = dir.path / "cache.bin";
  save_window_cache(cache, fp, windows);

  const auto loaded = load_window_cache(cache, fp);
  ASSERT_TRUE(loaded.has_value());
  ASSERT_EQ(loaded->at("a").size(), windows.at("a").size());
  for (std::size_t i = 0; i < windows.at("a").size(); ++i) {
    const TrackWindow& x = windows.at("a")[i];
    const TrackWindow& y = loaded->at("a")[i];
    EXPECT_EQ(x.scene_id, y.scene_id);
    EXPECT_EQ(x.start_frame, y.start_frame);
    for (int t = 0; t < kObsLen; ++t) EXPECT_EQ(x.obs[t], y.obs[t]);
    for (int t = 0; t < kPredLen; ++t) EXPECT_EQ(x.fut[t], y.fut[t]);
  }
  EXPECT_FALSE(load_window_cache(cache, fp + 1).has_value());
  EXPECT_FALSE(load_window_cache(dir.path / "missing.bin", fp).has_value());

  auto bytes = read_file_bytes(cache);
  bytes[bytes.size() / 2] ^= 0x10;
  write_file_bytes(cache, bytes);
  EXPECT_THROW(load_window_cache(cache, fp), FormatError);

  write(dir.path / "data" / "a" / "one.txt", text.str() + "300 9 0 0\n");
  EXPECT_NE(dataset_fingerprint(dir.path / "data"), fp);
}

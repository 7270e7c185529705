#include <doctest.h>

#include <cmath>
#include <string>

#include "prsim/render.hpp"
#include "prsim/scenarios.hpp"

using namespace prsim;

namespace {

constexpr std::size_t kHeader = 15;  // "P6\n640 480\n255\n"

Rgb pixel(const std::vector<std::uint8_t>& img, const Camera& cam, long x, long y) {
  const std::size_t i = kHeader + (static_cast<std::size_t>(y) * cam.width + x) * 3;
  return {img[i], img[i + 1], img[i + 2]};
}

// Horizontal run of `color` through (cx, cy).
long run_length(const std::vector<std::uint8_t>& img, const Camera& cam, long cx, long cy, Rgb color) {
  long left = cx, right = cx;
  while (left > 0 && pixel(img, cam, left - 1, cy) == color) --left;
  while (right < cam.width - 1 && pixel(img, cam, right + 1, cy) == color) ++right;
  return right - left + 1;
}

WorldState one_robot(Vec2 p, double radius) {
  WorldState w;
  RobotBody r;
  r.position = p;
  r.radius = radius;
  w.robots.push_back(r);
  return w;
}

}  // namespace

TEST_CASE("PPM header") {
  const Camera cam;
  const auto img = rasterize_frame(WorldState{}, {0, 0}, cam);
  const std::string head(img.begin(), img.begin() + kHeader);
  CHECK(head == "P6\n640 480\n255\n");
  CHECK(img.size() == kHeader + 640 * 480 * 3);
}

TEST_CASE("disc at the goal is centered with the projected radius") {
  const Camera cam;
  const Vec2 goal{5.0, -3.0};
  const auto small = rasterize_frame(one_robot(goal, 1.0), goal, cam);
  CHECK(pixel(small, cam, 320, 240) == palette::kContracted);
  CHECK(run_length(small, cam, 320, 240, palette::kContracted) == 2 * std::lround(8.0 * 1.0) + 1);

  const auto big = rasterize_frame(one_robot(goal, 1.5), goal, cam);
  CHECK(pixel(big, cam, 320, 240) == palette::kExpanded);
  CHECK(run_length(big, cam, 320, 240, palette::kExpanded) == 2 * std::lround(8.0 * 1.5) + 1);
}

TEST_CASE("shades and layers") {
  const Camera cam;
  WorldState w = one_robot({-10.0, 0.0}, 1.0);
  w.robots[0].responsive = false;
  w.object = DynamicObject{{10.0, 0.0}, {}, 2.0, 2.0};
  w.obstacles.push_back(StaticObstacle{{Segment{{-20.0, 10.0}, {20.0, 10.0}}}, 1.0});
  const auto img = rasterize_frame(w, {0, 0}, cam);
  CHECK(pixel(img, cam, 320 - 80, 240) == palette::kUnresponsive);
  CHECK(pixel(img, cam, 320 + 80, 240) == palette::kObject);
  CHECK(pixel(img, cam, 320, 240 - 80) == palette::kObstacle);
  CHECK(pixel(img, cam, 320, 240) == palette::kGoal);
  CHECK(pixel(img, cam, 5, 5) == palette::kBackground);
}

TEST_CASE("rendering is deterministic and leaves the world alone") {
  ScenarioConfig c;
  c.task = TaskKind::ObstacleNav;
  const WorldState w = build_scenario(c);
  const WorldState copy = w;
  Camera cam;
  cam.center = Vec2{0.0, 5.0};
  CHECK(rasterize_frame(w, c.goal, cam) == rasterize_frame(w, c.goal, cam));
  CHECK(w == copy);
}

TEST_CASE("camera validation and JSON") {
  Camera bad;
  bad.scale = 0.0;
  CHECK_THROWS_AS(rasterize_frame(WorldState{}, {}, bad), SimError);
  Camera c;
  c.center = Vec2{1.0, 2.0};
  c.width = 100;
  CHECK(camera_from_json(camera_to_json(c)) == c);
  CHECK(camera_from_json(camera_to_json(Camera{})) == Camera{});
  CHECK_THROWS_AS(camera_from_json({{"zoom", 2}}), SimError);
}

#include "prsim/render.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "prsim/error.hpp"

namespace prsim {

using nlohmann::json;

void validate_camera(const Camera& c) {
  if (!(c.scale > 0.0) || !std::isfinite(c.scale) || c.width <= 0 || c.height <= 0) {
    throw SimError(ErrorCode::BadConfig, "camera scale, width and height must be positive");
  }
  if (c.center && !c.center->finite()) throw SimError(ErrorCode::BadConfig, "camera center must be finite");
}

namespace {

class Canvas {
 public:
  Canvas(const Camera& cam, Vec2 center)
      : cam_(cam), center_(center), pixels_(static_cast<std::size_t>(cam.width) * cam.height * 3) {
    for (std::size_t i = 0; i < pixels_.size(); i += 3) set_raw(i, palette::kBackground);
  }

  // Pixel coordinates of a world point.
  [[nodiscard]] long px(double x) const {
    return std::lround(cam_.width / 2.0 + (x - center_.x) * cam_.scale);
  }
  [[nodiscard]] long py(double y) const {
    return std::lround(cam_.height / 2.0 - (y - center_.y) * cam_.scale);
  }

  void disc(Vec2 c, double radius, Rgb color) {
    const long cx = px(c.x);
    const long cy = py(c.y);
    const long r = std::lround(cam_.scale * radius);
    for (long y = std::max(cy - r, 0L); y <= std::min(cy + r, cam_.height - 1L); ++y) {
      for (long x = std::max(cx - r, 0L); x <= std::min(cx + r, cam_.width - 1L); ++x) {
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) put(x, y, color);
      }
    }
  }

  // Filled capsule around segment a-b.
  void capsule(Vec2 a, Vec2 b, double half_width, Rgb color) {
    const double pad = half_width + 1.0 / cam_.scale;
    const long x0 = px(std::min(a.x, b.x) - pad), x1 = px(std::max(a.x, b.x) + pad);
    const long y0 = py(std::max(a.y, b.y) + pad), y1 = py(std::min(a.y, b.y) - pad);
    const Vec2 ab = b - a;
    const double len_sq = ab.norm_sq();
    for (long y = std::max(y0, 0L); y <= std::min(y1, static_cast<long>(cam_.height) - 1); ++y) {
      for (long x = std::max(x0, 0L); x <= std::min(x1, static_cast<long>(cam_.width) - 1); ++x) {
        const Vec2 p{center_.x + (x - cam_.width / 2.0) / cam_.scale,
                     center_.y - (y - cam_.height / 2.0) / cam_.scale};
        double t = len_sq > 0.0 ? (p - a).dot(ab) / len_sq : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        if (distance(p, a + ab * t) <= half_width) put(x, y, color);
      }
    }
  }

  void cross(Vec2 c, long arm, Rgb color) {
    const long cx = px(c.x), cy = py(c.y);
    for (long d = -arm; d <= arm; ++d) {
      put(cx + d, cy, color);
      put(cx, cy + d, color);
    }
  }

  std::vector<std::uint8_t> ppm() const {
    const std::string header =
        "P6\n" + std::to_string(cam_.width) + " " + std::to_string(cam_.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), pixels_.begin(), pixels_.end());
    return out;
  }

 private:
  void put(long x, long y, Rgb c) {
    if (x < 0 || y < 0 || x >= cam_.width || y >= cam_.height) return;
    set_raw((static_cast<std::size_t>(y) * cam_.width + static_cast<std::size_t>(x)) * 3, c);
  }
  void set_raw(std::size_t i, Rgb c) {
    pixels_[i] = c.r;
    pixels_[i + 1] = c.g;
    pixels_[i + 2] = c.b;
  }

  Camera cam_;
  Vec2 center_;
  std::vector<std::uint8_t> pixels_;
};

}  // namespace

std::vector<std::uint8_t> rasterize_frame(const WorldState& world, Vec2 goal, const Camera& camera,
                                          const PhysicsParams& params) {
  validate_camera(camera);
  Canvas canvas(camera, camera.center.value_or(goal));
  for (const auto& ob : world.obstacles) {
    for (const auto& s : ob.segments) canvas.capsule(s.a, s.b, 0.5 * ob.thickness, palette::kObstacle);
  }
  canvas.cross(goal, std::max(2L, std::lround(camera.scale * 0.5)), palette::kGoal);
  const double mid = 0.5 * (params.contracted_radius + params.expanded_radius);
  for (const auto& r : world.robots) {
    Rgb color = r.radius >= mid ? palette::kExpanded : palette::kContracted;
    if (!r.responsive) color = palette::kUnresponsive;
    canvas.disc(r.position, r.radius, color);
  }
  if (world.object) canvas.disc(world.object->position, world.object->radius, palette::kObject);
  return canvas.ppm();
}

json camera_to_json(const Camera& c) {
  json j{{"scale", c.scale}, {"width", c.width}, {"height", c.height}};
  j["center"] = c.center ? json::array({c.center->x, c.center->y}) : json(nullptr);
  return j;
}

Camera camera_from_json(const json& j, Camera c) {
  auto fail = [](const std::string& msg) { throw SimError(ErrorCode::BadConfig, msg); };
  if (!j.is_object()) fail("render must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "scale") {
      if (!v.is_number()) fail("field 'scale': expected a number");
      c.scale = v.get<double>();
    } else if (key == "width" || key == "height") {
      if (!v.is_number_integer()) fail("field '" + key + "': expected an integer");
      (key == "width" ? c.width : c.height) = static_cast<int>(v.get<std::int64_t>());
    } else if (key == "center") {
      if (v.is_null()) {
        c.center.reset();
      } else if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
        c.center = Vec2{v[0].get<double>(), v[1].get<double>()};
      } else {
        fail("field 'center': expected [x, y] or null");
      }
    } else {
      fail("field '" + key + "': unknown render key");
    }
  }
  return c;
}

}  // namespace prsim

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "prsim/physics.hpp"

namespace prsim {

struct Camera {
  std::optional<Vec2> center;  // the goal when unset
  double scale = 8.0;          // pixels per LU
  int width = 640;
  int height = 480;

  bool operator==(const Camera&) const = default;
};

struct Rgb {
  std::uint8_t r, g, b;
  bool operator==(const Rgb&) const = default;
};

namespace palette {
inline constexpr Rgb kBackground{255, 255, 255};
inline constexpr Rgb kContracted{70, 110, 200};
inline constexpr Rgb kExpanded{150, 190, 250};
inline constexpr Rgb kUnresponsive{110, 110, 110};
inline constexpr Rgb kObstacle{170, 170, 170};
inline constexpr Rgb kObject{240, 140, 40};
inline constexpr Rgb kGoal{220, 40, 40};
}  // namespace palette

// Throws SimError(BadConfig) when scale, width or height is not positive.
void validate_camera(const Camera& camera);

// Complete binary PPM (P6, maxval 255). World y points up in the image.
// Robots at or above the midpoint radius use the expanded shade.
std::vector<std::uint8_t> rasterize_frame(const WorldState& world, Vec2 goal, const Camera& camera,
                                          const PhysicsParams& params = {});

nlohmann::json camera_to_json(const Camera& camera);
Camera camera_from_json(const nlohmann::json& j, Camera base = {});

}  // namespace prsim

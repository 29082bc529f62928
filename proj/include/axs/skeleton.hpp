#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

namespace axs {

inline constexpr std::size_t kPoseLandmarks = 33;
inline constexpr std::size_t kHandLandmarks = 21;
inline constexpr std::size_t kFaceLandmarks = 68;
inline constexpr std::size_t kRawFaceLandmarks = 468;
inline constexpr double kClipFps = 30.0;

// Holistic pose indices used for the signing-space frame.
inline constexpr std::size_t kLeftShoulder = 11;
inline constexpr std::size_t kRightShoulder = 12;
inline constexpr std::size_t kLeftWrist = 15;
inline constexpr std::size_t kRightWrist = 16;

template <typename T>
struct Vec3 {
  T x{};
  T y{};
  T z{};

  friend bool operator==(const Vec3&, const Vec3&) = default;
};
using Vec3f = Vec3<float>;
using Vec3d = Vec3<double>;

/// One animation frame in normalised skeleton space (unit shoulder width,
/// origin at the shoulder midpoint). Stored in single precision.
struct Keyframe {
  double t = 0.0;
  std::array<Vec3f, kPoseLandmarks> pose{};
  std::array<Vec3f, kHandLandmarks> left_hand{};
  std::array<Vec3f, kHandLandmarks> right_hand{};
  std::optional<std::array<Vec3f, kFaceLandmarks>> face;

  friend bool operator==(const Keyframe&, const Keyframe&) = default;
};

/// A frame on its way through the landmark compiler (double precision,
/// hands possibly missing, face either 468 raw or 68 downsampled points).
struct SkeletonFrame {
  double t = 0.0;
  std::array<Vec3d, kPoseLandmarks> pose{};
  std::array<double, kPoseLandmarks> visibility{};
  std::optional<std::array<Vec3d, kHandLandmarks>> left_hand;
  std::optional<std::array<Vec3d, kHandLandmarks>> right_hand;
  std::optional<std::vector<Vec3d>> face;
};

/// The 68 face-mesh vertices closest to the classic 68-point face layout
/// (jaw, brows, nose, eyes, lips).
extern const std::array<std::size_t, kFaceLandmarks> kFaceSubset;

}  // namespace axs

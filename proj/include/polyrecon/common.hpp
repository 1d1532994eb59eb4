#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace polyrecon {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

// Global tolerances for the unit-normalized coordinate regime.
inline constexpr double kEps = 1e-9;
inline constexpr double kEpsArea = 1e-12;
// |normal_z| below this means the plane is vertical (5 degree tolerance).
inline constexpr double kVerticalityCos = 0.0872;

enum class Errc {
  Unbounded,
  Empty,
  Degenerate,
  NoCells,
  TooManyCells,
  InvalidK,
  RejectionStall,
  ShapeMismatch,
  NonFinite,
  TooFewPoints,
  QueryOutOfRange,
  MixedK,
  VersionMismatch,
  CorruptRecord,
  NonWatertight,
  EmptyScan,
  EmptyReconstruction,
  EmptyMesh,
  LengthMismatch,
  CheckpointMismatch,
  ConfigInvalid,
  DatasetEmpty,
  Timeout,
  BadInput,
  Internal,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

// SplitMix64; used to fan a global seed out to independent streams.
inline std::uint64_t hash_mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
  return hash_mix(seed ^ (value + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2)));
}

}  // namespace polyrecon

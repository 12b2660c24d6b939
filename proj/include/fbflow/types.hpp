#pragma once
// Shared small-vector aliases and the error hierarchy.

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace fbflow {

// Ambient vectors and matrices are tiny (m <= 8). Fixed-capacity dynamic
// Eigen types keep them on the stack while letting the sphere (m = 3) and
// flat (m = 2) targets share the same code paths.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 8, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 8, 8>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// geometry
struct OutsideTube : Error { using Error::Error; };
struct FrameUnavailable : Error { using Error::Error; };
struct SingularP : Error { using Error::Error; };

// grid / analysis
struct RadiusTooSmall : Error { using Error::Error; };
struct RegionEmpty : Error { using Error::Error; };

// synth
struct MismatchAtInfinity : Error { using Error::Error; };

// reflect
struct LeftTube : Error { using Error::Error; };

// persist
struct VersionMismatch : Error { using Error::Error; };
struct CorruptRow : Error { using Error::Error; };
struct OffManifold : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

// config / cli
struct ConfigError : Error { using Error::Error; };

}  // namespace fbflow

#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace amap {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// gp_core
class DegenerateGram : public Error { using Error::Error; };
class IllConditioned : public Error { using Error::Error; };
// uncertain_inputs
class UnsupportedOrder : public Error { using Error::Error; };
// pose_graph
class SingularSystem : public Error { using Error::Error; };
// trajectory
class DegenerateWaypoints : public Error { using Error::Error; };
// utility
class NonPositiveTrace : public Error { using Error::Error; };
// sim_env
class FactorizationFailure : public Error { using Error::Error; };
// harness
class SchemaMismatch : public Error { using Error::Error; };

}  // namespace amap

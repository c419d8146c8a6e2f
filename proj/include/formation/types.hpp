#pragma once

#include <Eigen/Dense>

namespace formation {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// 0 is the leader, followers are 1..N.
using AgentId = int;

inline constexpr AgentId kLeader = 0;

}  // namespace formation

#pragma once

#include "nas/error.hpp"
#include "nas/numeric.hpp"
#include "nas/data.hpp"
#include "nas/attribute_net.hpp"
#include "nas/sequence_net.hpp"
#include "nas/training.hpp"
#include "nas/evaluation.hpp"
#include "nas/baselines.hpp"
#include "nas/sweep.hpp"

namespace nas {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace nas

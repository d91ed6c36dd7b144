#pragma once

#include "lsfts/bands.hpp"
#include "lsfts/bootstrap.hpp"
#include "lsfts/core.hpp"
#include "lsfts/coverage.hpp"
#include "lsfts/csv.hpp"
#include "lsfts/error.hpp"
#include "lsfts/kernels.hpp"
#include "lsfts/lrv.hpp"
#include "lsfts/rng.hpp"
#include "lsfts/simgen.hpp"
#include "lsfts/smoothing.hpp"
#include "lsfts/tuning.hpp"

namespace lsfts {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace lsfts

#pragma once

#include "bcot/bicausal_dpp.hpp"
#include "bcot/calibration.hpp"
#include "bcot/clustering.hpp"
#include "bcot/common.hpp"
#include "bcot/composite_ot.hpp"
#include "bcot/config.hpp"
#include "bcot/cost_model.hpp"
#include "bcot/coupling.hpp"
#include "bcot/divergences.hpp"
#include "bcot/equilibrium.hpp"
#include "bcot/jobmarket.hpp"
#include "bcot/kernel_plan.hpp"
#include "bcot/linear_ot.hpp"
#include "bcot/panel.hpp"
#include "bcot/path_measure.hpp"
#include "bcot/process.hpp"
#include "bcot/report.hpp"
#include "bcot/serialize.hpp"
#include "bcot/stats.hpp"
#include "bcot/tv.hpp"

namespace bcot {
inline constexpr const char* kVersion = "0.1.0";
}

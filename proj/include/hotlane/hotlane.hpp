#pragma once

#include "hotlane/analytics.hpp"
#include "hotlane/config.hpp"
#include "hotlane/controllers.hpp"
#include "hotlane/core_model.hpp"
#include "hotlane/errors.hpp"
#include "hotlane/experiments.hpp"
#include "hotlane/lane_choice.hpp"
#include "hotlane/output.hpp"
#include "hotlane/scenario.hpp"
#include "hotlane/sim_engine.hpp"

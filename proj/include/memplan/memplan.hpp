#pragma once

#include "memplan/errors.hpp"
#include "memplan/units.hpp"
#include "memplan/model_spec.hpp"
#include "memplan/memory_model.hpp"
#include "memplan/measurements.hpp"
#include "memplan/estimators.hpp"
#include "memplan/frontier.hpp"
#include "memplan/planner.hpp"
#include "memplan/render.hpp"
#include "memplan/requests.hpp"
#include "memplan/api.hpp"

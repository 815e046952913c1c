#pragma once

#include "mgsim/agents.hpp"
#include "mgsim/building.hpp"
#include "mgsim/curve.hpp"
#include "mgsim/dataset.hpp"
#include "mgsim/energy_models.hpp"
#include "mgsim/environment.hpp"
#include "mgsim/forecast.hpp"
#include "mgsim/metrics.hpp"
#include "mgsim/protocol.hpp"
#include "mgsim/server.hpp"
#include "mgsim/synthetic.hpp"
#include "mgsim/trajectory.hpp"
#include "mgsim/types.hpp"

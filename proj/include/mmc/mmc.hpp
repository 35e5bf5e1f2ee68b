// Umbrella header.
#pragma once

#include "mmc/grid.hpp"
#include "mmc/energy.hpp"
#include "mmc/scheme.hpp"
#include "mmc/solver.hpp"
#include "mmc/diagnostics.hpp"
#include "mmc/config.hpp"
#include "mmc/run.hpp"

#pragma once

#include "asymptotics.hpp"
#include "cli.hpp"
#include "config.hpp"
#include "constants.hpp"
#include "diagnostics.hpp"
#include "error.hpp"
#include "models.hpp"
#include "montecarlo.hpp"
#include "process_core.hpp"
#include "rm_engine.hpp"
#include "rng.hpp"

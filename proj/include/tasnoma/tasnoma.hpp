#pragma once

#include "tasnoma/errors.hpp"
#include "tasnoma/signed_log.hpp"
#include "tasnoma/fading.hpp"
#include "tasnoma/series.hpp"
#include "tasnoma/outage.hpp"
#include "tasnoma/random.hpp"
#include "tasnoma/stats.hpp"
#include "tasnoma/mc_sim.hpp"
#include "tasnoma/run_config.hpp"
#include "tasnoma/csv.hpp"
#include "tasnoma/runner.hpp"

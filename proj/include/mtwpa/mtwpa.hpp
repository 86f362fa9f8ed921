#pragma once

#include "mtwpa/artifacts.hpp"
#include "mtwpa/cascade.hpp"
#include "mtwpa/config.hpp"
#include "mtwpa/constants.hpp"
#include "mtwpa/coupled_mode.hpp"
#include "mtwpa/device.hpp"
#include "mtwpa/ladder.hpp"
#include "mtwpa/noise.hpp"
#include "mtwpa/rf_network.hpp"
#include "mtwpa/sweeps.hpp"
#include "mtwpa/time_domain.hpp"
#include "mtwpa/touchstone.hpp"

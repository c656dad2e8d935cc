#pragma once

#include "vfcw/channel.hpp"
#include "vfcw/collision.hpp"
#include "vfcw/config.hpp"
#include "vfcw/error.hpp"
#include "vfcw/fog.hpp"
#include "vfcw/geometry.hpp"
#include "vfcw/metrics.hpp"
#include "vfcw/random.hpp"
#include "vfcw/sim.hpp"
#include "vfcw/stable.hpp"
#include "vfcw/suite.hpp"
#include "vfcw/trajectory.hpp"

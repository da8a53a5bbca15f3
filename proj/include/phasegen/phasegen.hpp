// Umbrella header.
#pragma once

#include "bench.hpp"
#include "bounds.hpp"
#include "config.hpp"
#include "generative.hpp"
#include "measurement.hpp"
#include "numerics.hpp"
#include "optimize.hpp"
#include "rng.hpp"
#include "types.hpp"

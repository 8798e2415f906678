#pragma once

// Umbrella header.

#include "vesflow/ch_dynamics.hpp"
#include "vesflow/config.hpp"
#include "vesflow/energetics.hpp"
#include "vesflow/errors.hpp"
#include "vesflow/fields.hpp"
#include "vesflow/grid.hpp"
#include "vesflow/io.hpp"
#include "vesflow/ns_dynamics.hpp"
#include "vesflow/operators.hpp"
#include "vesflow/selftest.hpp"
#include "vesflow/simulation.hpp"

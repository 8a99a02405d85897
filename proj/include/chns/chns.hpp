#pragma once

// Umbrella header for the full library.

#include "chns/banded.hpp"
#include "chns/config.hpp"
#include "chns/dense.hpp"
#include "chns/diagnostics.hpp"
#include "chns/fluid_step.hpp"
#include "chns/grid.hpp"
#include "chns/io.hpp"
#include "chns/linear_solver.hpp"
#include "chns/mms.hpp"
#include "chns/params.hpp"
#include "chns/scalar_steps.hpp"
#include "chns/simulation.hpp"
#include "chns/spatial_ops.hpp"
#include "chns/timestepper.hpp"
#include "chns/truncation.hpp"

#pragma once
// Umbrella header.

#include "types.hpp"
#include "exp_histogram.hpp"
#include "window_estimator.hpp"
#include "protocol.hpp"
#include "coordinator.hpp"
#include "generator.hpp"
#include "oracle.hpp"
#include "simulator.hpp"
#include "csv_io.hpp"
#include "experiment.hpp"

#pragma once

#include "smoothlasso/benchmark.hpp"
#include "smoothlasso/error.hpp"
#include "smoothlasso/estimators.hpp"
#include "smoothlasso/io.hpp"
#include "smoothlasso/metrics.hpp"
#include "smoothlasso/random.hpp"
#include "smoothlasso/simulation.hpp"
#include "smoothlasso/smoothing.hpp"
#include "smoothlasso/solver.hpp"
#include "smoothlasso/tuning.hpp"

#pragma once

// Umbrella header for the GMO-TV restoration library.

#include "gmotv/bench.hpp"
#include "gmotv/derivative.hpp"
#include "gmotv/io.hpp"
#include "gmotv/joint.hpp"
#include "gmotv/matrix.hpp"
#include "gmotv/metrics.hpp"
#include "gmotv/mm_kl.hpp"
#include "gmotv/plot.hpp"
#include "gmotv/prior.hpp"
#include "gmotv/restore.hpp"
#include "gmotv/signal.hpp"
#include "gmotv/structure.hpp"

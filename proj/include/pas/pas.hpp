// Umbrella header.

#pragma once

#include "pas/attn_sim.hpp"
#include "pas/bench.hpp"
#include "pas/kernel.hpp"
#include "pas/pas_core.hpp"
#include "pas/report.hpp"
#include "pas/ropespec.hpp"
#include "pas/spectral.hpp"
#include "pas/stats.hpp"
#include "pas/verify.hpp"

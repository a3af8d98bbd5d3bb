#pragma once

// Umbrella header for the election polarization / competitiveness library.

#include "epec/analysis.hpp"
#include "epec/election.hpp"
#include "epec/error.hpp"
#include "epec/io.hpp"
#include "epec/manifest.hpp"
#include "epec/metrics.hpp"
#include "epec/pipeline.hpp"
#include "epec/synth.hpp"

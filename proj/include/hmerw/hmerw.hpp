#pragma once

// Umbrella header for the hierarchical maximal-entropy random-walk small
// target detection library.

#include "image.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "pipeline.hpp"
#include "rccc.hpp"
#include "sparse.hpp"
#include "spectral.hpp"
#include "synth.hpp"

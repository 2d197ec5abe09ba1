#pragma once

// Umbrella header for the gradient echo memory image-storage simulator.

#include "gemsim/units.hpp"
#include "gemsim/image.hpp"
#include "gemsim/pgm.hpp"
#include "gemsim/csv.hpp"
#include "gemsim/pulse.hpp"
#include "gemsim/memory_config.hpp"
#include "gemsim/gem1d.hpp"
#include "gemsim/diffusion.hpp"
#include "gemsim/diffusion_fd.hpp"
#include "gemsim/imaging.hpp"
#include "gemsim/metrics.hpp"
#include "gemsim/configfile.hpp"
#include "gemsim/scenarios.hpp"
#include "gemsim/svgplot.hpp"

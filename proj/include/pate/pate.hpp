#pragma once

// Umbrella header: multi-source housing-price study pipeline.

#include "pate/csv.hpp"
#include "pate/dataset.hpp"
#include "pate/errors.hpp"
#include "pate/experiment.hpp"
#include "pate/gbt.hpp"
#include "pate/geofeatures.hpp"
#include "pate/linreg.hpp"
#include "pate/metrics.hpp"
#include "pate/numeric.hpp"
#include "pate/stats.hpp"
#include "pate/svg.hpp"

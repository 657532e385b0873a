#pragma once

#include "vcasir/csv.hpp"
#include "vcasir/disparity.hpp"
#include "vcasir/error.hpp"
#include "vcasir/evaluation.hpp"
#include "vcasir/features.hpp"
#include "vcasir/image_io.hpp"
#include "vcasir/manifest.hpp"
#include "vcasir/metrics.hpp"
#include "vcasir/mos.hpp"
#include "vcasir/raster.hpp"
#include "vcasir/retarget.hpp"
#include "vcasir/rng.hpp"
#include "vcasir/svr.hpp"
#include "vcasir/synth.hpp"

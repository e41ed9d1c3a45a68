#pragma once

// Umbrella header: multimodal point-cloud shape completion toolkit.

#include "mmsc/autodiff.hpp"
#include "mmsc/common.hpp"
#include "mmsc/completion.hpp"
#include "mmsc/dataset_io.hpp"
#include "mmsc/distances.hpp"
#include "mmsc/metrics.hpp"
#include "mmsc/networks.hpp"
#include "mmsc/params.hpp"
#include "mmsc/partiality.hpp"
#include "mmsc/point_cloud.hpp"
#include "mmsc/presets.hpp"
#include "mmsc/shapes.hpp"
#include "mmsc/sweeps.hpp"
#include "mmsc/training.hpp"

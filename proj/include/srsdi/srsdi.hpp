// srsdi.hpp
//
// Umbrella header.

#pragma once

#include "srsdi/core.hpp"
#include "srsdi/random.hpp"
#include "srsdi/channel.hpp"
#include "srsdi/grid_io.hpp"
#include "srsdi/srs_mask.hpp"
#include "srsdi/observation.hpp"
#include "srsdi/schedules.hpp"
#include "srsdi/denoiser.hpp"
#include "srsdi/nn/patch_transformer.hpp"
#include "srsdi/nn/checkpoint.hpp"
#include "srsdi/training.hpp"
#include "srsdi/inference.hpp"
#include "srsdi/evaluation.hpp"
#include "srsdi/config.hpp"

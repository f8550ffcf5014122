#pragma once

// Umbrella header for the superpixel / open-set segmentation toolkit.

#include "sps/core/absorb.hpp"
#include "sps/core/components.hpp"
#include "sps/core/gaussian.hpp"
#include "sps/core/rng.hpp"
#include "sps/core/stats.hpp"
#include "sps/core/types.hpp"
#include "sps/core/union_find.hpp"
#include "sps/eval/metrics.hpp"
#include "sps/fusion/fuss.hpp"
#include "sps/io/npy.hpp"
#include "sps/io/ppm.hpp"
#include "sps/openset/gmm.hpp"
#include "sps/openset/models.hpp"
#include "sps/openset/pcs.hpp"
#include "sps/openset/serialize.hpp"
#include "sps/pipeline/config.hpp"
#include "sps/pipeline/pipeline.hpp"
#include "sps/pipeline/synth.hpp"
#include "sps/postprocess/postprocess.hpp"
#include "sps/superpixels/felzenszwalb.hpp"
#include "sps/superpixels/quickshift.hpp"
#include "sps/superpixels/slic.hpp"

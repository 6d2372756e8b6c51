#pragma once

// Umbrella header: the full library in dependency order.

#include "mtgcd/core/errors.hpp"
#include "mtgcd/core/rng.hpp"
#include "mtgcd/core/grid.hpp"
#include "mtgcd/core/tensor.hpp"
#include "mtgcd/core/serialize.hpp"
#include "mtgcd/geom/polygon.hpp"
#include "mtgcd/vecfield/bins.hpp"
#include "mtgcd/vecfield/json.hpp"
#include "mtgcd/scenegen/types.hpp"
#include "mtgcd/scenegen/render.hpp"
#include "mtgcd/scenegen/sampler.hpp"
#include "mtgcd/scenegen/pair.hpp"
#include "mtgcd/scenegen/json.hpp"
#include "mtgcd/labelgen/labels.hpp"
#include "mtgcd/metrics/confusion.hpp"
#include "mtgcd/nn/autograd.hpp"
#include "mtgcd/nn/ops.hpp"
#include "mtgcd/nn/init.hpp"
#include "mtgcd/nn/optim.hpp"
#include "mtgcd/model/config.hpp"
#include "mtgcd/model/modules.hpp"
#include "mtgcd/model/network.hpp"
#include "mtgcd/model/checkpoint.hpp"
#include "mtgcd/losses/losses.hpp"
#include "mtgcd/io/png.hpp"
#include "mtgcd/io/dataset.hpp"
#include "mtgcd/harness/config.hpp"
#include "mtgcd/harness/schedule.hpp"
#include "mtgcd/harness/augment.hpp"
#include "mtgcd/harness/batch.hpp"
#include "mtgcd/harness/datagen.hpp"
#include "mtgcd/harness/evaluate.hpp"
#include "mtgcd/harness/train.hpp"
#include "mtgcd/harness/predict.hpp"
#include "mtgcd/harness/ablate.hpp"

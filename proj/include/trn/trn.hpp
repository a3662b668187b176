#pragma once

// Umbrella header for the online action detection library.

#include "trn/adam.hpp"
#include "trn/affine.hpp"
#include "trn/any_model.hpp"
#include "trn/baselines.hpp"
#include "trn/block.hpp"
#include "trn/checkpoint.hpp"
#include "trn/config.hpp"
#include "trn/data.hpp"
#include "trn/error.hpp"
#include "trn/gradcheck.hpp"
#include "trn/lstm.hpp"
#include "trn/matrix.hpp"
#include "trn/metrics.hpp"
#include "trn/model.hpp"
#include "trn/ops.hpp"
#include "trn/rng.hpp"
#include "trn/training.hpp"

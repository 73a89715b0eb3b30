#pragma once

// Umbrella header.

#include "mhlr/config.hpp"
#include "mhlr/dataset.hpp"
#include "mhlr/eval.hpp"
#include "mhlr/kernels.hpp"
#include "mhlr/manifold.hpp"
#include "mhlr/model.hpp"
#include "mhlr/optimize.hpp"
#include "mhlr/types.hpp"

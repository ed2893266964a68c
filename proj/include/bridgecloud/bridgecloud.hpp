// Umbrella header.
#pragma once

#include "core.hpp"
#include "geometry.hpp"
#include "sampling.hpp"
#include "augment.hpp"
#include "io.hpp"
#include "losses.hpp"
#include "eval.hpp"
#include "pipeline.hpp"

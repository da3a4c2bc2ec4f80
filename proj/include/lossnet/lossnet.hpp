#pragma once

#include "lossnet/asymptotics.hpp"
#include "lossnet/config.hpp"
#include "lossnet/distributions.hpp"
#include "lossnet/engine.hpp"
#include "lossnet/exact.hpp"
#include "lossnet/model.hpp"
#include "lossnet/random.hpp"
#include "lossnet/sweep.hpp"
#include "lossnet/timeline.hpp"

#pragma once

#include "model.hpp"
#include "intra.hpp"
#include "refs.hpp"
#include "regions.hpp"
#include "contention.hpp"
#include "dp.hpp"
#include "baselines.hpp"
#include "system.hpp"
#include "oracle.hpp"
#include "verify.hpp"
#include "io.hpp"
#include "generate.hpp"

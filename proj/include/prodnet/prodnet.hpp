#pragma once

#include "prodnet/calibrate.hpp"
#include "prodnet/eigensym.hpp"
#include "prodnet/io.hpp"
#include "prodnet/linalg.hpp"
#include "prodnet/network.hpp"
#include "prodnet/propagate.hpp"
#include "prodnet/riskstats.hpp"
#include "prodnet/rng.hpp"
#include "prodnet/shocks.hpp"
#include "prodnet/spectral.hpp"
#include "prodnet/verify.hpp"

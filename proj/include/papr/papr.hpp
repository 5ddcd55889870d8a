#pragma once

// Umbrella header.

#include "papr/baselines.hpp"
#include "papr/channel.hpp"
#include "papr/common.hpp"
#include "papr/harness.hpp"
#include "papr/metrics.hpp"
#include "papr/mlp.hpp"
#include "papr/ofdm.hpp"
#include "papr/sat.hpp"
#include "papr/simulation.hpp"
#include "papr/wavelet.hpp"

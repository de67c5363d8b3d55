// regime_taa.hpp
// Umbrella header.

#pragma once

#include "regime_taa/allocate.hpp"
#include "regime_taa/backtest.hpp"
#include "regime_taa/commands.hpp"
#include "regime_taa/csv.hpp"
#include "regime_taa/error.hpp"
#include "regime_taa/forecast.hpp"
#include "regime_taa/gmm.hpp"
#include "regime_taa/kmeans.hpp"
#include "regime_taa/macro_ingest.hpp"
#include "regime_taa/month.hpp"
#include "regime_taa/regime_engine.hpp"
#include "regime_taa/stats.hpp"
#include "regime_taa/svg.hpp"
#include "regime_taa/transition.hpp"
#include "regime_taa/types.hpp"

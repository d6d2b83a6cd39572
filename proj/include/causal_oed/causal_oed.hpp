#pragma once

#include "causal_oed/dataset.hpp"
#include "causal_oed/errors.hpp"
#include "causal_oed/fixtures.hpp"
#include "causal_oed/format.hpp"
#include "causal_oed/graph.hpp"
#include "causal_oed/harness.hpp"
#include "causal_oed/json_io.hpp"
#include "causal_oed/metrics.hpp"
#include "causal_oed/network.hpp"
#include "causal_oed/oed.hpp"
#include "causal_oed/posterior.hpp"
#include "causal_oed/rng.hpp"
#include "causal_oed/scoring.hpp"

#pragma once

#include "chainsim/core.hpp"
#include "chainsim/scenario.hpp"
#include "chainsim/topology.hpp"
#include "chainsim/cluster.hpp"
#include "chainsim/placement.hpp"
#include "chainsim/chain_graph.hpp"
#include "chainsim/cpu_model.hpp"
#include "chainsim/io_net_model.hpp"
#include "chainsim/engine.hpp"
#include "chainsim/results.hpp"

#pragma once

#include "cmvno/error.hpp"
#include "cmvno/numeric.hpp"
#include "cmvno/rng.hpp"
#include "cmvno/parallel.hpp"
#include "cmvno/format.hpp"
#include "cmvno/market_model.hpp"
#include "cmvno/demand.hpp"
#include "cmvno/equilibrium.hpp"
#include "cmvno/simulator.hpp"
#include "cmvno/oracle.hpp"
#include "cmvno/scenario_io.hpp"

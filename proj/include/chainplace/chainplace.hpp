#pragma once

#include "chainplace/allocation.hpp"
#include "chainplace/baselines.hpp"
#include "chainplace/cost_model.hpp"
#include "chainplace/errors.hpp"
#include "chainplace/placement_bu.hpp"
#include "chainplace/pushup_bupu.hpp"
#include "chainplace/rational.hpp"
#include "chainplace/service_model.hpp"
#include "chainplace/sim_harness.hpp"
#include "chainplace/topology.hpp"

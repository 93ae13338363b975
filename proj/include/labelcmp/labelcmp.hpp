#pragma once

#include "labelcmp/rng.hpp"
#include "labelcmp/model.hpp"
#include "labelcmp/oracle.hpp"
#include "labelcmp/neighborhood_graph.hpp"
#include "labelcmp/aggregation.hpp"
#include "labelcmp/one_dim.hpp"
#include "labelcmp/algd.hpp"
#include "labelcmp/baselines.hpp"
#include "labelcmp/theory_verify.hpp"
#include "labelcmp/experiments.hpp"

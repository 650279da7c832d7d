#pragma once

#include "mrfbench/dataset.hpp"
#include "mrfbench/eval.hpp"
#include "mrfbench/exact.hpp"
#include "mrfbench/graph.hpp"
#include "mrfbench/harness.hpp"
#include "mrfbench/model.hpp"
#include "mrfbench/pairwise.hpp"
#include "mrfbench/plm.hpp"
#include "mrfbench/rng.hpp"
#include "mrfbench/sampler.hpp"
#include "mrfbench/scores.hpp"

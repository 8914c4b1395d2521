#pragma once

#include "ball_tree.hpp"
#include "baselines.hpp"
#include "binary_io.hpp"
#include "common.hpp"
#include "distributions.hpp"
#include "gcn.hpp"
#include "graph.hpp"
#include "io.hpp"
#include "learner.hpp"
#include "parallel.hpp"
#include "pipeline.hpp"
#include "rewire.hpp"
#include "synth.hpp"

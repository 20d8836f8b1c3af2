#pragma once

#include "graph_calculus/calculus.hpp"
#include "graph_calculus/convergence.hpp"
#include "graph_calculus/csv.hpp"
#include "graph_calculus/error.hpp"
#include "graph_calculus/experiment_io.hpp"
#include "graph_calculus/invariants.hpp"
#include "graph_calculus/manifolds.hpp"
#include "graph_calculus/plot_data.hpp"
#include "graph_calculus/point_cloud.hpp"
#include "graph_calculus/rng.hpp"
#include "graph_calculus/weights.hpp"

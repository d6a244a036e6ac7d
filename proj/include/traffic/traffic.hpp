#pragma once

#include "errors.hpp"
#include "numeric.hpp"
#include "set_partition.hpp"
#include "linear_graph.hpp"
#include "graph_invariants.hpp"
#include "star_word.hpp"
#include "operand.hpp"
#include "contraction.hpp"
#include "tensor_traces.hpp"
#include "rng.hpp"
#include "parallel.hpp"
#include "statistics.hpp"
#include "sampling.hpp"
#include "state.hpp"
#include "haar_limits.hpp"
#include "random_matrices.hpp"
#include "repr_theory.hpp"
#include "graph_io.hpp"
